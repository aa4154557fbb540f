// Acceptance suite: one pass/fail line per criterion.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <regex>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "paudit/complexity.hpp"
#include "paudit/harness.hpp"
#include "paudit/llm_bridge.hpp"
#include "paudit/metrics.hpp"
#include "paudit/report.hpp"
#include "paudit/retrieval.hpp"
#include "paudit/scoring.hpp"
#include "synth.hpp"

using namespace paudit;
namespace fs = std::filesystem;

namespace {

struct Failure {
    std::string what;
};

void expect(bool ok, const std::string& what) {
    if (!ok) throw Failure{what};
}

JoinedOutcome outcome(std::string qid, double recall, bool correct) {
    return {std::move(qid), "r", "m", recall, correct, 0, QuestionModality::TextBased, Category::YesNo};
}

// ---- 1 -------------------------------------------------------------------------

std::string ucr_arithmetic() {
    std::vector<JoinedOutcome> v;
    for (int i = 0; i < 104; ++i) v.push_back(outcome(fmt::format("a{:03}", i), 0.0, true));
    for (int i = 0; i < 297; ++i) v.push_back(outcome(fmt::format("b{:03}", i), 0.0, false));
    for (int i = 0; i < 60; ++i) v.push_back(outcome(fmt::format("c{:03}", i), i % 2 ? 1.0 : 0.5, i % 3 == 0));
    const double u = ucr(v);
    expect(std::abs(u - 104.0 / 401.0) <= 1e-9, fmt::format("ucr = {}", u));
    expect(format_rate(u) == "0.26", "rounded " + format_rate(u));

    // Same counts through the join: random negatives and scored answers.
    std::vector<QuestionRecord> qs;
    std::vector<SourceRecord> ss;
    std::vector<QAPrediction> preds;
    for (int i = 0; i < 401; ++i) {
        const std::string id = fmt::format("q{:03}", i);
        qs.push_back({id, "Is it?", Category::YesNo, {"yes"}, {id + "_g"}, {id + "_d1", id + "_d2"}, {}});
        for (const char* s : {"_g", "_d1", "_d2"}) ss.push_back({id + s, SourceModality::Text, "fact", std::nullopt});
        preds.push_back({id, "m", i < 104 ? "Yes." : "No."});
    }
    const Dataset ds(qs, ss);
    RankingSet rs;
    for (const auto& q : ds.questions()) rs[q.question_id] = retrieve_random_negative(q, 1, 2);
    const JoinResult jr = join_outcomes(rs, preds, ds);
    const ConfusionCounts c = confusion_counts(jr.outcomes);
    expect(c.r0q1 == 104 && c.r0q0 == 297, "join counts");
    expect(std::abs(ucr(jr.outcomes) - 104.0 / 401.0) <= 1e-9, "joined ucr");
    return fmt::format("UCR = {:.10f} = 104/401, printed {}", u, format_rate(u));
}

// ---- 2 -------------------------------------------------------------------------

std::string bound_retrievers() {
    std::mt19937_64 rng(2024);
    std::size_t questions = 0;
    for (int d = 0; d < 250; ++d) {
        synth::DatasetShape shape;
        shape.questions = 1 + rng() % 50;
        shape.max_gold = 1 + rng() % 3;
        shape.max_distractors = 1 + rng() % 8;
        const Dataset ds = synth::random_dataset(rng, shape);
        const std::uint64_t seed = rng();
        const std::size_t k = 1 + rng() % 4;
        for (const auto& q : ds.questions()) {
            const double ro = retrieval_recall(retrieve_oracle(q).retrieved, q.gold_source_ids);
            const double rr = retrieval_recall(retrieve_random_negative(q, seed, k).retrieved, q.gold_source_ids);
            expect(ro == 1.0, fmt::format("oracle recall {} on {}", ro, q.question_id));
            expect(rr == 0.0, fmt::format("random recall {} on {}", rr, q.question_id));
            ++questions;
        }
    }
    return fmt::format("250 datasets, {} questions: oracle recall 1.0, random recall 0.00", questions);
}

// ---- 3 -------------------------------------------------------------------------

std::string metric_identities() {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
        double lo = u(rng), hi = u(rng);
        if (lo == hi) continue;
        expect(rpa(hi, lo, hi).value == 1.0, "rpa at oracle");
        expect(rpa(lo, lo, hi).value == 0.0, "rpa at random");
        const double x = u(rng) + 1e-9;
        expect(ppr(x, x) == 1.0, "ppr(x, x)");
    }

    double worst = 0.0;
    for (int f = 0; f < 1000; ++f) {
        std::vector<JoinedOutcome> v;
        const std::size_t n = 1 + rng() % 300;
        const double p_fail = u(rng), p_hit = u(rng), p_miss = u(rng);
        for (std::size_t i = 0; i < n; ++i) {
            const bool failed = u(rng) < p_fail;
            const double recall = failed ? 0.0 : (rng() % 2 ? 1.0 : 0.5);
            v.push_back(outcome(fmt::format("q{:04}", i), recall, u(rng) < (failed ? p_miss : p_hit)));
        }
        const ConfusionCounts c = confusion_counts(v);
        expect(c.total() == n, "confusion total");
        const double nn = static_cast<double>(n);
        const double n1 = static_cast<double>(c.r1q1 + c.r1q0), n0 = static_cast<double>(c.r0q1 + c.r0q0);
        // acc = P(R1) P(Q1|R1) + P(R0) P(Q1|R0)
        double acc = 0.0;
        if (n1 > 0) acc += n1 / nn * (static_cast<double>(c.r1q1) / n1);
        if (n0 > 0) acc += n0 / nn * (static_cast<double>(c.r0q1) / n0);
        worst = std::max(worst, std::abs(acc - outcome_accuracy(v)));
        if (n0 > 0) expect(std::abs(static_cast<double>(c.r0q1) / n0 - ucr(v)) <= 1e-12, "ucr from counts");
    }
    expect(worst <= 1e-12, fmt::format("total probability residual {}", worst));
    return fmt::format("rpa bounds exact, ppr(x,x)=1, total-probability residual {:.1e} over 1000 fixtures", worst);
}

// ---- 4 -------------------------------------------------------------------------

// Exact comparison of cosines of integer vectors: no floating point.
struct ExactCos {
    long long dot, norm2;
};

int compare(const ExactCos& a, const ExactCos& b) {
    const int sa = (a.dot > 0) - (a.dot < 0), sb = (b.dot > 0) - (b.dot < 0);
    if (sa != sb) return sa < sb ? -1 : 1;
    // |cos|^2 compare: dot_a^2 * n_b vs dot_b^2 * n_a
    const __int128 l = static_cast<__int128>(a.dot) * a.dot * b.norm2;
    const __int128 r = static_cast<__int128>(b.dot) * b.dot * a.norm2;
    if (l == r) return 0;
    const int mag = l < r ? -1 : 1;
    return sa >= 0 ? mag : -mag;
}

std::string dense_equivalence() {
    std::mt19937_64 rng(4);
    std::size_t ties = 0;
    for (int t = 0; t < 500; ++t) {
        const int dim = 1 + static_cast<int>(rng() % 8);
        const std::size_t n = 1 + rng() % 32;
        auto vec = [&] {
            std::vector<int> x(dim);
            do {
                for (auto& c : x) c = static_cast<int>(rng() % 5) - 2;
            } while (std::all_of(x.begin(), x.end(), [](int c) { return c == 0; }));
            return x;
        };
        EmbeddingStore store(dim);
        auto insert = [&](const std::string& id, const std::vector<int>& x) {
            Eigen::VectorXd v(dim);
            for (int i = 0; i < dim; ++i) v(i) = x[i];
            store.insert(id, v);
        };
        const auto qv = vec();
        insert("query", qv);
        QuestionRecord q{"query", "?", Category::Other, {"x"}, {}, {}, {}};
        std::vector<std::pair<std::string, ExactCos>> cands;
        std::set<std::string> used;
        for (std::size_t i = 0; i < n; ++i) {
            std::string id;
            do id = fmt::format("s{}", rng() % 1000); while (!used.insert(id).second);
            const auto x = vec();
            insert(id, x);
            long long dot = 0, n2 = 0;
            for (int k = 0; k < dim; ++k) {
                dot += static_cast<long long>(qv[k]) * x[k];
                n2 += static_cast<long long>(x[k]) * x[k];
            }
            cands.push_back({id, {dot, n2}});
            (i % 3 == 0 ? q.gold_source_ids : q.distractor_source_ids).push_back(id);
        }
        if (q.gold_source_ids.empty()) continue;

        std::sort(cands.begin(), cands.end(), [](const auto& a, const auto& b) {
            const int c = compare(a.second, b.second);
            return c != 0 ? c > 0 : a.first < b.first;
        });
        for (std::size_t i = 1; i < cands.size(); ++i) ties += compare(cands[i - 1].second, cands[i].second) == 0;

        const std::size_t k = 1 + rng() % (n + 2);
        std::vector<std::string> expected;
        for (std::size_t i = 0; i < std::min(k, n); ++i) expected.push_back(cands[i].first);

        const auto got = retrieve_dense(store, q, k).retrieved;
        expect(got == expected, fmt::format("store {}: dense ranking differs from exhaustive argsort", t));
        for (double f : {0.001, 0.5, 3.0, 1024.0, 7.3e5})
            expect(retrieve_dense(store.scaled(f), q, k).retrieved == expected,
                   fmt::format("store {}: ranking changes under scaling by {}", t, f));
    }
    return fmt::format("500 stores match exact argsort ({} tied neighbours), scale-invariant", ties);
}

// ---- 5 -------------------------------------------------------------------------

struct VerdictCase {
    const char* expected;
    const char* generated;
    Category category;
    bool correct;
};

const VerdictCase kVerdicts[] = {
    {"yes", "Yes, the tower is taller.", Category::YesNo, true},
    {"Yes", "YES!!!", Category::YesNo, true},
    {"no", "No, there are none.", Category::YesNo, true},
    {"no", "Yes.", Category::YesNo, false},
    {"yes", "I think so", Category::YesNo, false},
    {"No.", "no...", Category::YesNo, true},
    {"blue", "It is teal.", Category::Color, false},
    {"red", "The roof is RED.", Category::Color, true},
    {"The roof is red and white", "white and red", Category::Color, true},
    {"red and white", "it is red", Category::Color, false},
    {"Grey", "grey-ish (grey)", Category::Color, true},
    {"gray", "grey", Category::Color, false},
    {"bluewhite", "Blue white", Category::Color, false},
    {"round", "It is round.", Category::Shape, true},
    {"octogon", "An octagon", Category::Shape, false},
    {"The dome is spherical", "a spherical dome", Category::Shape, true},
    {"spherical", "spherical, like a ball", Category::Shape, true},
    {"triangle", "TRIANGULAR", Category::Shape, false},
    {"torus", "a torus-shaped ring", Category::Shape, true},
    {"two", "There are 2 statues", Category::Number, true},
    {"2", "two of them", Category::Number, true},
    {"Twelve", "12.", Category::Number, true},
    {"three", "3 or 4", Category::Number, true},
    {"seven", "eight", Category::Number, false},
    {"hundred", "100 steps", Category::Number, true},
    {"40", "Forty.", Category::Number, true},
    {"twenty", "21", Category::Number, false},
    {"The Seine", "the seine river", Category::Other, true},
    {"Eiffel Tower", "The Eiffel-Tower!", Category::Other, true},
    {"Paris", "London", Category::Other, false},
    
};

std::set<std::string> keyword_set(const std::string& text, const std::string& name) {
    const std::regex block(name + R"(\s*=\s*\{([^}]*)\})");
    std::smatch m;
    if (!std::regex_search(text, m, block)) throw Failure{"no listing for " + name};
    std::set<std::string> out;
    const std::string body = m[1].str();
    const std::regex token(R"('([^']*)')");
    for (auto it = std::sregex_iterator(body.begin(), body.end(), token); it != std::sregex_iterator(); ++it)
        out.insert((*it)[1].str());
    return out;
}

std::string scoring_fidelity() {
    std::size_t n = 0;
    for (const auto& c : kVerdicts) {
        expect(qa_correct(c.expected, c.generated, c.category) == c.correct,
               fmt::format("verdict for '{}' vs '{}'", c.expected, c.generated));
        ++n;
    }
    std::set<Category> covered;
    for (const auto& c : kVerdicts) covered.insert(c.category);
    expect(covered.size() == 5, "category coverage");

    const std::string listing = read_text_file(PAUDIT_VOCAB_LISTING);
    const auto yesno = keyword_set(listing, "yesno_set");
    const auto color = keyword_set(listing, "color_set");
    const auto shape = keyword_set(listing, "shape_set");
    expect(yesno.size() == 2, "yesno listing size");
    expect(category_vocabulary(Category::YesNo).keywords == yesno, "yesno set");
    expect(category_vocabulary(Category::Color).keywords == color, "color set");
    expect(category_vocabulary(Category::Shape).keywords == shape, "shape set");
    return fmt::format("{} verdicts; vocabularies equal the printed listings (yesno {}, color {}, shape {})", n,
                       yesno.size(), color.size(), shape.size());
}

// ---- 6 -------------------------------------------------------------------------

std::string complexity_formulas() {
    const double f = fkgl("The cat sat on the mat.");
    const double g = gfi("The cat sat on the mat.");
    expect(std::abs(f - (0.39 * 6 + 11.8 * 1 - 15.59)) <= 1e-9 && std::abs(f + 1.45) <= 1e-9, fmt::format("fkgl {}", f));
    expect(std::abs(g - 2.4) <= 1e-9, fmt::format("gfi {}", g));

    static const char* words[] = {"the", "cat", "beautiful", "river", "cathedral", "sat", "on",
                                  "a",   "university", "old", "tower", "window", "sentence", "is"};
    static const char* ends[] = {".", "!", "?"};
    std::mt19937_64 rng(6);
    for (int t = 0; t < 500; ++t) {
        std::string text;
        const std::size_t sentences = 1 + rng() % 4;
        for (std::size_t s = 0; s < sentences; ++s) {
            const std::size_t nw = 1 + rng() % 12;
            for (std::size_t w = 0; w < nw; ++w) {
                if (!text.empty()) text += ' ';
                text += words[rng() % std::size(words)];
            }
            text += ends[rng() % 3];
        }
        const std::string doubled = text + " " + text;
        expect(std::abs(fkgl(doubled) - fkgl(text)) <= 1e-9, "fkgl duplication: " + text);
        expect(std::abs(gfi(doubled) - gfi(text)) <= 1e-9, "gfi duplication: " + text);
    }
    return fmt::format("fkgl = {:.2f}, gfi = {:.1f}; duplication invariant on 500 fuzzed texts", f, g);
}

// ---- 7 -------------------------------------------------------------------------

std::string prompt_round_trip() {
    std::mt19937_64 rng(7);
    const std::string alpha = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789";
    auto word = [&](std::size_t len) {
        std::string w;
        for (std::size_t i = 0; i < len; ++i) w += alpha[rng() % alpha.size()];
        return w;
    };
    for (int t = 0; t < 1000; ++t) {
        std::string answer;
        const std::size_t nw = 1 + rng() % 3;
        for (std::size_t i = 0; i < nw; ++i) answer += (i ? " " : "") + word(1 + rng() % 8);
        std::vector<std::string> ids;
        std::set<std::string> seen;
        const std::size_t ni = rng() % 6;
        while (ids.size() < ni) {
            std::string id = (rng() % 2 ? "img_" : "fact_") + word(1 + rng() % 6);
            if (seen.insert(id).second) ids.push_back(id);
        }
        const auto parsed = parse_llm_response(format_llm_response(answer, ids));
        expect(parsed.answer_text == answer && parsed.cited_ids == ids, "round trip of " + format_llm_response(answer, ids));
        expect(parsed.parse_warnings.empty(), "warnings on " + format_llm_response(answer, ids));
    }

    QuestionRecord q{"q", "Which is taller?", Category::Other, {"tower"}, {"img_1", "t1"}, {"img_2", "t2"}, {}};
    const std::vector<SourceRecord> cands = {{"img_1", SourceModality::Image, "Tower", "u/1.jpg"},
                                             {"t1", SourceModality::Text, "The tower is 80 m.", std::nullopt},
                                             {"img_2", SourceModality::Image, "Church", "u/2.jpg"},
                                             {"t2", SourceModality::Text, "The church is 40 m.", std::nullopt}};
    const auto seq = build_retrieval_prompt(q, cands);
    std::vector<std::string> shape;
    for (const auto& m : seq.messages) shape.push_back(m.render().substr(0, m.render().find_first_of(":\n")));
    const std::vector<std::string> frame = {std::string(kRetrievalInstruction).substr(0, std::string(kRetrievalInstruction).find_first_of(":\n")),
                                            "Question", "Text Facts", "Image_ID", "[Input_type=image]", "Image_ID",
                                            "[Input_type=image]"};
    expect(shape == frame, "message order");
    expect(seq.messages[2].content == "Text Facts:\n[t1: The tower is 80 m., t2: The church is 40 m.]", "text facts message");
    expect(seq.messages[4].render() == "[Input_type=image]\nimage_url=u/1.jpg", "image reference");
    expect(seq.messages[5].content == "Image_ID: img_2,\nCaption: Church", "second caption");
    return "1000 fuzzed responses round-trip; 2-text/2-image prompt has the 7-message frame";
}

// ---- 8 -------------------------------------------------------------------------

std::string end_to_end() {
    const fs::path dir = synth::temp_dir("accept8");
    const fs::path cfg_path = synth::write_matrix_fixture(dir, 400, 2, 8);
    auto run = [&](const fs::path& out, RunMode mode) {
        RunConfig cfg = load_run_config(cfg_path);
        cfg.output_dir = out;
        const RunReport r = run_evaluation(cfg, mode);
        emit_report(r, ReportFormat::Records, out);
        emit_report(r, ReportFormat::Table, out);
        emit_report(r, ReportFormat::PlotData, out);
        return r;
    };
    auto bytes = [](const fs::path& out) {
        return read_text_file(out / "report.json") + read_text_file(out / "report_table.txt") +
               read_text_file(out / "plot_data.tsv");
    };

    const RunReport first = run(dir / "run1", RunMode::Compute);
    expect(first.cells.size() == 8 && first.failed_cells() == 0, "matrix shape");
    run(dir / "run2", RunMode::Compute);
    const std::string a = bytes(dir / "run1");
    expect(a == bytes(dir / "run2"), "two runs differ");

    for (const char* f : {"report.json", "report_table.txt", "plot_data.tsv"}) fs::remove(dir / "run1" / f);
    run(dir / "run1", RunMode::ArtifactsOnly);
    expect(a == bytes(dir / "run1"), "resume from artifacts differs");

    fs::remove(outcomes_artifact(dir / "run2", "dense", "model2"));
    fs::remove(rankings_artifact(dir / "run2", "dense"));
    run(dir / "run2", RunMode::Compute);
    expect(a == bytes(dir / "run2"), "partial resume differs");
    fs::remove_all(dir);
    return fmt::format("4x2 matrix over 400 questions: {} report bytes identical across runs and resumes", a.size());
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        double limit_s;
        std::function<std::string()> run;
    };
    const Criterion criteria[] = {
        {1, "UCR arithmetic", 1.0, ucr_arithmetic},
        {2, "bound retrievers", 10.0, bound_retrievers},
        {3, "metric identities", 10.0, metric_identities},
        {4, "dense retrieval equivalence", 30.0, dense_equivalence},
        {5, "scoring fidelity", 1.0, scoring_fidelity},
        {6, "complexity formulas", 1.0, complexity_formulas},
        {7, "prompt/parse round-trip", 5.0, prompt_round_trip},
        {8, "determinism and resumability", 30.0, end_to_end},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        std::string detail;
        bool ok = true;
        try {
            detail = c.run();
        } catch (const Failure& f) {
            ok = false;
            detail = f.what;
        } catch (const std::exception& e) {
            ok = false;
            detail = std::string("exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (ok && secs > c.limit_s) {
            ok = false;
            detail += fmt::format(" (over the {:.0f} s limit)", c.limit_s);
        }
        failed += !ok;
        fmt::print("{} criterion {}: {} [{:.3f} s] {}\n", ok ? "PASS" : "FAIL", c.id, c.name, secs, detail);
    }
    fmt::print("{} of {} criteria passed\n", std::size(criteria) - failed, std::size(criteria));
    return failed ? 1 : 0;
}
