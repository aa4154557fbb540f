#include "paudit/scoring.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <numeric>

#include <fmt/format.h>

#include "paudit/errors.hpp"
#include "paudit/records.hpp"

namespace paudit {

namespace {

constexpr std::array<std::string_view, 21> kSmallNumbers = {
    "zero",    "one",     "two",       "three",    "four",     "five",    "six",
    "seven",   "eight",   "nine",      "ten",      "eleven",   "twelve",  "thirteen",
    "fourteen", "fifteen", "sixteen",  "seventeen", "eighteen", "nineteen", "twenty"};

constexpr std::array<std::pair<std::string_view, int>, 8> kTens = {{{"thirty", 30},
                                                                    {"forty", 40},
                                                                    {"fifty", 50},
                                                                    {"sixty", 60},
                                                                    {"seventy", 70},
                                                                    {"eighty", 80},
                                                                    {"ninety", 90},
                                                                    {"hundred", 100}}};

const std::map<std::string, std::string, std::less<>>& number_words() {
    static const auto table = [] {
        std::map<std::string, std::string, std::less<>> t;
        for (std::size_t i = 0; i < kSmallNumbers.size(); ++i)
            t.emplace(std::string(kSmallNumbers[i]), std::to_string(i));
        for (const auto& [w, v] : kTens) t.emplace(std::string(w), std::to_string(v));
        return t;
    }();
    return table;
}

CategoryVocabulary make_number_vocabulary() {
    CategoryVocabulary v{Category::Number, {}, false};
    for (int i = 0; i <= 99; ++i) v.keywords.insert(std::to_string(i));
    for (const auto& [word, digits] : number_words()) v.keywords.insert(word);
    return v;
}

}  // namespace

bool CategoryVocabulary::admits(const std::string& token) const {
    if (open) return true;
    if (keywords.count(token)) return true;
    if (category != Category::Number) return false;
    // Canonical digit forms of the number words ("hundred" -> "100").
    for (const auto& [word, digits] : number_words())
        if (digits == token) return true;
    return false;
}

const CategoryVocabulary& category_vocabulary(Category c) {
    static const CategoryVocabulary yesno{Category::YesNo, {"yes", "no"}, false};
    static const CategoryVocabulary color{
        Category::Color,
        {"orangebrown", "spot",   "yellow", "blue",        "rainbow",  "ivory",     "brown",
         "gray",        "teal",   "bluewhite", "orangepurple", "black", "white",   "gold",
         "redorange",   "pink",   "blonde", "tan",         "turquoise", "grey",     "beige",
         "golden",      "orange", "bronze", "maroon",      "purple",   "bluere",    "red",
         "rust",        "violet", "transparent", "yes",    "silver",   "chrome",    "green",
         "aqua"},
        false};
    static const CategoryVocabulary shape{
        Category::Shape,
        {"globular",  "octogon",    "ring",        "hoop",       "octagon",   "concave",
         "flat",      "wavy",       "shamrock",    "cross",      "cylinder",  "cylindrical",
         "pentagon",  "point",      "pyramidal",   "crescent",   "rectangular", "hook",
         "tube",      "cone",       "bell",        "spiral",     "ball",      "convex",
         "square",    "arch",       "h",           "cuboid",     "step",      "rectangle",
         "dot",       "oval",       "circle",      "star",       "crosse",    "crest",
         "octagonal", "cube",       "triangle",    "semicircle", "domeshape", "obelisk",
         "corkscrew", "curve",      "circular",    "xs",         "slope",     "pyramid",
         "round",     "bow",        "straight",    "triangular", "heart",     "fork",
         "teardrop",  "fold",       "curl",        "spherical",  "diamond",   "keyhole",
         "conical",   "dome",       "sphere",      "bellshaped", "rounded",   "hexagon",
         "flower",    "globe",      "torus"},
        false};
    static const CategoryVocabulary number = make_number_vocabulary();
    static const CategoryVocabulary other{Category::Other, {}, true};

    switch (c) {
        case Category::YesNo: return yesno;
        case Category::Color: return color;
        case Category::Shape: return shape;
        case Category::Number: return number;
        case Category::Other: return other;
    }
    return other;
}

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : text) {
        const auto u = static_cast<unsigned char>(ch);
        const bool word = u >= 0x80 || (u >= '0' && u <= '9') || (u >= 'a' && u <= 'z') ||
                          (u >= 'A' && u <= 'Z');
        if (word) {
            cur.push_back((u >= 'A' && u <= 'Z') ? static_cast<char>(u - 'A' + 'a') : ch);
        } else if (!cur.empty()) {
            out.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

std::string canonical_number(const std::string& token) {
    const auto& words = number_words();
    if (auto it = words.find(token); it != words.end()) return it->second;
    return token;
}

std::set<std::string> restricted_bow(std::string_view text, Category c) {
    const CategoryVocabulary& vocab = category_vocabulary(c);
    std::set<std::string> bow;
    for (auto& tok : tokenize(text)) {
        std::string canon = canonical_number(tok);
        if (vocab.admits(canon)) bow.insert(std::move(canon));
    }
    return bow;
}

std::string_view to_string(QaVerdict v) {
    switch (v) {
        case QaVerdict::Correct: return "correct";
        case QaVerdict::Incorrect: return "incorrect";
        case QaVerdict::Unscorable: return "unscorable";
    }
    return "unscorable";
}

QaVerdict qa_verdict(std::string_view expected, std::string_view generated, Category c,
                     const ScoringOptions& opts) {
    const auto bow_e = restricted_bow(expected, c);
    if (bow_e.empty()) return QaVerdict::Unscorable;
    const auto bow_g = restricted_bow(generated, c);

    const bool contains_all = std::includes(bow_g.begin(), bow_g.end(), bow_e.begin(), bow_e.end());
    if (!contains_all) return QaVerdict::Incorrect;
    if (opts.strict && !category_vocabulary(c).open && bow_g != bow_e) return QaVerdict::Incorrect;
    return QaVerdict::Correct;
}

QaVerdict qa_verdict(const std::vector<std::string>& expected, std::string_view generated,
                     Category c, const ScoringOptions& opts) {
    QaVerdict result = QaVerdict::Unscorable;
    for (const auto& e : expected) {
        switch (qa_verdict(e, generated, c, opts)) {
            case QaVerdict::Correct: return QaVerdict::Correct;
            case QaVerdict::Incorrect: result = QaVerdict::Incorrect; break;
            case QaVerdict::Unscorable: break;
        }
    }
    return result;
}

bool qa_correct(std::string_view expected, std::string_view generated, Category c,
                const ScoringOptions& opts) {
    return qa_verdict(expected, generated, c, opts) == QaVerdict::Correct;
}

double accuracy(std::span<const bool> outcomes) {
    if (outcomes.empty()) throw EmptySetError("accuracy of an empty outcome set is undefined");
    const auto hits = std::count(outcomes.begin(), outcomes.end(), true);
    return static_cast<double>(hits) / static_cast<double>(outcomes.size());
}

double accuracy(const std::vector<bool>& outcomes) {
    if (outcomes.empty()) throw EmptySetError("accuracy of an empty outcome set is undefined");
    const auto hits = std::count(outcomes.begin(), outcomes.end(), true);
    return static_cast<double>(hits) / static_cast<double>(outcomes.size());
}

double retrieval_recall(const std::vector<std::string>& retrieved,
                        const std::vector<std::string>& gold) {
    if (retrieved.empty()) throw EmptyRetrievalError("recall of an empty retrieval is undefined");
    const std::set<std::string_view> g(gold.begin(), gold.end());
    const auto tp = std::count_if(retrieved.begin(), retrieved.end(),
                                  [&](const std::string& id) { return g.count(id) != 0; });
    return static_cast<double>(tp) / static_cast<double>(retrieved.size());
}

std::size_t distractor_count(const std::vector<std::string>& retrieved,
                             const std::vector<std::string>& gold) {
    const std::set<std::string_view> g(gold.begin(), gold.end());
    return static_cast<std::size_t>(std::count_if(
        retrieved.begin(), retrieved.end(), [&](const std::string& id) { return g.count(id) == 0; }));
}

Json to_record(const QAPrediction& p) {
    return {{"question_id", p.question_id},
            {"model_id", p.model_id},
            {"generated_answer", p.generated_answer}};
}

std::vector<QAPrediction> load_predictions(const std::filesystem::path& path) {
    std::vector<QAPrediction> out;
    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& rec : read_records(path)) {
        const std::string ctx = record_context(path, rec.line);
        QAPrediction p{required_string(rec.value, "question_id", ctx),
                       required_string(rec.value, "model_id", ctx),
                       required_string(rec.value, "generated_answer", ctx)};
        if (!seen.emplace(p.question_id, p.model_id).second)
            throw DuplicateError(fmt::format("{}: second prediction for ({}, {})", ctx,
                                             p.question_id, p.model_id));
        out.push_back(std::move(p));
    }
    return out;
}

void save_predictions(const std::filesystem::path& path, const std::vector<QAPrediction>& preds) {
    std::vector<Json> recs;
    recs.reserve(preds.size());
    for (const auto& p : preds) recs.push_back(to_record(p));
    write_records(path, recs);
}

}  // namespace paudit
