#include "paudit/complexity.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "paudit/errors.hpp"

namespace paudit {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

bool is_word_char(char c) {
    const auto u = static_cast<unsigned char>(c);
    return u >= 0x80 || std::isalnum(u) != 0;
}

bool is_vowel(char c) {
    switch (c) {
        case 'a': case 'e': case 'i': case 'o': case 'u': case 'y': return true;
        default: return false;
    }
}

}  // namespace

std::size_t count_syllables(std::string_view word) {
    std::string w;
    for (char c : word) {
        const auto u = static_cast<unsigned char>(c);
        if (std::isalpha(u)) w.push_back(static_cast<char>(std::tolower(u)));
    }
    if (w.empty()) return 1;

    std::size_t groups = 0;
    bool in_group = false;
    for (char c : w) {
        const bool v = is_vowel(c);
        if (v && !in_group) ++groups;
        in_group = v;
    }
    const bool silent_e = w.size() >= 2 && w.back() == 'e' && !is_vowel(w[w.size() - 2]);
    if (silent_e && groups > 1) --groups;
    return std::max<std::size_t>(groups, 1);
}

std::vector<std::string> words_of(std::string_view text) {
    std::vector<std::string> out;
    std::string cur;
    auto flush = [&] {
        if (!cur.empty()) out.push_back(std::move(cur));
        cur.clear();
    };
    for (char c : text) {
        if (is_space(c))
            flush();
        else if (is_word_char(c))
            cur.push_back(c);
    }
    flush();
    return out;
}

std::size_t word_count(std::string_view text) { return words_of(text).size(); }

std::size_t sentence_count(std::string_view text) {
    std::size_t count = 0;
    bool content = false;
    bool nonblank = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (!is_space(c)) nonblank = true;
        if (is_word_char(c)) content = true;
        const bool terminator = c == '.' || c == '!' || c == '?';
        const bool boundary = i + 1 == text.size() || is_space(text[i + 1]);
        if (terminator && boundary && content) {
            ++count;
            content = false;
        }
    }
    if (content) ++count;
    if (count == 0 && nonblank) count = 1;
    return count;
}

ComplexityProfile complexity_profile(std::string_view question_id, std::string_view text) {
    ComplexityProfile p;
    p.question_id = std::string(question_id);
    const auto words = words_of(text);
    p.word_count = words.size();
    p.sentence_count = sentence_count(text);
    for (const auto& w : words) {
        const std::size_t s = count_syllables(w);
        p.syllable_count += s;
        if (s >= 3) ++p.complex_word_count;
    }
    if (p.word_count > 0) {
        const double w = static_cast<double>(p.word_count);
        const double s = static_cast<double>(p.sentence_count);
        p.fkgl = 0.39 * (w / s) + 11.8 * (static_cast<double>(p.syllable_count) / w) - 15.59;
        p.gfi = 0.4 * w / s + 40.0 * static_cast<double>(p.complex_word_count) / w;
    }
    return p;
}

double fkgl(std::string_view text) {
    const auto p = complexity_profile("", text);
    if (p.word_count == 0) throw EmptyTextError("FKGL needs at least one word");
    return p.fkgl;
}

double gfi(std::string_view text) {
    const auto p = complexity_profile("", text);
    if (p.word_count == 0) throw EmptyTextError("GFI needs at least one word");
    return p.gfi;
}

ProfileMap profile_questions(const Dataset& ds) {
    ProfileMap out;
    for (const auto& q : ds.questions())
        out.emplace(q.question_id, complexity_profile(q.question_id, q.question_text));
    return out;
}

std::string_view to_string(ComplexityMeasure m) {
    switch (m) {
        case ComplexityMeasure::Words: return "words";
        case ComplexityMeasure::FKGL: return "fkgl";
        case ComplexityMeasure::GFI: return "gfi";
    }
    return "words";
}

ComplexityMeasure parse_complexity_measure(std::string_view s) {
    if (s == "words") return ComplexityMeasure::Words;
    if (s == "fkgl") return ComplexityMeasure::FKGL;
    if (s == "gfi") return ComplexityMeasure::GFI;
    throw ConfigError(fmt::format("unknown complexity measure '{}' (words|fkgl|gfi)", s));
}

double measure_value(const ComplexityProfile& p, ComplexityMeasure m) {
    switch (m) {
        case ComplexityMeasure::Words: return static_cast<double>(p.word_count);
        case ComplexityMeasure::FKGL: return p.fkgl;
        case ComplexityMeasure::GFI: return p.gfi;
    }
    return 0.0;
}

std::vector<ComplexityBin> bin_by_complexity(const std::vector<JoinedOutcome>& outcomes,
                                             const ProfileMap& profiles, ComplexityMeasure m,
                                             const std::vector<double>& edges) {
    if (edges.size() < 2) throw ConfigError("bin edges need at least two values");
    for (std::size_t i = 1; i < edges.size(); ++i)
        if (!(edges[i - 1] < edges[i]))
            throw ConfigError(fmt::format("bin edges must be strictly increasing (edge {} = {} "
                                          "after {})",
                                          i, edges[i], edges[i - 1]));

    const std::size_t nbins = edges.size() - 1;
    std::vector<std::size_t> n(nbins, 0), correct(nbins, 0);
    std::vector<std::vector<double>> recalls(nbins);

    for (const auto& o : outcomes) {
        auto it = profiles.find(o.question_id);
        if (it == profiles.end())
            throw CoverageError(fmt::format("no complexity profile for question {}", o.question_id));
        const double x = measure_value(it->second, m);
        // upper_bound gives the first edge > x; the bin index is one before it.
        const auto ub = std::upper_bound(edges.begin(), edges.end(), x);
        if (ub == edges.begin() || ub == edges.end())
            throw CoverageError(fmt::format("question {} has {} = {}, outside [{}, {})",
                                            o.question_id, to_string(m), x, edges.front(),
                                            edges.back()));
        const auto b = static_cast<std::size_t>(ub - edges.begin()) - 1;
        ++n[b];
        if (o.qa_correct) ++correct[b];
        recalls[b].push_back(o.recall);
    }

    std::vector<ComplexityBin> bins;
    for (std::size_t b = 0; b < nbins; ++b) {
        ComplexityBin bin{edges[b], edges[b + 1], n[b], std::nullopt, std::nullopt};
        if (n[b] > 0) {
            bin.qa_acc = static_cast<double>(correct[b]) / static_cast<double>(n[b]);
            std::sort(recalls[b].begin(), recalls[b].end());
            double sum = 0.0;
            for (double r : recalls[b]) sum += r;
            bin.mean_recall = sum / static_cast<double>(n[b]);
        }
        bins.push_back(bin);
    }
    return bins;
}

std::vector<double> quintile_edges(const ProfileMap& profiles, ComplexityMeasure m) {
    std::vector<double> values;
    values.reserve(profiles.size());
    for (const auto& [id, p] : profiles) values.push_back(measure_value(p, m));
    if (values.empty()) return {0.0, 1.0};
    std::sort(values.begin(), values.end());

    // Linear interpolation between order statistics.
    auto quantile = [&](double q) {
        const double pos = q * static_cast<double>(values.size() - 1);
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        const auto hi = std::min(lo + 1, values.size() - 1);
        return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
    };

    std::vector<double> edges;
    for (double q : {0.0, 0.2, 0.4, 0.6, 0.8}) {
        const double e = quantile(q);
        if (edges.empty() || e > edges.back()) edges.push_back(e);
    }
    edges.push_back(std::nextafter(values.back(), std::numeric_limits<double>::infinity()));
    return edges;
}

}  // namespace paudit
