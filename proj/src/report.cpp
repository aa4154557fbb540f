#include "paudit/report.hpp"

#include <algorithm>
#include <set>

#include <fmt/format.h>

#include "paudit/errors.hpp"
#include "paudit/records.hpp"

namespace paudit {

namespace fs = std::filesystem;

std::string_view to_string(ReportFormat f) {
    switch (f) {
        case ReportFormat::Records: return "records";
        case ReportFormat::Table: return "table";
        case ReportFormat::PlotData: return "plot";
    }
    return "records";
}

ReportFormat parse_report_format(std::string_view s) {
    if (s == "records" || s == "json") return ReportFormat::Records;
    if (s == "table") return ReportFormat::Table;
    if (s == "plot" || s == "plotdata") return ReportFormat::PlotData;
    throw ConfigError(fmt::format("unknown report format '{}' (records|table|plot)", s));
}

std::string format_rate(double v) { return fmt::format("{:.2f}", v); }

// ---- records -----------------------------------------------------------------

namespace {

Json metric_json(const MaybeMetric& m) {
    Json j = {{"value", m.value ? Json(*m.value) : Json(nullptr)}};
    if (!m.defined()) j["undefined"] = m.reason;
    if (m.out_of_range) j["out_of_range"] = true;
    return j;
}

Json interval_json(const std::optional<Interval>& i) {
    if (!i) return nullptr;
    return {{"low", i->low}, {"high", i->high}};
}

Json bin_json(const ComplexityBin& b) {
    return {{"low", b.low},
            {"high", b.high},
            {"n", b.n},
            {"qa_acc", b.qa_acc ? Json(*b.qa_acc) : Json(nullptr)},
            {"mean_recall", b.mean_recall ? Json(*b.mean_recall) : Json(nullptr)}};
}

}  // namespace

Json to_json(const MetricReport& m) {
    Json per_modality = Json::object();
    for (const auto& [mod, s] : m.per_modality)
        per_modality[std::string(to_string(mod))] = {
            {"n", s.n}, {"acc", metric_json(s.acc)}, {"ucr", metric_json(s.ucr)}, {"ppr", metric_json(s.ppr)}};

    Json per_category = Json::object();
    for (const auto& [cat, s] : m.per_category)
        per_category[std::string(to_string(cat))] = {{"n", s.n},
                                                     {"acc", metric_json(s.acc)},
                                                     {"failures", s.failures},
                                                     {"ucr", metric_json(s.ucr)},
                                                     {"ucr_ci95", interval_json(s.ucr_ci95)}};

    Json curve = Json::array();
    for (const auto& [d, b] : m.distractor_curve) curve.push_back({{"distractors", d}, {"n", b.n}, {"acc", b.acc}});

    return {{"retriever_id", m.retriever_id},
            {"model_id", m.model_id},
            {"n_scored", m.n_scored},
            {"n_unscorable", m.n_unscorable},
            {"n_missing", m.n_missing},
            {"acc", metric_json(m.acc)},
            {"mean_recall", metric_json(m.mean_recall)},
            {"ucr", metric_json(m.ucr)},
            {"ppr", metric_json(m.ppr)},
            {"rpa", metric_json(m.rpa)},
            {"per_modality", per_modality},
            {"per_category", per_category},
            {"confusion",
             {{"r1q1", m.confusion.r1q1}, {"r1q0", m.confusion.r1q0}, {"r0q1", m.confusion.r0q1}, {"r0q0", m.confusion.r0q0}}},
            {"distractor_curve", curve}};
}

Json report_to_json(const RunReport& report) {
    Json cells = Json::array();
    for (const auto& c : report.cells) {
        Json j = {{"retriever_id", c.retriever_id}, {"model_id", c.model_id}};
        if (c.ok()) {
            j["status"] = "ok";
            j["metrics"] = to_json(*c.metrics);
            Json cx = Json::object();
            for (const auto& [measure, bins] : c.complexity) {
                Json arr = Json::array();
                for (const auto& b : bins) arr.push_back(bin_json(b));
                cx[std::string(to_string(measure))] = arr;
            }
            j["complexity"] = cx;
        } else {
            j["status"] = "error";
            j["error"] = {{"kind", c.error_kind}, {"message", c.error}};
        }
        cells.push_back(std::move(j));
    }
    const auto& d = report.dataset;
    return {{"tool", std::string(kToolName)},
            {"version", report.tool_version},
            {"config_digest", report.config_digest},
            {"dataset",
             {{"split", d.split},
              {"questions", d.questions},
              {"sources", d.sources},
              {"text_only", d.modality.text_only},
              {"one_image", d.modality.one_image},
              {"two_image", d.modality.two_image},
              {"other_image", d.modality.other_image},
              {"violations", d.violations}}},
            {"failed_cells", report.failed_cells()},
            {"cells", cells}};
}

// ---- table -------------------------------------------------------------------

namespace {

constexpr std::string_view kDash = "\xE2\x80\x94";  // em dash

std::size_t display_width(std::string_view s) {
    std::size_t n = 0;
    for (unsigned char c : s)
        if ((c & 0xC0) != 0x80) ++n;
    return n;
}

std::string render_grid(const std::vector<std::vector<std::string>>& rows) {
    std::vector<std::size_t> width;
    for (const auto& r : rows) {
        if (width.size() < r.size()) width.resize(r.size(), 0);
        for (std::size_t i = 0; i < r.size(); ++i) width[i] = std::max(width[i], display_width(r[i]));
    }
    std::string out;
    for (const auto& r : rows) {
        std::string line;
        for (std::size_t i = 0; i < r.size(); ++i) {
            line += r[i];
            if (i + 1 < r.size()) line.append(width[i] - display_width(r[i]) + 2, ' ');
        }
        out += line;
        out += '\n';
    }
    return out;
}

struct Notes {
    std::set<std::string> reasons;
    bool out_of_range = false;
    std::vector<std::string> errors;

    static std::string code(const std::string& reason) {
        if (reason == "no_failures") return "a";
        if (reason == "no_bounds") return "b";
        if (reason == "zero_oracle") return "c";
        if (reason == "degenerate_bounds") return "d";
        return "e";
    }

    std::string cell(const MaybeMetric& m) {
        if (!m.defined()) {
            reasons.insert(m.reason);
            return fmt::format("{}[{}]", kDash, code(m.reason));
        }
        if (m.out_of_range) {
            out_of_range = true;
            return format_rate(*m.value) + "*";
        }
        return format_rate(*m.value);
    }

    std::string error(const CellReport& c) {
        for (std::size_t i = 0; i < errors.size(); ++i)
            if (errors[i] == c.error) return fmt::format("ERR[{}]", i + 1);
        errors.push_back(c.error);
        return fmt::format("ERR[{}]", errors.size());
    }

    std::string render() const {
        static const std::vector<std::pair<std::string, std::string>> text = {
            {"no_failures", "undefined: no retrieval failures in this cell"},
            {"no_bounds", "undefined: oracle or random-negative run missing for this model"},
            {"zero_oracle", "undefined: oracle accuracy is zero"},
            {"degenerate_bounds", "undefined: oracle and random-negative accuracies are equal"},
            {"empty", "undefined: no scored questions"}};
        std::string out;
        for (const auto& [reason, line] : text)
            if (reasons.count(reason)) out += fmt::format("[{}] {}\n", code(reason), line);
        if (out_of_range) out += "*   RPA outside [0, 1] (not clamped)\n";
        for (std::size_t i = 0; i < errors.size(); ++i) out += fmt::format("ERR[{}] {}\n", i + 1, errors[i]);
        return out;
    }
};

}  // namespace

std::string render_table(const RunReport& report) {
    Notes notes;
    const auto& d = report.dataset;
    std::string out = fmt::format("{} {}  config {}\n", kToolName, report.tool_version, report.config_digest);
    out += fmt::format("dataset{}: {} questions ({} image-based, {} text-only), {} sources\n\n",
                       d.split.empty() ? "" : " " + d.split, d.questions,
                       d.modality.one_image + d.modality.two_image + d.modality.other_image,
                       d.modality.text_only, d.sources);

    std::vector<std::vector<std::string>> rows = {
        {"Retriever", "Model", "N", "Unscorable", "Acc", "Recall", "UCR", "PPR", "RPA"}};
    for (const auto& c : report.cells) {
        if (!c.ok()) {
            const std::string e = notes.error(c);
            rows.push_back({c.retriever_id, c.model_id, e, e, e, e, e, e, e});
            continue;
        }
        const auto& m = *c.metrics;
        rows.push_back({c.retriever_id, c.model_id, std::to_string(m.n_scored), std::to_string(m.n_unscorable),
                        notes.cell(m.acc), notes.cell(m.mean_recall), notes.cell(m.ucr), notes.cell(m.ppr),
                        notes.cell(m.rpa)});
    }
    out += "Cell summary\n" + render_grid(rows);

    // Retriever-by-model grids.
    std::vector<std::string> retrievers, models;
    for (const auto& c : report.cells) {
        if (std::find(retrievers.begin(), retrievers.end(), c.retriever_id) == retrievers.end())
            retrievers.push_back(c.retriever_id);
        if (std::find(models.begin(), models.end(), c.model_id) == models.end()) models.push_back(c.model_id);
    }
    auto grid = [&](const char* title, auto pick) {
        std::vector<std::vector<std::string>> g;
        std::vector<std::string> header = {"Retriever"};
        header.insert(header.end(), models.begin(), models.end());
        g.push_back(header);
        for (const auto& r : retrievers) {
            std::vector<std::string> row = {r};
            for (const auto& m : models) {
                auto it = std::find_if(report.cells.begin(), report.cells.end(),
                                       [&](const CellReport& c) { return c.retriever_id == r && c.model_id == m; });
                if (it == report.cells.end())
                    row.push_back(std::string(kDash));
                else if (!it->ok())
                    row.push_back(notes.error(*it));
                else
                    row.push_back(notes.cell(pick(*it->metrics)));
            }
            g.push_back(row);
        }
        out += fmt::format("\n{} (rows: retriever, columns: model)\n", title) + render_grid(g);
    };
    grid("Accuracy", [](const MetricReport& m) { return m.acc; });
    grid("UCR", [](const MetricReport& m) { return m.ucr; });

    const std::string n = notes.render();
    if (!n.empty()) out += "\nNotes\n" + n;
    return out;
}

// ---- plot data ---------------------------------------------------------------

namespace {

std::string num(double v) { return fmt::format("{}", v); }
std::string num(const std::optional<double>& v) { return v ? num(*v) : "NA"; }
std::string num(const MaybeMetric& m) { return num(m.value); }

}  // namespace

std::string render_plot_data(const RunReport& report) {
    std::string out = "retriever\tmodel\tseries\tmeasure\tlevel\tbin_low\tbin_high\tn\tqa_acc\tmean_recall\tucr\tppr\n";
    auto row = [&](const CellReport& c, std::string_view series, std::string_view measure, std::string_view level,
                   const std::string& low, const std::string& high, std::size_t n, const std::string& acc,
                   const std::string& recall, const std::string& ucr, const std::string& ppr) {
        out += fmt::format("{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n", c.retriever_id, c.model_id, series,
                           measure, level, low, high, n, acc, recall, ucr, ppr);
    };
    for (const auto& c : report.cells) {
        if (!c.ok()) continue;
        for (const auto& [measure, bins] : c.complexity)
            for (const auto& b : bins)
                row(c, "complexity", to_string(measure), "NA", num(b.low), num(b.high), b.n, num(b.qa_acc),
                    num(b.mean_recall), "NA", "NA");
        for (const auto& [d, b] : c.metrics->distractor_curve)
            row(c, "distractors", "NA", std::to_string(d), "NA", "NA", b.n, num(b.acc), "NA", "NA", "NA");
        for (const auto& [mod, s] : c.metrics->per_modality)
            row(c, "modality", "NA", to_string(mod), "NA", "NA", s.n, num(s.acc), "NA", num(s.ucr), num(s.ppr));
    }
    return out;
}

std::vector<fs::path> emit_report(const RunReport& report, ReportFormat format, const fs::path& out_dir) {
    fs::path path;
    std::string body;
    switch (format) {
        case ReportFormat::Records:
            path = out_dir / "report.json";
            body = report_to_json(report).dump(2) + "\n";
            break;
        case ReportFormat::Table:
            path = out_dir / "report_table.txt";
            body = render_table(report);
            break;
        case ReportFormat::PlotData:
            path = out_dir / "plot_data.tsv";
            body = render_plot_data(report);
            break;
    }
    write_text_file(path, body);
    return {path};
}

}  // namespace paudit
