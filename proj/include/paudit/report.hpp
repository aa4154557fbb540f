#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "paudit/harness.hpp"

namespace paudit {

enum class ReportFormat { Records, Table, PlotData };
std::string_view to_string(ReportFormat f);
ReportFormat parse_report_format(std::string_view s);

/// Full machine-readable report. Keys are sorted and wall-clock data is
/// left out, so identical runs serialize to identical bytes.
Json report_to_json(const RunReport& report);
Json to_json(const MetricReport& m);

/// Aligned text: a per-cell summary (N, Acc, Recall, UCR, PPR, RPA), then an
/// accuracy and a UCR grid with retrievers as rows and models as columns.
/// Undefined values print as a dash with a footnote code.
std::string render_table(const RunReport& report);

/// Tab-separated series behind the plots: complexity bins for every
/// measure, the distractor-count curve, and the modality slices.
std::string render_plot_data(const RunReport& report);

/// Writes report.json, report_table.txt or plot_data.tsv under `out_dir`.
/// Throws IOError.
std::vector<std::filesystem::path> emit_report(const RunReport& report, ReportFormat format,
                                               const std::filesystem::path& out_dir);

/// Two-decimal rendering used in the tables ("0.26").
std::string format_rate(double v);

}  // namespace paudit
