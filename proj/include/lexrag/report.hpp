#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "lexrag/metrics.hpp"

namespace lexrag {

enum class ReportFormat { Json, Csv, Markdown };

std::optional<ReportFormat> parse_report_format(std::string_view text);

/// One (language, model) line of a results table. Absent metrics stay empty.
struct ReportRow {
  std::string language;
  std::string model;
  MetricReport metrics;
  std::optional<double> human_eval;

  bool operator==(const ReportRow&) const;
};

/// Flat object with keys language, model, bleu, rouge_l_p/r/f,
/// bert_p/r/f1, human_eval, n_sentences. Values keep full precision.
nlohmann::json to_json(const ReportRow& row);
ReportRow report_row_from_json(const nlohmann::json& j);

/// A report file holds one row object or an array of them.
std::vector<ReportRow> read_report_file(const std::filesystem::path& file);

/// Joins rows sharing (language, model) in first-seen order. Fields present
/// in several inputs must agree exactly, otherwise Error(Validation).
std::vector<ReportRow> merge_rows(std::span<const ReportRow> rows);

/// Fixed three decimals, halves rounded up.
std::string format_3dp(double value);

/// Columns: Language, Model, BLEU, ROUGE-L, BERTScore P/R/F1, Human Evaluation.
/// Markdown and CSV use format_3dp; JSON keeps full precision.
std::string render_report(std::span<const ReportRow> rows, ReportFormat format);

}  // namespace lexrag
