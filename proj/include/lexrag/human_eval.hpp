#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace lexrag {

inline constexpr int kMaxHumanScore = 5;

/// One expert judgement of one sentence from one system, each dimension 0..5.
struct HumanScoreRow {
  std::string sentence_id;
  std::string model_id;
  int fluency = 0;
  int grammaticality = 0;
  int faithfulness = 0;
};

class HumanScoreSheet {
 public:
  /// Throws Error(Validation) for an out-of-range score or a repeated
  /// (sentence_id, model_id) pair.
  void add(HumanScoreRow row);

  const std::vector<HumanScoreRow>& rows() const noexcept { return rows_; }

  /// Model ids in order of first appearance.
  std::vector<std::string> models() const;

 private:
  std::vector<HumanScoreRow> rows_;
};

/// Reads `sentence_id,model_id,fluency,grammaticality,faithfulness` CSV.
/// Errors name the 1-based line number.
HumanScoreSheet read_human_scores(const std::filesystem::path& file);

/// Mean over the model's sentences of (fluency + grammaticality +
/// faithfulness) / 15. Throws Error(Validation) if the model has no rows.
double human_eval_normalize(const HumanScoreSheet& sheet, std::string_view model_id);

/// The same average taken over every row in the sheet.
double human_eval_normalize_all(const HumanScoreSheet& sheet);

}  // namespace lexrag
