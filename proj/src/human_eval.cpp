#include "lexrag/human_eval.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>

#include "lexrag/error.hpp"
#include "lexrag/unicode.hpp"

namespace lexrag {

namespace {

constexpr double kRowMaximum = 3.0 * kMaxHumanScore;

bool in_range(int score) { return score >= 0 && score <= kMaxHumanScore; }

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::size_t begin = 0;
  for (;;) {
    const std::size_t comma = line.find(',', begin);
    out.push_back(trim(std::string_view(line).substr(begin, comma - begin)));
    if (comma == std::string::npos) break;
    begin = comma + 1;
  }
  return out;
}

int parse_score(const std::string& text, const std::string& where, const char* column) {
  int value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    fail(ErrorKind::Validation, where + column + " '" + text + "' is not an integer");
  }
  if (!in_range(value)) {
    fail(ErrorKind::Validation, where + column + " " + text + " outside 0.." + std::to_string(kMaxHumanScore));
  }
  return value;
}

double row_score(const HumanScoreRow& r) { return (r.fluency + r.grammaticality + r.faithfulness) / kRowMaximum; }

}  // namespace

void HumanScoreSheet::add(HumanScoreRow row) {
  if (!in_range(row.fluency) || !in_range(row.grammaticality) || !in_range(row.faithfulness)) {
    fail(ErrorKind::Validation, "score outside 0.." + std::to_string(kMaxHumanScore) + " for sentence " +
                                    row.sentence_id + ", model " + row.model_id);
  }
  const bool duplicate = std::any_of(rows_.begin(), rows_.end(), [&](const HumanScoreRow& r) {
    return r.sentence_id == row.sentence_id && r.model_id == row.model_id;
  });
  if (duplicate) {
    fail(ErrorKind::Validation, "duplicate score for sentence " + row.sentence_id + ", model " + row.model_id);
  }
  rows_.push_back(std::move(row));
}

std::vector<std::string> HumanScoreSheet::models() const {
  std::vector<std::string> out;
  for (const HumanScoreRow& r : rows_) {
    if (std::find(out.begin(), out.end(), r.model_id) == out.end()) out.push_back(r.model_id);
  }
  return out;
}

HumanScoreSheet read_human_scores(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open " + file.string());

  HumanScoreSheet sheet;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const std::string where = file.string() + ":" + std::to_string(line_no) + ": ";
    if (!unicode::is_valid_utf8(line)) fail(ErrorKind::Format, where + "invalid UTF-8");
    const auto cols = split_csv(line);
    if (!header_seen) {
      const std::vector<std::string> expected{"sentence_id", "model_id", "fluency", "grammaticality", "faithfulness"};
      if (cols != expected) {
        fail(ErrorKind::Format, where + "expected header sentence_id,model_id,fluency,grammaticality,faithfulness");
      }
      header_seen = true;
      continue;
    }
    if (cols.size() != 5) {
      fail(ErrorKind::Validation, where + "expected 5 columns, found " + std::to_string(cols.size()));
    }
    if (cols[0].empty() || cols[1].empty()) fail(ErrorKind::Validation, where + "sentence_id and model_id required");
    HumanScoreRow row{cols[0], cols[1], parse_score(cols[2], where, "fluency"),
                      parse_score(cols[3], where, "grammaticality"), parse_score(cols[4], where, "faithfulness")};
    try {
      sheet.add(std::move(row));
    } catch (const Error& e) {
      fail(e.kind(), where + e.what());
    }
  }
  if (!header_seen) fail(ErrorKind::Format, file.string() + ": missing CSV header");
  return sheet;
}

double human_eval_normalize(const HumanScoreSheet& sheet, std::string_view model_id) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const HumanScoreRow& r : sheet.rows()) {
    if (r.model_id != model_id) continue;
    sum += row_score(r);
    ++n;
  }
  if (n == 0) fail(ErrorKind::Validation, "no human scores for model " + std::string(model_id));
  return sum / static_cast<double>(n);
}

double human_eval_normalize_all(const HumanScoreSheet& sheet) {
  if (sheet.rows().empty()) fail(ErrorKind::Validation, "no human scores");
  double sum = 0.0;
  for (const HumanScoreRow& r : sheet.rows()) sum += row_score(r);
  return sum / static_cast<double>(sheet.rows().size());
}

}  // namespace lexrag
