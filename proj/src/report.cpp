#include "lexrag/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "lexrag/error.hpp"

namespace lexrag {

using nlohmann::json;

namespace {

// Tolerance for values that sit just under a rounding half.
constexpr double kHalfUpSlack = 1e-9;

template <typename T>
void merge_field(std::optional<T>& into, const std::optional<T>& from, const ReportRow& row, const char* name) {
  if (!from) return;
  if (into && !(*into == *from)) {
    fail(ErrorKind::Validation, "conflicting values for " + std::string(name) + " in row (" + row.language + ", " +
                                    row.model + ")");
  }
  into = from;
}

std::optional<double> opt_number(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_number()) fail(ErrorKind::Format, std::string("report field '") + key + "' must be a number");
  return it->get<double>();
}

std::optional<Prf> opt_prf(const json& j, const char* p, const char* r, const char* f) {
  auto vp = opt_number(j, p);
  auto vr = opt_number(j, r);
  auto vf = opt_number(j, f);
  if (!vp && !vr && !vf) return std::nullopt;
  if (!vp || !vr || !vf) {
    fail(ErrorKind::Format, std::string("report fields ") + p + ", " + r + ", " + f + " must appear together");
  }
  return Prf{*vp, *vr, *vf};
}

std::string cell(const std::optional<double>& v) { return v ? format_3dp(*v) : "-"; }

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> display_cells(const ReportRow& row) {
  const MetricReport& m = row.metrics;
  auto part = [](const std::optional<Prf>& prf, double Prf::*field) -> std::optional<double> {
    if (!prf) return std::nullopt;
    return (*prf).*field;
  };
  return {cell(m.bleu),
          cell(part(m.rouge_l, &Prf::f)),
          cell(part(m.bertscore, &Prf::p)),
          cell(part(m.bertscore, &Prf::r)),
          cell(part(m.bertscore, &Prf::f)),
          cell(row.human_eval)};
}

}  // namespace

std::optional<ReportFormat> parse_report_format(std::string_view text) {
  if (text == "json") return ReportFormat::Json;
  if (text == "csv") return ReportFormat::Csv;
  if (text == "markdown") return ReportFormat::Markdown;
  return std::nullopt;
}

bool ReportRow::operator==(const ReportRow& o) const {
  return language == o.language && model == o.model && metrics.bleu == o.metrics.bleu &&
         metrics.rouge_l == o.metrics.rouge_l && metrics.bertscore == o.metrics.bertscore &&
         metrics.n_sentences == o.metrics.n_sentences && human_eval == o.human_eval;
}

json to_json(const ReportRow& row) {
  json j = json::object();
  j["language"] = row.language;
  j["model"] = row.model;
  if (row.metrics.bleu) j["bleu"] = *row.metrics.bleu;
  if (const auto& r = row.metrics.rouge_l) {
    j["rouge_l_p"] = r->p;
    j["rouge_l_r"] = r->r;
    j["rouge_l_f"] = r->f;
  }
  if (const auto& b = row.metrics.bertscore) {
    j["bert_p"] = b->p;
    j["bert_r"] = b->r;
    j["bert_f1"] = b->f;
  }
  if (row.human_eval) j["human_eval"] = *row.human_eval;
  if (row.metrics.n_sentences > 0) j["n_sentences"] = row.metrics.n_sentences;
  return j;
}

ReportRow report_row_from_json(const json& j) {
  if (!j.is_object()) fail(ErrorKind::Format, "report row must be a JSON object");
  static const std::vector<std::string> known{"language",  "model",  "bleu",   "rouge_l_p",  "rouge_l_r", "rouge_l_f",
                                              "bert_p",    "bert_r", "bert_f1", "human_eval", "n_sentences"};
  for (const auto& [key, value] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      fail(ErrorKind::Format, "unknown report field '" + key + "'");
    }
  }
  ReportRow row;
  try {
    row.language = j.value("language", "");
    row.model = j.value("model", "");
    row.metrics.n_sentences = j.value("n_sentences", std::size_t{0});
  } catch (const json::exception& e) {
    fail(ErrorKind::Format, std::string("bad report row: ") + e.what());
  }
  row.metrics.bleu = opt_number(j, "bleu");
  row.metrics.rouge_l = opt_prf(j, "rouge_l_p", "rouge_l_r", "rouge_l_f");
  row.metrics.bertscore = opt_prf(j, "bert_p", "bert_r", "bert_f1");
  row.human_eval = opt_number(j, "human_eval");
  return row;
}

std::vector<ReportRow> read_report_file(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) fail(ErrorKind::Io, "cannot open " + file.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::Format, file.string() + ": malformed JSON: " + e.what());
  }
  std::vector<ReportRow> rows;
  try {
    if (j.is_array()) {
      for (const json& item : j) rows.push_back(report_row_from_json(item));
    } else {
      rows.push_back(report_row_from_json(j));
    }
  } catch (const Error& e) {
    fail(e.kind(), file.string() + ": " + e.what());
  }
  return rows;
}

std::vector<ReportRow> merge_rows(std::span<const ReportRow> rows) {
  std::vector<ReportRow> merged;
  for (const ReportRow& row : rows) {
    auto it = std::find_if(merged.begin(), merged.end(), [&](const ReportRow& m) {
      return m.language == row.language && m.model == row.model;
    });
    if (it == merged.end()) {
      merged.push_back(row);
      continue;
    }
    merge_field(it->metrics.bleu, row.metrics.bleu, row, "bleu");
    merge_field(it->metrics.rouge_l, row.metrics.rouge_l, row, "rouge_l");
    merge_field(it->metrics.bertscore, row.metrics.bertscore, row, "bertscore");
    merge_field(it->human_eval, row.human_eval, row, "human_eval");
    if (row.metrics.n_sentences != 0) {
      if (it->metrics.n_sentences != 0 && it->metrics.n_sentences != row.metrics.n_sentences) {
        fail(ErrorKind::Validation,
             "conflicting values for n_sentences in row (" + row.language + ", " + row.model + ")");
      }
      it->metrics.n_sentences = row.metrics.n_sentences;
    }
  }
  return merged;
}

std::string format_3dp(double value) {
  const double rounded = std::floor(value * 1000.0 + 0.5 + kHalfUpSlack) / 1000.0;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", rounded == 0.0 ? 0.0 : rounded);
  return buf;
}

std::string render_report(std::span<const ReportRow> rows, ReportFormat format) {
  static const std::vector<std::string> headers{"Language",    "Model",       "BLEU",        "ROUGE-L",
                                                "BERTScore P", "BERTScore R", "BERTScore F1", "Human Evaluation"};
  std::ostringstream out;
  switch (format) {
    case ReportFormat::Json: {
      json arr = json::array();
      for (const ReportRow& row : rows) arr.push_back(to_json(row));
      out << (arr.size() == 1 ? arr[0] : arr).dump(2) << '\n';
      break;
    }
    case ReportFormat::Csv: {
      for (std::size_t i = 0; i < headers.size(); ++i) out << (i ? "," : "") << headers[i];
      out << '\n';
      for (const ReportRow& row : rows) {
        out << csv_escape(row.language) << ',' << csv_escape(row.model);
        for (const std::string& c : display_cells(row)) out << ',' << c;
        out << '\n';
      }
      break;
    }
    case ReportFormat::Markdown: {
      out << '|';
      for (const std::string& h : headers) out << ' ' << h << " |";
      out << "\n|";
      for (std::size_t i = 0; i < headers.size(); ++i) out << (i < 2 ? " --- |" : " ---: |");
      out << '\n';
      for (const ReportRow& row : rows) {
        out << "| " << row.language << " | " << row.model << " |";
        for (const std::string& c : display_cells(row)) out << ' ' << c << " |";
        out << '\n';
      }
      break;
    }
  }
  return out.str();
}

}  // namespace lexrag
