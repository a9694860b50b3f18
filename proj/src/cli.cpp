#include "lexrag/cli.hpp"

#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include <CLI11.hpp>
#include <algorithm>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "lexrag/config.hpp"
#include "lexrag/corpus.hpp"
#include "lexrag/embedding_cache.hpp"
#include "lexrag/human_eval.hpp"
#include "lexrag/index_store.hpp"
#include "lexrag/keyword_index.hpp"
#include "lexrag/metrics.hpp"
#include "lexrag/pipeline.hpp"
#include "lexrag/report.hpp"
#include "lexrag/unicode.hpp"
#include "lexrag/vector_index.hpp"

namespace lexrag::cli {

namespace fs = std::filesystem;
using nlohmann::json;

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Io:
    case ErrorKind::Format:
      return kIoOrFormat;
    case ErrorKind::Backend:
      return kBackend;
    case ErrorKind::Usage:
      return kUsage;
    case ErrorKind::Validation:
      return kDataInvalid;
  }
  return kIoOrFormat;
}

namespace {

struct Streams {
  std::ostream& out;
  std::ostream& err;
};

int report_error(const Streams& io, const std::exception& e, int code) {
  io.err << "lexrag: error: " << e.what() << '\n';
  return code;
}

std::optional<fs::path> optional_path(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return fs::path(s);
}

// Lines of a UTF-8 text file, NFC-normalized. Blank lines are kept so that
// hypothesis and reference files stay aligned.
std::vector<std::string> read_lines(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open " + file.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (lines.empty() && line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!unicode::is_valid_utf8(line)) {
      fail(ErrorKind::Format, file.string() + ":" + std::to_string(lines.size() + 1) + ": invalid UTF-8");
    }
    lines.push_back(unicode::nfc(line));
  }
  return lines;
}

void write_text(const fs::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::Io, "cannot write " + file.string());
  out << text;
  if (!out) fail(ErrorKind::Io, "write failed: " + file.string());
}

Backends backends_for(const AppConfig& cfg, const PromptTemplate& tmpl) {
  return make_backends(cfg.backend, tmpl.render_glossary_header(cfg.languages), tmpl.glossary_separator());
}

// index build ----------------------------------------------------------------

struct IndexBuildArgs {
  std::vector<std::string> dicts;
  std::vector<std::string> parallels;
  std::string out;
  std::string config;
};

int cmd_index_build(const IndexBuildArgs& a, const Streams& io) {
  if (a.dicts.empty() && a.parallels.empty()) {
    io.err << "lexrag: usage: index build needs at least one of --dict/--parallel\n";
    return kUsage;
  }
  if (a.out.empty()) {
    io.err << "lexrag: usage: index build needs --out\n";
    return kUsage;
  }

  AppConfig cfg;
  std::vector<Document> docs;
  try {
    cfg = resolve_config(optional_path(a.config));
    const std::size_t max_phrase = std::min(cfg.retrieval.max_phrase_len, kMaxPhraseLen);
    std::vector<DictionaryEntry> entries;
    std::vector<ParallelExample> examples;
    for (const std::string& f : a.dicts) {
      auto loaded = load_dictionary(f, max_phrase);
      entries.insert(entries.end(), loaded.begin(), loaded.end());
    }
    for (const std::string& f : a.parallels) {
      auto loaded = load_parallel(f, parallel_format_for(f));
      examples.insert(examples.end(), loaded.begin(), loaded.end());
    }
    docs = to_documents(entries, examples);
  } catch (const std::exception& e) {
    return report_error(io, e, kIoOrFormat);
  }

  const fs::path out_dir(a.out);
  const bool existed = fs::exists(out_dir);
  try {
    const PromptTemplate tmpl = cfg.prompt_template();
    Backends backends = backends_for(cfg, tmpl);
    const fs::path cache_file = cfg.cache_dir ? *cfg.cache_dir / "embeddings.jsonl" : out_dir / "cache" / "embeddings.jsonl";
    EmbeddingCache cache(cache_file);

    const KeywordIndex keywords = build_keyword_index(docs);
    VectorBuildStats stats;
    const VectorIndex vectors = build_vector_index(docs, *backends.embedder, {cfg.batch_size, &cache}, &stats);
    const IndexManifest manifest = make_manifest(keywords, vectors);
    const DocumentStore store(std::move(docs));
    save_index(out_dir, store, keywords, vectors, manifest);

    io.out << "documents: " << store.size() << '\n'
           << "keywords: " << keywords.size() << '\n'
           << "dim: " << vectors.dim() << '\n'
           << "embedder: " << vectors.embedder_id() << '\n'
           << "cache hits: " << stats.cache_hits << '\n'
           << "embedded: " << stats.embedded << '\n';
    return kOk;
  } catch (const std::exception& e) {
    if (!existed) {
      std::error_code ec;
      fs::remove_all(out_dir, ec);
    }
    const auto* err = dynamic_cast<const Error*>(&e);
    return report_error(io, e, err != nullptr && err->kind() == ErrorKind::Backend ? kBackend : kIoOrFormat);
  }
}

// translate ------------------------------------------------------------------

struct TranslateArgs {
  std::string index;
  std::string text;
  std::string input;
  std::string output;
  bool trace = false;
  bool strict = false;
  std::size_t parallelism = 0;
  std::string config;
};

int cmd_translate(const TranslateArgs& a, const Streams& io) {
  if (a.text.empty() == a.input.empty()) {
    io.err << "lexrag: usage: translate needs exactly one of --text/--input\n";
    return kUsage;
  }
  AppConfig cfg;
  try {
    cfg = resolve_config(optional_path(a.config));
  } catch (const Error& e) {
    return report_error(io, e, exit_code_for(e.kind()));
  }
  const std::optional<fs::path> index_dir = a.index.empty() ? cfg.index_dir : fs::path(a.index);
  if (!index_dir) {
    io.err << "lexrag: usage: translate needs --index (or index_dir in the config)\n";
    return kUsage;
  }

  try {
    const IndexSet index = load_index(*index_dir);
    TranslationSettings settings{cfg.retrieval, cfg.prompt_template(), cfg.languages};
    settings.validate();
    Backends backends = backends_for(cfg, settings.prompt_template);

    if (!a.text.empty()) {
      const TranslationRecord record = translate(a.text, index, *backends.embedder, *backends.generator, settings);
      io.out << record.output << '\n';
      return kOk;
    }

    const std::vector<BatchItem> items = read_batch_input(a.input);
    if (items.empty()) {
      io.err << "lexrag: usage: " << a.input << " has no sentences\n";
      return kUsage;
    }
    const std::size_t parallelism =
        a.parallelism > 0 ? a.parallelism : static_cast<std::size_t>(cfg.backend.max_in_flight);
    const auto records =
        batch_translate(items, index, *backends.embedder, *backends.generator, settings, parallelism);

    std::ostringstream lines;
    std::size_t failures = 0;
    for (const TranslationRecord& r : records) {
      lines << to_json(r, a.trace).dump() << '\n';
      if (r.error) {
        ++failures;
        io.err << "lexrag: item " << r.id << " failed: " << *r.error << '\n';
      }
    }
    if (a.output.empty()) {
      io.out << lines.str();
    } else {
      write_text(a.output, lines.str());
    }
    return a.strict && failures > 0 ? kBackend : kOk;
  } catch (const Error& e) {
    return report_error(io, e, exit_code_for(e.kind()));
  } catch (const std::exception& e) {
    return report_error(io, e, kIoOrFormat);
  }
}

// evaluate -------------------------------------------------------------------

struct EvaluateArgs {
  std::string hyp;
  std::string ref;
  std::vector<std::string> metrics{"bleu", "rouge", "bertscore"};
  std::string tokenize;
  std::string format;
  std::string language;
  std::string model;
  std::string output;
  std::string config;
};

int cmd_evaluate(const EvaluateArgs& a, const Streams& io) {
  MetricSelection selection{false, false, false};
  for (const std::string& m : a.metrics) {
    if (m == "bleu") {
      selection.bleu = true;
    } else if (m == "rouge" || m == "rouge_l" || m == "rouge-l") {
      selection.rouge = true;
    } else if (m == "bertscore") {
      selection.bertscore = true;
    } else {
      io.err << "lexrag: usage: unknown metric '" << m << "'\n";
      return kUsage;
    }
  }
  try {
    const AppConfig cfg = resolve_config(optional_path(a.config));
    TokenizationPolicy policy = cfg.tokenize;
    if (!a.tokenize.empty()) policy = *parse_tokenization_policy(a.tokenize);
    ReportFormat format = cfg.report_format;
    if (!a.format.empty()) format = *parse_report_format(a.format);

    const auto hyps = read_lines(a.hyp);
    const auto refs = read_lines(a.ref);
    if (hyps.size() != refs.size()) {
      io.err << "lexrag: error: " << a.hyp << " has " << hyps.size() << " lines but " << a.ref << " has "
             << refs.size() << '\n';
      return kDataInvalid;
    }

    std::shared_ptr<Embedder> embedder;
    if (selection.bertscore) embedder = backends_for(cfg, cfg.prompt_template()).embedder;

    ReportRow row;
    row.language = a.language;
    row.model = a.model;
    row.metrics = evaluate_set(hyps, refs, policy, embedder.get(), selection);
    const std::string rendered = render_report(std::span<const ReportRow>(&row, 1), format);
    if (a.output.empty()) {
      io.out << rendered;
    } else {
      write_text(a.output, rendered);
    }
    return kOk;
  } catch (const Error& e) {
    return report_error(io, e, exit_code_for(e.kind()));
  }
}

// humaneval ------------------------------------------------------------------

struct HumanEvalArgs {
  std::string scores;
  bool per_model = false;
  std::string format = "text";
  std::string language;
  std::string config;
};

int cmd_humaneval(const HumanEvalArgs& a, const Streams& io) {
  try {
    resolve_config(optional_path(a.config));
    const HumanScoreSheet sheet = read_human_scores(a.scores);
    std::vector<std::pair<std::string, double>> scores;
    if (a.per_model) {
      for (const std::string& model : sheet.models()) scores.emplace_back(model, human_eval_normalize(sheet, model));
    } else {
      scores.emplace_back("", human_eval_normalize_all(sheet));
    }

    if (a.format == "json") {
      std::vector<ReportRow> rows;
      for (const auto& [model, score] : scores) {
        ReportRow row;
        row.language = a.language;
        row.model = model;
        row.human_eval = score;
        rows.push_back(std::move(row));
      }
      json arr = json::array();
      for (const ReportRow& r : rows) arr.push_back(to_json(r));
      io.out << arr.dump(2) << '\n';
    } else {
      for (const auto& [model, score] : scores) {
        if (a.per_model) io.out << model << '\t';
        io.out << format_3dp(score) << '\n';
      }
    }
    return kOk;
  } catch (const Error& e) {
    return report_error(io, e, exit_code_for(e.kind()));
  }
}

// report ---------------------------------------------------------------------

struct ReportArgs {
  std::vector<std::string> metrics;
  std::string format = "markdown";
  std::string output;
  std::string config;
};

int cmd_report(const ReportArgs& a, const Streams& io) {
  try {
    resolve_config(optional_path(a.config));
    std::vector<ReportRow> rows;
    for (const std::string& f : a.metrics) {
      auto loaded = read_report_file(f);
      rows.insert(rows.end(), loaded.begin(), loaded.end());
    }
    const auto merged = merge_rows(rows);
    const std::string rendered = render_report(merged, *parse_report_format(a.format));
    if (a.output.empty()) {
      io.out << rendered;
    } else {
      write_text(a.output, rendered);
    }
    return kOk;
  } catch (const Error& e) {
    return report_error(io, e, exit_code_for(e.kind()));
  }
}

// Routes spdlog output to the caller's error stream for the duration of a run.
class ScopedLogger {
 public:
  explicit ScopedLogger(std::ostream& err) : previous_(spdlog::default_logger()) {
    auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err);
    auto logger = std::make_shared<spdlog::logger>("lexrag", sink);
    logger->set_pattern("lexrag: %l: %v");
    spdlog::set_default_logger(logger);
  }
  ~ScopedLogger() { spdlog::set_default_logger(previous_); }
  ScopedLogger(const ScopedLogger&) = delete;
  ScopedLogger& operator=(const ScopedLogger&) = delete;

 private:
  std::shared_ptr<spdlog::logger> previous_;
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  const Streams io{out, err};
  ScopedLogger logger(err);

  CLI::App app{"Retrieval-augmented translation toolkit for low-resource languages", "lexrag"};
  app.require_subcommand(1);

  const std::vector<std::string> formats{"json", "csv", "markdown"};
  const std::vector<std::string> tokenizers{"whitespace", "codepoint"};

  IndexBuildArgs build;
  auto* index_cmd = app.add_subcommand("index", "Index management");
  index_cmd->require_subcommand(1);
  auto* build_cmd = index_cmd->add_subcommand("build", "Build keyword and vector indexes from corpus files");
  build_cmd->add_option("--dict", build.dicts, "Dictionary JSONL file(s)");
  build_cmd->add_option("--parallel", build.parallels, "Parallel example file(s), JSONL or .tsv");
  build_cmd->add_option("--out", build.out, "Output index directory");
  build_cmd->add_option("--config", build.config, "Config file (default ./lexrag.json)");

  TranslateArgs tr;
  auto* translate_cmd = app.add_subcommand("translate", "Translate one sentence or a batch");
  translate_cmd->add_option("--index", tr.index, "Index directory");
  translate_cmd->add_option("--text", tr.text, "Single sentence to translate");
  translate_cmd->add_option("--input", tr.input, "Batch input: text lines or JSONL {id, source}");
  translate_cmd->add_option("--output", tr.output, "Batch output JSONL (default stdout)");
  translate_cmd->add_flag("--trace", tr.trace, "Include prompts in batch output");
  translate_cmd->add_flag("--strict", tr.strict, "Exit 2 if any batch item fails");
  translate_cmd->add_option("--parallelism", tr.parallelism, "Concurrent items (default backend.max_in_flight)");
  translate_cmd->add_option("--config", tr.config, "Config file (default ./lexrag.json)");

  EvaluateArgs ev;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Score hypotheses against references");
  evaluate_cmd->add_option("--hyp", ev.hyp, "Hypothesis file, one sentence per line")->required();
  evaluate_cmd->add_option("--ref", ev.ref, "Reference file, one sentence per line")->required();
  evaluate_cmd->add_option("--metrics", ev.metrics, "Comma-separated subset of bleu,rouge,bertscore")->delimiter(',');
  evaluate_cmd->add_option("--tokenize", ev.tokenize, "whitespace or codepoint")->check(CLI::IsMember(tokenizers));
  evaluate_cmd->add_option("--format", ev.format, "json, csv or markdown")->check(CLI::IsMember(formats));
  evaluate_cmd->add_option("--language", ev.language, "Language label for the report row");
  evaluate_cmd->add_option("--model", ev.model, "Model label for the report row");
  evaluate_cmd->add_option("--output", ev.output, "Write the report here instead of stdout");
  evaluate_cmd->add_option("--config", ev.config, "Config file (default ./lexrag.json)");

  HumanEvalArgs he;
  auto* humaneval_cmd = app.add_subcommand("humaneval", "Normalize 0-5 expert scores to [0, 1]");
  humaneval_cmd->add_option("--scores", he.scores, "CSV of expert scores")->required();
  humaneval_cmd->add_flag("--per-model", he.per_model, "One score per model_id");
  humaneval_cmd->add_option("--format", he.format, "text or json")->check(CLI::IsMember({"text", "json"}));
  humaneval_cmd->add_option("--language", he.language, "Language label for JSON rows");
  humaneval_cmd->add_option("--config", he.config, "Config file (default ./lexrag.json)");

  ReportArgs rp;
  auto* report_cmd = app.add_subcommand("report", "Merge metric files into one results table");
  report_cmd->add_option("--metrics", rp.metrics, "Metric JSON file(s)")->required();
  report_cmd->add_option("--format", rp.format, "json, csv or markdown")->check(CLI::IsMember(formats));
  report_cmd->add_option("--output", rp.output, "Write the table here instead of stdout");
  report_cmd->add_option("--config", rp.config, "Config file (default ./lexrag.json)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "lexrag: usage: " << e.what() << '\n';
    return kUsage;
  }

  if (build_cmd->parsed()) return cmd_index_build(build, io);
  if (translate_cmd->parsed()) return cmd_translate(tr, io);
  if (evaluate_cmd->parsed()) return cmd_evaluate(ev, io);
  if (humaneval_cmd->parsed()) return cmd_humaneval(he, io);
  if (report_cmd->parsed()) return cmd_report(rp, io);
  err << "lexrag: usage: no command given\n";
  return kUsage;
}

}  // namespace lexrag::cli
