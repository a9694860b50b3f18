#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "lexrag/backends.hpp"
#include "lexrag/index_store.hpp"
#include "lexrag/retrieval.hpp"

namespace lexrag {

struct Languages {
  std::string source = "English";
  std::string target = "Cherokee";
};

/// Layout of the augmented prompt.
///
/// Section fields may use `{source_lang}` and `{target_lang}`. The glossary
/// line format must contain `{headword}` then `{target}`; the example line
/// format `{source}` then `{target}`. Any other `{name}` is rejected.
/// Placeholders are expanded in the template text only, never inside the
/// query or document text.
struct PromptTemplate {
  std::string preamble =
      "You are an expert translator from {source_lang} to {target_lang}. "
      "Use the reference material below where it applies.";
  std::string glossary_header = "Glossary:";
  std::string example_header = "Examples:";
  std::string glossary_line_format = "{headword} → {target}";
  std::string example_line_format = "{source} ⇒ {target}";
  std::string directive = "Translate the following sentence into {target_lang}. Output only the translation.";

  /// Throws Error(Format) on unknown placeholders or malformed line formats.
  void validate() const;

  /// Reads a JSON object with the field names above; missing fields keep
  /// their defaults and unknown fields are rejected.
  static PromptTemplate load(const std::filesystem::path& file);

  /// Literal text between `{headword}` and `{target}` in the glossary format.
  std::string glossary_separator() const;
  std::string render_glossary_header(const Languages& langs) const;
};

/// Sections in order: preamble, glossary (dictionary results), examples
/// (example results), directive, query. A section with no lines is left out
/// together with its header. Sections are separated by one blank line.
std::string assemble_prompt(std::string_view query, std::span<const RetrievalResult> results,
                            const PromptTemplate& prompt_template, const Languages& langs);

struct TranslationRecord {
  std::string id;
  std::string query;
  std::vector<RetrievalResult> results;
  std::string prompt;
  std::string output;
  std::string model_id;
  std::optional<std::int64_t> prompt_tokens;
  std::optional<std::int64_t> completion_tokens;
  double retrieval_ms = 0.0;
  double generation_ms = 0.0;
  std::optional<std::string> error;
};

/// JSON form used for batch output. The prompt is included only when asked.
nlohmann::json to_json(const TranslationRecord& record, bool include_prompt);

struct TranslationSettings {
  RetrievalConfig retrieval;
  PromptTemplate prompt_template;
  Languages langs;

  void validate() const;
};

/// Retrieve, assemble, generate. Errors propagate to the caller.
TranslationRecord translate(std::string_view query, const IndexSet& index, Embedder& embedder, Generator& generator,
                            const TranslationSettings& settings);

struct BatchItem {
  std::string id;
  std::string source;
};

/// Translates every item with up to `parallelism` workers. Output order
/// matches input order; a failing item gets its error recorded and an empty
/// output while the rest of the batch continues.
std::vector<TranslationRecord> batch_translate(std::span<const BatchItem> items, const IndexSet& index,
                                               Embedder& embedder, Generator& generator,
                                               const TranslationSettings& settings, std::size_t parallelism = 1);

/// Plain text (one sentence per line, id = line number) or, for `.jsonl`
/// files, objects `{"id": ..., "source": ...}`. Blank lines are skipped.
std::vector<BatchItem> read_batch_input(const std::filesystem::path& file);

}  // namespace lexrag
