#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lexrag/doc_id.hpp"

namespace lexrag {

/// Longest headword (in words) the keyword index will accept.
inline constexpr std::size_t kMaxPhraseLen = 4;

struct DictionaryEntry {
  std::string headword;
  std::string target;
  std::optional<std::string> definition;
  std::optional<std::string> part_of_speech;
  std::vector<std::pair<std::string, std::string>> examples;

  bool operator==(const DictionaryEntry&) const = default;
};

struct ParallelExample {
  std::string source_text;
  std::string target_text;
  std::string source_lang;
  std::string target_lang;
  std::string provenance;

  bool operator==(const ParallelExample&) const = default;
};

/// The retrievable unit shared by the keyword and vector indexes.
///
/// For dictionary documents `source_text` is the headword and `target_text`
/// the translation. `render_text` is derived from the other fields by
/// render_document_text() and is what gets embedded.
struct Document {
  DocId id;
  DocumentKind kind;
  std::string source_text;
  std::string target_text;
  std::string render_text;
  std::map<std::string, std::string> metadata;

  bool operator==(const Document&) const = default;
};

enum class ParallelFormat { Jsonl, Tsv };

/// Loads a dictionary JSONL file, one entry per non-blank line. All text is
/// NFC-normalized. An empty file yields an empty list and a warning.
/// Throws Error(Io) for a missing file and Error(Format)/Error(Validation)
/// naming the offending line otherwise.
std::vector<DictionaryEntry> load_dictionary(const std::filesystem::path& path,
                                             std::size_t max_phrase_len = kMaxPhraseLen);

/// Loads parallel examples from JSONL or TSV (source_text, target_text,
/// source_lang, target_lang, provenance).
std::vector<ParallelExample> load_parallel(const std::filesystem::path& path, ParallelFormat format);

/// Guesses the parallel format from the file extension (`.tsv` or JSONL).
ParallelFormat parallel_format_for(const std::filesystem::path& path);

/// `headword — target — definition` for dictionary documents,
/// `source ⇒ target` for examples. Absent parts are omitted.
std::string render_document_text(DocumentKind kind, const std::string& source_text, const std::string& target_text,
                                 const std::map<std::string, std::string>& metadata);

/// One Document per input: entries become d:0, d:1, ...; examples x:0, x:1, ...
/// Throws Error(Usage) when both lists are empty.
std::vector<Document> to_documents(std::span<const DictionaryEntry> entries,
                                   std::span<const ParallelExample> examples);

void write_documents(const std::filesystem::path& path, std::span<const Document> docs);

/// Reads docs.jsonl back; rejects duplicate ids and render_text that does not
/// match its fields.
std::vector<Document> read_documents(const std::filesystem::path& path);

/// Read-only id lookup over a document list.
class DocumentStore {
 public:
  DocumentStore() = default;
  explicit DocumentStore(std::vector<Document> docs);

  const Document* find(const DocId& id) const;
  const Document& at(const DocId& id) const;
  bool contains(const DocId& id) const { return find(id) != nullptr; }

  const std::vector<Document>& documents() const noexcept { return docs_; }
  std::size_t size() const noexcept { return docs_.size(); }
  bool empty() const noexcept { return docs_.empty(); }

 private:
  std::vector<Document> docs_;
  std::map<DocId, std::size_t> by_id_;
};

}  // namespace lexrag
