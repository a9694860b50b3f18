#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>

#include "lexrag/corpus.hpp"
#include "lexrag/keyword_index.hpp"
#include "lexrag/vector_index.hpp"

namespace lexrag {

inline constexpr std::uint32_t kIndexVersion = 1;

struct IndexManifest {
  std::uint32_t version = kIndexVersion;
  std::size_t dim = 0;
  std::size_t count = 0;
  std::string embedder_id;
  std::string created_at;  // ISO-8601, UTC
  std::size_t max_phrase_len = 1;

  bool operator==(const IndexManifest&) const = default;
};

/// Everything a retrieval run needs, loaded from one index directory.
struct IndexSet {
  DocumentStore docs;
  KeywordIndex keywords;
  VectorIndex vectors;
  IndexManifest manifest;
};

/// Current UTC time as `YYYY-MM-DDTHH:MM:SSZ`.
std::string utc_timestamp();

IndexManifest make_manifest(const KeywordIndex& keywords, const VectorIndex& vectors);

/// Writes manifest.json, keyword_index.json, docs.jsonl and vectors.bin into
/// `dir`, creating it if needed.
void save_index(const std::filesystem::path& dir, const DocumentStore& docs, const KeywordIndex& keywords,
                const VectorIndex& vectors, const IndexManifest& manifest);

/// Loads and cross-checks an index directory. Throws Error(Io) for missing
/// files and Error(Format) for bad magic, version, truncation, or counts that
/// disagree between the manifest and the payload.
IndexSet load_index(const std::filesystem::path& dir);

// vectors.bin on its own, little-endian:
//   magic "LRXV" | u32 version | u32 dim | u64 count |
//   count x (u16 id_len | id bytes | dim x f32)
void write_vectors_file(const std::filesystem::path& file, const VectorIndex& vectors);
VectorIndex read_vectors_file(const std::filesystem::path& file, const std::string& embedder_id);

}  // namespace lexrag
