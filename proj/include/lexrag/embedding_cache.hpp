#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <unordered_map>

#include "lexrag/backends.hpp"

namespace lexrag {

/// Append-only embedding cache persisted as JSON lines
/// `{"key": <hex sha256>, "dim": n, "vector": [...]}`.
///
/// The key is SHA-256 over `embedder_id || 0x00 || text`. Lookups may run
/// concurrently; appends are serialized.
class EmbeddingCache {
 public:
  /// Opens (creating parent directories) and loads an existing file.
  /// Later lines win when a key repeats.
  explicit EmbeddingCache(std::filesystem::path file);

  static std::string key(std::string_view embedder_id, std::string_view text);

  std::optional<Vector> get(std::string_view embedder_id, std::string_view text) const;
  void put(std::string_view embedder_id, std::string_view text, const Vector& v);

  std::size_t size() const;
  const std::filesystem::path& file() const noexcept { return file_; }

 private:
  std::filesystem::path file_;
  mutable std::shared_mutex mu_;
  std::unordered_map<std::string, Vector> entries_;
  std::ofstream out_;
};

}  // namespace lexrag
