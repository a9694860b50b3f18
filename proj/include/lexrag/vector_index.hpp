#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "lexrag/backends.hpp"
#include "lexrag/corpus.hpp"
#include "lexrag/doc_id.hpp"

namespace lexrag {

class EmbeddingCache;

/// Allowed deviation of a stored or query vector from unit length.
inline constexpr double kUnitNormTolerance = 1e-4;

struct ScoredDoc {
  DocId id;
  double score;

  bool operator==(const ScoredDoc&) const = default;
};

/// Dense store of unit vectors searched exhaustively by dot product.
///
/// Vectors are kept row-major in one contiguous buffer. Because every row is
/// unit length, the dot product equals cosine similarity.
class VectorIndex {
 public:
  VectorIndex(std::size_t dim, std::string embedder_id);

  /// Throws Error(Validation) on wrong dimension, a norm off by more than
  /// kUnitNormTolerance, or a duplicate id.
  void add(const DocId& id, std::span<const float> unit_vector);

  /// Top-k rows by dot product, descending; ties broken by ascending id.
  /// k = 0 returns an empty list. The query must match dim and be unit length.
  std::vector<ScoredDoc> topk(std::span<const float> query, std::size_t k) const;

  std::size_t dim() const noexcept { return dim_; }
  std::size_t count() const noexcept { return ids_.size(); }
  const std::string& embedder_id() const noexcept { return embedder_id_; }
  const std::vector<DocId>& ids() const noexcept { return ids_; }
  std::span<const float> row(std::size_t i) const { return {data_.data() + i * dim_, dim_}; }

  bool operator==(const VectorIndex&) const = default;

 private:
  std::size_t dim_;
  std::string embedder_id_;
  std::vector<DocId> ids_;
  std::unordered_set<DocId> id_set_;
  std::vector<float> data_;
};

/// Free-function spelling of VectorIndex::topk.
inline std::vector<ScoredDoc> vector_topk(const VectorIndex& index, std::span<const float> query, std::size_t k) {
  return index.topk(query, k);
}

struct VectorBuildOptions {
  std::size_t batch_size = 64;
  EmbeddingCache* cache = nullptr;
};

struct VectorBuildStats {
  std::size_t cache_hits = 0;
  std::size_t embedded = 0;
  std::size_t backend_calls = 0;
};

/// Embeds each document's render_text (in document order), normalizes to
/// unit length, and stores one row per document. Texts found in the cache
/// are not sent to the embedder; fresh vectors are appended to it.
///
/// Throws Error(Backend) on embedder failure, a zero vector, or a dimension
/// that changes between batches.
VectorIndex build_vector_index(std::span<const Document> docs, Embedder& embedder,
                               const VectorBuildOptions& options = {}, VectorBuildStats* stats = nullptr);

double dot(std::span<const float> a, std::span<const float> b);

}  // namespace lexrag
