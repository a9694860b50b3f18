#include "lexrag/vector_index.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

#include "lexrag/embedding_cache.hpp"
#include "lexrag/error.hpp"

namespace lexrag {

namespace {

bool ranks_before(const ScoredDoc& a, const ScoredDoc& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.id < b.id;
}

void check_unit(std::span<const float> v, const char* what) {
  const double norm = std::sqrt(dot(v, v));
  if (!(std::abs(norm - 1.0) <= kUnitNormTolerance)) {
    fail(ErrorKind::Validation, std::string(what) + " is not unit length (norm " + std::to_string(norm) + ")");
  }
}

}  // namespace

double dot(std::span<const float> a, std::span<const float> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  return sum;
}

VectorIndex::VectorIndex(std::size_t dim, std::string embedder_id) : dim_(dim), embedder_id_(std::move(embedder_id)) {}

void VectorIndex::add(const DocId& id, std::span<const float> unit_vector) {
  if (unit_vector.size() != dim_) {
    fail(ErrorKind::Validation, "vector for " + id.str() + " has dimension " + std::to_string(unit_vector.size()) +
                                    ", index has " + std::to_string(dim_));
  }
  check_unit(unit_vector, ("vector for " + id.str()).c_str());
  if (!id_set_.insert(id).second) fail(ErrorKind::Validation, "duplicate vector row " + id.str());
  ids_.push_back(id);
  data_.insert(data_.end(), unit_vector.begin(), unit_vector.end());
}

std::vector<ScoredDoc> VectorIndex::topk(std::span<const float> query, std::size_t k) const {
  if (query.size() != dim_) {
    fail(ErrorKind::Validation, "query dimension " + std::to_string(query.size()) + " does not match index dimension " +
                                    std::to_string(dim_));
  }
  if (k == 0 || ids_.empty()) return {};
  check_unit(query, "query vector");

  std::vector<ScoredDoc> scored;
  scored.reserve(ids_.size());
  for (std::size_t i = 0; i < ids_.size(); ++i) scored.push_back({ids_[i], dot(row(i), query)});
  const std::size_t n = std::min(k, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(n), scored.end(), ranks_before);
  scored.erase(scored.begin() + static_cast<std::ptrdiff_t>(n), scored.end());
  return scored;
}

VectorIndex build_vector_index(std::span<const Document> docs, Embedder& embedder, const VectorBuildOptions& options,
                               VectorBuildStats* stats) {
  if (options.batch_size == 0) fail(ErrorKind::Usage, "batch_size must be positive");
  const std::string embedder_id = embedder.id();
  VectorBuildStats local;

  std::vector<std::optional<Vector>> vectors(docs.size());
  std::vector<std::size_t> pending;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    if (options.cache != nullptr) vectors[i] = options.cache->get(embedder_id, docs[i].render_text);
    if (vectors[i]) {
      ++local.cache_hits;
    } else {
      pending.push_back(i);
    }
  }

  std::optional<std::size_t> dim;
  auto check_dim = [&](std::size_t got) {
    if (!dim) dim = got;
    if (got != *dim) {
      fail(ErrorKind::Backend, "embedding dimension mismatch: expected " + std::to_string(*dim) + ", got " +
                                   std::to_string(got));
    }
  };
  for (const auto& v : vectors) {
    if (v) check_dim(v->size());
  }

  for (std::size_t begin = 0; begin < pending.size(); begin += options.batch_size) {
    const std::size_t end = std::min(pending.size(), begin + options.batch_size);
    std::vector<std::string> texts;
    texts.reserve(end - begin);
    for (std::size_t j = begin; j < end; ++j) texts.push_back(docs[pending[j]].render_text);

    std::vector<Vector> batch = embedder.embed_texts(texts);
    ++local.backend_calls;
    if (batch.size() != texts.size()) {
      fail(ErrorKind::Backend, "embedder returned " + std::to_string(batch.size()) + " vectors for " +
                                   std::to_string(texts.size()) + " texts");
    }
    for (std::size_t j = 0; j < batch.size(); ++j) {
      Vector& v = batch[j];
      check_dim(v.size());
      normalize_in_place(v);
      if (options.cache != nullptr) options.cache->put(embedder_id, texts[j], v);
      vectors[pending[begin + j]] = std::move(v);
      ++local.embedded;
    }
  }

  VectorIndex index(dim.value_or(0), embedder_id);
  for (std::size_t i = 0; i < docs.size(); ++i) index.add(docs[i].id, *vectors[i]);
  if (stats != nullptr) *stats = local;
  return index;
}

}  // namespace lexrag
