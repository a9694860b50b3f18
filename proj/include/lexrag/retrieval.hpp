#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lexrag/backends.hpp"
#include "lexrag/corpus.hpp"
#include "lexrag/index_store.hpp"

namespace lexrag {

enum class FallbackPolicy {
  StrictFallback,  // vector search only when no keyword matched
  Fill,            // vector search tops up until k_total
};

std::string_view to_string(FallbackPolicy policy);
std::optional<FallbackPolicy> parse_fallback_policy(std::string_view text);

struct RetrievalConfig {
  std::size_t k_vector = 5;
  std::size_t k_total = 8;
  FallbackPolicy policy = FallbackPolicy::StrictFallback;
  std::size_t max_phrase_len = kMaxPhraseLen;

  /// Throws Error(Format) unless 1 <= k_vector <= k_total and max_phrase_len >= 1.
  void validate() const;
};

enum class Provenance { Keyword, Vector };

std::string_view to_string(Provenance provenance);

struct RetrievalResult {
  Document doc;
  double score;  // 1.0 for keyword hits, cosine for vector hits
  Provenance provenance;
  std::optional<std::string> matched_phrase;  // set iff provenance is Keyword
};

/// Every n-gram (n = max_phrase_len down to 1, left to right within each n)
/// of the normalized query, first occurrence kept.
std::vector<std::string> extract_query_terms(std::string_view query, std::size_t max_phrase_len);

/// Keyword-first retrieval.
///
/// Keyword hits for each extracted phrase come first, in phrase order, until
/// k_total. The full query is then embedded and searched by cosine when the
/// policy calls for it: under StrictFallback only if no keyword matched, under
/// Fill whenever fewer than k_total results were found. The embedder is not
/// called otherwise. Results never repeat a document.
std::vector<RetrievalResult> retrieve(std::string_view query, const IndexSet& index, Embedder& embedder,
                                      const RetrievalConfig& config);

}  // namespace lexrag
