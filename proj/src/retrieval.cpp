#include "lexrag/retrieval.hpp"

#include <algorithm>
#include <set>
#include <unordered_set>

#include "lexrag/error.hpp"
#include "lexrag/keyword_index.hpp"
#include "lexrag/unicode.hpp"

namespace lexrag {

std::string_view to_string(FallbackPolicy policy) {
  return policy == FallbackPolicy::StrictFallback ? "strict_fallback" : "fill";
}

std::optional<FallbackPolicy> parse_fallback_policy(std::string_view text) {
  if (text == "strict_fallback") return FallbackPolicy::StrictFallback;
  if (text == "fill") return FallbackPolicy::Fill;
  return std::nullopt;
}

std::string_view to_string(Provenance provenance) {
  return provenance == Provenance::Keyword ? "keyword" : "vector";
}

void RetrievalConfig::validate() const {
  if (k_vector < 1 || k_vector > k_total) fail(ErrorKind::Format, "retrieval requires 1 <= k_vector <= k_total");
  if (max_phrase_len < 1) fail(ErrorKind::Format, "retrieval.max_phrase_len must be >= 1");
}

std::vector<std::string> extract_query_terms(std::string_view query, std::size_t max_phrase_len) {
  const std::vector<std::string> words = unicode::split_whitespace(normalize_keyword(query));
  std::vector<std::string> terms;
  std::unordered_set<std::string> seen;
  for (std::size_t n = std::min(max_phrase_len, words.size()); n >= 1; --n) {
    for (std::size_t start = 0; start + n <= words.size(); ++start) {
      std::string phrase = words[start];
      for (std::size_t i = start + 1; i < start + n; ++i) phrase += ' ' + words[i];
      if (seen.insert(phrase).second) terms.push_back(std::move(phrase));
    }
  }
  return terms;
}

std::vector<RetrievalResult> retrieve(std::string_view query, const IndexSet& index, Embedder& embedder,
                                      const RetrievalConfig& config) {
  config.validate();
  std::vector<RetrievalResult> results;
  if (unicode::split_whitespace(query).empty()) return results;
  std::set<DocId> included;

  const std::size_t phrase_len = std::min(config.max_phrase_len, index.keywords.max_phrase_len());
  for (const std::string& phrase : extract_query_terms(query, phrase_len)) {
    if (results.size() >= config.k_total) break;
    for (const DocId& id : index.keywords.lookup(phrase)) {
      if (results.size() >= config.k_total) break;
      if (!included.insert(id).second) continue;
      results.push_back({index.docs.at(id), 1.0, Provenance::Keyword, phrase});
    }
  }

  const bool run_vector = config.policy == FallbackPolicy::StrictFallback ? results.empty()
                                                                          : results.size() < config.k_total;
  if (!run_vector || index.vectors.count() == 0) return results;

  if (index.vectors.embedder_id() != embedder.id()) {
    fail(ErrorKind::Validation, "index was built with embedder '" + index.vectors.embedder_id() +
                                    "' but the query embedder is '" + embedder.id() + "'");
  }
  const std::string text = unicode::nfc(query);
  std::vector<Vector> embedded = embedder.embed_texts(std::span<const std::string>(&text, 1));
  if (embedded.size() != 1) fail(ErrorKind::Backend, "embedder returned no vector for the query");
  Vector& q = embedded.front();
  normalize_in_place(q);

  for (const ScoredDoc& hit : index.vectors.topk(q, config.k_vector)) {
    if (results.size() >= config.k_total) break;
    if (!included.insert(hit.id).second) continue;
    results.push_back({index.docs.at(hit.id), hit.score, Provenance::Vector, std::nullopt});
  }
  return results;
}

}  // namespace lexrag
