#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lexrag/corpus.hpp"
#include "lexrag/doc_id.hpp"

namespace lexrag {

/// NFC, case fold, strip leading/trailing punctuation from each word, and
/// join the surviving words with single spaces. May return an empty string.
std::string normalize_keyword(std::string_view text);

/// Exact-match mapping from normalized phrase to the documents that carry it.
///
/// Dictionary documents are indexed under their full normalized headword;
/// example documents under each unigram of their normalized source text.
/// Posting lists are kept sorted ascending and duplicate-free.
class KeywordIndex {
 public:
  using Postings = std::vector<DocId>;

  KeywordIndex() = default;
  KeywordIndex(std::map<std::string, Postings> entries, std::size_t max_phrase_len);

  /// Lookup of normalize_keyword(phrase); a miss returns an empty span.
  std::span<const DocId> lookup(std::string_view phrase) const;

  const std::map<std::string, Postings>& entries() const noexcept { return entries_; }
  std::size_t max_phrase_len() const noexcept { return max_phrase_len_; }
  std::size_t size() const noexcept { return entries_.size(); }

  bool operator==(const KeywordIndex&) const = default;

 private:
  std::map<std::string, Postings> entries_;
  std::size_t max_phrase_len_ = 1;
};

KeywordIndex build_keyword_index(std::span<const Document> docs);

}  // namespace lexrag
