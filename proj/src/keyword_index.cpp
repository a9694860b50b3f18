#include "lexrag/keyword_index.hpp"

#include <algorithm>

#include "lexrag/error.hpp"
#include "lexrag/unicode.hpp"

namespace lexrag {

std::string normalize_keyword(std::string_view text) {
  std::string out;
  for (const std::string& raw : unicode::split_whitespace(unicode::fold_case(text))) {
    std::string word = unicode::strip_punctuation(raw);
    if (word.empty()) continue;
    if (!out.empty()) out += ' ';
    out += word;
  }
  return out;
}

KeywordIndex::KeywordIndex(std::map<std::string, Postings> entries, std::size_t max_phrase_len)
    : entries_(std::move(entries)), max_phrase_len_(max_phrase_len) {
  for (auto& [phrase, ids] : entries_) {
    if (phrase.empty()) fail(ErrorKind::Validation, "keyword index contains an empty phrase");
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  }
}

std::span<const DocId> KeywordIndex::lookup(std::string_view phrase) const {
  auto it = entries_.find(normalize_keyword(phrase));
  if (it == entries_.end()) return {};
  return it->second;
}

KeywordIndex build_keyword_index(std::span<const Document> docs) {
  std::map<std::string, KeywordIndex::Postings> entries;
  std::size_t longest = 1;
  for (const Document& doc : docs) {
    const std::string normalized = normalize_keyword(doc.source_text);
    if (normalized.empty()) continue;
    if (doc.kind == DocumentKind::Dictionary) {
      entries[normalized].push_back(doc.id);
      longest = std::max(longest, unicode::split_whitespace(normalized).size());
    } else {
      for (const std::string& word : unicode::split_whitespace(normalized)) entries[word].push_back(doc.id);
    }
  }
  return KeywordIndex(std::move(entries), std::min(longest, kMaxPhraseLen));
}

}  // namespace lexrag
