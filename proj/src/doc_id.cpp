#include "lexrag/doc_id.hpp"

#include <charconv>

namespace lexrag {

std::string_view to_string(DocumentKind kind) {
  return kind == DocumentKind::Dictionary ? "dictionary" : "example";
}

std::optional<DocumentKind> parse_document_kind(std::string_view text) {
  if (text == "dictionary") return DocumentKind::Dictionary;
  if (text == "example") return DocumentKind::Example;
  return std::nullopt;
}

std::optional<DocId> DocId::parse(std::string_view text) {
  if (text.size() < 3 || text[1] != ':') return std::nullopt;
  DocumentKind kind;
  if (text[0] == 'd') {
    kind = DocumentKind::Dictionary;
  } else if (text[0] == 'x') {
    kind = DocumentKind::Example;
  } else {
    return std::nullopt;
  }
  const std::string_view digits = text.substr(2);
  if (digits.size() > 1 && digits[0] == '0') return std::nullopt;
  std::uint64_t seq = 0;
  const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), seq);
  if (ec != std::errc() || ptr != digits.data() + digits.size()) return std::nullopt;
  return DocId(kind, seq);
}

std::string DocId::str() const {
  return std::string(kind_ == DocumentKind::Dictionary ? "d:" : "x:") + std::to_string(seq_);
}

}  // namespace lexrag
