#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

namespace lexrag {

enum class DocumentKind { Dictionary, Example };

std::string_view to_string(DocumentKind kind);
std::optional<DocumentKind> parse_document_kind(std::string_view text);

/// Document identifier of the form `d:<seq>` (dictionary) or `x:<seq>` (example).
///
/// Ordering is by kind (dictionary first) and then by numeric sequence, so
/// `d:2` sorts before `d:10`. This is the "ascending doc_id" order used for
/// posting lists and for tie-breaking ranked results.
class DocId {
 public:
  DocId(DocumentKind kind, std::uint64_t seq) : kind_(kind), seq_(seq) {}

  /// Accepts only the canonical spelling (`^[dx]:(0|[1-9][0-9]*)$`).
  static std::optional<DocId> parse(std::string_view text);

  DocumentKind kind() const noexcept { return kind_; }
  std::uint64_t seq() const noexcept { return seq_; }
  std::string str() const;

  friend auto operator<=>(const DocId&, const DocId&) = default;
  friend bool operator==(const DocId&, const DocId&) = default;

 private:
  DocumentKind kind_;
  std::uint64_t seq_;
};

}  // namespace lexrag

template <>
struct std::hash<lexrag::DocId> {
  std::size_t operator()(const lexrag::DocId& id) const noexcept {
    return std::hash<std::uint64_t>{}(id.seq() * 2 + (id.kind() == lexrag::DocumentKind::Example ? 1 : 0));
  }
};
