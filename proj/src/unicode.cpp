#include "lexrag/unicode.hpp"

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include "lexrag/error.hpp"

namespace lexrag::unicode {

namespace {

const icu::Normalizer2& nfc_instance() {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* n = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status) || n == nullptr) {
    fail(ErrorKind::Io, std::string("ICU NFC normalizer unavailable: ") + u_errorName(status));
  }
  return *n;
}

std::string to_utf8(const icu::UnicodeString& s) {
  std::string out;
  s.toUTF8String(out);
  return out;
}

icu::UnicodeString from_utf8(std::string_view text) {
  return icu::UnicodeString::fromUTF8(icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
}

// Calls fn(code_point, begin, end) for every scalar in text.
template <typename Fn>
void for_each_scalar(std::string_view text, Fn&& fn) {
  const auto* bytes = reinterpret_cast<const uint8_t*>(text.data());
  const auto length = static_cast<int32_t>(text.size());
  int32_t i = 0;
  while (i < length) {
    const int32_t begin = i;
    UChar32 c = 0;
    U8_NEXT(bytes, i, length, c);
    if (c < 0) c = 0xFFFD;
    fn(c, static_cast<std::size_t>(begin), static_cast<std::size_t>(i));
  }
}

}  // namespace

std::string nfc(std::string_view text) {
  UErrorCode status = U_ZERO_ERROR;
  icu::UnicodeString normalized = nfc_instance().normalize(from_utf8(text), status);
  if (U_FAILURE(status)) {
    fail(ErrorKind::Format, std::string("NFC normalization failed: ") + u_errorName(status));
  }
  return to_utf8(normalized);
}

std::string fold_case(std::string_view text) {
  icu::UnicodeString s = from_utf8(text);
  s.foldCase(U_FOLD_CASE_DEFAULT);
  UErrorCode status = U_ZERO_ERROR;
  icu::UnicodeString normalized = nfc_instance().normalize(s, status);
  if (U_FAILURE(status)) {
    fail(ErrorKind::Format, std::string("NFC normalization failed: ") + u_errorName(status));
  }
  return to_utf8(normalized);
}

std::vector<std::string> split_whitespace(std::string_view text) {
  std::vector<std::string> out;
  std::size_t word_begin = std::string_view::npos;
  for_each_scalar(text, [&](UChar32 c, std::size_t begin, std::size_t) {
    if (u_isUWhiteSpace(c)) {
      if (word_begin != std::string_view::npos) {
        out.emplace_back(text.substr(word_begin, begin - word_begin));
        word_begin = std::string_view::npos;
      }
    } else if (word_begin == std::string_view::npos) {
      word_begin = begin;
    }
  });
  if (word_begin != std::string_view::npos) out.emplace_back(text.substr(word_begin));
  return out;
}

std::vector<std::string> split_codepoints(std::string_view text) {
  std::vector<std::string> out;
  for_each_scalar(text, [&](UChar32 c, std::size_t begin, std::size_t end) {
    if (!u_isUWhiteSpace(c)) out.emplace_back(text.substr(begin, end - begin));
  });
  return out;
}

std::string strip_punctuation(std::string_view word) {
  std::size_t keep_begin = word.size();
  std::size_t keep_end = 0;
  for_each_scalar(word, [&](UChar32 c, std::size_t begin, std::size_t end) {
    if (!u_ispunct(c)) {
      if (keep_begin == word.size()) keep_begin = begin;
      keep_end = end;
    }
  });
  if (keep_begin >= keep_end) return {};
  return std::string(word.substr(keep_begin, keep_end - keep_begin));
}

bool is_valid_utf8(std::string_view text) {
  bool ok = true;
  const auto* bytes = reinterpret_cast<const uint8_t*>(text.data());
  const auto length = static_cast<int32_t>(text.size());
  int32_t i = 0;
  while (i < length && ok) {
    UChar32 c = 0;
    U8_NEXT(bytes, i, length, c);
    ok = c >= 0;
  }
  return ok;
}

}  // namespace lexrag::unicode
