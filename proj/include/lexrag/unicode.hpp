#pragma once

#include <string>
#include <string_view>
#include <vector>

// UTF-8 helpers backed by ICU. All inputs are expected to be valid UTF-8;
// invalid sequences are replaced with U+FFFD.
namespace lexrag::unicode {

std::string nfc(std::string_view text);

/// Full Unicode case folding followed by NFC.
std::string fold_case(std::string_view text);

/// Splits on Unicode whitespace (White_Space property). Empty pieces are dropped.
std::vector<std::string> split_whitespace(std::string_view text);

/// One string per Unicode scalar value, whitespace scalars skipped.
std::vector<std::string> split_codepoints(std::string_view text);

/// Removes leading and trailing characters of general category P*.
std::string strip_punctuation(std::string_view word);

bool is_valid_utf8(std::string_view text);

}  // namespace lexrag::unicode
