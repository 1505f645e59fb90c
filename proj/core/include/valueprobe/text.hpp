#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

// UTF-8 helpers shared by the corpus and localization modules. Case-insensitive
// comparisons use simple (1:1) Unicode case folding so that byte offsets found
// in folded text map straight back onto the original sentence.

namespace valueprobe::text {

inline constexpr std::string_view kMask = "[MASK]";

struct ByteSpan {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const noexcept { return end - begin; }
  bool operator==(const ByteSpan&) const = default;
};

/// A whitespace-delimited token. `core` drops leading and trailing punctuation,
/// so "wichtig." has core "wichtig".
struct Token {
  ByteSpan full;
  ByteSpan core;
};

bool is_valid_utf8(std::string_view s);

std::size_t count_occurrences(std::string_view haystack, std::string_view needle);

/// Byte positions of every non-overlapping occurrence of `needle`, compared
/// after case folding both sides.
std::vector<ByteSpan> find_folded(std::string_view haystack, std::string_view needle);

std::string fold_case(std::string_view s);

bool equals_folded(std::string_view a, std::string_view b);

bool is_single_word(std::string_view s);

std::vector<Token> tokenize(std::string_view s);

/// Index of the token whose bytes contain `span.begin`, or npos.
std::size_t token_at(const std::vector<Token>& tokens, std::size_t byte_offset);

std::string replace_span(std::string_view s, ByteSpan span, std::string_view with);

/// Replaces the single mask placeholder in `masked` with `fill`.
std::string fill_mask(std::string_view masked, std::string_view fill);

/// True when `span` starts and ends on word boundaries of `s`.
bool is_word_bounded(std::string_view s, ByteSpan span);

}  // namespace valueprobe::text
