#include "valueprobe/text.hpp"

#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include <stdexcept>

namespace valueprobe::text {
namespace {

struct CodePoint {
  UChar32 value;
  std::size_t offset;
  std::size_t length;
};

std::vector<CodePoint> decode(std::string_view s) {
  std::vector<CodePoint> out;
  out.reserve(s.size());
  const auto* bytes = reinterpret_cast<const uint8_t*>(s.data());
  const auto len = static_cast<int32_t>(s.size());
  int32_t i = 0;
  while (i < len) {
    const int32_t start = i;
    UChar32 c = 0;
    U8_NEXT(bytes, i, len, c);
    out.push_back({c, static_cast<std::size_t>(start), static_cast<std::size_t>(i - start)});
  }
  return out;
}

UChar32 fold(UChar32 c) { return c < 0 ? c : u_foldCase(c, U_FOLD_CASE_DEFAULT); }

bool is_word_char(UChar32 c) {
  if (c < 0) return false;
  if (u_hasBinaryProperty(c, UCHAR_ALPHABETIC) || u_isdigit(c)) return true;
  const auto type = u_charType(c);
  return type == U_NON_SPACING_MARK || type == U_COMBINING_SPACING_MARK ||
         type == U_ENCLOSING_MARK;
}

bool is_space(UChar32 c) { return c >= 0 && u_isUWhiteSpace(c); }

bool is_trim_char(UChar32 c) { return c >= 0 && !is_word_char(c) && !is_space(c); }

}  // namespace

bool is_valid_utf8(std::string_view s) {
  for (const auto& cp : decode(s)) {
    if (cp.value < 0) return false;
  }
  return true;
}

std::size_t count_occurrences(std::string_view haystack, std::string_view needle) {
  if (needle.empty()) return 0;
  std::size_t count = 0;
  for (auto pos = haystack.find(needle); pos != std::string_view::npos;
       pos = haystack.find(needle, pos + needle.size())) {
    ++count;
  }
  return count;
}

std::vector<ByteSpan> find_folded(std::string_view haystack, std::string_view needle) {
  std::vector<ByteSpan> spans;
  const auto hay = decode(haystack);
  const auto pat = decode(needle);
  if (pat.empty() || pat.size() > hay.size()) return spans;

  std::size_t i = 0;
  while (i + pat.size() <= hay.size()) {
    bool match = true;
    for (std::size_t k = 0; k < pat.size(); ++k) {
      if (fold(hay[i + k].value) != fold(pat[k].value)) {
        match = false;
        break;
      }
    }
    if (match) {
      const auto& last = hay[i + pat.size() - 1];
      spans.push_back({hay[i].offset, last.offset + last.length});
      i += pat.size();
    } else {
      ++i;
    }
  }
  return spans;
}

std::string fold_case(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (const auto& cp : decode(s)) {
    if (cp.value < 0) {
      out.append(s.substr(cp.offset, cp.length));
      continue;
    }
    char buf[U8_MAX_LENGTH];
    int32_t n = 0;
    U8_APPEND_UNSAFE(reinterpret_cast<uint8_t*>(buf), n, fold(cp.value));
    out.append(buf, static_cast<std::size_t>(n));
  }
  return out;
}

bool equals_folded(std::string_view a, std::string_view b) {
  const auto da = decode(a);
  const auto db = decode(b);
  if (da.size() != db.size()) return false;
  for (std::size_t i = 0; i < da.size(); ++i) {
    if (fold(da[i].value) != fold(db[i].value)) return false;
  }
  return true;
}

bool is_single_word(std::string_view s) {
  if (s.empty()) return false;
  for (const auto& cp : decode(s)) {
    if (cp.value < 0 || is_space(cp.value)) return false;
  }
  return true;
}

std::vector<Token> tokenize(std::string_view s) {
  std::vector<Token> tokens;
  const auto cps = decode(s);
  std::size_t i = 0;
  while (i < cps.size()) {
    while (i < cps.size() && is_space(cps[i].value)) ++i;
    if (i == cps.size()) break;
    const std::size_t first = i;
    while (i < cps.size() && !is_space(cps[i].value)) ++i;
    const std::size_t last = i;  // one past

    std::size_t core_first = first;
    std::size_t core_last = last;
    // "[MASK]" is bracketed punctuation but must survive as a whole core.
    const auto full_begin = cps[first].offset;
    const auto full_end = cps[last - 1].offset + cps[last - 1].length;
    const auto full = s.substr(full_begin, full_end - full_begin);
    const auto mask_at = full.find(kMask);
    if (mask_at != std::string_view::npos) {
      tokens.push_back({{full_begin, full_end},
                        {full_begin + mask_at, full_begin + mask_at + kMask.size()}});
      continue;
    }
    while (core_first < core_last && is_trim_char(cps[core_first].value)) ++core_first;
    while (core_last > core_first && is_trim_char(cps[core_last - 1].value)) --core_last;

    Token tok;
    tok.full = {full_begin, full_end};
    if (core_first == core_last) {
      tok.core = {full_end, full_end};
    } else {
      tok.core = {cps[core_first].offset, cps[core_last - 1].offset + cps[core_last - 1].length};
    }
    tokens.push_back(tok);
  }
  return tokens;
}

std::size_t token_at(const std::vector<Token>& tokens, std::size_t byte_offset) {
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (byte_offset >= tokens[i].full.begin && byte_offset < tokens[i].full.end) return i;
  }
  return static_cast<std::size_t>(-1);
}

std::string replace_span(std::string_view s, ByteSpan span, std::string_view with) {
  if (span.begin > span.end || span.end > s.size()) {
    throw std::out_of_range("replace_span: span outside string");
  }
  std::string out;
  out.reserve(s.size() - span.size() + with.size());
  out.append(s.substr(0, span.begin));
  out.append(with);
  out.append(s.substr(span.end));
  return out;
}

std::string fill_mask(std::string_view masked, std::string_view fill) {
  const auto pos = masked.find(kMask);
  if (pos == std::string_view::npos) return std::string(masked);
  return replace_span(masked, {pos, pos + kMask.size()}, fill);
}

bool is_word_bounded(std::string_view s, ByteSpan span) {
  const auto cps = decode(s);
  for (std::size_t i = 0; i < cps.size(); ++i) {
    if (cps[i].offset + cps[i].length == span.begin && is_word_char(cps[i].value)) return false;
    if (cps[i].offset == span.end && is_word_char(cps[i].value)) return false;
  }
  return true;
}

}  // namespace valueprobe::text
