#include "kgrat/text.hpp"

#include <unicode/normalizer2.h>
#include <unicode/unistr.h>

#include <algorithm>
#include <cstdio>
#include <stdexcept>

namespace kgrat::text {
namespace {

bool is_ascii(std::string_view s) {
  return std::all_of(s.begin(), s.end(),
                     [](char c) { return static_cast<unsigned char>(c) < 0x80; });
}

bool is_ascii_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

std::string_view trim_ascii(std::string_view s) {
  while (!s.empty() && is_ascii_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_ascii_space(s.back())) s.remove_suffix(1);
  return s;
}

const icu::Normalizer2& nfc() {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* n = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status) || n == nullptr) {
    throw std::runtime_error("ICU NFC normalizer unavailable");
  }
  return *n;
}

icu::UnicodeString to_nfc(const icu::UnicodeString& in) {
  UErrorCode status = U_ZERO_ERROR;
  icu::UnicodeString out = nfc().normalize(in, status);
  if (U_FAILURE(status)) throw std::runtime_error("NFC normalization failed");
  return out;
}

}  // namespace

bool is_valid_utf8(std::string_view s) {
  std::size_t i = 0;
  const std::size_t n = s.size();
  while (i < n) {
    const auto c = static_cast<unsigned char>(s[i]);
    std::size_t len = 0;
    std::uint32_t cp = 0;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      len = 2;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      len = 3;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      len = 4;
      cp = c & 0x07;
    } else {
      return false;
    }
    if (i + len > n) return false;
    for (std::size_t k = 1; k < len; ++k) {
      const auto cc = static_cast<unsigned char>(s[i + k]);
      if ((cc & 0xC0) != 0x80) return false;
      cp = (cp << 6) | (cc & 0x3F);
    }
    // Overlong forms, surrogates and out-of-range code points.
    if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) ||
        (len == 4 && cp < 0x10000) || cp > 0x10FFFF ||
        (cp >= 0xD800 && cp <= 0xDFFF)) {
      return false;
    }
    i += len;
  }
  return true;
}

std::string normalize_label(std::string_view s) {
  if (is_ascii(s)) return std::string(trim_ascii(s));
  icu::UnicodeString u = icu::UnicodeString::fromUTF8(
      icu::StringPiece(s.data(), static_cast<int32_t>(s.size())));
  u.trim();
  std::string out;
  to_nfc(u).toUTF8String(out);
  return out;
}

std::string canonicalize(std::string_view s) {
  if (is_ascii(s)) {
    std::string out(trim_ascii(s));
    for (char& c : out) {
      if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    return out;
  }
  icu::UnicodeString u = icu::UnicodeString::fromUTF8(
      icu::StringPiece(s.data(), static_cast<int32_t>(s.size())));
  u.trim();
  icu::UnicodeString folded = to_nfc(u);
  folded.foldCase(U_FOLD_CASE_DEFAULT);
  std::string out;
  to_nfc(folded).toUTF8String(out);
  return out;
}

std::string_view display_label(std::string_view label) {
  const auto hash = label.rfind('#');
  if (hash == std::string_view::npos || hash == 0 || hash + 1 == label.size()) {
    return label;
  }
  const auto suffix = label.substr(hash + 1);
  const bool digits = std::all_of(suffix.begin(), suffix.end(),
                                  [](char c) { return c >= '0' && c <= '9'; });
  return digits ? label.substr(0, hash) : label;
}

std::vector<WordSpan> word_spans(std::string_view s) {
  auto is_word = [](char ch) {
    const auto c = static_cast<unsigned char>(ch);
    return c >= 0x80 || (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') ||
           (c >= 'A' && c <= 'Z');
  };
  std::vector<WordSpan> spans;
  std::size_t i = 0;
  while (i < s.size()) {
    if (!is_word(s[i])) {
      ++i;
      continue;
    }
    const std::size_t begin = i;
    while (i < s.size() && is_word(s[i])) ++i;
    spans.push_back({begin, i});
  }
  return spans;
}

const std::unordered_set<std::string>& stop_words() {
  static const std::unordered_set<std::string> words = {
      "a",     "an",   "the",  "of",    "in",    "on",   "at",    "to",
      "for",   "from", "by",   "with",  "and",   "or",   "but",   "not",
      "is",    "are",  "was",  "were",  "be",    "been", "being", "am",
      "do",    "does", "did",  "has",   "have",  "had",  "it",    "its",
      "this",  "that", "these", "those", "what", "which", "who",  "whom",
      "whose", "when", "where", "why",  "how",   "as",   "into",  "than",
      "then",  "so",   "if",   "can",   "will",  "would", "i",    "you",
      "he",    "she",  "we",   "they",  "s"};
  return words;
}

std::unordered_set<std::string> content_tokens(std::string_view s) {
  std::unordered_set<std::string> out;
  const auto& stops = stop_words();
  for (const auto& span : word_spans(s)) {
    std::string tok = canonicalize(s.substr(span.begin, span.end - span.begin));
    if (!tok.empty() && !stops.contains(tok)) out.insert(std::move(tok));
  }
  return out;
}

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace kgrat::text
