#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace kgrat::text {

bool is_valid_utf8(std::string_view s);

// Trimmed, NFC-normalized form. This is what the graph stores as a label.
std::string normalize_label(std::string_view s);

// Lookup key: normalize_label followed by Unicode default case folding.
std::string canonicalize(std::string_view s);

// Strips a homonym suffix of the form "#<digits>" ("Apple#2" -> "Apple").
std::string_view display_label(std::string_view label);

struct WordSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
};

// Byte spans of maximal runs of word characters. ASCII letters and digits
// are word characters, as is every byte of a multi-byte UTF-8 sequence;
// everything else (whitespace, ASCII punctuation) separates words.
std::vector<WordSpan> word_spans(std::string_view s);

// Canonicalized words of `s` with stop words removed.
std::unordered_set<std::string> content_tokens(std::string_view s);

const std::unordered_set<std::string>& stop_words();

std::uint64_t fnv1a64(std::string_view bytes,
                      std::uint64_t seed = 0xcbf29ce484222325ULL);

std::string hex64(std::uint64_t v);

}  // namespace kgrat::text
