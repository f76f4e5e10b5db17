#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "kgrat/ids.hpp"
#include "kgrat/kg_store.hpp"

namespace kgrat {

struct Mention {
  std::string surface;
  std::size_t begin = 0;  // byte offsets into the source text
  std::size_t end = 0;

  friend bool operator==(const Mention&, const Mention&) = default;
};

enum class MentionSource { kQuestion, kAnswer };

struct LinkedEntitySet {
  std::vector<EntityId> entities;
  MentionSource source = MentionSource::kQuestion;
};

// Canonicalized display labels of a graph, mapped to the entities carrying
// them. Homonyms ("Apple#1", "Apple#2") share one key.
class Lexicon {
 public:
  explicit Lexicon(const KnowledgeGraph& g);

  const std::vector<EntityId>* candidates(std::string_view surface) const;
  std::size_t max_words() const { return max_words_; }
  std::size_t size() const { return by_label_.size(); }

 private:
  std::unordered_map<std::string, std::vector<EntityId>> by_label_;
  std::size_t max_words_ = 0;
};

// Dictionary longest-match over word-aligned spans. Overlaps go to the
// longer match, then the earlier one. Result is in text order.
std::vector<Mention> extract_mentions(std::string_view text, const Lexicon& lexicon);

// Resolves each mention to an entity. Homonyms are disambiguated by the
// number of content tokens shared between `context` and the candidate's
// 1-hop neighbor labels; ties go to the lower id.
LinkedEntitySet link(const std::vector<Mention>& mentions, const KnowledgeGraph& g,
                     const Lexicon& lexicon, std::string_view context,
                     MentionSource source = MentionSource::kQuestion);

// Token-overlap score used by link(); exposed for tests.
std::size_t context_overlap(const KnowledgeGraph& g, EntityId candidate,
                            std::string_view context);

}  // namespace kgrat
