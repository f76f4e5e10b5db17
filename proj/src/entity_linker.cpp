#include "kgrat/entity_linker.hpp"

#include <algorithm>
#include <unordered_set>

#include "kgrat/text.hpp"

namespace kgrat {

Lexicon::Lexicon(const KnowledgeGraph& g) {
  for (std::uint32_t i = 0; i < g.entity_count(); ++i) {
    const auto& label = g.entity_label(EntityId{i});
    const auto display = text::display_label(label);
    by_label_[text::canonicalize(display)].push_back(EntityId{i});
    max_words_ = std::max(max_words_, text::word_spans(display).size());
  }
}

const std::vector<EntityId>* Lexicon::candidates(std::string_view surface) const {
  const auto it = by_label_.find(text::canonicalize(surface));
  return it == by_label_.end() ? nullptr : &it->second;
}

std::vector<Mention> extract_mentions(std::string_view text, const Lexicon& lexicon) {
  const auto words = text::word_spans(text);
  std::vector<Mention> hits;
  for (std::size_t i = 0; i < words.size(); ++i) {
    const auto last = std::min(words.size(), i + lexicon.max_words());
    for (std::size_t j = i; j < last; ++j) {
      const auto surface = text.substr(words[i].begin, words[j].end - words[i].begin);
      if (lexicon.candidates(surface) != nullptr) {
        hits.push_back({std::string(surface), words[i].begin, words[j].end});
      }
    }
  }

  std::stable_sort(hits.begin(), hits.end(), [](const Mention& a, const Mention& b) {
    const auto la = a.end - a.begin, lb = b.end - b.begin;
    if (la != lb) return la > lb;
    return a.begin < b.begin;
  });
  std::vector<Mention> chosen;
  for (auto& m : hits) {
    const bool overlaps = std::any_of(chosen.begin(), chosen.end(), [&](const Mention& c) {
      return m.begin < c.end && c.begin < m.end;
    });
    if (!overlaps) chosen.push_back(std::move(m));
  }
  std::sort(chosen.begin(), chosen.end(),
            [](const Mention& a, const Mention& b) { return a.begin < b.begin; });
  return chosen;
}

std::size_t context_overlap(const KnowledgeGraph& g, EntityId candidate,
                            std::string_view context) {
  const auto ctx = text::content_tokens(context);
  std::unordered_set<std::string> neighborhood;
  g.for_each_neighbor(candidate, Traversal::kBoth, [&](const Neighbor& n) {
    for (auto& tok : text::content_tokens(text::display_label(g.entity_label(n.entity)))) {
      neighborhood.insert(std::move(tok));
    }
  });
  std::size_t score = 0;
  for (const auto& tok : ctx) score += neighborhood.contains(tok) ? 1 : 0;
  return score;
}

LinkedEntitySet link(const std::vector<Mention>& mentions, const KnowledgeGraph& g,
                     const Lexicon& lexicon, std::string_view context,
                     MentionSource source) {
  LinkedEntitySet out;
  out.source = source;
  for (const auto& m : mentions) {
    const auto* cands = lexicon.candidates(m.surface);
    if (cands == nullptr || cands->empty()) continue;
    EntityId best = cands->front();
    if (cands->size() > 1) {
      std::size_t best_score = 0;
      bool first = true;
      for (const auto c : *cands) {  // ascending ids, so ties keep the lower one
        const auto s = context_overlap(g, c, context);
        if (first || s > best_score) {
          best = c;
          best_score = s;
          first = false;
        }
      }
    }
    if (std::find(out.entities.begin(), out.entities.end(), best) == out.entities.end()) {
      out.entities.push_back(best);
    }
  }
  return out;
}

}  // namespace kgrat
