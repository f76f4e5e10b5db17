#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "kgrat/ids.hpp"

namespace kgrat {

struct Triple {
  EntityId subject;
  RelationId relation;
  EntityId object;

  friend bool operator==(const Triple&, const Triple&) = default;
  friend auto operator<=>(const Triple&, const Triple&) = default;
};

// Direction in which a stored triple was traversed.
enum class Direction : std::uint8_t { kForward, kReverse };

// Which adjacency lists a neighbor scan visits.
enum class Traversal : std::uint8_t { kOutgoing, kIncoming, kBoth };

Traversal reversed(Traversal t);
std::string_view to_string(Traversal t);
Traversal parse_traversal(std::string_view s);

// One adjacency slot. `entity` is the far end of the edge.
struct AdjacentEdge {
  RelationId relation;
  EntityId entity;

  friend bool operator==(const AdjacentEdge&, const AdjacentEdge&) = default;
};

struct Neighbor {
  RelationId relation;
  EntityId entity;
  Direction direction;

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

// Immutable directed multigraph of interned (subject, relation, object)
// triples. Adjacency is kept in CSR form in both directions; each entity's
// slice is sorted by (relation id, entity id).
class KnowledgeGraph {
 public:
  KnowledgeGraph() = default;

  // Builds from already-interned tables. Triples are deduplicated; every id
  // must be in range.
  KnowledgeGraph(std::vector<std::string> entity_labels,
                 std::vector<std::string> relation_labels,
                 std::vector<Triple> triples);

  std::size_t entity_count() const { return entity_labels_.size(); }
  std::size_t relation_count() const { return relation_labels_.size(); }
  std::size_t triple_count() const { return out_edges_.size(); }

  const std::string& entity_label(EntityId e) const;
  const std::string& relation_label(RelationId r) const;
  const std::vector<std::string>& entity_labels() const { return entity_labels_; }
  const std::vector<std::string>& relation_labels() const {
    return relation_labels_;
  }

  bool valid(EntityId e) const { return e.value() < entity_count(); }
  bool valid(RelationId r) const { return r.value() < relation_count(); }

  // Canonicalized exact-match lookup. When several entities canonicalize to
  // the same key the lowest id is returned.
  std::optional<EntityId> entity_by_label(std::string_view label) const;
  std::optional<RelationId> relation_by_label(std::string_view label) const;

  // Byte-exact match against the stored (trimmed, NFC) label.
  std::optional<EntityId> entity_by_exact_label(std::string_view label) const;

  // Every entity whose label canonicalizes to the same key, ascending ids.
  std::vector<EntityId> entities_by_label(std::string_view label) const;

  std::span<const AdjacentEdge> out_edges(EntityId e) const;
  std::span<const AdjacentEdge> in_edges(EntityId e) const;

  // Sorted by relation then entity; kBoth is outgoing followed by incoming.
  std::vector<Neighbor> neighbors(EntityId e, Traversal t) const;

  // Allocation-free variant of neighbors() with the same visiting order.
  template <typename Fn>
  void for_each_neighbor(EntityId e, Traversal t, Fn&& fn) const {
    if (t != Traversal::kIncoming) {
      for (const auto& a : out_edges(e)) fn(Neighbor{a.relation, a.entity, Direction::kForward});
    }
    if (t != Traversal::kOutgoing) {
      for (const auto& a : in_edges(e)) fn(Neighbor{a.relation, a.entity, Direction::kReverse});
    }
  }

  bool has_triple(const Triple& t) const;

  // All triples in (subject, relation, object) id order.
  std::vector<Triple> triples() const;

  // Versioned binary snapshot; deserialize(serialize(g)) reproduces g with
  // identical ids.
  std::string serialize() const;
  static KnowledgeGraph deserialize(std::string_view bytes);
  static bool looks_like_snapshot(std::string_view bytes);

 private:
  void check(EntityId e) const;

  std::vector<std::string> entity_labels_;
  std::vector<std::string> relation_labels_;
  std::unordered_map<std::string, std::vector<EntityId>> entity_index_;
  std::unordered_map<std::string, RelationId> relation_index_;
  std::vector<std::uint32_t> out_offsets_{0};
  std::vector<AdjacentEdge> out_edges_;
  std::vector<std::uint32_t> in_offsets_{0};
  std::vector<AdjacentEdge> in_edges_;
};

// Collects labelled triples and interns them in first-appearance order of
// the deduplicated, lexicographically sorted triple list, so the id
// assignment does not depend on insertion order.
class GraphBuilder {
 public:
  // Labels are trimmed and NFC-normalized; throws LoadError on empty fields
  // or invalid UTF-8.
  void add(std::string_view subject, std::string_view relation,
           std::string_view object);

  std::size_t size() const { return rows_.size(); }

  KnowledgeGraph build() const;

 private:
  std::vector<std::tuple<std::string, std::string, std::string>> rows_;
};

// Parses the tab-separated triple format. Lines starting with '#' and empty
// lines are ignored; any other line must carry exactly three non-empty
// fields.
KnowledgeGraph load_graph(std::istream& in);
KnowledgeGraph load_graph_text(std::string_view text);

// Accepts either a TSV triple file or a binary snapshot.
KnowledgeGraph load_graph_file(const std::filesystem::path& path);

void save_snapshot(const KnowledgeGraph& g, const std::filesystem::path& path);

}  // namespace kgrat
