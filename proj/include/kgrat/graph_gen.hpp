#pragma once

#include <cstddef>
#include <cstdint>

#include "kgrat/kg_store.hpp"

namespace kgrat::gen {

// Entities are labelled "n<i>" and relations "r<j>". Ids follow the
// builder's interning order, so use entity_by_label("n<i>") to find node i.

// Preferential attachment: each new node links to `edges_per_node` distinct
// earlier nodes picked with probability proportional to degree. Edge
// direction and relation are drawn at random.
KnowledgeGraph barabasi_albert(std::size_t nodes, std::size_t edges_per_node,
                               std::size_t relations, std::uint64_t seed);

// `edges` directed triples with uniformly random endpoints (no self loops).
KnowledgeGraph uniform_random(std::size_t nodes, std::size_t edges, std::size_t relations,
                              std::uint64_t seed);

// n0 -r0-> n1 -r0-> ... -> n<length>.
KnowledgeGraph chain(std::size_t length);

// `width` parallel two-hop routes n0 -> m<i> -> n1.
KnowledgeGraph diamond(std::size_t width);

}  // namespace kgrat::gen
