#include "kgrat/graph_gen.hpp"

#include <algorithm>
#include <string>
#include <vector>

#include "kgrat/error.hpp"
#include "kgrat/random.hpp"

namespace kgrat::gen {
namespace {

std::string node(std::size_t i) { return "n" + std::to_string(i); }
std::string rel(std::size_t j) { return "r" + std::to_string(j); }

void add_edge(GraphBuilder& b, Rng& rng, std::size_t u, std::size_t v, std::size_t relations) {
  const auto r = rel(rng.below(relations));
  if (rng.below(2) == 0) {
    b.add(node(u), r, node(v));
  } else {
    b.add(node(v), r, node(u));
  }
}

}  // namespace

KnowledgeGraph barabasi_albert(std::size_t nodes, std::size_t m, std::size_t relations,
                               std::uint64_t seed) {
  if (nodes < 2 || m == 0 || relations == 0) throw ConfigError("invalid generator sizes");
  Rng rng(seed);
  GraphBuilder b;
  std::vector<std::size_t> ends;  // one entry per edge endpoint
  const std::size_t core = std::min(nodes, m + 1);
  for (std::size_t u = 1; u < core; ++u) {
    for (std::size_t v = 0; v < u; ++v) {
      add_edge(b, rng, u, v, relations);
      ends.push_back(u);
      ends.push_back(v);
    }
  }
  for (std::size_t u = core; u < nodes; ++u) {
    std::vector<std::size_t> targets;
    while (targets.size() < std::min(m, u)) {
      const auto v = ends[rng.below(ends.size())];
      if (std::find(targets.begin(), targets.end(), v) == targets.end()) targets.push_back(v);
    }
    for (const auto v : targets) {
      add_edge(b, rng, u, v, relations);
      ends.push_back(u);
      ends.push_back(v);
    }
  }
  return b.build();
}

KnowledgeGraph uniform_random(std::size_t nodes, std::size_t edges, std::size_t relations,
                              std::uint64_t seed) {
  if (nodes < 2 || relations == 0) throw ConfigError("invalid generator sizes");
  Rng rng(seed);
  GraphBuilder b;
  for (std::size_t i = 0; i < edges; ++i) {
    const auto u = rng.below(nodes);
    auto v = rng.below(nodes - 1);
    if (v >= u) ++v;
    b.add(node(u), rel(rng.below(relations)), node(v));
  }
  return b.build();
}

KnowledgeGraph chain(std::size_t length) {
  GraphBuilder b;
  for (std::size_t i = 0; i < length; ++i) b.add(node(i), rel(0), node(i + 1));
  return b.build();
}

KnowledgeGraph diamond(std::size_t width) {
  GraphBuilder b;
  for (std::size_t i = 0; i < width; ++i) {
    const auto mid = "m" + std::to_string(i);
    b.add(node(0), rel(0), mid);
    b.add(mid, rel(1), node(1));
  }
  return b.build();
}

}  // namespace kgrat::gen
