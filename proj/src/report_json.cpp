#include "kgrat/report_json.hpp"

#include "kgrat/error.hpp"

namespace kgrat {
namespace {

constexpr const char* kForwardArrow = "→";
constexpr const char* kReverseArrow = "←";

EntityId require_entity(const KnowledgeGraph& g, const std::string& label) {
  if (const auto e = g.entity_by_exact_label(label)) return *e;
  throw LookupError("unknown entity label '" + label + "'");
}

}  // namespace

ordered_json path_to_json(const ReasoningPath& p, const KnowledgeGraph& g) {
  ordered_json steps = ordered_json::array();
  for (const auto& s : p.steps) {
    steps.push_back({g.relation_label(s.relation),
                     s.direction == Direction::kForward ? kForwardArrow : kReverseArrow,
                     g.entity_label(s.entity)});
  }
  ordered_json j;
  j["start"] = g.entity_label(p.start);
  j["steps"] = std::move(steps);
  j["cost"] = p.cost();
  j["complete"] = p.complete;
  return j;
}

ReasoningPath path_from_json(const ordered_json& j, const KnowledgeGraph& g) {
  ReasoningPath p;
  p.start = require_entity(g, j.at("start").get<std::string>());
  p.end = p.start;
  for (const auto& step : j.at("steps")) {
    const auto rel = g.relation_by_label(step.at(0).get<std::string>());
    if (!rel) throw LookupError("unknown relation label in path");
    const auto arrow = step.at(1).get<std::string>();
    if (arrow != kForwardArrow && arrow != kReverseArrow) {
      throw LookupError("bad direction tag '" + arrow + "'");
    }
    const auto e = require_entity(g, step.at(2).get<std::string>());
    p.steps.push_back({*rel, arrow == kForwardArrow ? Direction::kForward : Direction::kReverse, e});
    p.end = e;
  }
  p.complete = j.at("complete").get<bool>();
  return p;
}

ordered_json report_to_json(const SearchReport& r, const KnowledgeGraph& g) {
  ordered_json paths = ordered_json::array();
  for (const auto& p : r.paths) paths.push_back(path_to_json(p, g));
  ordered_json j;
  j["paths"] = std::move(paths);
  j["nodes_expanded"] = r.nodes_expanded;
  j["queue_pushes"] = r.queue_pushes;
  j["wall_time_ms"] = std::chrono::duration<double, std::milli>(r.wall_time).count();
  return j;
}

}  // namespace kgrat
