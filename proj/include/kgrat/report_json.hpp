#pragma once

#include <json.hpp>

#include "kgrat/kg_store.hpp"
#include "kgrat/multipath_astar.hpp"

namespace kgrat {

using ordered_json = nlohmann::ordered_json;

// {"start":label,"steps":[[rel,"→"|"←",entity],...],"cost":n,"complete":b}
ordered_json path_to_json(const ReasoningPath& p, const KnowledgeGraph& g);

// Inverse of path_to_json; throws LookupError on unknown labels.
ReasoningPath path_from_json(const ordered_json& j, const KnowledgeGraph& g);

// {"paths":[...],"nodes_expanded":n,"queue_pushes":n,"wall_time_ms":x}
ordered_json report_to_json(const SearchReport& r, const KnowledgeGraph& g);

}  // namespace kgrat
