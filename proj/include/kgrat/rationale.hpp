#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kgrat/kg_store.hpp"
#include "kgrat/multipath_astar.hpp"

namespace kgrat {

// "a--rel-->b" for forward steps, "a<--rel--b" for reverse steps. Entity
// labels drop their homonym suffix.
std::string verbalize(const ReasoningPath& p, const KnowledgeGraph& g);

// Reconstructs a path from its verbalized form by walking the graph. The
// first match in neighbor order wins when labels are ambiguous.
std::optional<ReasoningPath> parse_verbalized(std::string_view text, const KnowledgeGraph& g,
                                              Traversal t = Traversal::kBoth);

namespace prompts {

inline constexpr std::string_view kSystem =
    "You are a cautious assistant. You carefully follow instructions. You are helpful and "
    "harmless and you follow ethical guidelines and promote positive behavior.";

// A chat-formatted prompt. text() is the single-string template instance.
struct Prompt {
  std::string system;
  std::string separator;
  std::string user;

  std::string text() const { return system + separator + user; }
};

Prompt rationale(std::string_view question, std::string_view answer,
                 const std::vector<std::string>& verbalized_paths);

// Throws ConfigError when `fact` is empty.
Prompt factcheck(std::string_view fact);

Prompt answer(std::string_view question, const std::vector<std::string>& options);

Prompt trace_quality(std::string_view question, std::string_view rationale);

}  // namespace prompts

std::string build_rationale_prompt(std::string_view question, std::string_view answer,
                                   const std::vector<std::string>& verbalized_paths);
std::string build_factcheck_prompt(std::string_view fact);

}  // namespace kgrat
