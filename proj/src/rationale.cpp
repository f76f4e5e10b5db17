#include "kgrat/rationale.hpp"

#include "kgrat/error.hpp"
#include "kgrat/text.hpp"

namespace kgrat {
namespace {

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out += sep;
    out += parts[i];
  }
  return out;
}

std::string step_text(const KnowledgeGraph& g, const PathStep& s) {
  const auto& rel = g.relation_label(s.relation);
  const auto target = text::display_label(g.entity_label(s.entity));
  std::string out;
  if (s.direction == Direction::kForward) {
    out.append("--").append(rel).append("-->");
  } else {
    out.append("<--").append(rel).append("--");
  }
  out.append(target);
  return out;
}

bool at_step_boundary(std::string_view rest) {
  return rest.empty() || rest.starts_with("--") || rest.starts_with("<--");
}

}  // namespace

std::string verbalize(const ReasoningPath& p, const KnowledgeGraph& g) {
  std::string out(text::display_label(g.entity_label(p.start)));
  for (const auto& s : p.steps) out += step_text(g, s);
  return out;
}

std::optional<ReasoningPath> parse_verbalized(std::string_view input, const KnowledgeGraph& g,
                                              Traversal t) {
  ReasoningPath path;
  auto walk = [&](auto&& self, EntityId at, std::string_view rest) -> bool {
    if (rest.empty()) {
      path.end = at;
      return true;
    }
    bool found = false;
    g.for_each_neighbor(at, t, [&](const Neighbor& n) {
      if (found) return;
      const PathStep step{n.relation, n.direction, n.entity};
      const auto piece = step_text(g, step);
      if (!rest.starts_with(piece) || !at_step_boundary(rest.substr(piece.size()))) return;
      path.steps.push_back(step);
      if (self(self, n.entity, rest.substr(piece.size()))) {
        found = true;
      } else {
        path.steps.pop_back();
      }
    });
    return found;
  };

  for (std::uint32_t i = 0; i < g.entity_count(); ++i) {
    const EntityId e{i};
    const auto label = text::display_label(g.entity_label(e));
    if (!input.starts_with(label) || !at_step_boundary(input.substr(label.size()))) continue;
    path.start = e;
    path.steps.clear();
    if (walk(walk, e, input.substr(label.size()))) return path;
  }
  return std::nullopt;
}

namespace prompts {

Prompt rationale(std::string_view question, std::string_view answer,
                 const std::vector<std::string>& verbalized_paths) {
  std::string user;
  user.append("You are given the question: ").append(question);
  user.append(". The corresponding answer is: ").append(answer);
  user.append(". The reasoning paths are: ").append(join(verbalized_paths, "\n"));
  user.append(
      ". Please provide a detailed explanatory rationale that references these reasoning "
      "paths. If you determine that the reasoning path is irrelevant to the current QA pair, "
      "you may generate rationales based on your own knowledge.");
  return {std::string(kSystem), " ", std::move(user)};
}

Prompt factcheck(std::string_view fact) {
  if (fact.empty()) throw ConfigError("fact-check prompt needs a non-empty fact");
  std::string user =
      "Question: Please determine whether the following statement is correct. You only "
      "answer 'yes' or 'no'. ";
  user.append(fact).append(".");
  return {std::string(kSystem), "\n", std::move(user)};
}

Prompt answer(std::string_view question, const std::vector<std::string>& options) {
  std::string opts;
  for (std::size_t i = 0; i < options.size(); ++i) {
    if (i > 0) opts += ' ';
    opts += '(';
    opts += static_cast<char>('A' + static_cast<int>(i % 26));
    opts += ") ";
    opts += options[i];
  }
  std::string user =
      "You are given a question together with a few options, you should give an explanation "
      "first and then answer the question. Your response should follow the format like "
      "Explanation: ___ Answer: ___\nBelow is the Question and Options: ";
  user.append(question).append(" ").append(opts);
  return {std::string(kSystem), " ", std::move(user)};
}

Prompt trace_quality(std::string_view question, std::string_view rationale) {
  std::string user =
      "You are given a rationale for a question.\nEvaluate the given rationale along five "
      "dimensions—Factual Accuracy, Logical Validity, Coherence, Completeness, and "
      "Interpretability. For each dimension, output True if the rationale is correct or "
      "meets the criterion; otherwise, output False. You should produce a five-element list "
      "in the form like [True,True,True,True,True].\nBelow are the Question ";
  user.append(question).append(" and the Rationales ").append(rationale).append(".");
  return {std::string(kSystem), " ", std::move(user)};
}

}  // namespace prompts

std::string build_rationale_prompt(std::string_view question, std::string_view answer,
                                   const std::vector<std::string>& verbalized_paths) {
  return prompts::rationale(question, answer, verbalized_paths).text();
}

std::string build_factcheck_prompt(std::string_view fact) {
  return prompts::factcheck(fact).text();
}

}  // namespace kgrat
