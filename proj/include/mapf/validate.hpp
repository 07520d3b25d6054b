#pragma once

#include <optional>
#include <string>

#include "mapf/roadmap.hpp"

namespace mapf {

enum class ViolationKind {
  agent_count_mismatch,
  unknown_vertex,
  invalid_transition,  // neither a wait nor a move along an existing edge
  vertex_conflict,
  swap_conflict,
  start_mismatch,
  goal_mismatch,
  empty_plan,
};

inline const char* to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::agent_count_mismatch: return "agent-count-mismatch";
    case ViolationKind::unknown_vertex: return "unknown-vertex";
    case ViolationKind::invalid_transition: return "invalid-transition";
    case ViolationKind::vertex_conflict: return "vertex-conflict";
    case ViolationKind::swap_conflict: return "swap-conflict";
    case ViolationKind::start_mismatch: return "start-mismatch";
    case ViolationKind::goal_mismatch: return "goal-mismatch";
    case ViolationKind::empty_plan: return "empty-plan";
  }
  return "unknown";
}

struct MoveViolation {
  ViolationKind kind;
  AgentId agent = 0;
  AgentId other = 0;  // second agent for conflicts, otherwise equal to agent
};

struct PlanViolation {
  ViolationKind kind;
  std::size_t step = 0;  // index of the later configuration of the offending pair
  AgentId agent = 0;
  AgentId other = 0;

  std::string describe() const {
    std::string s = std::string(to_string(kind)) + " at step " + std::to_string(step) + " (agent " +
                    std::to_string(agent);
    if (other != agent) s += ", agent " + std::to_string(other);
    return s + ")";
  }
};

// Checks one synchronous composite move. Following is allowed; vertex
// collisions and swaps along an edge are not. Reports the earliest violation.
inline std::optional<MoveViolation> validate_move(const Configuration& from, const Configuration& to,
                                                  const Roadmap& map) {
  if (from.size() != to.size()) return MoveViolation{ViolationKind::agent_count_mismatch};
  const std::size_t k = from.size();
  for (std::size_t i = 0; i < k; ++i) {
    if (!map.contains(from[i]) || !map.contains(to[i])) return MoveViolation{ViolationKind::unknown_vertex, i, i};
    if (from[i] != to[i] && !map.has_edge(from[i], to[i])) {
      return MoveViolation{ViolationKind::invalid_transition, i, i};
    }
  }
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) {
      if (to[i] == to[j]) return MoveViolation{ViolationKind::vertex_conflict, i, j};
      if (from[i] != to[i] && to[i] == from[j] && to[j] == from[i]) {
        return MoveViolation{ViolationKind::swap_conflict, i, j};
      }
    }
  }
  return std::nullopt;
}

inline std::optional<PlanViolation> validate_plan(const Plan& plan, const Assignment& assignment,
                                                  const Roadmap& map) {
  if (plan.steps.empty()) return PlanViolation{ViolationKind::empty_plan};
  const auto& first = plan.steps.front();
  if (first.size() != assignment.agent_count()) return PlanViolation{ViolationKind::agent_count_mismatch};
  for (std::size_t i = 0; i < first.size(); ++i) {
    if (first[i] != assignment.starts[i]) return PlanViolation{ViolationKind::start_mismatch, 0, i, i};
  }
  for (std::size_t i = 0; i < first.size(); ++i) {
    if (!map.contains(first[i])) return PlanViolation{ViolationKind::unknown_vertex, 0, i, i};
    for (std::size_t j = i + 1; j < first.size(); ++j) {
      if (first[i] == first[j]) return PlanViolation{ViolationKind::vertex_conflict, 0, i, j};
    }
  }
  for (std::size_t t = 1; t < plan.steps.size(); ++t) {
    if (auto v = validate_move(plan.steps[t - 1], plan.steps[t], map)) {
      return PlanViolation{v->kind, t, v->agent, v->other};
    }
  }
  const auto& last = plan.steps.back();
  for (std::size_t i = 0; i < last.size(); ++i) {
    if (last[i] != assignment.goals[i]) {
      return PlanViolation{ViolationKind::goal_mismatch, plan.steps.size() - 1, i, i};
    }
  }
  return std::nullopt;
}

}  // namespace mapf
