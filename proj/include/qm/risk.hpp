#pragma once

#include <vector>

#include "qm/model.hpp"
#include "qm/quasimetric.hpp"

namespace qm {

/// Sorted list of state ids.
using StateSet = std::vector<StateId>;

struct RiskySets {
    StateSet weakly_risky;   // K'
    StateSet risky;          // K
    StateSet epsilon_risky;  // K_eps
};

struct RiskReport {
    StateId goal = 0;
    double epsilon = 0.0;
    StateSet reaching;  // Q
    StateSet prison;    // J = X - Q
    StateSet weakly_risky;
    StateSet risky;
    StateSet epsilon_risky;
};

/// States with a directed path to `goal` (backward traversal of the graph).
StateSet reaching_set(const WeightedGraph& graph, StateId goal);

StateSet prison_set(const StateSet& reaching, std::size_t n_states);

/// Weakly risky, risky, and epsilon-risky states relative to a prison.
/// Only applicable (state, action) pairs enter the "for every action" test.
RiskySets risky_sets(const MdpModel& model, const StateSet& prison, double epsilon);

RiskReport risk_report(const MdpModel& model, const WeightedGraph& graph, StateId goal, double epsilon);

/// Sets d(x, goal) = omega for every listed state; nothing is re-propagated.
QuasiDistanceField apply_risk_override(const QuasiDistanceField& d, const StateSet& risky, double omega);

/// States with finite value strictly below k.
StateSet sublevel_set(const QuasiDistanceField& d, double k);

}  // namespace qm
