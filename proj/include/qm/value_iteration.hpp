#pragma once

#include <vector>

#include "qm/exec.hpp"
#include "qm/model.hpp"
#include "qm/policy.hpp"

namespace qm {

struct ValueField {
    std::vector<double> values;  // +inf for states with no finite value
    double gamma = 1.0;
    double residual = 0.0;
    long iterations = 0;
    bool converged = false;
    /// States declared +inf by the undiscounted divergence detector.
    std::vector<StateId> diverged;
};

struct ViOptions {
    double gamma = 1.0;
    double tol = 1e-9;
    long max_sweeps = 1'000'000;
    Exec exec = Exec::parallel;
};

/// Bellman value iteration toward an absorbing goal (v(goal) = 0) from v = 0.
///
/// With gamma = 1, states that cannot reach the goal with probability one
/// under any policy are declared +inf before sweeping, and any value that
/// passes |X| * max g / tol is declared +inf as well.
ValueField value_iteration(const MdpModel& model, StateId goal, const ViOptions& opts = {});

/// States from which some policy reaches `goal` with probability one.
std::vector<char> almost_sure_reach(const MdpModel& model, StateId goal);

/// Deterministic argmin_u g(x,u) + gamma * sum_y v(y) p(y|x,u), lowest id on ties.
PolicyTable greedy_policy(const MdpModel& model, const ValueField& v);

}  // namespace qm
