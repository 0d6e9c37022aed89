#pragma once

#include <span>
#include <vector>

#include "qm/model.hpp"
#include "qm/policy.hpp"

namespace qm {

/// P(o | x) over a finite observation alphabet.
struct ObservationModel {
    std::size_t num_symbols = 0;
    std::vector<std::vector<double>> rows;  // one per state

    /// Noise-free observations: symbol x for state x.
    static ObservationModel identity(std::size_t n_states);
    /// Correct symbol with probability `accuracy`, the rest spread uniformly.
    static ObservationModel symmetric(std::size_t n_states, double accuracy);
};

std::vector<Violation> validate_observations(const ObservationModel& obs, std::size_t n_states);

using Belief = std::vector<double>;

Belief uniform_belief(std::size_t n_states);
Belief point_belief(std::size_t n_states, StateId x);

/// new(x) ∝ P(o|x) * sum_y p(x|y,u) old(y).
Belief forward_update(const Belief& belief, ActionId action, std::size_t observation, const MdpModel& model,
                      const ObservationModel& obs);

/// P(u) = sum_x belief(x) P(u|x).
std::vector<double> action_distribution(const Belief& belief, const PolicyTable& policy);

}  // namespace qm
