#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "qm/model.hpp"
#include "qm/quasimetric.hpp"

namespace qm {

/// D_u d(x, goal) for every (state, action); +inf where an action is not
/// applicable or reaches an unreachable successor.
struct GradientTable {
    std::size_t num_states = 0;
    std::size_t num_actions = 0;
    std::vector<double> values;
    std::vector<std::uint8_t> applicable;

    double at(StateId x, ActionId u) const { return values[static_cast<std::size_t>(x) * num_actions + u]; }
    std::span<const double> row(StateId x) const {
        return {values.data() + static_cast<std::size_t>(x) * num_actions, num_actions};
    }
};

enum class PolicyMode { stochastic, deterministic };

struct PolicyTable {
    PolicyMode mode = PolicyMode::deterministic;
    std::size_t num_states = 0;
    std::size_t num_actions = 0;
    double beta = 0.0;
    std::vector<double> probabilities;  // stochastic: S*A row-major
    std::vector<ActionId> actions;      // deterministic: one per state
    std::vector<std::uint8_t> no_progress;

    std::span<const double> row(StateId x) const {
        return {probabilities.data() + static_cast<std::size_t>(x) * num_actions, num_actions};
    }
    /// One-hot row for deterministic tables, the stored row otherwise.
    std::vector<double> distribution(StateId x) const;
};

enum class DecisionMode { random, max, mean };

/// Gradient of an arbitrary potential (quasi-distance or value function):
/// g(x,u) + sum_z V(z) p(z|x,u) - V(x).
GradientTable probabilistic_gradient(const MdpModel& model, std::span<const double> potential);
GradientTable probabilistic_gradient(const MdpModel& model, const QuasiDistanceField& d);

/// Gibbs policy exp(-beta D_u) normalized over each state's finite gradients.
PolicyTable softmax_policy(const GradientTable& grad, double beta);

/// Deterministic argmin of the gradient, lowest action id on ties.
PolicyTable argmin_policy(const GradientTable& grad);
PolicyTable argmin_policy(const MdpModel& model, const QuasiDistanceField& d);

/// Argmax of each stochastic row ("most probable" policy).
PolicyTable most_probable_policy(const PolicyTable& stochastic);

/// sum_y P(u|x,y) P(y). `policies[i]` belongs to `goals[i]`.
PolicyTable marginalize_goals(std::span<const PolicyTable> policies, std::span<const StateId> goals,
                              const GoalSpec& goal_dist);

struct Decision {
    ActionId action = 0;
    std::vector<double> mean;  // filled in mean mode only
};

/// Uniform double in [0, 1) from 53 random bits.
inline double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Index drawn from `weights` by inverse CDF in index order.
std::size_t sample_index(std::span<const double> weights, std::mt19937_64& rng);

Decision decide(std::span<const double> row, DecisionMode mode, std::mt19937_64& rng,
                const std::vector<std::vector<double>>& embedding = {});

inline constexpr double kDefaultBeta = 10.0;

}  // namespace qm
