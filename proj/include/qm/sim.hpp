#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "qm/belief.hpp"
#include "qm/domains.hpp"
#include "qm/model.hpp"
#include "qm/policy.hpp"
#include "qm/quasimetric.hpp"

namespace qm {

struct TrajectoryRecord {
    std::vector<StateId> states;  // actions.size() + 1 entries
    std::vector<ActionId> actions;
    std::vector<double> step_costs;
    bool reached_goal = false;
    double total_cost = 0.0;

    std::size_t steps() const { return actions.size(); }
};

/// Seed of Monte Carlo trial `trial` derived from a base seed.
std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t trial);

/// Simulates the policy from `start`. The goal test runs after every
/// transition, so a rollout that starts at the goal runs until it returns.
/// Stops early if the chosen action is not applicable in the current state.
TrajectoryRecord rollout(const MdpModel& model, const PolicyTable& policy, StateId start, StateId goal,
                         std::size_t max_steps, DecisionMode mode, std::uint64_t seed);

struct BeliefTrajectory {
    TrajectoryRecord record;             // true hidden states and applied actions
    std::vector<std::size_t> observations;  // one per visited state
    std::vector<double> belief_at_truth;    // belief mass on the true state after each update
};

/// Partially observed rollout: the controller only sees observation symbols,
/// keeps a belief by forward filtering (starting from `prior`, conditioned on
/// the first observation) and decides from the belief-marginalized action
/// distribution. Observations use their own random stream, so with identity
/// observations the actions and states equal those of rollout() for the
/// same seed.
BeliefTrajectory belief_rollout(const MdpModel& model, const PolicyTable& policy, const ObservationModel& obs,
                                const Belief& prior, StateId start, StateId goal, std::size_t max_steps,
                                DecisionMode mode, std::uint64_t seed);

/// Noise-free pendulum rollout. Integrates the mean dynamics of the
/// discretized model in continuous (theta, thetadot), with theta wrapped and
/// thetadot saturated at the grid bounds, and applies the policy of the
/// nearest cell at every step. Stops when the nearest cell is `dom.goal`.
/// Recorded states are the visited cells.
TrajectoryRecord pendulum_rollout(const PendulumParams& params, const GridDomain& dom, const PolicyTable& policy,
                                  double theta0, double thetadot0, std::size_t max_steps,
                                  DecisionMode mode = DecisionMode::max, std::uint64_t seed = 0);

/// Per-state coordinates used to average trajectories.
struct StateCoordinates {
    std::size_t dim = 0;
    std::span<const double> values;  // num_states * dim
};

struct MonteCarloSummary {
    std::size_t trials = 0;
    std::size_t successes = 0;
    double success_rate = 0.0;
    double mean_cost = 0.0;    // among successful trials
    double stddev_cost = 0.0;  // among successful trials
    double mean_steps = 0.0;   // among successful trials
    /// (max_steps + 1) x dim; finished trajectories hold their last state.
    std::vector<std::vector<double>> mean_trajectory;
};

MonteCarloSummary monte_carlo(const MdpModel& model, const PolicyTable& policy, StateId start, StateId goal,
                              std::size_t trials, std::size_t max_steps, DecisionMode mode, std::uint64_t seed,
                              const StateCoordinates& coords = {});

/// (threshold, number of states with finite d(source, .) <= threshold).
std::vector<std::pair<double, std::size_t>> accessibility_volume(const QuasiDistanceField& d,
                                                                 std::span<const double> thresholds);

struct BenchRow {
    std::string method;
    std::size_t size = 0;
    std::string phase;
    double seconds = 0.0;
};

struct BenchResult {
    std::vector<BenchRow> rows;

    /// Seconds for (method, size, phase), or a negative value when absent.
    double seconds(const std::string& method, std::size_t size, const std::string& phase) const;
};

using DomainFactory = std::function<GridDomain(std::size_t size)>;

/// Median wall-clock seconds of the quasimetric pipeline (graph, solve,
/// policy, total) and of value iteration per discount (solve, policy, total).
BenchResult benchmark(const DomainFactory& factory, std::span<const std::size_t> sizes,
                      std::span<const double> gammas, int repetitions);

/// Method label used for value iteration at a given discount, e.g. "vi-0.99".
std::string vi_label(double gamma);

}  // namespace qm
