#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qm {

using StateId = std::uint32_t;
using ActionId = std::uint32_t;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Thrown for inputs that fail a documented range or validation rule.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Thrown for file-system and parse failures.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct StateSpace {
    std::size_t count = 0;
    std::vector<std::string> labels;  // empty or exactly `count` entries
};

struct ActionSpace {
    std::size_t count = 0;
    std::vector<std::vector<double>> embedding;  // empty or exactly `count` entries
};

/// One outcome of a (state, action) pair.
struct Successor {
    StateId to;
    double p;
};

/// A transition entry whose source index could not be stored (out of range).
struct RawTransition {
    std::int64_t from;
    std::int64_t action;
    std::int64_t to;
    double p;
};

/// Immutable MDP with a CSR transition layout keyed by (state, action).
///
/// A (state, action) pair with no transition entries is treated as not
/// applicable in that state.
class MdpModel {
public:
    MdpModel() = default;

    std::size_t num_states() const { return states_.count; }
    std::size_t num_actions() const { return actions_.count; }
    const StateSpace& states() const { return states_; }
    const ActionSpace& actions() const { return actions_; }

    std::size_t pair_index(StateId x, ActionId u) const {
        return static_cast<std::size_t>(x) * actions_.count + u;
    }

    std::span<const StateId> targets(StateId x, ActionId u) const {
        auto k = pair_index(x, u);
        return {targets_.data() + offsets_[k], offsets_[k + 1] - offsets_[k]};
    }
    std::span<const double> probs(StateId x, ActionId u) const {
        auto k = pair_index(x, u);
        return {probs_.data() + offsets_[k], offsets_[k + 1] - offsets_[k]};
    }
    bool applicable(StateId x, ActionId u) const {
        auto k = pair_index(x, u);
        return offsets_[k + 1] > offsets_[k];
    }

    /// NaN when no cost entry exists.
    double cost(StateId x, ActionId u) const { return costs_[pair_index(x, u)]; }
    bool has_cost(StateId x, ActionId u) const { return costs_[pair_index(x, u)] == costs_[pair_index(x, u)]; }
    bool is_goal_stay(StateId x, ActionId u) const { return goal_stay_flags_[pair_index(x, u)] != 0; }

    const std::vector<std::pair<StateId, ActionId>>& goal_stay_pairs() const { return goal_stay_; }
    const std::vector<RawTransition>& orphan_transitions() const { return orphans_; }
    std::size_t num_entries() const { return targets_.size(); }

    /// Index of a state by label, or by decimal index when the text is numeric.
    std::optional<StateId> find_state(const std::string& name) const;
    std::string state_name(StateId x) const;

    /// Largest finite cost entry.
    double max_cost() const;

    /// Copy of this model with every cost multiplied by `factor`.
    MdpModel scaled_costs(double factor) const;

    /// Copy without the given action at the given state.
    MdpModel without_pair(StateId x, ActionId u) const;

private:
    friend class MdpBuilder;
    friend MdpModel assemble_model(StateSpace, ActionSpace, std::vector<std::vector<Successor>>,
                                   std::vector<double>, std::vector<std::pair<StateId, ActionId>>);

    StateSpace states_;
    ActionSpace actions_;
    std::vector<std::size_t> offsets_;  // size S*A + 1
    std::vector<StateId> targets_;
    std::vector<double> probs_;
    std::vector<double> costs_;         // size S*A, NaN = absent
    std::vector<std::uint8_t> goal_stay_flags_;
    std::vector<std::pair<StateId, ActionId>> goal_stay_;
    std::vector<RawTransition> orphans_;
};

/// Accumulates entries in any order and produces a CSR MdpModel.
///
/// The builder does not validate; call validate_model() on the result.
class MdpBuilder {
public:
    MdpBuilder(std::size_t n_states, std::size_t n_actions);

    MdpBuilder& labels(std::vector<std::string> labels);
    MdpBuilder& embedding(std::vector<std::vector<double>> embedding);

    MdpBuilder& transition(std::int64_t from, std::int64_t action, std::int64_t to, double p);
    MdpBuilder& cost(std::int64_t x, std::int64_t u, double g);
    MdpBuilder& goal_stay(std::int64_t x, std::int64_t u);

    /// Adds a whole (state, action) row. Entries are taken in the given order.
    MdpBuilder& row(StateId x, ActionId u, std::span<const Successor> successors, double g);

    /// Drops probabilities below `threshold` and renormalizes each row.
    MdpBuilder& prune(double threshold);

    MdpModel build() const;

private:
    struct Entry {
        StateId from;
        ActionId action;
        StateId to;
        double p;
    };
    std::size_t n_states_;
    std::size_t n_actions_;
    std::vector<std::string> labels_;
    std::vector<std::vector<double>> embedding_;
    std::vector<Entry> entries_;
    std::vector<RawTransition> orphans_;
    std::vector<double> costs_;
    std::vector<std::pair<std::int64_t, std::int64_t>> goal_stay_;
    double prune_threshold_ = 0.0;
};

/// Assembles a model directly from per-pair rows, already grouped by
/// (state, action). `rows[x * A + u]` holds the successors of that pair.
MdpModel assemble_model(StateSpace states, ActionSpace actions,
                        std::vector<std::vector<Successor>> rows, std::vector<double> costs,
                        std::vector<std::pair<StateId, ActionId>> goal_stay);

struct Violation {
    std::string rule;  // "row-sum", "positive-cost", ...
    std::int64_t state = -1;
    std::int64_t action = -1;
    std::string detail;

    std::string to_string() const;
};

/// Every violated model invariant; empty when the model is valid.
std::vector<Violation> validate_model(const MdpModel& model);

struct NormalizedModel {
    MdpModel model;
    double scale;
};

/// Rescales costs so the smallest strictly positive cost equals 1.
NormalizedModel normalize_costs(const MdpModel& model);

/// A single goal state or a distribution over goal states.
class GoalSpec {
public:
    static GoalSpec single(StateId goal);
    static GoalSpec distribution(std::map<StateId, double> weights);

    bool is_single() const { return weights_.size() == 1 && weights_.begin()->second == 1.0; }
    const std::map<StateId, double>& weights() const { return weights_; }

private:
    std::map<StateId, double> weights_;
};

inline constexpr double kRowSumTolerance = 1e-9;

}  // namespace qm
