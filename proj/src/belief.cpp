#include "qm/belief.hpp"

#include <cmath>

namespace qm {

ObservationModel ObservationModel::identity(std::size_t n_states) { return symmetric(n_states, 1.0); }

ObservationModel ObservationModel::symmetric(std::size_t n_states, double accuracy) {
    ObservationModel o;
    o.num_symbols = n_states;
    const double rest = n_states > 1 ? (1.0 - accuracy) / static_cast<double>(n_states - 1) : 0.0;
    o.rows.assign(n_states, std::vector<double>(n_states, rest));
    for (std::size_t x = 0; x < n_states; ++x) o.rows[x][x] = n_states > 1 ? accuracy : 1.0;
    return o;
}

std::vector<Violation> validate_observations(const ObservationModel& obs, std::size_t n_states) {
    std::vector<Violation> out;
    if (obs.rows.size() != n_states)
        out.push_back({"observation-rows", -1, -1,
                       std::to_string(obs.rows.size()) + " rows for " + std::to_string(n_states) + " states"});
    for (std::size_t x = 0; x < obs.rows.size(); ++x) {
        const auto& r = obs.rows[x];
        const auto xi = static_cast<std::int64_t>(x);
        if (r.size() != obs.num_symbols) out.push_back({"observation-width", xi, -1, ""});
        double sum = 0.0;
        for (double p : r) {
            if (!(p >= 0.0 && p <= 1.0)) out.push_back({"probability-range", xi, -1, std::to_string(p)});
            sum += p;
        }
        if (std::abs(sum - 1.0) > kRowSumTolerance) out.push_back({"row-sum", xi, -1, std::to_string(sum)});
    }
    return out;
}

Belief uniform_belief(std::size_t n_states) { return Belief(n_states, 1.0 / static_cast<double>(n_states)); }

Belief point_belief(std::size_t n_states, StateId x) {
    Belief b(n_states, 0.0);
    b.at(x) = 1.0;
    return b;
}

Belief forward_update(const Belief& belief, ActionId action, std::size_t observation, const MdpModel& model,
                      const ObservationModel& obs) {
    const std::size_t S = model.num_states();
    if (belief.size() != S) throw ValidationError("belief size does not match the model");
    if (action >= model.num_actions()) throw ValidationError("action out of range");
    if (observation >= obs.num_symbols) throw ValidationError("observation symbol out of range");
    Belief predicted(S, 0.0);
    for (StateId y = 0; y < S; ++y) {
        if (belief[y] == 0.0) continue;
        auto t = model.targets(y, action);
        auto p = model.probs(y, action);
        if (t.empty()) {
            // An inapplicable action leaves the state unchanged.
            predicted[y] += belief[y];
            continue;
        }
        for (std::size_t k = 0; k < t.size(); ++k) predicted[t[k]] += p[k] * belief[y];
    }
    double z = 0.0;
    for (StateId x = 0; x < S; ++x) {
        predicted[x] *= obs.rows[x][observation];
        z += predicted[x];
    }
    if (!(z > 0.0)) throw ValidationError("inconsistent observation: symbol " + std::to_string(observation) +
                                          " has zero probability under the predicted belief");
    for (double& b : predicted) b /= z;
    return predicted;
}

std::vector<double> action_distribution(const Belief& belief, const PolicyTable& policy) {
    if (belief.size() != policy.num_states) throw ValidationError("belief size does not match the policy");
    std::vector<double> out(policy.num_actions, 0.0);
    for (StateId x = 0; x < belief.size(); ++x) {
        if (belief[x] == 0.0) continue;
        if (policy.mode == PolicyMode::stochastic) {
            auto r = policy.row(x);
            for (std::size_t u = 0; u < out.size(); ++u) out[u] += belief[x] * r[u];
        } else {
            out[policy.actions[x]] += belief[x];
        }
    }
    return out;
}

}  // namespace qm
