#include "qm/policy.hpp"

#include <algorithm>
#include <cmath>

namespace qm {

std::vector<double> PolicyTable::distribution(StateId x) const {
    if (mode == PolicyMode::stochastic) {
        auto r = row(x);
        return {r.begin(), r.end()};
    }
    std::vector<double> one_hot(num_actions, 0.0);
    one_hot[actions[x]] = 1.0;
    return one_hot;
}

GradientTable probabilistic_gradient(const MdpModel& model, std::span<const double> potential) {
    const std::size_t S = model.num_states(), A = model.num_actions();
    if (potential.size() != S) throw ValidationError("potential size does not match the state count");
    GradientTable grad{S, A, std::vector<double>(S * A, kInf), std::vector<std::uint8_t>(S * A, 0)};
    const auto sn = static_cast<std::ptrdiff_t>(S);
#pragma omp parallel for schedule(dynamic, 64)
    for (std::ptrdiff_t xi = 0; xi < sn; ++xi) {
        const auto x = static_cast<StateId>(xi);
        const double here = potential[x];
        for (ActionId u = 0; u < A; ++u) {
            if (!model.applicable(x, u)) continue;
            const std::size_t k = model.pair_index(x, u);
            grad.applicable[k] = 1;
            if (!model.has_cost(x, u) || !std::isfinite(here)) continue;
            auto t = model.targets(x, u);
            auto p = model.probs(x, u);
            double expected = 0.0;
            bool finite = true;
            for (std::size_t j = 0; j < t.size(); ++j) {
                const double v = potential[t[j]];
                if (!std::isfinite(v)) {
                    finite = false;
                    break;
                }
                expected += v * p[j];
            }
            if (finite) grad.values[k] = model.cost(x, u) + expected - here;
        }
    }
    return grad;
}

GradientTable probabilistic_gradient(const MdpModel& model, const QuasiDistanceField& d) {
    if (d.mode != FieldMode::to_goal) throw ValidationError("gradient needs a to-goal distance field");
    return probabilistic_gradient(model, std::span<const double>(d.values));
}

namespace {

PolicyTable empty_table(PolicyMode mode, std::size_t S, std::size_t A) {
    PolicyTable t;
    t.mode = mode;
    t.num_states = S;
    t.num_actions = A;
    t.no_progress.assign(S, 0);
    if (mode == PolicyMode::stochastic)
        t.probabilities.assign(S * A, 0.0);
    else
        t.actions.assign(S, 0);
    return t;
}

}  // namespace

PolicyTable softmax_policy(const GradientTable& grad, double beta) {
    if (!(beta > 0.0)) throw ValidationError("beta must be positive");
    const std::size_t S = grad.num_states, A = grad.num_actions;
    PolicyTable t = empty_table(PolicyMode::stochastic, S, A);
    t.beta = beta;
    const auto sn = static_cast<std::ptrdiff_t>(S);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t xi = 0; xi < sn; ++xi) {
        const auto x = static_cast<StateId>(xi);
        auto g = grad.row(x);
        double* out = t.probabilities.data() + static_cast<std::size_t>(x) * A;
        double lo = kInf;
        for (double v : g) lo = std::min(lo, v);
        if (!std::isfinite(lo)) {
            t.no_progress[x] = 1;
            std::size_t n_app = 0;
            for (std::size_t u = 0; u < A; ++u) n_app += grad.applicable[x * A + u];
            for (std::size_t u = 0; u < A; ++u)
                out[u] = n_app == 0 ? 1.0 / static_cast<double>(A)
                                    : (grad.applicable[x * A + u] ? 1.0 / static_cast<double>(n_app) : 0.0);
            continue;
        }
        double sum = 0.0;
        for (std::size_t u = 0; u < A; ++u) {
            out[u] = std::isfinite(g[u]) ? std::exp(-beta * (g[u] - lo)) : 0.0;
            sum += out[u];
        }
        for (std::size_t u = 0; u < A; ++u) out[u] /= sum;
    }
    return t;
}

PolicyTable argmin_policy(const GradientTable& grad) {
    const std::size_t S = grad.num_states, A = grad.num_actions;
    PolicyTable t = empty_table(PolicyMode::deterministic, S, A);
    for (StateId x = 0; x < S; ++x) {
        auto g = grad.row(x);
        double best = kInf;
        std::optional<ActionId> pick;
        for (ActionId u = 0; u < A; ++u)
            if (g[u] < best) {
                best = g[u];
                pick = u;
            }
        if (!pick) {
            t.no_progress[x] = 1;
            for (ActionId u = 0; u < A; ++u)
                if (grad.applicable[x * A + u]) {
                    pick = u;
                    break;
                }
        }
        t.actions[x] = pick.value_or(0);
    }
    return t;
}

PolicyTable argmin_policy(const MdpModel& model, const QuasiDistanceField& d) {
    return argmin_policy(probabilistic_gradient(model, d));
}

PolicyTable most_probable_policy(const PolicyTable& stochastic) {
    if (stochastic.mode != PolicyMode::stochastic) throw ValidationError("most probable policy needs a stochastic table");
    PolicyTable t = empty_table(PolicyMode::deterministic, stochastic.num_states, stochastic.num_actions);
    t.no_progress = stochastic.no_progress;
    for (StateId x = 0; x < stochastic.num_states; ++x) {
        auto r = stochastic.row(x);
        t.actions[x] = static_cast<ActionId>(std::max_element(r.begin(), r.end()) - r.begin());
    }
    return t;
}

PolicyTable marginalize_goals(std::span<const PolicyTable> policies, std::span<const StateId> goals,
                              const GoalSpec& goal_dist) {
    if (policies.empty() || policies.size() != goals.size())
        throw ValidationError("one policy per goal is required");
    const auto& weights = goal_dist.weights();
    if (weights.size() != goals.size()) throw ValidationError("goal distribution does not match the listed goals");
    const std::size_t S = policies.front().num_states, A = policies.front().num_actions;
    PolicyTable t = empty_table(PolicyMode::stochastic, S, A);
    for (std::size_t i = 0; i < policies.size(); ++i) {
        const auto& p = policies[i];
        if (p.mode != PolicyMode::stochastic) throw ValidationError("goal marginalization needs stochastic policies");
        if (p.num_states != S || p.num_actions != A) throw ValidationError("policies have mismatched spaces");
        auto w = weights.find(goals[i]);
        if (w == weights.end()) throw ValidationError("goal " + std::to_string(goals[i]) + " has no weight");
        for (std::size_t k = 0; k < S * A; ++k) t.probabilities[k] += w->second * p.probabilities[k];
        t.beta = p.beta;
    }
    for (StateId x = 0; x < S; ++x) {
        double* r = t.probabilities.data() + static_cast<std::size_t>(x) * A;
        double sum = 0.0;
        for (std::size_t u = 0; u < A; ++u) sum += r[u];
        if (sum > 0.0)
            for (std::size_t u = 0; u < A; ++u) r[u] /= sum;
    }
    return t;
}

std::size_t sample_index(std::span<const double> weights, std::mt19937_64& rng) {
    double total = 0.0;
    for (double w : weights) total += w;
    const double target = uniform01(rng) * total;
    double cum = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (weights[i] <= 0.0) continue;
        cum += weights[i];
        last_positive = i;
        if (target < cum) return i;
    }
    return last_positive;
}

Decision decide(std::span<const double> row, DecisionMode mode, std::mt19937_64& rng,
                const std::vector<std::vector<double>>& embedding) {
    Decision d;
    switch (mode) {
    case DecisionMode::random:
        d.action = static_cast<ActionId>(sample_index(row, rng));
        break;
    case DecisionMode::max:
        d.action = static_cast<ActionId>(std::max_element(row.begin(), row.end()) - row.begin());
        break;
    case DecisionMode::mean: {
        if (embedding.size() != row.size()) throw ValidationError("mean decision requires an action embedding");
        const std::size_t dim = embedding.front().size();
        d.mean.assign(dim, 0.0);
        for (std::size_t u = 0; u < row.size(); ++u)
            for (std::size_t c = 0; c < dim; ++c) d.mean[c] += embedding[u][c] * row[u];
        double best = kInf;
        for (std::size_t u = 0; u < row.size(); ++u) {
            double dist2 = 0.0;
            for (std::size_t c = 0; c < dim; ++c) dist2 += (embedding[u][c] - d.mean[c]) * (embedding[u][c] - d.mean[c]);
            if (dist2 < best) {
                best = dist2;
                d.action = static_cast<ActionId>(u);
            }
        }
        break;
    }
    }
    return d;
}

}  // namespace qm
