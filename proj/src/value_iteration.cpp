#include "qm/value_iteration.hpp"

#include <algorithm>
#include <cmath>

namespace qm {

namespace {

bool usable(const MdpModel& m, StateId x, ActionId u) {
    return m.applicable(x, u) && m.has_cost(x, u) && std::isfinite(m.cost(x, u));
}

// Q(x,u) with the current values; +inf if any successor value is +inf.
double backup(const MdpModel& m, StateId x, ActionId u, double gamma, const std::vector<double>& v) {
    auto t = m.targets(x, u);
    auto p = m.probs(x, u);
    double expected = 0.0;
    for (std::size_t k = 0; k < t.size(); ++k) expected += p[k] * v[t[k]];
    return m.cost(x, u) + gamma * expected;
}

double bellman(const MdpModel& m, StateId x, double gamma, const std::vector<double>& v,
               const std::vector<char>& action_ok) {
    double best = kInf;
    for (ActionId u = 0; u < m.num_actions(); ++u) {
        if (!action_ok[m.pair_index(x, u)]) continue;
        best = std::min(best, backup(m, x, u, gamma, v));
    }
    return best;
}

}  // namespace

std::vector<char> almost_sure_reach(const MdpModel& model, StateId goal) {
    const std::size_t S = model.num_states(), A = model.num_actions();
    std::vector<char> keep(S, 1);
    // Reverse adjacency over (state, action) pairs: predecessors of y.
    std::vector<std::vector<std::pair<StateId, ActionId>>> preds(S);
    for (StateId x = 0; x < S; ++x)
        for (ActionId u = 0; u < A; ++u)
            if (usable(model, x, u))
                for (StateId y : model.targets(x, u)) preds[y].emplace_back(x, u);

    for (;;) {
        std::vector<char> closed(S * A, 0);  // action keeps all mass inside `keep`
        for (StateId x = 0; x < S; ++x) {
            if (!keep[x]) continue;
            for (ActionId u = 0; u < A; ++u) {
                if (!usable(model, x, u)) continue;
                bool inside = true;
                for (StateId y : model.targets(x, u)) inside = inside && keep[y];
                closed[model.pair_index(x, u)] = inside;
            }
        }
        std::vector<char> reach(S, 0);
        std::vector<StateId> stack{goal};
        reach[goal] = 1;
        while (!stack.empty()) {
            StateId y = stack.back();
            stack.pop_back();
            for (auto [x, u] : preds[y])
                if (!reach[x] && keep[x] && closed[model.pair_index(x, u)]) {
                    reach[x] = 1;
                    stack.push_back(x);
                }
        }
        if (reach == keep) return keep;
        keep = std::move(reach);
    }
}

ValueField value_iteration(const MdpModel& model, StateId goal, const ViOptions& opts) {
    if (!(opts.gamma > 0.0 && opts.gamma <= 1.0))
        throw ValidationError("gamma must lie in (0, 1], got " + std::to_string(opts.gamma));
    if (!(opts.tol > 0.0)) throw ValidationError("tol must be positive");
    if (goal >= model.num_states()) throw ValidationError("goal out of range");

    const std::size_t S = model.num_states(), A = model.num_actions();
    ValueField vf;
    vf.gamma = opts.gamma;
    std::vector<double> v(S, 0.0);
    std::vector<char> active(S, 1);
    std::vector<char> action_ok(S * A, 0);
    for (StateId x = 0; x < S; ++x)
        for (ActionId u = 0; u < A; ++u) action_ok[model.pair_index(x, u)] = usable(model, x, u);

    const bool undiscounted = opts.gamma == 1.0;
    if (undiscounted) {
        auto proper = almost_sure_reach(model, goal);
        for (StateId x = 0; x < S; ++x) {
            if (proper[x]) continue;
            active[x] = 0;
            v[x] = kInf;
            vf.diverged.push_back(x);
        }
        for (StateId x = 0; x < S; ++x)
            for (ActionId u = 0; u < A; ++u) {
                const auto k = model.pair_index(x, u);
                if (!action_ok[k]) continue;
                for (StateId y : model.targets(x, u))
                    if (!proper[y]) {
                        action_ok[k] = 0;
                        break;
                    }
            }
    }
    active[goal] = 0;
    v[goal] = 0.0;

    std::vector<StateId> sweep_states;
    for (StateId x = 0; x < S; ++x)
        if (active[x]) sweep_states.push_back(x);
    const double divergence_bound = static_cast<double>(S) * model.max_cost() / opts.tol;

    std::vector<double> next = v;
    const auto n = static_cast<std::ptrdiff_t>(sweep_states.size());
    while (vf.iterations < opts.max_sweeps) {
        double residual = 0.0;
        if (opts.exec == Exec::serial) {
            for (std::ptrdiff_t i = 0; i < n; ++i) {
                const StateId x = sweep_states[i];
                next[x] = bellman(model, x, opts.gamma, v, action_ok);
                residual = std::max(residual, std::abs(next[x] - v[x]));
            }
        } else {
#pragma omp parallel for schedule(dynamic, 64) reduction(max : residual)
            for (std::ptrdiff_t i = 0; i < n; ++i) {
                const StateId x = sweep_states[i];
                next[x] = bellman(model, x, opts.gamma, v, action_ok);
                residual = std::max(residual, std::abs(next[x] - v[x]));
            }
        }
        v.swap(next);
        ++vf.iterations;
        if (undiscounted) {
            bool blew_up = false;
            for (StateId x : sweep_states)
                if (v[x] > divergence_bound && std::isfinite(v[x])) {
                    v[x] = kInf;
                    blew_up = true;
                }
            if (blew_up) {
                std::erase_if(sweep_states, [&](StateId x) {
                    if (std::isfinite(v[x])) return false;
                    vf.diverged.push_back(x);
                    return true;
                });
                next = v;
                residual = kInf;
            }
        }
        // States whose only actions lead to +inf keep an infinite value.
        if (std::isnan(residual)) residual = 0.0;
        vf.residual = residual;
        if (residual < opts.tol) {
            vf.converged = true;
            break;
        }
    }
    std::sort(vf.diverged.begin(), vf.diverged.end());
    vf.values = std::move(v);
    return vf;
}

PolicyTable greedy_policy(const MdpModel& model, const ValueField& v) {
    const std::size_t S = model.num_states(), A = model.num_actions();
    if (v.values.size() != S) throw ValidationError("value field does not match the model");
    PolicyTable t;
    t.mode = PolicyMode::deterministic;
    t.num_states = S;
    t.num_actions = A;
    t.actions.assign(S, 0);
    t.no_progress.assign(S, 0);
    for (StateId x = 0; x < S; ++x) {
        double best = kInf;
        std::optional<ActionId> pick;
        std::optional<ActionId> first_usable;
        for (ActionId u = 0; u < A; ++u) {
            if (!usable(model, x, u)) continue;
            if (!first_usable) first_usable = u;
            const double q = backup(model, x, u, v.gamma, v.values);
            if (q < best) {
                best = q;
                pick = u;
            }
        }
        if (!pick) t.no_progress[x] = 1;
        t.actions[x] = pick.value_or(first_usable.value_or(0));
    }
    return t;
}

}  // namespace qm
