#include "qm/sim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "qm/value_iteration.hpp"

namespace qm {

std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t trial) {
    // splitmix64 finalizer over the (seed, trial) pair
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (trial + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

TrajectoryRecord rollout(const MdpModel& model, const PolicyTable& policy, StateId start, StateId goal,
                         std::size_t max_steps, DecisionMode mode, std::uint64_t seed) {
    if (start >= model.num_states() || goal >= model.num_states()) throw ValidationError("state out of range");
    if (policy.num_states != model.num_states() || policy.num_actions != model.num_actions())
        throw ValidationError("policy does not match the model");
    std::mt19937_64 rng(seed);
    TrajectoryRecord tr;
    tr.states.push_back(start);
    StateId x = start;
    const auto& emb = model.actions().embedding;
    for (std::size_t step = 0; step < max_steps; ++step) {
        const auto row = policy.distribution(x);
        const ActionId u = decide(row, mode, rng, emb).action;
        if (!model.applicable(x, u)) break;
        const std::size_t k = sample_index(model.probs(x, u), rng);
        const StateId next = model.targets(x, u)[k];
        const double g = model.cost(x, u);
        tr.actions.push_back(u);
        tr.step_costs.push_back(g);
        tr.total_cost += g;
        tr.states.push_back(next);
        x = next;
        if (x == goal) {
            tr.reached_goal = true;
            break;
        }
    }
    return tr;
}

BeliefTrajectory belief_rollout(const MdpModel& model, const PolicyTable& policy, const ObservationModel& obs,
                                const Belief& prior, StateId start, StateId goal, std::size_t max_steps,
                                DecisionMode mode, std::uint64_t seed) {
    if (start >= model.num_states() || goal >= model.num_states()) throw ValidationError("state out of range");
    if (policy.num_states != model.num_states() || policy.num_actions != model.num_actions())
        throw ValidationError("policy does not match the model");
    if (auto v = validate_observations(obs, model.num_states()); !v.empty())
        throw ValidationError("observation model: " + v.front().to_string());
    if (prior.size() != model.num_states()) throw ValidationError("prior size does not match the model");
    std::mt19937_64 rng(seed);
    std::mt19937_64 obs_rng(trial_seed(seed, ~std::uint64_t{0}));
    const auto& emb = model.actions().embedding;

    BeliefTrajectory bt;
    auto& tr = bt.record;
    StateId x = start;
    tr.states.push_back(x);
    auto observe = [&](StateId s) {
        const std::size_t o = sample_index(obs.rows[s], obs_rng);
        bt.observations.push_back(o);
        return o;
    };
    // Condition the prior on the first observation.
    Belief b = prior;
    {
        const std::size_t o = observe(x);
        double z = 0.0;
        for (StateId s = 0; s < b.size(); ++s) z += (b[s] *= obs.rows[s][o]);
        if (!(z > 0.0)) throw ValidationError("inconsistent observation: prior excludes the first symbol");
        for (double& p : b) p /= z;
    }
    bt.belief_at_truth.push_back(b[x]);
    for (std::size_t step = 0; step < max_steps; ++step) {
        const auto row = action_distribution(b, policy);
        const ActionId u = decide(row, mode, rng, emb).action;
        if (!model.applicable(x, u)) break;
        const std::size_t k = sample_index(model.probs(x, u), rng);
        const StateId next = model.targets(x, u)[k];
        const double g = model.cost(x, u);
        tr.actions.push_back(u);
        tr.step_costs.push_back(g);
        tr.total_cost += g;
        tr.states.push_back(next);
        x = next;
        b = forward_update(b, u, observe(x), model, obs);
        bt.belief_at_truth.push_back(b[x]);
        if (x == goal) {
            tr.reached_goal = true;
            break;
        }
    }
    return bt;
}

TrajectoryRecord pendulum_rollout(const PendulumParams& params, const GridDomain& dom, const PolicyTable& policy,
                                  double theta0, double thetadot0, std::size_t max_steps, DecisionMode mode,
                                  std::uint64_t seed) {
    check_pendulum(params);
    const auto& m = dom.model;
    if (m.num_states() != params.n_theta * params.n_thetadot || m.num_actions() != params.n_actions)
        throw ValidationError("domain does not match the pendulum parameters");
    const double pi = std::numbers::pi;
    const Axis theta{-pi, pi, params.n_theta, true};
    const Axis omega{-params.thetadot_range, params.thetadot_range, params.n_thetadot, false};
    const auto& emb = m.actions().embedding;
    std::mt19937_64 rng(seed);

    double th = theta.wrap(theta0);
    double w = std::clamp(thetadot0, omega.lo, omega.hi);
    auto cell = [&] { return static_cast<StateId>(theta.nearest(th) * params.n_thetadot + omega.nearest(w)); };
    TrajectoryRecord tr;
    StateId x = cell();
    tr.states.push_back(x);
    if (x == dom.goal) {
        tr.reached_goal = true;
        return tr;
    }
    for (std::size_t step = 0; step < max_steps; ++step) {
        const ActionId u = decide(policy.distribution(x), mode, rng, emb).action;
        const double acc = emb[u][0] + std::sin(th);
        th = theta.wrap(th + params.dt * w + 0.5 * params.dt * params.dt * acc);
        w = std::clamp(w + params.dt * acc, omega.lo, omega.hi);
        const double g = m.cost(x, u);
        tr.actions.push_back(u);
        tr.step_costs.push_back(g);
        tr.total_cost += g;
        x = cell();
        tr.states.push_back(x);
        if (x == dom.goal) {
            tr.reached_goal = true;
            break;
        }
    }
    return tr;
}

MonteCarloSummary monte_carlo(const MdpModel& model, const PolicyTable& policy, StateId start, StateId goal,
                              std::size_t trials, std::size_t max_steps, DecisionMode mode, std::uint64_t seed,
                              const StateCoordinates& coords) {
    if (trials == 0) throw ValidationError("at least one trial is required");
    std::vector<TrajectoryRecord> runs(trials);
    const auto n = static_cast<std::ptrdiff_t>(trials);
#pragma omp parallel for schedule(dynamic, 4)
    for (std::ptrdiff_t t = 0; t < n; ++t)
        runs[t] = rollout(model, policy, start, goal, max_steps, mode, trial_seed(seed, static_cast<std::uint64_t>(t)));

    MonteCarloSummary s;
    s.trials = trials;
    double sum = 0.0, sum_sq = 0.0, steps = 0.0;
    for (const auto& r : runs) {
        if (!r.reached_goal) continue;
        ++s.successes;
        sum += r.total_cost;
        sum_sq += r.total_cost * r.total_cost;
        steps += static_cast<double>(r.steps());
    }
    s.success_rate = static_cast<double>(s.successes) / static_cast<double>(trials);
    if (s.successes > 0) {
        const double k = static_cast<double>(s.successes);
        s.mean_cost = sum / k;
        s.stddev_cost = std::sqrt(std::max(0.0, sum_sq / k - s.mean_cost * s.mean_cost));
        s.mean_steps = steps / k;
    }
    if (coords.dim > 0) {
        s.mean_trajectory.assign(max_steps + 1, std::vector<double>(coords.dim, 0.0));
        for (const auto& r : runs)
            for (std::size_t t = 0; t <= max_steps; ++t) {
                const StateId x = r.states[std::min(t, r.states.size() - 1)];
                for (std::size_t c = 0; c < coords.dim; ++c) s.mean_trajectory[t][c] += coords.values[x * coords.dim + c];
            }
        for (auto& row : s.mean_trajectory)
            for (double& v : row) v /= static_cast<double>(trials);
    }
    return s;
}

std::vector<std::pair<double, std::size_t>> accessibility_volume(const QuasiDistanceField& d,
                                                                 std::span<const double> thresholds) {
    if (d.mode != FieldMode::from_source) throw ValidationError("accessibility volume needs a from-source field");
    std::vector<double> finite;
    for (double v : d.values)
        if (std::isfinite(v)) finite.push_back(v);
    std::sort(finite.begin(), finite.end());
    std::vector<std::pair<double, std::size_t>> out;
    for (double L : thresholds) {
        auto count = static_cast<std::size_t>(std::upper_bound(finite.begin(), finite.end(), L) - finite.begin());
        out.emplace_back(L, count);
    }
    return out;
}

double BenchResult::seconds(const std::string& method, std::size_t size, const std::string& phase) const {
    for (const auto& r : rows)
        if (r.method == method && r.size == size && r.phase == phase) return r.seconds;
    return -1.0;
}

std::string vi_label(double gamma) {
    std::ostringstream os;
    os << "vi-" << gamma;
    return os.str();
}

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

BenchResult benchmark(const DomainFactory& factory, std::span<const std::size_t> sizes,
                      std::span<const double> gammas, int repetitions) {
    if (repetitions < 1) throw ValidationError("at least one repetition is required");
    BenchResult result;
    for (std::size_t size : sizes) {
        const GridDomain dom = factory(size);
        const auto& m = dom.model;
        const std::size_t n_states = m.num_states();

        std::vector<double> graph_t, solve_t, policy_t, total_t;
        for (int r = 0; r < repetitions; ++r) {
            auto t0 = Clock::now();
            const WeightedGraph g = build_graph(one_step_distance(m));
            const double tg = since(t0);
            auto t1 = Clock::now();
            const QuasiDistanceField d = distance_to_goal(g, dom.goal);
            const double ts = since(t1);
            auto t2 = Clock::now();
            const PolicyTable pol = softmax_policy(probabilistic_gradient(m, d), kDefaultBeta);
            const double tp = since(t2);
            graph_t.push_back(tg);
            solve_t.push_back(ts);
            policy_t.push_back(tp);
            total_t.push_back(since(t0));
            (void)pol;
        }
        result.rows.push_back({"quasimetric", n_states, "graph", median(graph_t)});
        result.rows.push_back({"quasimetric", n_states, "solve", median(solve_t)});
        result.rows.push_back({"quasimetric", n_states, "policy", median(policy_t)});
        result.rows.push_back({"quasimetric", n_states, "total", median(total_t)});

        for (double gamma : gammas) {
            std::vector<double> vs, vp, vt;
            for (int r = 0; r < repetitions; ++r) {
                auto t0 = Clock::now();
                ViOptions opts;
                opts.gamma = gamma;
                const ValueField v = value_iteration(m, dom.goal, opts);
                const double ts = since(t0);
                auto t1 = Clock::now();
                const PolicyTable pol = greedy_policy(m, v);
                vp.push_back(since(t1));
                vs.push_back(ts);
                vt.push_back(since(t0));
                (void)pol;
            }
            const std::string label = vi_label(gamma);
            result.rows.push_back({label, n_states, "solve", median(vs)});
            result.rows.push_back({label, n_states, "policy", median(vp)});
            result.rows.push_back({label, n_states, "total", median(vt)});
        }
    }
    return result;
}

}  // namespace qm
