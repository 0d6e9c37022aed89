// qmplan: command-line front end for the planning library.
#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "qm/belief.hpp"
#include "qm/domains.hpp"
#include "qm/exec.hpp"
#include "qm/io.hpp"
#include "qm/policy.hpp"
#include "qm/quasimetric.hpp"
#include "qm/risk.hpp"
#include "qm/sim.hpp"
#include "qm/value_iteration.hpp"

using namespace qm;

namespace {

constexpr int kExitIo = 1;
constexpr int kExitInvalid = 2;
constexpr int kExitUsage = 64;

struct Options {
    std::string model = "-";
    std::string goal;
    std::string source;
    std::string start;
    double gamma = 1.0;
    double tol = 1e-9;
    long max_sweeps = 1'000'000;
    std::optional<double> beta;
    double epsilon = 0.0;
    std::optional<double> omega;
    std::uint64_t seed = 0;
    int threads = 0;
    std::string out = "-";
    std::string mode = "max";
    std::string policy = "quasi";
    std::string potential = "distance";
    std::size_t trials = 1;
    std::size_t max_steps = 1000;
    std::string obs;
    double accuracy = 0.9;

    // domain parameters
    std::size_t width = 10, height = 10;
    double p_min = 0.1, p_max = 1.0, walls = 0.0;
    std::string maze;
    std::size_t n_theta = 51, n_thetadot = 51, n_xy = 51, n_actions = 0;
    double u_max = 0.5, sigma = -1.0;

    // bench
    std::string domain = "maze";
    std::vector<std::size_t> sizes{5, 10};
    std::vector<double> gammas{0.9, 0.95, 0.99};
    int reps = 3;
};

void check_ranges(const Options& o) {
    if (!(o.gamma > 0.0 && o.gamma <= 1.0)) throw ValidationError("--gamma must lie in (0, 1]");
    if (!(o.tol > 0.0)) throw ValidationError("--tol must be positive");
    if (o.max_sweeps < 1) throw ValidationError("--max-sweeps must be at least 1");
    if (o.beta && !(*o.beta > 0.0)) throw ValidationError("--beta must be positive");
    if (!(o.epsilon >= 0.0 && o.epsilon < 1.0)) throw ValidationError("--epsilon must lie in [0, 1)");
    if (o.omega && !(*o.omega > 0.0)) throw ValidationError("--omega must be positive");
    if (o.threads < 0) throw ValidationError("--threads must be non-negative");
    if (o.trials < 1) throw ValidationError("--trials must be at least 1");
    if (!(o.accuracy > 0.0 && o.accuracy <= 1.0)) throw ValidationError("--accuracy must lie in (0, 1]");
    for (double g : o.gammas)
        if (!(g > 0.0 && g <= 1.0)) throw ValidationError("--gammas entries must lie in (0, 1]");
    if (o.reps < 1) throw ValidationError("--reps must be at least 1");
}

MdpModel read_input_model(const Options& o) {
    if (o.model == "-") return read_model(std::cin);
    return load_model(o.model);
}

/// Accepts a state label or a numeric index.
StateId resolve_state(const MdpModel& m, const std::string& name, const char* flag) {
    if (name.empty()) throw ValidationError(std::string(flag) + " is required");
    auto x = m.find_state(name);
    if (!x || *x >= m.num_states()) throw ValidationError(std::string(flag) + ": unknown state '" + name + "'");
    return *x;
}

DecisionMode parse_mode(const std::string& s) {
    if (s == "random") return DecisionMode::random;
    if (s == "mean") return DecisionMode::mean;
    return DecisionMode::max;
}

/// Writes to --out, or stdout for "-".
template <class F>
void emit(const Options& o, F&& write) {
    if (o.out == "-") {
        write(std::cout);
        std::cout.flush();
        return;
    }
    std::ofstream os(o.out);
    if (!os) throw IoError(o.out + ": cannot open for writing");
    write(os);
    if (!os) throw IoError(o.out + ": write failed");
}

ViOptions vi_options(const Options& o) {
    ViOptions v;
    v.gamma = o.gamma;
    v.tol = o.tol;
    v.max_sweeps = o.max_sweeps;
    return v;
}

QuasiDistanceField goal_distance(const MdpModel& m, StateId goal, const Options& o) {
    auto g = build_graph(one_step_distance(m));
    auto d = distance_to_goal(g, goal);
    if (o.omega) d = apply_risk_override(d, risk_report(m, g, goal, o.epsilon).epsilon_risky, *o.omega);
    return d;
}

PolicyTable make_policy(const MdpModel& m, StateId goal, const Options& o) {
    if (o.policy == "vi") return greedy_policy(m, value_iteration(m, goal, vi_options(o)));
    GradientTable grad = o.potential == "value"
                             ? probabilistic_gradient(m, value_iteration(m, goal, vi_options(o)).values)
                             : probabilistic_gradient(m, goal_distance(m, goal, o));
    return o.beta ? softmax_policy(grad, *o.beta) : argmin_policy(grad);
}

void run_solve(const std::string& method, const Options& o) {
    auto m = read_input_model(o);
    if (method == "all-pairs") {
        auto d = distance_all_pairs(build_graph(one_step_distance(m)));
        emit(o, [&](std::ostream& os) { write_distance_csv(m, d, os); });
    } else if (method == "vi") {
        auto v = value_iteration(m, resolve_state(m, o.goal, "--goal"), vi_options(o));
        if (!v.converged) std::fprintf(stderr, "warning: value iteration stopped before converging\n");
        emit(o, [&](std::ostream& os) { write_value_csv(m, v, os); });
    } else if (!o.source.empty()) {
        auto d = distance_from_source(build_graph(one_step_distance(m)), resolve_state(m, o.source, "--source"));
        emit(o, [&](std::ostream& os) { write_distance_csv(m, d, os); });
    } else {
        auto d = goal_distance(m, resolve_state(m, o.goal, "--goal"), o);
        emit(o, [&](std::ostream& os) { write_distance_csv(m, d, os); });
    }
}

void run_domain(const std::string& name, const Options& o) {
    GridDomain dom;
    if (name == "example-a") {
        dom.model = build_example_a();
        dom.goal = 4;
    } else if (name == "example-b") {
        dom.model = build_example_b(o.epsilon > 0.0 ? o.epsilon : 0.1, o.omega.value_or(10.0));
        dom.goal = 3;
    } else if (name == "maze") {
        MazeSpec spec;
        if (!o.maze.empty()) {
            auto is = open_input(o.maze);
            spec = read_maze_spec(is);
        } else {
            spec = random_maze(o.width, o.height, o.seed, o.p_min, o.p_max, o.walls);
        }
        dom = build_maze(spec);
    } else if (name == "pendulum") {
        PendulumParams p;
        p.n_theta = o.n_theta;
        p.n_thetadot = o.n_thetadot;
        if (o.n_actions) p.n_actions = o.n_actions;
        p.u_max = o.u_max;
        if (o.sigma > 0.0) p.sigma_x = p.sigma_y = o.sigma;
        dom = build_pendulum(p);
    } else {
        DubinsParams p;
        p.n_x = p.n_y = p.n_theta = o.n_xy;
        if (o.n_actions) p.n_actions = o.n_actions;
        if (o.sigma > 0.0) p.sigma_x = p.sigma_y = p.sigma_theta = o.sigma;
        dom = build_dubins(p);
    }
    std::fprintf(stderr, "start %u goal %u\n", static_cast<unsigned>(dom.start), static_cast<unsigned>(dom.goal));
    emit(o, [&](std::ostream& os) { write_model(dom.model, os); });
}

void run_simulate(const Options& o) {
    auto m = read_input_model(o);
    const StateId goal = resolve_state(m, o.goal, "--goal");
    const StateId start = resolve_state(m, o.start, "--start");
    auto pol = make_policy(m, goal, o);
    const auto mode = parse_mode(o.mode);
    if (o.trials == 1) {
        auto tr = rollout(m, pol, start, goal, o.max_steps, mode, o.seed);
        emit(o, [&](std::ostream& os) { write_trajectory_csv(tr, os); });
        return;
    }
    auto mc = monte_carlo(m, pol, start, goal, o.trials, o.max_steps, mode, o.seed);
    nlohmann::json j{{"trials", mc.trials},         {"successes", mc.successes},
                     {"success_rate", mc.success_rate}, {"mean_cost", mc.mean_cost},
                     {"stddev_cost", mc.stddev_cost},   {"mean_steps", mc.mean_steps}};
    emit(o, [&](std::ostream& os) { os << j.dump(2) << '\n'; });
}

void run_belief_sim(const Options& o) {
    auto m = read_input_model(o);
    const StateId goal = resolve_state(m, o.goal, "--goal");
    const StateId start = resolve_state(m, o.start, "--start");
    ObservationModel obs;
    if (o.obs.empty()) {
        obs = ObservationModel::symmetric(m.num_states(), o.accuracy);
    } else {
        auto is = open_input(o.obs);
        obs = read_observation_model(is);
    }
    auto pol = make_policy(m, goal, o);
    auto bt = belief_rollout(m, pol, obs, uniform_belief(m.num_states()), start, goal, o.max_steps,
                             parse_mode(o.mode), o.seed);
    emit(o, [&](std::ostream& os) {
        const auto& tr = bt.record;
        os << "step,state,observation,belief_at_truth,action,cost\n";
        for (std::size_t t = 0; t < tr.states.size(); ++t) {
            os << t << ',' << m.state_name(tr.states[t]) << ',' << bt.observations[t] << ','
               << format_number(bt.belief_at_truth[t]) << ',';
            if (t < tr.actions.size()) os << tr.actions[t] << ',' << format_number(tr.step_costs[t]);
            else os << ',';
            os << '\n';
        }
    });
}

void run_bench(const Options& o) {
    DomainFactory f;
    if (o.domain == "pendulum") {
        f = [&](std::size_t n) {
            PendulumParams p;
            p.n_theta = p.n_thetadot = n;
            return build_pendulum(p);
        };
    } else if (o.domain == "maze") {
        f = [&](std::size_t n) { return build_maze(random_maze(n, n, o.seed, o.p_min, o.p_max, o.walls)); };
    } else {
        throw ValidationError("--domain must be maze or pendulum");
    }
    auto r = benchmark(f, o.sizes, o.gammas, o.reps);
    emit(o, [&](std::ostream& os) { write_bench_csv(r, os); });
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quasimetric planning for probabilistic models"};
    app.require_subcommand(1);
    Options o;

    auto model_flags = [&](CLI::App* c) {
        c->add_option("--model", o.model, "Model JSON file (stdin when omitted or '-')");
        c->add_option("--out", o.out, "Output file (stdout when omitted or '-')");
        c->add_option("--threads", o.threads, "Worker threads (0 = all cores)");
        c->add_option("--seed", o.seed, "Random seed");
    };
    auto solver_flags = [&](CLI::App* c) {
        model_flags(c);
        c->add_option("--goal", o.goal, "Goal state label or index");
        c->add_option("--gamma", o.gamma, "Discount in (0, 1]");
        c->add_option("--tol", o.tol, "Value iteration tolerance");
        c->add_option("--max-sweeps", o.max_sweeps, "Value iteration sweep limit");
        c->add_option("--beta", o.beta, "Softmax sharpness (argmin when omitted)");
        c->add_option("--epsilon", o.epsilon, "Risk threshold");
        c->add_option("--omega", o.omega, "Distance assigned to epsilon-risky states");
        c->add_option("--policy", o.policy)->check(CLI::IsMember({"quasi", "vi"}));
        c->add_option("--potential", o.potential)->check(CLI::IsMember({"distance", "value"}));
        c->add_option("--mode", o.mode)->check(CLI::IsMember({"random", "max", "mean"}));
    };

    std::string method;
    auto* solve = app.add_subcommand("solve", "Quasi-distances or values");
    solver_flags(solve);
    solve->add_option("method", method)->required()->check(CLI::IsMember({"quasi", "vi", "all-pairs"}));
    solve->add_option("--source", o.source, "Distances from this state instead of to the goal");

    auto* policy = app.add_subcommand("policy", "Policy table");
    solver_flags(policy);

    auto* risk = app.add_subcommand("risk", "Prison and risky sets");
    solver_flags(risk);

    std::string domain_name;
    auto* domain = app.add_subcommand("domain", "Emit a built-in model");
    domain->add_option("name", domain_name)
        ->required()
        ->check(CLI::IsMember({"maze", "example-a", "example-b", "pendulum", "dubins"}));
    domain->add_option("--out", o.out);
    domain->add_option("--seed", o.seed);
    domain->add_option("--threads", o.threads);
    domain->add_option("--epsilon", o.epsilon);
    domain->add_option("--omega", o.omega);
    domain->add_option("--width", o.width);
    domain->add_option("--height", o.height);
    domain->add_option("--p-min", o.p_min);
    domain->add_option("--p-max", o.p_max);
    domain->add_option("--walls", o.walls, "Fraction of solid walls");
    domain->add_option("--maze", o.maze, "Maze JSON file");
    domain->add_option("--n-theta", o.n_theta);
    domain->add_option("--n-thetadot", o.n_thetadot);
    domain->add_option("--n", o.n_xy, "Dubins cells per axis");
    domain->add_option("--n-actions", o.n_actions);
    domain->add_option("--u-max", o.u_max);
    domain->add_option("--sigma", o.sigma);

    auto* simulate = app.add_subcommand("simulate", "Roll out a policy");
    solver_flags(simulate);
    simulate->add_option("--start", o.start)->required();
    simulate->add_option("--trials", o.trials);
    simulate->add_option("--max-steps", o.max_steps);

    auto* belief = app.add_subcommand("belief-sim", "Roll out a policy under partial observation");
    solver_flags(belief);
    belief->add_option("--start", o.start)->required();
    belief->add_option("--max-steps", o.max_steps);
    belief->add_option("--obs", o.obs, "Observation model JSON");
    belief->add_option("--accuracy", o.accuracy, "Symmetric observation accuracy when --obs is omitted");

    auto* bench = app.add_subcommand("bench", "Time the quasimetric pipeline against value iteration");
    bench->add_option("--domain", o.domain)->check(CLI::IsMember({"maze", "pendulum"}));
    bench->add_option("--sizes", o.sizes)->delimiter(',');
    bench->add_option("--gammas", o.gammas)->delimiter(',');
    bench->add_option("--reps", o.reps);
    bench->add_option("--seed", o.seed);
    bench->add_option("--threads", o.threads);
    bench->add_option("--out", o.out);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        check_ranges(o);
        set_threads(o.threads);
        if (*solve) {
            run_solve(method, o);
        } else if (*policy) {
            auto m = read_input_model(o);
            auto p = make_policy(m, resolve_state(m, o.goal, "--goal"), o);
            emit(o, [&](std::ostream& os) { write_policy_csv(m, p, os); });
        } else if (*risk) {
            auto m = read_input_model(o);
            auto r = risk_report(m, build_graph(one_step_distance(m)), resolve_state(m, o.goal, "--goal"), o.epsilon);
            emit(o, [&](std::ostream& os) { write_risk_json(m, r, os); });
        } else if (*domain) {
            run_domain(domain_name, o);
        } else if (*simulate) {
            run_simulate(o);
        } else if (*belief) {
            run_belief_sim(o);
        } else if (*bench) {
            run_bench(o);
        }
    } catch (const ValidationError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitInvalid;
    } catch (const IoError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitIo;
    }
    return 0;
}
