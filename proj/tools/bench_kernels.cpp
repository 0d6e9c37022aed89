// Times each OpenMP kernel against its serial reference path and checks that
// both produce identical output. Prints CSV: kernel,exec,threads,seconds,match
#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <vector>

#include "qm/domains.hpp"
#include "qm/exec.hpp"
#include "qm/quasimetric.hpp"
#include "qm/value_iteration.hpp"

using namespace qm;

namespace {

template <class F>
double median_seconds(int reps, F&& f) {
    std::vector<double> t;
    for (int r = 0; r < reps; ++r) {
        auto t0 = std::chrono::steady_clock::now();
        f();
        t.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }
    std::sort(t.begin(), t.end());
    return t[t.size() / 2];
}

// Targets and probabilities of every (state, action) row, in CSR order.
std::vector<double> flatten(const MdpModel& m) {
    std::vector<double> out;
    for (StateId x = 0; x < m.num_states(); ++x)
        for (ActionId u = 0; u < m.num_actions(); ++u) {
            for (StateId y : m.targets(x, u)) out.push_back(y);
            for (double p : m.probs(x, u)) out.push_back(p);
        }
    return out;
}

struct Kernel {
    const char* name;
    // Runs the kernel and returns a flat copy of its output for comparison.
    std::function<std::vector<double>(Exec)> run;
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Serial vs OpenMP kernel timings"};
    std::size_t pend = 31, dub = 15, fw = 600;
    int reps = 3, threads = 0;
    app.add_option("--pendulum", pend, "Pendulum cells per axis (odd)");
    app.add_option("--dubins", dub, "Dubins cells per axis (odd)");
    app.add_option("--fw", fw, "States in the Floyd-Warshall maze");
    app.add_option("--reps", reps);
    app.add_option("--threads", threads);
    CLI11_PARSE(app, argc, argv);
    set_threads(threads);

    PendulumParams pp;
    pp.n_theta = pp.n_thetadot = pend;
    DubinsParams dp;
    dp.n_x = dp.n_y = dp.n_theta = dub;
    dp.n_actions = 5;
    const auto pendulum = build_pendulum(pp);
    const std::size_t side = static_cast<std::size_t>(std::max(2.0, std::sqrt(double(fw))));
    const auto maze = build_maze(random_maze(side, side, 1));
    const auto maze_graph = build_graph(one_step_distance(maze.model));

    const std::vector<Kernel> kernels{
        {"build_pendulum", [&](Exec e) { return flatten(build_pendulum(pp, e).model); }},
        {"build_dubins", [&](Exec e) { return flatten(build_dubins(dp, e).model); }},
        {"one_step_distance", [&](Exec e) { return one_step_distance(pendulum.model, e).weights; }},
        {"floyd_warshall", [&](Exec e) { return distance_all_pairs(maze_graph, kDefaultAllPairsCap, e).values; }},
        {"value_iteration",
         [&](Exec e) {
             ViOptions o;
             o.gamma = 0.95;
             o.exec = e;
             return value_iteration(pendulum.model, pendulum.goal, o).values;
         }},
    };

    std::printf("kernel,exec,threads,seconds,match\n");
    for (const auto& k : kernels) {
        std::vector<double> serial, parallel;
        const double ts = median_seconds(reps, [&] { serial = k.run(Exec::serial); });
        const double tp = median_seconds(reps, [&] { parallel = k.run(Exec::parallel); });
        const bool match = serial == parallel;
        std::printf("%s,serial,1,%.6f,%d\n", k.name, ts, match);
        std::printf("%s,parallel,%d,%.6f,%d\n", k.name, max_threads(), tp, match);
        std::fflush(stdout);
        if (!match) return 1;
    }
    return 0;
}
