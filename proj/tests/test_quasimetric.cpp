#include <doctest.h>

#include "oracles.hpp"
#include "qm/domains.hpp"
#include "qm/quasimetric.hpp"

using namespace qm;

namespace {

constexpr double I = kInf;

const double kTable1[5][5] = {
    {0, 3, 4, 4, 5},
    {I, 0, I, I, 2},
    {I, I, 0, I, 2.5},
    {I, I, I, 0, 2.5},
    {I, I, I, I, 0},
};

bool close(double a, double b, double tol = 1e-9) {
    if (std::isinf(a) || std::isinf(b)) return a == b;
    return std::abs(a - b) <= tol;
}

}  // namespace

TEST_CASE("one-step distance") {
    SUBCASE("Example A") {
        auto w = one_step_distance(build_example_a());
        CHECK(w.at(0, 2) == 4.0);
        CHECK(w.at(0, 1) == 3.0);
        CHECK(w.at(0, 4) == I);
        CHECK(w.at(2, 2) == 0.0);
        CHECK(w.num_pairs() == 6);
    }
    SUBCASE("minimum over two actions") {
        MdpBuilder b(2, 2);
        b.transition(0, 0, 1, 0.2).transition(0, 0, 0, 0.8).cost(0, 0, 1.0);
        b.transition(0, 1, 1, 0.5).transition(0, 1, 0, 0.5).cost(0, 1, 2.0);
        CHECK(one_step_distance(b.build()).at(0, 1) == 4.0);
    }
    SUBCASE("zero-cost goal-stay pairs give no arcs") {
        MdpBuilder b(2, 1);
        b.transition(0, 0, 1, 0.5).transition(0, 0, 0, 0.5).cost(0, 0, 0.0).goal_stay(0, 0);
        CHECK(one_step_distance(b.build()).num_pairs() == 0);
    }
    SUBCASE("serial and parallel kernels agree exactly") {
        for (std::uint64_t s = 0; s < 20; ++s) {
            auto m = oracle::random_mdp(s);
            auto a = one_step_distance(m, Exec::serial);
            auto b = one_step_distance(m, Exec::parallel);
            CHECK(a.offsets == b.offsets);
            CHECK(a.targets == b.targets);
            CHECK(a.weights == b.weights);
        }
    }
}

TEST_CASE("build_graph") {
    SUBCASE("empty") {
        OneStepDistance d;
        d.num_states = 4;
        d.offsets.assign(5, 0);
        auto g = build_graph(d);
        CHECK(g.num_vertices == 4);
        CHECK(g.num_arcs() == 0);
    }
    SUBCASE("Example A has one arc per ordered pair") {
        auto g = build_graph(one_step_distance(build_example_a()));
        CHECK(g.num_arcs() == 6);
        CHECK(g.out(0).size() == 3);
        CHECK(g.in(4).size() == 3);
    }
    SUBCASE("self-loop only") {
        MdpBuilder b(1, 1);
        b.transition(0, 0, 0, 1.0).cost(0, 0, 1.0);
        CHECK(build_graph(one_step_distance(b.build())).num_arcs() == 0);
    }
    SUBCASE("transposed lists hold exactly the reversed arcs") {
        auto g = build_graph(one_step_distance(oracle::random_mdp(7)));
        std::vector<std::tuple<StateId, StateId, double>> fwd, rev;
        for (StateId x = 0; x < g.num_vertices; ++x) {
            for (auto a : g.out(x)) fwd.emplace_back(x, a.to, a.w);
            for (auto a : g.in(x)) rev.emplace_back(a.to, x, a.w);
        }
        std::sort(fwd.begin(), fwd.end());
        std::sort(rev.begin(), rev.end());
        CHECK(fwd == rev);
    }
}

TEST_CASE("Table 1 distances") {
    auto m = build_example_a();
    auto g = build_graph(one_step_distance(m));
    auto to_e = distance_to_goal(g, 4);
    for (StateId x = 0; x < 5; ++x) CHECK(to_e[x] == kTable1[x][4]);
    for (StateId s = 0; s < 5; ++s) {
        auto row = distance_from_source(g, s);
        for (StateId y = 0; y < 5; ++y) CHECK(row[y] == kTable1[s][y]);
    }
    auto all = distance_all_pairs(g);
    for (StateId x = 0; x < 5; ++x)
        for (StateId y = 0; y < 5; ++y) CHECK(all.at(x, y) == kTable1[x][y]);
    auto it = distance_iterative(m, 10);
    CHECK(it.converged);
    CHECK(it.iterations <= 3);
    CHECK(it.max_increase <= 0.0);
    for (StateId x = 0; x < 5; ++x)
        for (StateId y = 0; y < 5; ++y) CHECK(it.field.at(x, y) == kTable1[x][y]);
}

TEST_CASE("Table 2 distances at (0.5, 2)") {
    auto g = build_graph(one_step_distance(build_example_b(0.5, 2.0)));
    auto d = distance_to_goal(g, 3);
    CHECK(d[0] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(d[1] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(d[2] == I);
    CHECK(d[3] == 0.0);
    CHECK(*d.anchor == 3);
}

TEST_CASE("single state and invalid anchors") {
    MdpBuilder b(1, 1);
    b.transition(0, 0, 0, 1.0).cost(0, 0, 1.0);
    auto g = build_graph(one_step_distance(b.build()));
    auto d = distance_to_goal(g, 0);
    CHECK(d.values == std::vector<double>{0.0});
    CHECK_THROWS_AS(distance_to_goal(g, 1), ValidationError);
    CHECK_THROWS_AS(distance_from_source(g, 3), ValidationError);
}

TEST_CASE("line graph recurrence") {
    MdpBuilder b(4, 1);
    for (int x = 0; x < 3; ++x) b.transition(x, 0, x + 1, 1.0).cost(x, 0, 1.0);
    b.transition(3, 0, 3, 1.0).cost(3, 0, 1.0);
    auto it = distance_iterative(b.build(), 10);
    CHECK(it.converged);
    CHECK(it.max_increase <= 0.0);
    for (int x = 0; x < 4; ++x) CHECK(it.field.at(x, 3) == 3 - x);
}

TEST_CASE("solvers agree with Bellman-Ford on random models") {
    for (std::uint64_t seed = 100; seed < 130; ++seed) {
        auto m = oracle::random_mdp(seed);
        const std::size_t n = m.num_states();
        auto ref = oracle::bellman_ford(oracle::one_step(m));
        auto reach = oracle::bfs_reach(m);
        auto g = build_graph(one_step_distance(m));
        auto all = distance_all_pairs(g, kDefaultAllPairsCap, Exec::serial);
        auto all_par = distance_all_pairs(g, kDefaultAllPairsCap, Exec::parallel);
        CHECK(all.values == all_par.values);
        auto it = distance_iterative(m, 64);
        CHECK(it.converged);
        for (StateId y = 0; y < n; ++y) {
            auto to = distance_to_goal(g, y);
            auto from = distance_from_source(g, y);
            for (StateId x = 0; x < n; ++x) {
                CHECK(close(to[x], ref[x][y]));
                CHECK(close(from[x], ref[y][x]));
                CHECK(close(all.at(x, y), ref[x][y]));
                CHECK(close(it.field.at(x, y), ref[x][y]));
                CHECK((ref[x][y] < I) == static_cast<bool>(reach[x][y]));
            }
        }
    }
}

TEST_CASE("deterministic models reduce to classical shortest paths") {
    // Point-mass rows: the one-step weight is the action cost itself.
    oracle::RandomMdpOptions o;
    o.max_successors = 1;
    o.integer_costs = true;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        auto m = oracle::random_mdp(seed, o);
        const std::size_t n = m.num_states();
        oracle::Matrix w(n, std::vector<double>(n, I));
        for (StateId x = 0; x < n; ++x) {
            w[x][x] = 0;
            for (ActionId u = 0; u < m.num_actions(); ++u)
                for (auto y : m.targets(x, u))
                    if (y != x) w[x][y] = std::min(w[x][y], m.cost(x, u));
        }
        auto ref = oracle::bellman_ford(w);
        auto all = distance_all_pairs(build_graph(one_step_distance(m)));
        for (StateId x = 0; x < n; ++x)
            for (StateId y = 0; y < n; ++y) CHECK(all.at(x, y) == ref[x][y]);
    }
}

TEST_CASE("shortest-path successors break ties toward the lowest id") {
    MdpBuilder b(4, 2);
    b.transition(0, 0, 2, 1.0).cost(0, 0, 1.0);
    b.transition(0, 1, 1, 1.0).cost(0, 1, 1.0);
    b.transition(1, 0, 3, 1.0).cost(1, 0, 1.0);
    b.transition(2, 0, 3, 1.0).cost(2, 0, 1.0);
    b.transition(3, 0, 3, 1.0).cost(3, 0, 1.0);
    auto g = build_graph(one_step_distance(b.build()));
    auto next = shortest_path_successors(g, distance_to_goal(g, 3));
    CHECK(next[0] == StateId{1});
    CHECK(next[1] == StateId{3});
    CHECK_FALSE(next[3].has_value());
}

TEST_CASE("all-pairs cap") {
    auto g = build_graph(one_step_distance(build_example_a()));
    CHECK_THROWS_AS(distance_all_pairs(g, 4), ValidationError);
}
