#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "qm/domains.hpp"
#include "qm/value_iteration.hpp"

using namespace qm;

TEST_CASE("Example A values") {
    auto m = build_example_a();
    auto v = value_iteration(m, 4);
    CHECK(v.converged);
    const double expect[5] = {4.5, 2.0, 2.5, 2.5, 0.0};
    for (StateId x = 0; x < 5; ++x) CHECK(v.values[x] == doctest::Approx(expect[x]).epsilon(1e-12));
    CHECK(greedy_policy(m, v).actions[0] == 1);
}

TEST_CASE("Example B values: the prison spreads to B") {
    for (double omega : {2.0, 10.0, 100.0}) {
        auto m = build_example_b(0.1, omega);
        auto v = value_iteration(m, 3);
        CHECK(v.values[0] == doctest::Approx(omega));
        CHECK(v.values[1] == kInf);
        CHECK(v.values[2] == kInf);
        CHECK(v.values[3] == 0.0);
        CHECK(v.diverged == std::vector<StateId>{1, 2});
        CHECK(greedy_policy(m, v).actions[0] == 1);
    }
}

TEST_CASE("no proper policy marks A and B infinite") {
    auto m = build_example_b(0.1, 10.0).without_pair(0, 1);
    auto v = value_iteration(m, 3);
    CHECK(v.values[0] == kInf);
    CHECK(v.values[1] == kInf);
    auto p = greedy_policy(m, v);
    CHECK(p.no_progress[0] == 1);
}

TEST_CASE("the threshold detector alone also terminates") {
    // A prison with a zero-probability escape is invisible to nothing but the
    // threshold: here every state is proper, but a large cost loop forces
    // many sweeps; the detector must stay silent.
    MdpBuilder b(2, 1);
    b.transition(0, 0, 1, 0.5).transition(0, 0, 0, 0.5).cost(0, 0, 1.0);
    b.transition(1, 0, 1, 1.0).cost(1, 0, 0.0).goal_stay(1, 0);
    auto v = value_iteration(b.build(), 1);
    CHECK(v.diverged.empty());
    CHECK(v.values[0] == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("single absorbing goal") {
    MdpBuilder b(1, 1);
    b.transition(0, 0, 0, 1.0).cost(0, 0, 0.0).goal_stay(0, 0);
    auto v = value_iteration(b.build(), 0);
    CHECK(v.values == std::vector<double>{0.0});
    CHECK(v.iterations <= 1);
    CHECK(v.converged);
}

TEST_CASE("gamma range") {
    auto m = build_example_a();
    ViOptions o;
    o.gamma = 1.2;
    CHECK_THROWS_AS(value_iteration(m, 4, o), ValidationError);
    o.gamma = 0.0;
    CHECK_THROWS_AS(value_iteration(m, 4, o), ValidationError);
}

TEST_CASE("deterministic chain greedy follows the chain") {
    MdpBuilder b(4, 2);
    for (int x = 0; x < 3; ++x) {
        b.transition(x, 0, x, 1.0).cost(x, 0, 1.0);
        b.transition(x, 1, x + 1, 1.0).cost(x, 1, 1.0);
    }
    b.transition(3, 0, 3, 1.0).cost(3, 0, 0.0).goal_stay(3, 0);
    auto m = b.build();
    auto v = value_iteration(m, 3);
    auto p = greedy_policy(m, v);
    for (int x = 0; x < 3; ++x) {
        CHECK(p.actions[x] == 1);
        CHECK(v.values[x] == 3 - x);
    }
}

TEST_CASE("discounted values match the linear-system solution of the greedy policy") {
    for (std::uint64_t seed = 0; seed < 15; ++seed) {
        auto m = oracle::random_mdp(seed, {.min_states = 3, .max_states = 12, .applicable_rate = 1.0});
        ViOptions o;
        o.gamma = 0.9;
        o.tol = 1e-13;
        auto v = value_iteration(m, 0, o);
        REQUIRE(v.converged);
        auto pol = greedy_policy(m, v);
        // Policy evaluation: (I - gamma P_pi) v = g_pi, with v(goal) = 0.
        const std::size_t n = m.num_states();
        oracle::Matrix a(n, std::vector<double>(n, 0.0));
        std::vector<double> rhs(n, 0.0);
        for (StateId x = 0; x < n; ++x) {
            a[x][x] = 1.0;
            if (x == 0) continue;
            const ActionId u = pol.actions[x];
            rhs[x] = m.cost(x, u);
            auto t = m.targets(x, u);
            auto p = m.probs(x, u);
            for (std::size_t k = 0; k < t.size(); ++k)
                if (t[k] != 0) a[x][t[k]] -= 0.9 * p[k];
        }
        auto ref = oracle::solve_linear(a, rhs);
        for (StateId x = 0; x < n; ++x) CHECK(v.values[x] == doctest::Approx(ref[x]).epsilon(1e-8));
    }
}

TEST_CASE("discounted sweeps converge within the contraction bound") {
    auto m = oracle::random_mdp(9, {.applicable_rate = 1.0});
    for (double gamma : {0.5, 0.9, 0.99}) {
        ViOptions o;
        o.gamma = gamma;
        const long bound = static_cast<long>(std::ceil(std::log(o.tol * (1 - gamma) / m.max_cost()) / std::log(gamma))) + 2;
        o.max_sweeps = bound;
        auto v = value_iteration(m, 0, o);
        CHECK(v.converged);
    }
}

TEST_CASE("sweeps are non-decreasing from zero") {
    auto m = oracle::random_mdp(21, {.applicable_rate = 1.0});
    std::vector<double> prev(m.num_states(), 0.0);
    for (long k = 1; k < 30; ++k) {
        ViOptions o;
        o.gamma = 0.95;
        o.max_sweeps = k;
        auto v = value_iteration(m, 0, o);
        for (std::size_t x = 0; x < prev.size(); ++x) CHECK(v.values[x] >= prev[x]);
        prev = v.values;
    }
}

TEST_CASE("serial and parallel sweeps are bitwise identical") {
    auto m = oracle::random_mdp(5);
    ViOptions s, p;
    s.exec = Exec::serial;
    p.exec = Exec::parallel;
    for (double gamma : {1.0, 0.9}) {
        s.gamma = p.gamma = gamma;
        auto a = value_iteration(m, 0, s);
        auto b = value_iteration(m, 0, p);
        CHECK(a.values == b.values);
        CHECK(a.iterations == b.iterations);
    }
}

TEST_CASE("almost-sure reachability") {
    auto m = build_example_b(0.3, 5.0);
    auto r = almost_sure_reach(m, 3);
    CHECK(r == std::vector<char>{1, 0, 0, 1});
}
