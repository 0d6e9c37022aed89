#include <doctest.h>

#include <cmath>
#include <numbers>
#include <numeric>

#include "qm/domains.hpp"
#include "qm/quasimetric.hpp"
#include "qm/value_iteration.hpp"

using namespace qm;

namespace {

constexpr double pi = std::numbers::pi;

double sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

}  // namespace

TEST_CASE("axes") {
    Axis periodic{-pi, pi, 51, true};
    CHECK(periodic.center(25) == 0.0);
    CHECK(periodic.center(0) == -periodic.center(50));
    CHECK(periodic.nearest(0.0) == 25);
    CHECK(periodic.nearest(pi) == 0);
    CHECK(periodic.wrap(pi) == -pi);
    CHECK(periodic.wrap(-pi - 0.1) == doctest::Approx(pi - 0.1));
    Axis bounded{-3.0, 3.0, 51, false};
    CHECK(bounded.center(0) == -3.0);
    CHECK(bounded.center(50) == 3.0);
    CHECK(bounded.center(25) == 0.0);
    CHECK(bounded.nearest(100.0) == 50);
    CHECK(bounded.nearest(-100.0) == 0);
    // Halfway between cells 0 and 1 goes to the lower index.
    CHECK(Axis{0.0, 4.0, 5, false}.nearest(0.5) == 0);
    CHECK(Axis{0.0, 4.0, 4, true}.nearest(1.0) == 0);
}

TEST_CASE("discrete Gaussian") {
    Axis a{-1.0, 1.0, 21, false};
    SUBCASE("narrow sigma gives a point mass") {
        auto g = discretize_gaussian(a.center(7), 1e-3, a);
        CHECK(g.probs[7] == 1.0);
        CHECK(sum(g.probs) == 1.0);
    }
    SUBCASE("centered mean on a symmetric grid is symmetric") {
        auto g = discretize_gaussian(0.0, 0.3, a);
        for (std::size_t i = 0; i < 21; ++i) CHECK(g.probs[i] == g.probs[20 - i]);
        CHECK(std::abs(sum(g.probs) - 1.0) <= 1e-12);
        CHECK_FALSE(g.clamped);
    }
    SUBCASE("periodic wrap identity") {
        Axis p{-pi, pi, 31, true};
        auto lo = discretize_gaussian(-pi, 0.4, p);
        auto hi = discretize_gaussian(pi, 0.4, p);
        CHECK(lo.probs == hi.probs);
        CHECK(std::abs(sum(lo.probs) - 1.0) <= 1e-12);
    }
    SUBCASE("mean far outside a bounded grid is clamped") {
        auto g = discretize_gaussian(50.0, 0.1, a);
        CHECK(g.clamped);
        CHECK(g.probs[20] == 1.0);
    }
    SUBCASE("tiny entries are pruned") {
        auto g = discretize_gaussian(0.0, 0.05, a);
        for (double p : g.probs) CHECK((p == 0.0 || p >= 1e-12));
    }
    SUBCASE("bad inputs") {
        CHECK_THROWS_AS(discretize_gaussian(0.0, 0.0, a), ValidationError);
        CHECK_THROWS_AS(discretize_gaussian(0.0, 1.0, Axis{0.0, 1.0, 1, false}), ValidationError);
    }
}

TEST_CASE("maze builder") {
    SUBCASE("1x2 open door") {
        MazeSpec s;
        s.width = 2;
        s.goal_x = 1;
        auto dom = build_maze(s);
        CHECK(validate_model(dom.model).empty());
        auto d = distance_to_goal(build_graph(one_step_distance(dom.model)), dom.goal);
        CHECK(d[dom.start] == 1.0);
    }
    SUBCASE("1x2 door with p = 0.25") {
        MazeSpec s;
        s.width = 2;
        s.goal_x = 1;
        s.doors.push_back({0, 0, Direction::east, 0.25});
        auto dom = build_maze(s);
        auto d = distance_to_goal(build_graph(one_step_distance(dom.model)), dom.goal);
        CHECK(d[dom.start] == 4.0);
        // The door is symmetric.
        CHECK(dom.model.probs(1, kWest).size() == 2);
    }
    SUBCASE("solid walls give pure self-loops") {
        MazeSpec s;
        s.width = 2;
        s.height = 2;
        s.doors.push_back({0, 0, Direction::east, 0.0});
        auto dom = build_maze(s);
        CHECK(dom.model.targets(0, kEast).size() == 1);
        CHECK(dom.model.targets(0, kEast)[0] == 0);
        CHECK(dom.model.targets(0, kNorth)[0] == 0);
    }
    SUBCASE("self-loop structure and goal-stay flag") {
        auto dom = build_maze(random_maze(8, 5, 17));
        const auto& m = dom.model;
        CHECK(validate_model(m).empty());
        CHECK(m.num_actions() == 5);
        CHECK(m.cost(dom.goal, kStay) == 0.0);
        CHECK(m.is_goal_stay(dom.goal, kStay));
        for (StateId x = 0; x < m.num_states(); ++x)
            for (ActionId u = 0; u < 5; ++u) {
                auto t = m.targets(x, u);
                CHECK(t.size() <= 2);
                int others = 0;
                for (auto y : t) others += y != x;
                CHECK(others <= 1);
                if (x != dom.goal || u != kStay) CHECK(m.cost(x, u) == 1.0);
            }
    }
    SUBCASE("undiscounted VI equals the quasi-distance") {
        auto dom = build_maze(random_maze(6, 6, 5, 0.1, 1.0, 0.2));
        ViOptions o;
        o.tol = 1e-12;
        auto v = value_iteration(dom.model, dom.goal, o);
        auto d = distance_to_goal(build_graph(one_step_distance(dom.model)), dom.goal);
        for (StateId x = 0; x < dom.model.num_states(); ++x) {
            if (std::isinf(d[x]))
                CHECK(std::isinf(v.values[x]));
            else
                CHECK(std::abs(v.values[x] - d[x]) <= 1e-6);
        }
    }
    SUBCASE("range errors") {
        MazeSpec s;
        s.width = 2;
        s.goal_x = 2;
        CHECK_THROWS_AS(build_maze(s), ValidationError);
        s.goal_x = 1;
        s.doors.push_back({0, 0, Direction::east, 1.5});
        CHECK_THROWS_AS(build_maze(s), ValidationError);
    }
}

TEST_CASE("Example A and B builders") {
    CHECK(validate_model(build_example_a()).empty());
    auto u = build_example_a(true);
    CHECK(validate_model(u).empty());
    CHECK(u.cost(0, 0) == 1.0);
    CHECK(u.cost(4, 0) == 0.0);
    CHECK(validate_model(build_example_b(0.3, 4.0)).empty());
    CHECK_THROWS_AS(build_example_b(0.0, 4.0), ValidationError);
    CHECK_THROWS_AS(build_example_b(1.0, 4.0), ValidationError);
    CHECK_THROWS_AS(build_example_b(0.5, 0.0), ValidationError);
}

TEST_CASE("unit-cost Example A distances") {
    auto m = build_example_a(true);
    auto all = distance_all_pairs(build_graph(one_step_distance(m)));
    CHECK(all.at(0, 1) == 1.0);
    CHECK(all.at(0, 2) == 2.0);
    CHECK(all.at(0, 3) == 2.0);
    CHECK(all.at(0, 4) == 2.0);
}

TEST_CASE("pendulum") {
    PendulumParams p;
    p.n_theta = 21;
    p.n_thetadot = 21;
    p.n_actions = 5;
    auto dom = build_pendulum(p);
    const auto& m = dom.model;
    CHECK(validate_model(m).empty());
    CHECK(m.num_states() == 441);
    CHECK(dom.coord(dom.goal)[0] == 0.0);
    CHECK(dom.coord(dom.goal)[1] == 0.0);
    CHECK(std::abs(std::abs(dom.coord(dom.start)[0]) - pi) < pi / 21 + 1e-12);
    CHECK(m.cost(dom.goal, 2) == 0.0);
    CHECK(m.is_goal_stay(dom.goal, 2));

    SUBCASE("serial and parallel builds agree") {
        auto s = build_pendulum(p, Exec::serial);
        for (StateId x = 0; x < m.num_states(); ++x)
            for (ActionId u = 0; u < m.num_actions(); ++u) {
                auto a = m.probs(x, u), b = s.model.probs(x, u);
                REQUIRE(a.size() == b.size());
                for (std::size_t k = 0; k < a.size(); ++k) CHECK(a[k] == b[k]);
            }
    }
    SUBCASE("theta wraps without leaking mass") {
        for (std::size_t w = 0; w < p.n_thetadot; ++w)
            for (std::size_t t : {std::size_t{0}, p.n_theta - 1}) {
                const auto x = static_cast<StateId>(t * p.n_thetadot + w);
                for (ActionId u = 0; u < p.n_actions; ++u) {
                    auto pr = m.probs(x, u);
                    CHECK(std::abs(std::accumulate(pr.begin(), pr.end(), 0.0) - 1.0) <= 1e-9);
                }
            }
    }
    SUBCASE("zero-noise limit keeps the bottom equilibrium") {
        PendulumParams q = p;
        q.sigma_x = q.sigma_y = 1e-6;
        Axis theta{-pi, pi, q.n_theta, true};
        // theta = pi is not a cell center on an odd periodic grid; use the
        // cell whose center is closest to pi and zero torque.
        auto det = build_pendulum(q);
        const auto x = det.start;
        const double th = det.coord(x)[0];
        const double mu_x = th + 0.5 * q.dt * q.dt * std::sin(th);
        const auto next = det.model.targets(x, 2);
        REQUIRE(next.size() == 1);
        CHECK(next[0] / q.n_thetadot == theta.nearest(mu_x));
    }
    SUBCASE("parameter checks") {
        PendulumParams bad = p;
        bad.n_theta = 20;
        CHECK_THROWS_AS(build_pendulum(bad), ValidationError);
        bad = p;
        bad.u_max = 1.0;
        CHECK_THROWS_AS(build_pendulum(bad), ValidationError);
        bad = p;
        bad.sigma_y = 0.0;
        CHECK_THROWS_AS(build_pendulum(bad), ValidationError);
    }
}

TEST_CASE("Dubins") {
    DubinsParams p;
    p.n_x = p.n_y = p.n_theta = 11;
    p.n_actions = 5;
    auto dom = build_dubins(p);
    const auto& m = dom.model;
    CHECK(validate_model(m).empty());
    CHECK(dom.start == dom.goal);
    CHECK(dom.coord(dom.goal)[0] == 0.0);
    CHECK(dom.coord(dom.goal)[2] == 0.0);
    CHECK(m.cost(0, 0) == p.dt);

    SUBCASE("theta = 0 moves straight ahead") {
        Axis ax{-p.extent, p.extent, p.n_x, false};
        DubinsParams q = p;
        q.sigma_x = q.sigma_y = q.sigma_theta = 1e-6;
        q.dt = 1.0;  // exactly one cell forward
        auto det = build_dubins(q);
        auto t = det.model.targets(det.goal, 2);
        REQUIRE(t.size() == 1);
        auto c = det.coord(t[0]);
        CHECK(c[0] == doctest::Approx(ax.center(ax.nearest(1.0))));
        CHECK(c[1] == 0.0);
        CHECK(c[2] == 0.0);
    }
    SUBCASE("mirror symmetry of transition rows") {
        for (StateId x = 0; x < m.num_states(); x += 7) {
            const StateId mx = dubins_mirror(p, x);
            CHECK(dubins_mirror(p, mx) == x);
            for (ActionId u = 0; u < p.n_actions; ++u) {
                const ActionId mu = static_cast<ActionId>(p.n_actions - 1 - u);
                auto t = m.targets(x, u);
                auto pr = m.probs(x, u);
                auto mt = m.targets(mx, mu);
                auto mp = m.probs(mx, mu);
                REQUIRE(t.size() == mt.size());
                std::vector<std::pair<StateId, double>> a, b;
                for (std::size_t k = 0; k < t.size(); ++k) {
                    a.emplace_back(dubins_mirror(p, t[k]), pr[k]);
                    b.emplace_back(mt[k], mp[k]);
                }
                std::sort(a.begin(), a.end());
                std::sort(b.begin(), b.end());
                for (std::size_t k = 0; k < a.size(); ++k) {
                    CHECK(a[k].first == b[k].first);
                    CHECK(a[k].second == doctest::Approx(b[k].second).epsilon(1e-12));
                }
            }
        }
    }
    SUBCASE("parameter checks") {
        DubinsParams bad = p;
        bad.n_x = 2;
        CHECK_THROWS_AS(build_dubins(bad), ValidationError);
        bad = p;
        bad.u_l = 0.0;
        CHECK_THROWS_AS(build_dubins(bad), ValidationError);
    }
}
