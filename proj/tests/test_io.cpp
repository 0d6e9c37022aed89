#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "oracles.hpp"
#include "qm/io.hpp"

using namespace qm;

TEST_CASE("model round trip is exact") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        auto m = oracle::random_mdp(seed);
        std::stringstream ss;
        write_model(m, ss);
        auto r = read_model(ss);
        REQUIRE(r.num_states() == m.num_states());
        REQUIRE(r.num_actions() == m.num_actions());
        for (StateId x = 0; x < m.num_states(); ++x)
            for (ActionId u = 0; u < m.num_actions(); ++u) {
                CHECK(std::vector<StateId>(r.targets(x, u).begin(), r.targets(x, u).end()) ==
                      std::vector<StateId>(m.targets(x, u).begin(), m.targets(x, u).end()));
                auto a = r.probs(x, u), b = m.probs(x, u);
                for (std::size_t k = 0; k < a.size(); ++k) CHECK(a[k] == b[k]);
                CHECK(r.has_cost(x, u) == m.has_cost(x, u));
                if (m.has_cost(x, u)) CHECK(r.cost(x, u) == m.cost(x, u));
            }
    }
}

TEST_CASE("labels, embedding and goal-stay survive a file round trip") {
    auto m = build_example_a();
    auto path = std::filesystem::temp_directory_path() / "qm_io_test_model.json";
    save_model(m, path.string());
    auto r = load_model(path.string());
    std::filesystem::remove(path);
    CHECK(r.states().labels == m.states().labels);
    CHECK(r.goal_stay_pairs() == m.goal_stay_pairs());
    auto g = build_graph(one_step_distance(r));
    auto all = distance_all_pairs(g);
    auto ref = distance_all_pairs(build_graph(one_step_distance(m)));
    CHECK(all.values == ref.values);

    auto dom = build_maze(random_maze(3, 3, 1));
    std::stringstream ss;
    write_model(dom.model, ss);
    CHECK(read_model(ss).actions().embedding == dom.model.actions().embedding);
}

TEST_CASE("load errors") {
    CHECK_THROWS_WITH_AS(load_model("/nonexistent/model.json"), doctest::Contains("not found"), IoError);

    std::stringstream bad_sum(R"({"states": 2, "actions": 1,
        "transitions": [{"from": 0, "u": 0, "to": 1, "p": 0.9}],
        "costs": [{"x": 0, "u": 0, "g": 1}]})");
    try {
        read_model(bad_sum);
        FAIL("expected a validation error");
    } catch (const InvalidModelError& e) {
        REQUIRE(e.violations().size() == 1);
        CHECK(e.violations()[0].rule == "row-sum");
        CHECK(std::string(e.what()).find("row-sum") != std::string::npos);
    }

    std::stringstream syntax("{\"states\": 2,\n \"actions\": }");
    CHECK_THROWS_WITH_AS(read_model(syntax), doctest::Contains("line 2"), ParseError);

    std::stringstream wrong_type(R"({"states": 1, "actions": 1, "transitions": [{"from": "a", "u": 0, "to": 0, "p": 1}]})");
    CHECK_THROWS_WITH_AS(read_model(wrong_type), doctest::Contains("transitions[0]"), ParseError);

    std::stringstream missing(R"({"actions": 1})");
    CHECK_THROWS_WITH_AS(read_model(missing), doctest::Contains("states"), ParseError);

    std::stringstream unvalidated(R"({"states": 2, "actions": 1,
        "transitions": [{"from": 0, "u": 0, "to": 1, "p": 0.9}]})");
    CHECK(read_model(unvalidated, false).num_states() == 2);
}

TEST_CASE("number formatting") {
    CHECK(format_number(kInf) == "inf");
    CHECK(format_number(2.5) == "2.5");
    CHECK(format_number(0.1) == "0.1");
    const double x = 1.0 / 3.0;
    CHECK(std::stod(format_number(x)) == x);
}

TEST_CASE("distance CSV") {
    auto m = build_example_a();
    auto g = build_graph(one_step_distance(m));
    std::stringstream ss;
    write_distance_csv(m, distance_to_goal(g, 4), ss);
    CHECK(ss.str() == "state,distance\nA,5\nB,2\nC,2.5\nD,2.5\nE,0\n");
    auto back = read_distance_csv(ss);
    CHECK(back == std::vector<double>{5, 2, 2.5, 2.5, 0});

    std::stringstream src;
    write_distance_csv(m, distance_from_source(g, 4), src);
    CHECK(src.str() == "state,distance\nA,inf\nB,inf\nC,inf\nD,inf\nE,0\n");
    CHECK(read_distance_csv(src)[0] == kInf);

    std::stringstream all;
    write_distance_csv(m, distance_all_pairs(g), all);
    std::string header, row_a;
    std::getline(all, header);
    std::getline(all, row_a);
    CHECK(header == "state,A,B,C,D,E");
    CHECK(row_a == "A,0,3,4,4,5");
}

TEST_CASE("policy, value, trajectory and bench CSV") {
    auto m = build_example_a();
    auto v = value_iteration(m, 4);
    std::stringstream vs;
    write_value_csv(m, v, vs);
    CHECK(vs.str().rfind("state,value\nA,4.5\n", 0) == 0);

    auto pol = greedy_policy(m, v);
    std::stringstream ps;
    write_policy_csv(m, pol, ps);
    CHECK(ps.str().rfind("state,action\nA,1\n", 0) == 0);

    auto soft = softmax_policy(probabilistic_gradient(m, distance_to_goal(build_graph(one_step_distance(m)), 4)), 1.0);
    std::stringstream ss;
    write_policy_csv(m, soft, ss);
    CHECK(ss.str().rfind("state,action,probability\n", 0) == 0);

    TrajectoryRecord tr;
    tr.states = {0, 1, 4};
    tr.actions = {0, 0};
    tr.step_costs = {3, 2};
    std::stringstream ts;
    write_trajectory_csv(tr, ts);
    CHECK(ts.str() == "step,state,action,cost\n0,0,0,3\n1,1,0,2\n2,4,,\n");

    BenchResult br;
    br.rows.push_back({"quasimetric", 5, "graph", 0.25});
    std::stringstream bs;
    write_bench_csv(br, bs);
    CHECK(bs.str() == "method,size,phase,seconds\nquasimetric,5,graph,0.25\n");

    MonteCarloSummary mc;
    mc.mean_trajectory = {{0.0, 1.0}, {0.5, 1.5}};
    std::stringstream ms;
    write_mean_trajectory_csv(mc, ms);
    CHECK(ms.str() == "step,mean_coord_1,mean_coord_2\n0,0,1\n1,0.5,1.5\n");
}

TEST_CASE("risk report JSON") {
    auto m = build_example_b(0.1, 10.0);
    auto rep = risk_report(m, build_graph(one_step_distance(m)), 3, 0.05);
    std::stringstream ss;
    write_risk_json(m, rep, ss);
    auto j = nlohmann::json::parse(ss.str());
    CHECK(j["prison"] == nlohmann::json::array({"C"}));
    CHECK(j["reaching"] == nlohmann::json::array({"A", "B", "D"}));
    CHECK(j["risky"] == nlohmann::json::array({"B"}));
    CHECK(j["epsilon"] == 0.05);
    CHECK(j.contains("weakly_risky"));
    CHECK(j.contains("epsilon_risky"));
}

TEST_CASE("maze and observation files") {
    MazeSpec s = random_maze(3, 2, 8);
    s.start_x = 1;
    std::stringstream ss;
    write_maze_spec(s, ss);
    auto r = read_maze_spec(ss);
    CHECK(r.width == 3);
    CHECK(r.height == 2);
    CHECK(r.start_x == 1);
    CHECK(r.goal_x == 2);
    REQUIRE(r.doors.size() == s.doors.size());
    for (std::size_t i = 0; i < s.doors.size(); ++i) {
        CHECK(r.doors[i].p == s.doors[i].p);
        CHECK(r.doors[i].dir == s.doors[i].dir);
    }
    std::stringstream bad(R"({"width": 2, "height": 1, "start": [0, 0], "goal": [1, 0],
                              "doors": [{"cell": [0, 0], "dir": "Q", "p": 0.5}]})");
    CHECK_THROWS_AS(read_maze_spec(bad), ParseError);

    auto o = ObservationModel::symmetric(3, 0.8);
    std::stringstream os;
    write_observation_model(o, os);
    auto ro = read_observation_model(os);
    CHECK(ro.num_symbols == 3);
    CHECK(ro.rows == o.rows);
}
