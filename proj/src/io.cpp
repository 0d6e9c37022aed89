#include "qm/io.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace qm {

using nlohmann::json;

namespace {

std::string join_violations(const std::vector<Violation>& v) {
    std::ostringstream os;
    os << "model failed validation (" << v.size() << " violation" << (v.size() == 1 ? "" : "s") << ")";
    for (const auto& x : v) os << "\n  " << x.to_string();
    return os.str();
}

template <typename T>
T field(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key)) throw ParseError(where + ": missing field '" + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ParseError(where + ": field '" + key + "' has the wrong type (" + e.what() + ")");
    }
}

json parse_json(std::istream& is, const std::string& what) {
    try {
        return json::parse(is);
    } catch (const json::parse_error& e) {
        // nlohmann reports "line L, column C" inside e.what().
        throw ParseError(what + ": " + e.what());
    }
}

Direction parse_direction(const std::string& s) {
    if (s == "E") return Direction::east;
    if (s == "W") return Direction::west;
    if (s == "S") return Direction::south;
    if (s == "N") return Direction::north;
    throw ParseError("door direction must be one of E, W, S, N (got '" + s + "')");
}

const char* direction_name(Direction d) {
    switch (d) {
    case Direction::east: return "E";
    case Direction::west: return "W";
    case Direction::south: return "S";
    case Direction::north: return "N";
    }
    return "?";
}

}  // namespace

InvalidModelError::InvalidModelError(std::vector<Violation> violations)
    : ValidationError(join_violations(violations)), violations_(std::move(violations)) {}

std::string format_number(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (std::isnan(v)) return "nan";
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

void write_model(const MdpModel& m, std::ostream& os) {
    json j;
    j["states"] = m.num_states();
    j["actions"] = m.num_actions();
    if (!m.states().labels.empty()) j["labels"] = m.states().labels;
    if (!m.actions().embedding.empty()) j["action_embedding"] = m.actions().embedding;
    json tr = json::array();
    json costs = json::array();
    for (StateId x = 0; x < m.num_states(); ++x)
        for (ActionId u = 0; u < m.num_actions(); ++u) {
            auto t = m.targets(x, u);
            auto p = m.probs(x, u);
            for (std::size_t k = 0; k < t.size(); ++k) tr.push_back({{"from", x}, {"u", u}, {"to", t[k]}, {"p", p[k]}});
            if (m.has_cost(x, u)) costs.push_back({{"x", x}, {"u", u}, {"g", m.cost(x, u)}});
        }
    j["transitions"] = std::move(tr);
    j["costs"] = std::move(costs);
    json gs = json::array();
    for (auto [x, u] : m.goal_stay_pairs()) gs.push_back({x, u});
    j["goal_stay"] = std::move(gs);
    // nlohmann writes doubles with 17 significant digits.
    os << j.dump() << '\n';
}

MdpModel read_model(std::istream& is, bool validate) {
    const json j = parse_json(is, "model");
    if (!j.is_object()) throw ParseError("model: top level must be an object");
    const auto n_states = field<std::int64_t>(j, "states", "model");
    const auto n_actions = field<std::int64_t>(j, "actions", "model");
    if (n_states < 1 || n_actions < 1)
        throw InvalidModelError({{"state-count", -1, -1, "states and actions must both be at least 1"}});
    MdpBuilder b(static_cast<std::size_t>(n_states), static_cast<std::size_t>(n_actions));
    if (j.contains("labels")) b.labels(field<std::vector<std::string>>(j, "labels", "model"));
    if (j.contains("action_embedding"))
        b.embedding(field<std::vector<std::vector<double>>>(j, "action_embedding", "model"));

    std::vector<Violation> bad_costs;
    if (j.contains("transitions")) {
        const auto& arr = j.at("transitions");
        if (!arr.is_array()) throw ParseError("model: 'transitions' must be an array");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            const std::string where = "transitions[" + std::to_string(i) + "]";
            b.transition(field<std::int64_t>(arr[i], "from", where), field<std::int64_t>(arr[i], "u", where),
                         field<std::int64_t>(arr[i], "to", where), field<double>(arr[i], "p", where));
        }
    }
    if (j.contains("costs")) {
        const auto& arr = j.at("costs");
        if (!arr.is_array()) throw ParseError("model: 'costs' must be an array");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            const std::string where = "costs[" + std::to_string(i) + "]";
            const auto x = field<std::int64_t>(arr[i], "x", where);
            const auto u = field<std::int64_t>(arr[i], "u", where);
            const auto g = field<double>(arr[i], "g", where);
            if (x < 0 || u < 0 || x >= n_states || u >= n_actions)
                bad_costs.push_back({"index-range", x, u, "cost entry"});
            else
                b.cost(x, u, g);
        }
    }
    if (j.contains("goal_stay")) {
        for (const auto& pr : j.at("goal_stay")) {
            if (!pr.is_array() || pr.size() != 2) throw ParseError("model: goal_stay entries must be [state, action]");
            const auto x = pr[0].get<std::int64_t>(), u = pr[1].get<std::int64_t>();
            if (x < 0 || u < 0 || x >= n_states || u >= n_actions)
                bad_costs.push_back({"index-range", x, u, "goal-stay entry"});
            else
                b.goal_stay(x, u);
        }
    }
    MdpModel m = b.build();
    if (validate) {
        auto v = validate_model(m);
        v.insert(v.end(), bad_costs.begin(), bad_costs.end());
        if (!v.empty()) throw InvalidModelError(std::move(v));
    }
    return m;
}

std::ifstream open_input(const std::string& path) {
    if (!std::filesystem::exists(path)) throw IoError(path + ": not found");
    std::ifstream in(path);
    if (!in) throw IoError(path + ": cannot open for reading");
    return in;
}

void save_model(const MdpModel& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError(path + ": cannot open for writing");
    write_model(model, out);
}

MdpModel load_model(const std::string& path, bool validate) {
    auto in = open_input(path);
    return read_model(in, validate);
}

void write_distance_csv(const MdpModel& model, const QuasiDistanceField& d, std::ostream& os) {
    if (d.mode == FieldMode::all_pairs) {
        os << "state";
        for (StateId y = 0; y < d.num_states; ++y) os << ',' << model.state_name(y);
        os << '\n';
        for (StateId x = 0; x < d.num_states; ++x) {
            os << model.state_name(x);
            for (StateId y = 0; y < d.num_states; ++y) os << ',' << format_number(d.at(x, y));
            os << '\n';
        }
        return;
    }
    os << "state,distance\n";
    for (StateId x = 0; x < d.num_states; ++x) os << model.state_name(x) << ',' << format_number(d[x]) << '\n';
}

void write_value_csv(const MdpModel& model, const ValueField& v, std::ostream& os) {
    os << "state,value\n";
    for (StateId x = 0; x < v.values.size(); ++x) os << model.state_name(x) << ',' << format_number(v.values[x]) << '\n';
}

void write_policy_csv(const MdpModel& model, const PolicyTable& p, std::ostream& os) {
    if (p.mode == PolicyMode::deterministic) {
        os << "state,action\n";
        for (StateId x = 0; x < p.num_states; ++x) os << model.state_name(x) << ',' << p.actions[x] << '\n';
        return;
    }
    os << "state,action,probability\n";
    for (StateId x = 0; x < p.num_states; ++x) {
        auto r = p.row(x);
        for (ActionId u = 0; u < p.num_actions; ++u)
            if (r[u] > 0.0) os << model.state_name(x) << ',' << u << ',' << format_number(r[u]) << '\n';
    }
}

void write_trajectory_csv(const TrajectoryRecord& tr, std::ostream& os) {
    os << "step,state,action,cost\n";
    for (std::size_t t = 0; t < tr.states.size(); ++t) {
        os << t << ',' << tr.states[t] << ',';
        if (t < tr.actions.size()) os << tr.actions[t] << ',' << format_number(tr.step_costs[t]);
        else os << ',';
        os << '\n';
    }
}

void write_bench_csv(const BenchResult& b, std::ostream& os) {
    os << "method,size,phase,seconds\n";
    for (const auto& r : b.rows) os << r.method << ',' << r.size << ',' << r.phase << ',' << format_number(r.seconds) << '\n';
}

void write_mean_trajectory_csv(const MonteCarloSummary& s, std::ostream& os) {
    os << "step";
    const std::size_t dim = s.mean_trajectory.empty() ? 0 : s.mean_trajectory.front().size();
    for (std::size_t c = 0; c < dim; ++c) os << ",mean_coord_" << c + 1;
    os << '\n';
    for (std::size_t t = 0; t < s.mean_trajectory.size(); ++t) {
        os << t;
        for (double v : s.mean_trajectory[t]) os << ',' << format_number(v);
        os << '\n';
    }
}

void write_volume_csv(const std::vector<std::pair<double, std::size_t>>& volume, std::ostream& os) {
    os << "threshold,count\n";
    for (auto [L, c] : volume) os << format_number(L) << ',' << c << '\n';
}

std::vector<double> read_distance_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line != "state,distance") throw ParseError("distance CSV: bad header");
    std::vector<double> out;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        auto comma = line.rfind(',');
        if (comma == std::string::npos) throw ParseError("distance CSV: missing comma in '" + line + "'");
        const std::string v = line.substr(comma + 1);
        if (v == "inf") {
            out.push_back(kInf);
            continue;
        }
        double d = 0.0;
        auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), d);
        if (ec != std::errc() || ptr != v.data() + v.size()) throw ParseError("distance CSV: bad number '" + v + "'");
        out.push_back(d);
    }
    return out;
}

void write_risk_json(const MdpModel& model, const RiskReport& r, std::ostream& os) {
    const bool named = !model.states().labels.empty();
    auto names = [&](const StateSet& s) {
        json a = json::array();
        for (StateId x : s) {
            if (named) a.push_back(model.state_name(x));
            else a.push_back(x);
        }
        return a;
    };
    json j;
    if (named) j["goal"] = model.state_name(r.goal);
    else j["goal"] = r.goal;
    j["epsilon"] = r.epsilon;
    j["reaching"] = names(r.reaching);
    j["prison"] = names(r.prison);
    j["weakly_risky"] = names(r.weakly_risky);
    j["risky"] = names(r.risky);
    j["epsilon_risky"] = names(r.epsilon_risky);
    os << j.dump(2) << '\n';
}

ObservationModel read_observation_model(std::istream& is) {
    const json j = parse_json(is, "observation model");
    ObservationModel o;
    o.num_symbols = field<std::size_t>(j, "symbols", "observation model");
    o.rows = field<std::vector<std::vector<double>>>(j, "rows", "observation model");
    return o;
}

void write_observation_model(const ObservationModel& obs, std::ostream& os) {
    json j;
    j["symbols"] = obs.num_symbols;
    j["rows"] = obs.rows;
    os << j.dump() << '\n';
}

MazeSpec read_maze_spec(std::istream& is) {
    const json j = parse_json(is, "maze");
    MazeSpec s;
    s.width = field<std::size_t>(j, "width", "maze");
    s.height = field<std::size_t>(j, "height", "maze");
    auto start = field<std::vector<std::size_t>>(j, "start", "maze");
    auto goal = field<std::vector<std::size_t>>(j, "goal", "maze");
    if (start.size() != 2 || goal.size() != 2) throw ParseError("maze: start and goal must be [x, y]");
    s.start_x = start[0];
    s.start_y = start[1];
    s.goal_x = goal[0];
    s.goal_y = goal[1];
    if (j.contains("doors")) {
        const auto& arr = j.at("doors");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            const std::string where = "doors[" + std::to_string(i) + "]";
            auto cell = field<std::vector<std::size_t>>(arr[i], "cell", where);
            if (cell.size() != 2) throw ParseError(where + ": cell must be [x, y]");
            s.doors.push_back({cell[0], cell[1], parse_direction(field<std::string>(arr[i], "dir", where)),
                               field<double>(arr[i], "p", where)});
        }
    }
    return s;
}

void write_maze_spec(const MazeSpec& spec, std::ostream& os) {
    json j;
    j["width"] = spec.width;
    j["height"] = spec.height;
    j["start"] = {spec.start_x, spec.start_y};
    j["goal"] = {spec.goal_x, spec.goal_y};
    json doors = json::array();
    for (const auto& d : spec.doors) doors.push_back({{"cell", {d.x, d.y}}, {"dir", direction_name(d.dir)}, {"p", d.p}});
    j["doors"] = std::move(doors);
    os << j.dump(2) << '\n';
}

}  // namespace qm
