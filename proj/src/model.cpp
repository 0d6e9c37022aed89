#include "qm/model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

namespace qm {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

std::optional<StateId> MdpModel::find_state(const std::string& name) const {
    for (std::size_t i = 0; i < states_.labels.size(); ++i)
        if (states_.labels[i] == name) return static_cast<StateId>(i);
    std::uint64_t idx = 0;
    auto [ptr, ec] = std::from_chars(name.data(), name.data() + name.size(), idx);
    if (ec == std::errc() && ptr == name.data() + name.size() && idx < states_.count)
        return static_cast<StateId>(idx);
    return std::nullopt;
}

std::string MdpModel::state_name(StateId x) const {
    if (x < states_.labels.size()) return states_.labels[x];
    return std::to_string(x);
}

double MdpModel::max_cost() const {
    double m = 0.0;
    for (double g : costs_)
        if (std::isfinite(g)) m = std::max(m, g);
    return m;
}

MdpModel MdpModel::scaled_costs(double factor) const {
    MdpModel out = *this;
    for (double& g : out.costs_)
        if (g == g) g *= factor;
    return out;
}

MdpModel MdpModel::without_pair(StateId x, ActionId u) const {
    std::size_t S = num_states(), A = num_actions();
    std::vector<std::vector<Successor>> rows(S * A);
    for (StateId s = 0; s < S; ++s)
        for (ActionId a = 0; a < A; ++a) {
            if (s == x && a == u) continue;
            auto t = targets(s, a);
            auto p = probs(s, a);
            auto& row = rows[pair_index(s, a)];
            for (std::size_t k = 0; k < t.size(); ++k) row.push_back({t[k], p[k]});
        }
    std::vector<double> costs = costs_;
    costs[pair_index(x, u)] = kNaN;
    std::vector<std::pair<StateId, ActionId>> gs;
    for (auto pr : goal_stay_)
        if (!(pr.first == x && pr.second == u)) gs.push_back(pr);
    return assemble_model(states_, actions_, std::move(rows), std::move(costs), std::move(gs));
}

MdpBuilder::MdpBuilder(std::size_t n_states, std::size_t n_actions)
    : n_states_(n_states), n_actions_(n_actions), costs_(n_states * n_actions, kNaN) {}

MdpBuilder& MdpBuilder::labels(std::vector<std::string> labels) {
    labels_ = std::move(labels);
    return *this;
}

MdpBuilder& MdpBuilder::embedding(std::vector<std::vector<double>> embedding) {
    embedding_ = std::move(embedding);
    return *this;
}

MdpBuilder& MdpBuilder::transition(std::int64_t from, std::int64_t action, std::int64_t to, double p) {
    if (from < 0 || action < 0 || to < 0 || static_cast<std::size_t>(from) >= n_states_ ||
        static_cast<std::size_t>(action) >= n_actions_ || to > std::numeric_limits<StateId>::max()) {
        orphans_.push_back({from, action, to, p});
        return *this;
    }
    entries_.push_back({static_cast<StateId>(from), static_cast<ActionId>(action),
                        static_cast<StateId>(to), p});
    return *this;
}

MdpBuilder& MdpBuilder::cost(std::int64_t x, std::int64_t u, double g) {
    if (x < 0 || u < 0 || static_cast<std::size_t>(x) >= n_states_ ||
        static_cast<std::size_t>(u) >= n_actions_)
        throw ValidationError("cost entry (" + std::to_string(x) + ", " + std::to_string(u) +
                              ") out of range");
    costs_[static_cast<std::size_t>(x) * n_actions_ + static_cast<std::size_t>(u)] = g;
    return *this;
}

MdpBuilder& MdpBuilder::goal_stay(std::int64_t x, std::int64_t u) {
    if (x < 0 || u < 0 || static_cast<std::size_t>(x) >= n_states_ ||
        static_cast<std::size_t>(u) >= n_actions_)
        throw ValidationError("goal-stay pair (" + std::to_string(x) + ", " + std::to_string(u) +
                              ") out of range");
    goal_stay_.emplace_back(x, u);
    return *this;
}

MdpBuilder& MdpBuilder::row(StateId x, ActionId u, std::span<const Successor> successors, double g) {
    for (const auto& s : successors) transition(x, u, s.to, s.p);
    return cost(x, u, g);
}

MdpBuilder& MdpBuilder::prune(double threshold) {
    prune_threshold_ = threshold;
    return *this;
}

MdpModel MdpBuilder::build() const {
    std::vector<std::vector<Successor>> rows(n_states_ * n_actions_);
    for (const auto& e : entries_)
        rows[static_cast<std::size_t>(e.from) * n_actions_ + e.action].push_back({e.to, e.p});
    if (prune_threshold_ > 0.0) {
        for (auto& row : rows) {
            if (row.empty()) continue;
            std::erase_if(row, [&](const Successor& s) { return s.p < prune_threshold_; });
            double total = 0.0;
            for (const auto& s : row) total += s.p;
            if (total > 0.0)
                for (auto& s : row) s.p /= total;
        }
    }
    std::vector<std::pair<StateId, ActionId>> gs;
    for (auto [x, u] : goal_stay_) gs.emplace_back(static_cast<StateId>(x), static_cast<ActionId>(u));
    MdpModel m = assemble_model(StateSpace{n_states_, labels_}, ActionSpace{n_actions_, embedding_},
                                std::move(rows), costs_, std::move(gs));
    m.orphans_ = orphans_;
    return m;
}

MdpModel assemble_model(StateSpace states, ActionSpace actions,
                        std::vector<std::vector<Successor>> rows, std::vector<double> costs,
                        std::vector<std::pair<StateId, ActionId>> goal_stay) {
    MdpModel m;
    const std::size_t pairs = states.count * actions.count;
    if (rows.size() != pairs || costs.size() != pairs)
        throw ValidationError("row/cost table size does not match |X|*|U|");
    m.states_ = std::move(states);
    m.actions_ = std::move(actions);
    m.offsets_.assign(pairs + 1, 0);
    std::size_t total = 0;
    for (std::size_t k = 0; k < pairs; ++k) {
        m.offsets_[k] = total;
        total += rows[k].size();
    }
    m.offsets_[pairs] = total;
    m.targets_.resize(total);
    m.probs_.resize(total);
    for (std::size_t k = 0; k < pairs; ++k) {
        std::size_t o = m.offsets_[k];
        for (const auto& s : rows[k]) {
            m.targets_[o] = s.to;
            m.probs_[o] = s.p;
            ++o;
        }
    }
    m.costs_ = std::move(costs);
    m.goal_stay_flags_.assign(pairs, 0);
    std::sort(goal_stay.begin(), goal_stay.end());
    goal_stay.erase(std::unique(goal_stay.begin(), goal_stay.end()), goal_stay.end());
    for (auto [x, u] : goal_stay) m.goal_stay_flags_[static_cast<std::size_t>(x) * m.actions_.count + u] = 1;
    m.goal_stay_ = std::move(goal_stay);
    return m;
}

std::string Violation::to_string() const {
    std::ostringstream os;
    os << rule;
    if (state >= 0) {
        os << " at (" << state;
        if (action >= 0) os << ", " << action;
        os << ")";
    }
    if (!detail.empty()) os << ": " << detail;
    return os.str();
}

std::vector<Violation> validate_model(const MdpModel& model) {
    std::vector<Violation> out;
    const auto S = model.num_states();
    const auto A = model.num_actions();
    if (S == 0) out.push_back({"state-count", -1, -1, "at least one state is required"});
    if (A == 0) out.push_back({"action-count", -1, -1, "at least one action is required"});

    const auto& labels = model.states().labels;
    if (!labels.empty()) {
        if (labels.size() != S)
            out.push_back({"labels", -1, -1,
                           std::to_string(labels.size()) + " labels for " + std::to_string(S) + " states"});
        std::set<std::string> seen;
        for (std::size_t i = 0; i < labels.size(); ++i)
            if (!seen.insert(labels[i]).second)
                out.push_back({"labels", static_cast<std::int64_t>(i), -1, "duplicate label '" + labels[i] + "'"});
    }
    const auto& emb = model.actions().embedding;
    if (!emb.empty()) {
        if (emb.size() != A)
            out.push_back({"embedding", -1, -1,
                           std::to_string(emb.size()) + " vectors for " + std::to_string(A) + " actions"});
        for (std::size_t u = 0; u < emb.size(); ++u)
            if (emb[u].size() != emb.front().size() || emb[u].empty())
                out.push_back({"embedding", -1, static_cast<std::int64_t>(u), "inconsistent dimension"});
    }

    for (const auto& o : model.orphan_transitions())
        out.push_back({"index-range", o.from, o.action, "transition to " + std::to_string(o.to)});

    for (StateId x = 0; x < S; ++x) {
        for (ActionId u = 0; u < A; ++u) {
            auto t = model.targets(x, u);
            auto p = model.probs(x, u);
            const auto xi = static_cast<std::int64_t>(x);
            const auto ui = static_cast<std::int64_t>(u);
            if (!t.empty()) {
                double sum = 0.0;
                for (std::size_t k = 0; k < t.size(); ++k) {
                    if (t[k] >= S)
                        out.push_back({"index-range", xi, ui, "successor " + std::to_string(t[k])});
                    if (!(p[k] > 0.0 && p[k] <= 1.0))
                        out.push_back({"probability-range", xi, ui, "p=" + std::to_string(p[k])});
                    sum += p[k];
                }
                if (std::abs(sum - 1.0) > kRowSumTolerance) {
                    std::ostringstream os;
                    os.precision(17);
                    os << "probabilities sum to " << sum;
                    out.push_back({"row-sum", xi, ui, os.str()});
                }
                std::vector<StateId> sorted(t.begin(), t.end());
                std::sort(sorted.begin(), sorted.end());
                if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
                    out.push_back({"duplicate-successor", xi, ui, ""});
                if (!model.has_cost(x, u)) out.push_back({"missing-cost", xi, ui, ""});
            }
            if (model.has_cost(x, u)) {
                double g = model.cost(x, u);
                if (!std::isfinite(g) || g < 0.0)
                    out.push_back({"positive-cost", xi, ui, "g=" + std::to_string(g)});
                else if (g == 0.0 && !model.is_goal_stay(x, u))
                    out.push_back({"positive-cost", xi, ui, "zero cost on a pair not flagged goal-stay"});
            }
        }
    }
    return out;
}

NormalizedModel normalize_costs(const MdpModel& model) {
    double min_pos = kInf;
    for (StateId x = 0; x < model.num_states(); ++x)
        for (ActionId u = 0; u < model.num_actions(); ++u)
            if (model.has_cost(x, u) && model.cost(x, u) > 0.0) min_pos = std::min(min_pos, model.cost(x, u));
    if (!std::isfinite(min_pos)) throw ValidationError("no positive costs");
    double scale = 1.0 / min_pos;
    return {model.scaled_costs(scale), scale};
}

GoalSpec GoalSpec::single(StateId goal) {
    GoalSpec g;
    g.weights_[goal] = 1.0;
    return g;
}

GoalSpec GoalSpec::distribution(std::map<StateId, double> weights) {
    double sum = 0.0;
    for (auto [x, w] : weights) {
        if (!(w >= 0.0)) throw ValidationError("goal weight for state " + std::to_string(x) + " is negative");
        sum += w;
    }
    if (std::abs(sum - 1.0) > kRowSumTolerance)
        throw ValidationError("goal distribution sums to " + std::to_string(sum));
    GoalSpec g;
    g.weights_ = std::move(weights);
    return g;
}

}  // namespace qm
