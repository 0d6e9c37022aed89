#include "qm/risk.hpp"

#include <algorithm>
#include <cmath>

namespace qm {

StateSet reaching_set(const WeightedGraph& graph, StateId goal) {
    if (goal >= graph.num_vertices) throw ValidationError("goal out of range");
    std::vector<char> seen(graph.num_vertices, 0);
    std::vector<StateId> stack{goal};
    seen[goal] = 1;
    while (!stack.empty()) {
        StateId v = stack.back();
        stack.pop_back();
        for (const Arc& a : graph.in(v))
            if (!seen[a.to]) {
                seen[a.to] = 1;
                stack.push_back(a.to);
            }
    }
    StateSet q;
    for (StateId x = 0; x < graph.num_vertices; ++x)
        if (seen[x]) q.push_back(x);
    return q;
}

StateSet prison_set(const StateSet& reaching, std::size_t n_states) {
    std::vector<char> in_q(n_states, 0);
    for (StateId x : reaching) in_q[x] = 1;
    StateSet j;
    for (StateId x = 0; x < n_states; ++x)
        if (!in_q[x]) j.push_back(x);
    return j;
}

RiskySets risky_sets(const MdpModel& model, const StateSet& prison, double epsilon) {
    if (!(epsilon >= 0.0 && epsilon < 1.0))
        throw ValidationError("epsilon must lie in [0, 1), got " + std::to_string(epsilon));
    std::vector<char> jailed(model.num_states(), 0);
    for (StateId x : prison) jailed[x] = 1;

    RiskySets out;
    for (StateId x = 0; x < model.num_states(); ++x) {
        if (jailed[x]) continue;
        bool any = false, all = true, all_eps = true, has_action = false;
        for (ActionId u = 0; u < model.num_actions(); ++u) {
            if (!model.applicable(x, u)) continue;
            has_action = true;
            // Largest single-successor probability of entering the prison.
            double worst = 0.0;
            auto t = model.targets(x, u);
            auto p = model.probs(x, u);
            for (std::size_t k = 0; k < t.size(); ++k)
                if (t[k] < jailed.size() && jailed[t[k]] && p[k] > 0.0) worst = std::max(worst, p[k]);
            any = any || worst > 0.0;
            all = all && worst > 0.0;
            all_eps = all_eps && worst > epsilon;
        }
        if (!any) continue;
        out.weakly_risky.push_back(x);
        if (has_action && all) out.risky.push_back(x);
        if (has_action && all_eps) out.epsilon_risky.push_back(x);
    }
    return out;
}

RiskReport risk_report(const MdpModel& model, const WeightedGraph& graph, StateId goal, double epsilon) {
    RiskReport r;
    r.goal = goal;
    r.epsilon = epsilon;
    r.reaching = reaching_set(graph, goal);
    r.prison = prison_set(r.reaching, model.num_states());
    auto k = risky_sets(model, r.prison, epsilon);
    r.weakly_risky = std::move(k.weakly_risky);
    r.risky = std::move(k.risky);
    r.epsilon_risky = std::move(k.epsilon_risky);
    return r;
}

QuasiDistanceField apply_risk_override(const QuasiDistanceField& d, const StateSet& risky, double omega) {
    if (d.mode != FieldMode::to_goal) throw ValidationError("risk override needs a to-goal field");
    if (!(omega > 0.0)) throw ValidationError("omega must be positive");
    QuasiDistanceField out = d;
    for (StateId x : risky) out.values.at(x) = omega;
    return out;
}

StateSet sublevel_set(const QuasiDistanceField& d, double k) {
    if (d.mode == FieldMode::all_pairs) throw ValidationError("sublevel set needs a single-anchor field");
    StateSet s;
    for (StateId x = 0; x < d.num_states; ++x)
        if (std::isfinite(d[x]) && d[x] < k) s.push_back(x);
    return s;
}

}  // namespace qm
