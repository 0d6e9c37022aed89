#include "qm/quasimetric.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <queue>

namespace qm {

double OneStepDistance::at(StateId x, StateId y) const {
    if (x == y) return 0.0;
    auto first = targets.begin() + static_cast<std::ptrdiff_t>(offsets[x]);
    auto last = targets.begin() + static_cast<std::ptrdiff_t>(offsets[x + 1]);
    auto it = std::lower_bound(first, last, y);
    if (it == last || *it != y) return kInf;
    return weights[static_cast<std::size_t>(it - targets.begin())];
}

namespace {

// Actions eligible for the one-step distance: applicable with a finite,
// strictly positive cost. Zero-cost goal-stay pairs are excluded.
bool contributes(const MdpModel& m, StateId x, ActionId u) {
    if (!m.applicable(x, u) || !m.has_cost(x, u)) return false;
    double g = m.cost(x, u);
    return g > 0.0 && std::isfinite(g);
}

void row_serial(const MdpModel& m, StateId x, std::vector<Arc>& out) {
    std::map<StateId, double> best;
    for (ActionId u = 0; u < m.num_actions(); ++u) {
        if (!contributes(m, x, u)) continue;
        const double g = m.cost(x, u);
        auto t = m.targets(x, u);
        auto p = m.probs(x, u);
        for (std::size_t k = 0; k < t.size(); ++k) {
            if (t[k] == x || !(p[k] > 0.0)) continue;
            const double w = g / p[k];
            auto [it, inserted] = best.emplace(t[k], w);
            if (!inserted) it->second = std::min(it->second, w);
        }
    }
    out.clear();
    for (auto [y, w] : best) out.push_back({y, w});
}

void row_sorted(const MdpModel& m, StateId x, std::vector<Arc>& out) {
    out.clear();
    for (ActionId u = 0; u < m.num_actions(); ++u) {
        if (!contributes(m, x, u)) continue;
        const double g = m.cost(x, u);
        auto t = m.targets(x, u);
        auto p = m.probs(x, u);
        for (std::size_t k = 0; k < t.size(); ++k)
            if (t[k] != x && p[k] > 0.0) out.push_back({t[k], g / p[k]});
    }
    std::sort(out.begin(), out.end(), [](const Arc& a, const Arc& b) {
        return a.to != b.to ? a.to < b.to : a.w < b.w;
    });
    auto last = std::unique(out.begin(), out.end(), [](const Arc& a, const Arc& b) { return a.to == b.to; });
    out.erase(last, out.end());
}

OneStepDistance pack(std::vector<std::vector<Arc>>& rows) {
    OneStepDistance d;
    d.num_states = rows.size();
    d.offsets.assign(rows.size() + 1, 0);
    for (std::size_t x = 0; x < rows.size(); ++x) d.offsets[x + 1] = d.offsets[x] + rows[x].size();
    d.targets.resize(d.offsets.back());
    d.weights.resize(d.offsets.back());
    for (std::size_t x = 0; x < rows.size(); ++x) {
        std::size_t o = d.offsets[x];
        for (const auto& a : rows[x]) {
            d.targets[o] = a.to;
            d.weights[o] = a.w;
            ++o;
        }
    }
    return d;
}

}  // namespace

OneStepDistance one_step_distance(const MdpModel& model, Exec exec) {
    const auto n = static_cast<std::ptrdiff_t>(model.num_states());
    std::vector<std::vector<Arc>> rows(model.num_states());
    if (exec == Exec::serial) {
        for (std::ptrdiff_t x = 0; x < n; ++x) row_serial(model, static_cast<StateId>(x), rows[x]);
    } else {
#pragma omp parallel for schedule(dynamic, 64)
        for (std::ptrdiff_t x = 0; x < n; ++x) row_sorted(model, static_cast<StateId>(x), rows[x]);
    }
    return pack(rows);
}

WeightedGraph build_graph(const OneStepDistance& d1) {
    WeightedGraph g;
    const std::size_t n = d1.num_states;
    g.num_vertices = n;
    g.out_offsets = d1.offsets;
    if (g.out_offsets.empty()) g.out_offsets.assign(n + 1, 0);
    g.out_arcs.resize(d1.num_pairs());
    g.in_offsets.assign(n + 1, 0);
    for (std::size_t k = 0; k < d1.num_pairs(); ++k) {
        g.out_arcs[k] = {d1.targets[k], d1.weights[k]};
        ++g.in_offsets[d1.targets[k] + 1];
    }
    for (std::size_t y = 0; y < n; ++y) g.in_offsets[y + 1] += g.in_offsets[y];
    g.in_arcs.resize(d1.num_pairs());
    std::vector<std::size_t> fill(g.in_offsets.begin(), g.in_offsets.end() - 1);
    for (StateId x = 0; x < n; ++x)
        for (std::size_t k = d1.offsets[x]; k < d1.offsets[x + 1]; ++k)
            g.in_arcs[fill[d1.targets[k]]++] = {x, d1.weights[k]};
    return g;
}

namespace {

std::vector<double> dijkstra(const WeightedGraph& g, StateId anchor, bool transposed) {
    std::vector<double> dist(g.num_vertices, kInf);
    using Item = std::pair<double, StateId>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    dist[anchor] = 0.0;
    heap.push({0.0, anchor});
    while (!heap.empty()) {
        auto [d, v] = heap.top();
        heap.pop();
        if (d > dist[v]) continue;
        for (const Arc& a : transposed ? g.in(v) : g.out(v)) {
            const double nd = d + a.w;
            if (nd < dist[a.to]) {
                dist[a.to] = nd;
                heap.push({nd, a.to});
            }
        }
    }
    return dist;
}

void check_vertex(const WeightedGraph& g, StateId v) {
    if (v >= g.num_vertices)
        throw ValidationError("state " + std::to_string(v) + " out of range (|X|=" +
                              std::to_string(g.num_vertices) + ")");
}

}  // namespace

QuasiDistanceField distance_to_goal(const WeightedGraph& graph, StateId goal) {
    check_vertex(graph, goal);
    return {FieldMode::to_goal, graph.num_vertices, goal, dijkstra(graph, goal, true)};
}

QuasiDistanceField distance_from_source(const WeightedGraph& graph, StateId source) {
    check_vertex(graph, source);
    return {FieldMode::from_source, graph.num_vertices, source, dijkstra(graph, source, false)};
}

std::vector<std::optional<StateId>> shortest_path_successors(const WeightedGraph& graph,
                                                             const QuasiDistanceField& to_goal) {
    std::vector<std::optional<StateId>> next(graph.num_vertices);
    for (StateId x = 0; x < graph.num_vertices; ++x) {
        if (x == to_goal.anchor || !QuasiDistanceField::reachable(to_goal[x])) continue;
        double best = kInf;
        for (const Arc& a : graph.out(x)) {
            const double via = a.w + to_goal[a.to];
            if (via < best || (via == best && next[x] && a.to < *next[x])) {
                best = via;
                next[x] = a.to;
            }
        }
    }
    return next;
}

QuasiDistanceField distance_all_pairs(const WeightedGraph& graph, std::size_t cap, Exec exec) {
    const std::size_t n = graph.num_vertices;
    if (n > cap)
        throw ValidationError("all-pairs solve limited to " + std::to_string(cap) + " states (model has " +
                              std::to_string(n) + "); solve per goal instead");
    std::vector<double> d(n * n, kInf);
    for (std::size_t x = 0; x < n; ++x) {
        d[x * n + x] = 0.0;
        for (const Arc& a : graph.out(static_cast<StateId>(x))) d[x * n + a.to] = std::min(d[x * n + a.to], a.w);
    }
    const auto sn = static_cast<std::ptrdiff_t>(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double* row_k = d.data() + k * n;
        // Row k does not change during pass k because d(k,k) = 0.
        auto relax = [&](std::ptrdiff_t i) {
            double* row_i = d.data() + static_cast<std::size_t>(i) * n;
            const double dik = row_i[k];
            if (dik == kInf) return;
            for (std::size_t j = 0; j < n; ++j) {
                const double c = dik + row_k[j];
                if (c < row_i[j]) row_i[j] = c;
            }
        };
        if (exec == Exec::serial) {
            for (std::ptrdiff_t i = 0; i < sn; ++i) relax(i);
        } else {
#pragma omp parallel for schedule(static)
            for (std::ptrdiff_t i = 0; i < sn; ++i) relax(i);
        }
    }
    return {FieldMode::all_pairs, n, std::nullopt, std::move(d)};
}

IterativeResult distance_iterative(const MdpModel& model, int max_iters, std::size_t cap) {
    const std::size_t n = model.num_states();
    if (n > cap)
        throw ValidationError("iterative solve limited to " + std::to_string(cap) + " states");
    const OneStepDistance d1 = one_step_distance(model, Exec::serial);

    // d^1 = min(d^0, one-step), with d^0 = 0 on the diagonal and +inf elsewhere.
    std::vector<double> cur(n * n, kInf);
    for (std::size_t x = 0; x < n; ++x) {
        cur[x * n + x] = 0.0;
        for (std::size_t k = d1.offsets[x]; k < d1.offsets[x + 1]; ++k) cur[x * n + d1.targets[k]] = d1.weights[k];
    }

    IterativeResult res;
    std::vector<double> next(n * n);
    const auto sn = static_cast<std::ptrdiff_t>(n);
    while (res.iterations < max_iters) {
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t xi = 0; xi < sn; ++xi) {
            const auto x = static_cast<std::size_t>(xi);
            const double* row_x = cur.data() + x * n;
            double* out = next.data() + x * n;
            for (std::size_t y = 0; y < n; ++y) out[y] = kInf;
            for (std::size_t z = 0; z < n; ++z) {
                const double dxz = row_x[z];
                if (dxz == kInf) continue;
                const double* row_z = cur.data() + z * n;
                for (std::size_t y = 0; y < n; ++y) {
                    const double c = dxz + row_z[y];
                    if (c < out[y]) out[y] = c;
                }
            }
        }
        ++res.iterations;
        double max_change = 0.0;
        for (std::size_t k = 0; k < n * n; ++k) {
            if (cur[k] == next[k]) continue;
            const double diff = next[k] - cur[k];  // +inf only if an entry became unreachable
            res.max_increase = std::max(res.max_increase, diff);
            max_change = std::max(max_change, std::abs(diff));
        }
        cur.swap(next);
        if (max_change <= kRecurrenceTolerance) {
            res.converged = true;
            break;
        }
    }
    res.field = {FieldMode::all_pairs, n, std::nullopt, std::move(cur)};
    return res;
}

}  // namespace qm
