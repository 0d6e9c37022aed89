#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "qm/exec.hpp"
#include "qm/model.hpp"

namespace qm {

/// Sparse one-step distances w(x, y) = min_u g(x,u) / p(y|x,u), x != y.
/// Row x lists (y, w) pairs sorted by y; absent pairs are +inf.
struct OneStepDistance {
    std::size_t num_states = 0;
    std::vector<std::size_t> offsets;  // size num_states + 1
    std::vector<StateId> targets;
    std::vector<double> weights;

    std::size_t num_pairs() const { return targets.size(); }
    /// +inf when absent; 0 on the diagonal.
    double at(StateId x, StateId y) const;
};

struct Arc {
    StateId to;
    double w;
};

/// Directed graph with forward and transposed CSR adjacency.
struct WeightedGraph {
    std::size_t num_vertices = 0;
    std::vector<std::size_t> out_offsets;
    std::vector<Arc> out_arcs;
    std::vector<std::size_t> in_offsets;
    std::vector<Arc> in_arcs;  // `to` holds the arc's source vertex

    std::size_t num_arcs() const { return out_arcs.size(); }
    std::span<const Arc> out(StateId x) const {
        return {out_arcs.data() + out_offsets[x], out_offsets[x + 1] - out_offsets[x]};
    }
    std::span<const Arc> in(StateId y) const {
        return {in_arcs.data() + in_offsets[y], in_offsets[y + 1] - in_offsets[y]};
    }
};

enum class FieldMode { to_goal, from_source, all_pairs };

/// Quasi-distances with +inf as the unreachable marker.
struct QuasiDistanceField {
    FieldMode mode = FieldMode::to_goal;
    std::size_t num_states = 0;
    std::optional<StateId> anchor;
    std::vector<double> values;  // n entries, or n*n row-major for all_pairs

    double operator[](StateId x) const { return values[x]; }
    /// d(x, y) in all-pairs mode.
    double at(StateId x, StateId y) const { return values[static_cast<std::size_t>(x) * num_states + y]; }
    static bool reachable(double d) { return d < kInf; }
};

OneStepDistance one_step_distance(const MdpModel& model, Exec exec = Exec::parallel);

WeightedGraph build_graph(const OneStepDistance& d1);

/// d(x, goal) for every x, via Dijkstra on the transposed graph.
QuasiDistanceField distance_to_goal(const WeightedGraph& graph, StateId goal);

/// d(source, y) for every y, via Dijkstra on the forward graph.
QuasiDistanceField distance_from_source(const WeightedGraph& graph, StateId source);

/// Shortest-path predecessors toward `goal`: next hop on a shortest path from
/// each state, lowest-numbered on ties. Empty optional for the goal and for
/// unreachable states.
std::vector<std::optional<StateId>> shortest_path_successors(const WeightedGraph& graph,
                                                             const QuasiDistanceField& to_goal);

inline constexpr std::size_t kDefaultAllPairsCap = 2000;

/// Floyd-Warshall over the whole graph.
QuasiDistanceField distance_all_pairs(const WeightedGraph& graph, std::size_t cap = kDefaultAllPairsCap,
                                      Exec exec = Exec::parallel);

struct IterativeResult {
    QuasiDistanceField field;
    int iterations = 0;
    bool converged = false;
    /// Largest entrywise increase observed between consecutive iterates
    /// (<= 0 when the sequence is non-increasing).
    double max_increase = 0.0;
};

inline constexpr double kRecurrenceTolerance = 1e-12;

/// Min-plus recurrence d <- min_z d(x,z) + d(z,y) starting from the one-step
/// distance, until no entry changes by more than 1e-12.
IterativeResult distance_iterative(const MdpModel& model, int max_iters, std::size_t cap = kDefaultAllPairsCap);

}  // namespace qm
