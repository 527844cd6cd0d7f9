#pragma once

// Exact maximization of theta . y under flow conservation, posed as a
// min-cost flow with unit capacities:
//
//   source -> u_j  (-theta_new_j)     u_j -> v_j  (-theta_det_j)
//   v_j -> sink    (-theta_end_j)     v_j -> u_k  (-theta_link_jk)
//
// Successive shortest paths augment one unit at a time and stop as soon as
// the cheapest source-sink path has nonnegative cost.

#include "dsmt/assoc.hpp"

#include <vector>

namespace dsmt {

struct FlowArc {
    int from = 0;
    int to = 0;
    double cost = 0.0;
    int capacity = 1;
    int flow = 0;
    int variable = -1; // layout variable carried by this arc, -1 if none
};

struct FlowNetwork {
    int node_count = 0;
    int source = 0;
    int sink = 1;
    std::vector<FlowArc> arcs;

    int add_node() { return node_count++; }
    int add_arc(int from, int to, double cost, int capacity = 1, int variable = -1);
};

// Node ids: source 0, sink 1, u_j = 2 + 2j, v_j = 3 + 2j. Arc i carries
// variable i, so arcs are in the same order as the layout.
FlowNetwork build_flow_network(const AssociationGraph& graph);

// Residual arc ids: 2a is the forward residual of arc a (available while
// flow < capacity, cost c), 2a + 1 the backward residual (available while
// flow > 0, cost -c).
struct ShortestPathTree {
    std::vector<double> distance;   // +inf when unreachable
    std::vector<int> parent_arc;    // residual arc id into each node, -1 at the root
    bool negative_cycle = false;
    std::vector<int> cycle;         // residual arc ids around a negative cycle
};

// Bellman-Ford over the residual network. Relaxes arcs in index order.
ShortestPathTree bellman_ford(const FlowNetwork& network, int source);

struct Solution {
    Assignment assignment;
    double objective = 0.0; // theta . y
    std::vector<Trajectory> trajectories;
    // Objective after each augmentation, starting from 0 before the first.
    std::vector<double> objective_trace;
};

struct SolveOptions {
    // Run Bellman-Ford on the residual network after every augmentation and
    // fail if a negative cycle appears. Test-time check; quadratic cost.
    bool verify_residual = false;
};

// Global maximizer of theta . y. Among equal-cost augmenting paths the one
// discovered first is used: Dijkstra pops nodes by (distance, node id) and
// relaxes arcs in variable order, so lower variable indices win ties.
// Throws NumericalError on non-finite costs.
Solution solve(const AssociationGraph& graph, const SolveOptions& options = {});

inline constexpr int kExhaustiveVariableCap = 25;

// Test oracle: enumerates binary vectors in lexicographic order (variable 0
// most significant, 0 before 1), skipping branches that cannot satisfy flow
// conservation, and keeps the first vector with the best objective, i.e. the
// lexicographically smallest optimum. Throws StructuralError when the layout
// has more than kExhaustiveVariableCap variables.
Solution solve_exhaustive(const AssociationGraph& graph);

} // namespace dsmt
