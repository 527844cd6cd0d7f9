#include "dsmt/solver.hpp"

#include "dsmt/error.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>
#include <string>

namespace dsmt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct ResidualView {
    const FlowNetwork& net;

    int tail(int r) const {
        const auto& a = net.arcs[r / 2];
        return (r % 2 == 0) ? a.from : a.to;
    }
    int head(int r) const {
        const auto& a = net.arcs[r / 2];
        return (r % 2 == 0) ? a.to : a.from;
    }
    double cost(int r) const {
        const auto& a = net.arcs[r / 2];
        return (r % 2 == 0) ? a.cost : -a.cost;
    }
    bool available(int r) const {
        const auto& a = net.arcs[r / 2];
        return (r % 2 == 0) ? a.flow < a.capacity : a.flow > 0;
    }
};

void check_costs(const AssociationGraph& graph) {
    if (static_cast<int>(graph.costs.size()) != graph.layout.size()) {
        throw StructuralError("cost vector length does not match the variable layout");
    }
    for (std::size_t i = 0; i < graph.costs.size(); ++i) {
        if (!std::isfinite(graph.costs[i])) {
            throw NumericalError("non-finite cost at variable " + std::to_string(i) + " (" +
                                 to_string(graph.layout.kind(static_cast<int>(i))) + ")");
        }
    }
}

Solution finish(const AssociationGraph& graph, Assignment y) {
    Solution s;
    s.objective = objective(graph.costs, y);
    s.trajectories = decode_trajectories(y, graph);
    s.assignment = std::move(y);
    return s;
}

} // namespace

int FlowNetwork::add_arc(int from, int to, double cost, int capacity, int variable) {
    arcs.push_back({from, to, cost, capacity, 0, variable});
    return static_cast<int>(arcs.size()) - 1;
}

FlowNetwork build_flow_network(const AssociationGraph& graph) {
    const auto& layout = graph.layout;
    const int n = layout.detection_count();
    FlowNetwork net;
    net.source = net.add_node();
    net.sink = net.add_node();
    for (int j = 0; j < n; ++j) {
        net.add_node(); // u_j
        net.add_node(); // v_j
    }
    auto u = [](int j) { return 2 + 2 * j; };
    auto v = [](int j) { return 3 + 2 * j; };
    net.arcs.reserve(static_cast<std::size_t>(layout.size()));
    for (int j = 0; j < n; ++j) net.add_arc(u(j), v(j), -graph.costs[layout.det_var(j)], 1, layout.det_var(j));
    for (int l = 0; l < layout.link_count(); ++l) {
        const auto& lk = layout.links()[l];
        net.add_arc(v(lk.from), u(lk.to), -graph.costs[layout.link_var(l)], 1, layout.link_var(l));
    }
    for (int j = 0; j < n; ++j) net.add_arc(net.source, u(j), -graph.costs[layout.new_var(j)], 1, layout.new_var(j));
    for (int j = 0; j < n; ++j) net.add_arc(v(j), net.sink, -graph.costs[layout.end_var(j)], 1, layout.end_var(j));
    return net;
}

ShortestPathTree bellman_ford(const FlowNetwork& network, int source) {
    const ResidualView res{network};
    const int residual_count = static_cast<int>(network.arcs.size()) * 2;
    ShortestPathTree tree;
    tree.distance.assign(static_cast<std::size_t>(network.node_count), kInf);
    tree.parent_arc.assign(static_cast<std::size_t>(network.node_count), -1);
    tree.distance[source] = 0.0;

    for (int round = 0; round + 1 < network.node_count; ++round) {
        bool changed = false;
        for (int r = 0; r < residual_count; ++r) {
            if (!res.available(r)) continue;
            const int a = res.tail(r), b = res.head(r);
            if (tree.distance[a] == kInf) continue;
            const double cand = tree.distance[a] + res.cost(r);
            if (cand < tree.distance[b]) {
                tree.distance[b] = cand;
                tree.parent_arc[b] = r;
                changed = true;
            }
        }
        if (!changed) return tree;
    }

    // One more pass: any meaningful improvement proves a negative cycle.
    for (int r = 0; r < residual_count; ++r) {
        if (!res.available(r)) continue;
        const int a = res.tail(r), b = res.head(r);
        if (tree.distance[a] == kInf) continue;
        const double cand = tree.distance[a] + res.cost(r);
        if (cand < tree.distance[b] - 1e-9 * (1.0 + std::abs(tree.distance[b]))) {
            tree.negative_cycle = true;
            tree.parent_arc[b] = r;
            int node = b;
            for (int i = 0; i < network.node_count; ++i) node = res.tail(tree.parent_arc[node]);
            const int start = node;
            do {
                const int arc = tree.parent_arc[node];
                tree.cycle.push_back(arc);
                node = res.tail(arc);
            } while (node != start);
            return tree;
        }
    }
    return tree;
}

Solution solve(const AssociationGraph& graph, const SolveOptions& options) {
    check_costs(graph);
    FlowNetwork net = build_flow_network(graph);
    const ResidualView res{net};
    const int nodes = net.node_count;

    std::vector<std::vector<int>> adjacency(static_cast<std::size_t>(nodes));
    for (int a = 0; a < static_cast<int>(net.arcs.size()); ++a) {
        adjacency[net.arcs[a].from].push_back(2 * a);
        adjacency[net.arcs[a].to].push_back(2 * a + 1);
    }

    // The initial network is acyclic, so Bellman-Ford gives exact potentials
    // even with negative arc costs.
    const auto initial = bellman_ford(net, net.source);
    if (initial.negative_cycle) throw NumericalError("negative cycle in the initial flow network");
    std::vector<double> potential = initial.distance;

    Assignment y(static_cast<std::size_t>(graph.layout.size()));
    std::vector<double> trace{0.0};
    std::vector<double> dist(static_cast<std::size_t>(nodes));
    std::vector<int> parent(static_cast<std::size_t>(nodes));
    using Entry = std::pair<double, int>;

    while (true) {
        std::fill(dist.begin(), dist.end(), kInf);
        std::fill(parent.begin(), parent.end(), -1);
        std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
        dist[net.source] = 0.0;
        heap.emplace(0.0, net.source);
        while (!heap.empty()) {
            const auto [d, node] = heap.top();
            heap.pop();
            if (d > dist[node]) continue;
            for (int r : adjacency[node]) {
                if (!res.available(r)) continue;
                const int next = res.head(r);
                if (potential[next] == kInf) continue;
                // Reduced costs are nonnegative up to rounding.
                const double reduced = std::max(0.0, res.cost(r) + potential[node] - potential[next]);
                const double cand = d + reduced;
                if (cand < dist[next]) {
                    dist[next] = cand;
                    parent[next] = r;
                    heap.emplace(cand, next);
                }
            }
        }
        if (dist[net.sink] == kInf) break;

        double path_cost = 0.0;
        for (int node = net.sink; node != net.source; node = res.tail(parent[node])) {
            path_cost += res.cost(parent[node]);
        }
        if (!(path_cost < 0.0)) break;

        for (int node = net.sink; node != net.source; node = res.tail(parent[node])) {
            const int r = parent[node];
            auto& arc = net.arcs[r / 2];
            arc.flow += (r % 2 == 0) ? 1 : -1;
            if (arc.flow < 0 || arc.flow > arc.capacity) {
                throw NumericalError("augmentation produced flow outside [0, 1]");
            }
            y[arc.variable] = static_cast<std::uint8_t>(arc.flow);
        }
        for (int i = 0; i < nodes; ++i) {
            if (dist[i] != kInf) potential[i] += dist[i];
        }
        trace.push_back(objective(graph.costs, y));

        if (options.verify_residual && bellman_ford(net, net.source).negative_cycle) {
            throw NumericalError("negative cycle in the residual network after augmentation");
        }
    }

    Solution s = finish(graph, std::move(y));
    s.objective_trace = std::move(trace);
    return s;
}

Solution solve_exhaustive(const AssociationGraph& graph) {
    check_costs(graph);
    const auto& layout = graph.layout;
    const int size = layout.size();
    if (size > kExhaustiveVariableCap) {
        throw StructuralError("exhaustive solve limited to " + std::to_string(kExhaustiveVariableCap) +
                              " variables, layout has " + std::to_string(size));
    }
    const int n = layout.detection_count();

    // Constraint 2j: new_j + in_j = det_j; constraint 2j + 1: end_j + out_j = det_j.
    std::vector<std::vector<int>> touches(static_cast<std::size_t>(size));
    std::vector<int> unassigned(static_cast<std::size_t>(2 * n), 0);
    for (int j = 0; j < n; ++j) {
        touches[layout.new_var(j)].push_back(2 * j);
        touches[layout.end_var(j)].push_back(2 * j + 1);
        unassigned[2 * j] = 1 + static_cast<int>(layout.incoming(j).size());
        unassigned[2 * j + 1] = 1 + static_cast<int>(layout.outgoing(j).size());
    }
    for (int l = 0; l < layout.link_count(); ++l) {
        touches[layout.link_var(l)].push_back(2 * layout.links()[l].to);
        touches[layout.link_var(l)].push_back(2 * layout.links()[l].from + 1);
    }
    std::vector<int> partial(static_cast<std::size_t>(2 * n), 0);

    Assignment y(static_cast<std::size_t>(size));
    Assignment best;
    double best_value = -kInf;

    auto consistent = [&](int c) {
        const int det = y[c / 2];
        return partial[c] <= det && det <= partial[c] + unassigned[c];
    };

    std::function<void(int)> visit = [&](int var) {
        if (var == size) {
            if (!check_feasible(graph, y).feasible) return;
            const double value = objective(graph.costs, y);
            if (value > best_value) {
                best_value = value;
                best = y;
            }
            return;
        }
        for (std::uint8_t bit : {std::uint8_t{0}, std::uint8_t{1}}) {
            y[var] = bit;
            bool ok = true;
            for (int c : touches[var]) {
                --unassigned[c];
                partial[c] += bit;
            }
            for (int c : touches[var]) ok = ok && consistent(c);
            if (ok) visit(var + 1);
            for (int c : touches[var]) {
                ++unassigned[c];
                partial[c] -= bit;
            }
        }
        y[var] = 0;
    };
    visit(0);
    return finish(graph, std::move(best));
}

} // namespace dsmt
