// src/shortest_path.cpp

#include "nmrpath/shortest_path.hpp"

#include <algorithm>
#include <limits>
#include <map>

namespace nmrpath {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

PathSolution make_path(const AssignmentGraph& g, std::vector<int> nodes) {
    PathSolution p;
    p.edge_costs = path_edge_costs(g, nodes);
    p.nodes = std::move(nodes);
    for (double c : p.edge_costs) p.total_cost += c;
    return p;
}

std::vector<std::vector<double>> backward_values(const AssignmentGraph& g, const EdgeFilter& keep) {
    const std::size_t L = g.layers.size();
    std::vector<std::vector<double>> v(L);
    for (std::size_t k = 0; k < L; ++k) v[k].assign(g.layers[k].size(), kInf);
    v[L - 1][0] = 0.0;
    for (std::size_t k = L - 1; k-- > 0;)
        for (const auto& e : g.edges[k]) {
            if (keep && !keep(k, e)) continue;
            const double c = e.cost + v[k + 1][static_cast<std::size_t>(e.to)];
            auto& slot = v[k][static_cast<std::size_t>(e.from)];
            if (c < slot) slot = c;
        }
    return v;
}

std::vector<std::vector<double>> backward_values(const AssignmentGraph& g) { return backward_values(g, {}); }

PathSolution dp_shortest_path(const AssignmentGraph& g, const EdgeFilter& keep) {
    const auto v = backward_values(g, keep);
    if (!(v[0][0] < kInf)) throw Error(ErrorCode::SubgraphInfeasible, "no Start->End path");
    std::vector<int> nodes{0};
    for (std::size_t k = 0; k + 1 < g.layers.size(); ++k) {
        const int i = nodes.back();
        const double target = v[k][static_cast<std::size_t>(i)];
        // Edges are sorted by (from, to): the first exact match is the smallest index.
        auto first = std::lower_bound(g.edges[k].begin(), g.edges[k].end(), i,
                                      [](const GraphEdge& e, int from) { return e.from < from; });
        int next = -1;
        for (auto it = first; it != g.edges[k].end() && it->from == i; ++it) {
            if (keep && !keep(k, *it)) continue;
            if (it->cost + v[k + 1][static_cast<std::size_t>(it->to)] == target) {
                next = it->to;
                break;
            }
        }
        if (next < 0) throw Error(ErrorCode::SubgraphInfeasible, "value function trace failed");
        nodes.push_back(next);
    }
    return make_path(g, std::move(nodes));
}

PathSolution dp_shortest_path(const AssignmentGraph& g) { return dp_shortest_path(g, {}); }

std::vector<std::pair<std::string, int>> reused_peaks(const AssignmentGraph& g, std::span<const int> nodes) {
    std::map<std::string, int> uses;
    for (std::size_t k = 0; k < nodes.size(); ++k)
        for (const auto& p : g.layers[k][static_cast<std::size_t>(nodes[k])].peaks) ++uses[p];
    std::vector<std::pair<std::string, int>> out;
    for (const auto& [p, c] : uses)
        if (c > 1) out.emplace_back(p, c);
    return out;
}

namespace {

// Depth-first enumeration of all Start->End paths in lexicographic order;
// the penalty counts extra uses of each peak.
PathSolution enumerate(const AssignmentGraph& g, double budget, bool hard, double lambda) {
    double product = 1.0;
    for (const auto& L : g.layers) product *= static_cast<double>(L.size());
    if (product > budget)
        throw Error(ErrorCode::InstanceTooLarge,
                    "path space " + std::to_string(product) + " exceeds budget " + std::to_string(budget));

    std::map<std::string, int> uses;
    int excess = 0;
    std::vector<int> nodes{0};
    std::vector<double> costs;
    PathSolution best;
    double best_cost = kInf;

    auto consume = [&](const AssignmentNode& n, int dir) {
        for (const auto& p : n.peaks) {
            int& u = uses[p];
            if (dir > 0) {
                if (u >= 1) ++excess;
                ++u;
            } else {
                --u;
                if (u >= 1) --excess;
            }
        }
    };

    auto dfs = [&](auto&& self, std::size_t k) -> void {
        if (k + 1 == g.layers.size()) {
            if (hard && excess > 0) return;
            double total = 0.0;
            for (double c : costs) total += c;
            if (!hard) total += lambda * excess;
            if (total < best_cost) {
                best_cost = total;
                best.nodes = nodes;
                best.edge_costs = costs;
            }
            return;
        }
        const int i = nodes.back();
        for (const auto& e : g.edges[k]) {
            if (e.from != i) continue;
            const auto& next = g.layers[k + 1][static_cast<std::size_t>(e.to)];
            consume(next, +1);
            if (!(hard && excess > 0)) {
                nodes.push_back(e.to);
                costs.push_back(e.cost);
                self(self, k + 1);
                costs.pop_back();
                nodes.pop_back();
            }
            consume(next, -1);
        }
    };
    dfs(dfs, 0);
    if (best.nodes.empty()) throw Error(ErrorCode::InfeasibleByEnumeration, "no path satisfies utilization");
    for (double c : best.edge_costs) best.total_cost += c;
    return best;
}

}  // namespace

PathSolution exhaustive_constrained(const AssignmentGraph& g, double budget) {
    return enumerate(g, budget, true, 0.0);
}

PathSolution exhaustive_penalized(const AssignmentGraph& g, double lambda, double budget) {
    return enumerate(g, budget, false, lambda);
}

}  // namespace nmrpath
