// include/nmrpath/shortest_path.hpp
// Exact path solvers over the layered graph: the unconstrained DP and a
// brute-force search that honours the peak utilization rule.

#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "nmrpath/graph.hpp"

namespace nmrpath {

struct PathSolution {
    std::vector<int> nodes;          // node index per layer, Start and End included
    std::vector<double> edge_costs;  // cost of the edge leaving each layer
    double total_cost = 0.0;         // sum of edge_costs in layer order
    bool optimal = true;             // false when a search limit was hit

    bool operator==(const PathSolution&) const = default;
};

// Builds a PathSolution from node indices, summing edge costs in layer order.
PathSolution make_path(const AssignmentGraph& g, std::vector<int> nodes);

// Backward value functions: value[k][i] is the cheapest cost from node i of
// layer k to End (infinity when End is unreachable).
std::vector<std::vector<double>> backward_values(const AssignmentGraph& g);

// Same, restricted to edges accepted by the filter.
using EdgeFilter = std::function<bool(std::size_t k, const GraphEdge&)>;
std::vector<std::vector<double>> backward_values(const AssignmentGraph& g, const EdgeFilter& keep);

// Minimum-cost Start->End path; among equal costs the lexicographically
// smallest node sequence.
PathSolution dp_shortest_path(const AssignmentGraph& g);
PathSolution dp_shortest_path(const AssignmentGraph& g, const EdgeFilter& keep);

// Peaks consumed more than once along a path, with their use counts.
std::vector<std::pair<std::string, int>> reused_peaks(const AssignmentGraph& g, std::span<const int> nodes);

inline constexpr double kExhaustiveBudget = 1e6;

// Cheapest path whose nodes consume every peak at most once, by enumeration
// of all paths. Throws InstanceTooLarge when the product of layer sizes exceeds
// the budget and InfeasibleByEnumeration when no path qualifies.
PathSolution exhaustive_constrained(const AssignmentGraph& g, double budget = kExhaustiveBudget);

// Cheapest path when every extra use of a peak costs lambda (brute force).
PathSolution exhaustive_penalized(const AssignmentGraph& g, double lambda, double budget = kExhaustiveBudget);

}  // namespace nmrpath
