// include/nmrpath/rounding.hpp
// From an LP relaxation to an integral path: keep the edges in the LP
// support plus every dummy edge, solve the ILP on that subgraph by
// branch-and-bound, then widen the subgraph with every edge whose reduced cost
// is within the optimality gap so the result is the optimum of the full graph.

#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "nmrpath/lp.hpp"
#include "nmrpath/shortest_path.hpp"
#include "nmrpath/simplex.hpp"

namespace nmrpath {

struct ResolveOptions {
    std::size_t node_limit = 100'000;
    bool certify = true;             // widen by reduced costs after the support solve
    LpBackend* backend = nullptr;    // nullptr: bundled simplex
};

struct ResolveReport {
    PathSolution path;
    double objective = 0.0;  // path cost plus lambda per extra peak use (LIAN-2)
    bool optimal = true;     // false when the node limit stopped the search
    std::size_t bb_nodes = 0;
    std::size_t lp_solves = 0;
    std::size_t support_edges = 0;    // edges in the rounded subgraph
    std::size_t certified_edges = 0;  // edges in the widened subgraph (0 if not needed)
    std::vector<std::pair<std::string, int>> reused;  // peaks used more than once, with counts
};

// `sol` must be an optimal solution of `f` (LIAN-1 or LIAN-2) built from `g`.
ResolveReport round_and_resolve(const AssignmentGraph& g, const Formulation& f, const LpSolution& sol,
                                const Tolerances& tol, LpVariant variant, const ResolveOptions& opts = {});

struct AssignmentSolve {
    LpVariant variant = LpVariant::LIAN1;
    LpSolution lp;  // root relaxation (empty for the pure ILP search)
    std::size_t lp_rows = 0, lp_vars = 0;
    ResolveReport result;
};

// Root relaxation of the chosen variant followed by rounding; for ILP the
// branch-and-bound runs on the whole graph. Throws Error(InvalidArgument) if
// the root LP does not reach optimality.
AssignmentSolve solve_assignment(const AssignmentGraph& g, LpVariant variant, const Tolerances& tol,
                                 const ResolveOptions& opts = {});

// LIAN-2 with its reuse report.
ResolveReport solve_lian2(const AssignmentGraph& g, const Tolerances& tol, const ResolveOptions& opts = {});

// Starting basis for the relaxation `f` of `g`: the shortest-path tree, with
// `path` (a shortest path of the kept edges) at its upper bound.
WarmStart warm_start(const AssignmentGraph& g, const Formulation& f, const std::vector<int>& path);

// Independent feasibility check of a path: edges exist, costs add up, and
// (when hard) no peak is used twice.
bool path_is_feasible(const AssignmentGraph& g, const PathSolution& p, bool hard_utilization);

}  // namespace nmrpath
