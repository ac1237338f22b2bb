// include/nmrpath/lp.hpp
// Linear programs over the assignment graph: the exact ILP, the hard
// utilization relaxation (LIAN-1) and the slack-penalized one (LIAN-2).

#pragma once

#include <cstddef>
#include <map>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "nmrpath/graph.hpp"
#include "nmrpath/shortest_path.hpp"

namespace nmrpath {

enum class Sense { Le, Eq, Ge };
enum class LpVariant { ILP, LIAN1, LIAN2 };
enum class LpStatus { Optimal, Infeasible, Unbounded, IterLimit };

std::string_view to_string(LpVariant v);
std::string_view to_string(LpStatus s);

struct LpVar {
    enum class Kind { Edge, Slack, Plain } kind = Kind::Plain;
    int k = -1, from = -1, to = -1;  // edge endpoints (layer pair k)
    std::string peak;                // slack: the peak it relaxes
    std::string name;
};

struct LpRow {
    std::vector<std::pair<int, double>> coefs;  // (var, coefficient), var ascending
    Sense sense = Sense::Eq;
    double rhs = 0.0;
    std::string name;
};

inline constexpr double kInfinity = 1e300;

struct LinearProgram {
    std::vector<double> cost;
    std::vector<double> lower, upper;  // upper >= kInfinity means unbounded above
    std::vector<LpVar> vars;
    std::vector<LpRow> rows;
    bool integer = false;  // edge variables restricted to {0,1}

    std::size_t num_vars() const { return cost.size(); }
    int add_var(double c, double lo, double hi, LpVar meta = {});
    void add_row(LpRow row);
    // Dimensions, bounds and duplicate (row, var) coefficients.
    void check() const;
};

// Per peak, the edge variables whose selection consumes it (the operator A).
struct UtilizationMap {
    std::map<std::string, std::vector<int>> peak_vars;
};

struct Formulation {
    LinearProgram lp;
    UtilizationMap utilization;
    std::vector<std::vector<int>> edge_var;  // [k][edge index] -> var or -1 when filtered out
    std::map<std::string, int> slack_var;    // LIAN-2 slack per peak
    std::vector<std::vector<int>> coupling_row;  // [k][node] -> row, inner layers only
    std::size_t selection_rows = 0, coupling_rows = 0, utilization_rows = 0;
};

struct FormulateOptions {
    bool utilization = true;  // false drops the utilization rows (pure flow polytope)
    EdgeFilter keep;          // restrict to a subgraph; empty keeps every edge
};

// Variables: one per kept edge, in layer-pair then (from, to) order, followed
// by one slack per constrained peak for LIAN-2. Rows: one selection row per
// layer pair k = 1..n, one flow-coupling row per inner node, and one
// utilization row per peak consumed in at least two layers. A node counts as
// selected through its outgoing edges.
Formulation formulate(const AssignmentGraph& g, LpVariant variant, const Tolerances& tol,
                      const FormulateOptions& opts = {});

struct IntegralityReport {
    std::size_t integral = 0;    // edge vars within round_eps of 0 or 1
    std::size_t fractional = 0;
    bool all_integral() const { return fractional == 0; }
};

struct LpSolution {
    LpStatus status = LpStatus::Infeasible;
    std::vector<double> x;
    double objective = 0.0;
    std::vector<double> duals;          // per row; empty when unavailable
    std::vector<double> reduced_costs;  // per var; empty when unavailable
    std::size_t iterations = 0;
    IntegralityReport integrality;
};

IntegralityReport integrality_of(const LinearProgram& lp, const std::vector<double>& x, double eps);

// Largest violation of rows and bounds.
double max_violation(const LinearProgram& lp, const std::vector<double>& x);

// CPLEX-LP text export.
void write_cplex_lp(std::ostream& os, const LinearProgram& lp);

}  // namespace nmrpath
