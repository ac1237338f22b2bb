// include/nmrpath/pipeline.hpp
// End-to-end assignment: grouping (or spin passthrough), graph construction,
// and the chosen solver.

#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nmrpath/evaluate.hpp"
#include "nmrpath/graph.hpp"
#include "nmrpath/grouping.hpp"
#include "nmrpath/rounding.hpp"

namespace nmrpath {

enum class Variant { DP, ILP, LIAN1, LIAN2 };
std::string_view to_string(Variant v);
Variant parse_variant(std::string_view s);

struct PipelineOptions {
    Variant variant = Variant::LIAN1;
    Tolerances tol;
    GroupingOptions grouping;
    unsigned threads = 1;
    std::size_t node_limit = 100'000;
    LpBackend* backend = nullptr;  // nullptr: bundled simplex
};

struct PipelineResult {
    std::vector<PeakGrouping> groupings;
    AssignmentGraph graph;
    GraphStats stats;
    PathSolution path;
    Assignment assignment;
    std::optional<AssignmentSolve> solve;  // absent for the DP variant
    bool optimal = true;
    std::map<std::string, double> timings;  // seconds per stage
};

// Both throw Error on validation failures (the first fatal issue's code).
PipelineResult assign_spins(std::span<const SpinSystem> spins, const ProteinSequence& seq, const PriorTable& priors,
                            const PipelineOptions& opts);
PipelineResult assign_peaks(std::span<const Peak> peaks, const ProteinSequence& seq, const PriorTable& priors,
                            const PipelineOptions& opts);

// Solver stage alone, on a prebuilt graph.
void solve_graph(PipelineResult& result, const PipelineOptions& opts);

Json to_json(const GraphStats& s);
Json solver_report(const PipelineResult& r);

}  // namespace nmrpath
