// src/pipeline.cpp

#include "nmrpath/pipeline.hpp"

#include <chrono>
#include <set>

namespace nmrpath {

std::string_view to_string(Variant v) {
    switch (v) {
    case Variant::DP: return "dp";
    case Variant::ILP: return "ilp";
    case Variant::LIAN1: return "lian1";
    case Variant::LIAN2: return "lian2";
    }
    return "?";
}

Variant parse_variant(std::string_view s) {
    if (s == "dp") return Variant::DP;
    if (s == "ilp") return Variant::ILP;
    if (s == "lian1") return Variant::LIAN1;
    if (s == "lian2") return Variant::LIAN2;
    throw Error(ErrorCode::InvalidArgument, "unknown variant '" + std::string(s) + "'");
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

void require_valid(const ValidationReport& rep) {
    for (const auto& issue : rep.issues)
        if (issue.severity == Severity::Fatal) throw Error(issue.code, rep.summary());
}

LpVariant lp_variant(Variant v) {
    switch (v) {
    case Variant::ILP: return LpVariant::ILP;
    case Variant::LIAN2: return LpVariant::LIAN2;
    default: return LpVariant::LIAN1;
    }
}

PipelineResult run(std::vector<PeakGrouping> groupings, const ProteinSequence& seq, const PriorTable& priors,
                   const ObservationModel& model, const PipelineOptions& opts, double grouping_seconds) {
    PipelineResult r;
    r.timings["grouping"] = grouping_seconds;
    r.groupings = std::move(groupings);
    auto t0 = Clock::now();
    r.graph = build_graph(r.groupings, seq, priors, opts.tol, model, GraphOptions{opts.threads});
    r.stats = graph_stats(r.graph);
    r.timings["graph"] = seconds_since(t0);
    solve_graph(r, opts);
    return r;
}

}  // namespace

void solve_graph(PipelineResult& r, const PipelineOptions& opts) {
    auto t0 = Clock::now();
    double lambda = 0.0;
    if (opts.variant == Variant::DP) {
        r.path = dp_shortest_path(r.graph);
        r.optimal = true;
    } else {
        ResolveOptions ro;
        ro.node_limit = opts.node_limit;
        ro.backend = opts.backend;
        try {
            r.solve = solve_assignment(r.graph, lp_variant(opts.variant), opts.tol, ro);
        } catch (const Error& e) {
            throw Error(ErrorCode::SolverFailure, e.what());
        }
        r.path = r.solve->result.path;
        r.optimal = r.solve->result.optimal;
        if (opts.variant == Variant::LIAN2) lambda = opts.tol.lambda;
    }
    r.timings["solve"] = seconds_since(t0);
    r.assignment = assignment_from_path(r.graph, r.path, lambda);
    r.assignment.optimal = r.optimal;
}

PipelineResult assign_spins(std::span<const SpinSystem> spins, const ProteinSequence& seq, const PriorTable& priors,
                            const PipelineOptions& opts) {
    opts.tol.validate();
    require_valid(validate_dataset(spins, priors, seq));
    auto t0 = Clock::now();
    auto groupings = spins_to_groupings(spins, priors);
    return run(std::move(groupings), seq, priors, ObservationModel::for_spins(), opts, seconds_since(t0));
}

PipelineResult assign_peaks(std::span<const Peak> peaks, const ProteinSequence& seq, const PriorTable& priors,
                            const PipelineOptions& opts) {
    opts.tol.validate();
    require_valid(validate_dataset(peaks, priors, seq));
    auto t0 = Clock::now();
    std::set<std::string> names;
    for (const auto& p : peaks) names.insert(p.spectrum_id);
    const std::vector<std::string> spectra(names.begin(), names.end());
    const auto compat = build_compatibility_graph(peaks, opts.tol);
    GroupingOptions go = opts.grouping;
    go.threads = opts.threads;
    auto groupings = enumerate_groupings(compat, peaks, pattern_for(spectra), opts.tol, priors, go);
    return run(std::move(groupings), seq, priors, ObservationModel::for_spectra(spectra), opts, seconds_since(t0));
}

Json to_json(const GraphStats& s) {
    return {{"layer_sizes", s.layer_sizes},
            {"edge_counts", s.edge_counts},
            {"total_edges", s.total_edges},
            {"densities", s.densities},
            {"density", s.density}};
}

Json solver_report(const PipelineResult& r) {
    Json j = {{"optimal", r.optimal}, {"total_cost", r.path.total_cost}, {"groupings", r.groupings.size()}};
    if (r.solve) {
        const auto& s = *r.solve;
        const auto& res = s.result;
        j["variant"] = std::string(to_string(s.variant));
        j["lp"] = {{"rows", s.lp_rows},
                   {"vars", s.lp_vars},
                   {"status", std::string(to_string(s.lp.status))},
                   {"objective", s.lp.objective},
                   {"iterations", s.lp.iterations},
                   {"integral_vars", s.lp.integrality.integral},
                   {"fractional_vars", s.lp.integrality.fractional}};
        j["rounding"] = {{"objective", res.objective},
                         {"bb_nodes", res.bb_nodes},
                         {"lp_solves", res.lp_solves},
                         {"support_edges", res.support_edges},
                         {"certified_edges", res.certified_edges}};
    } else {
        j["variant"] = "dp";
    }
    return j;
}

}  // namespace nmrpath
