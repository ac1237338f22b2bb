// tools/nmrpath.cpp
// Command-line driver: simulate, assign, evaluate, graph-stats.
//
// Exit codes: 0 success, 2 input/validation errors, 3 result is an incumbent
// that was not proven optimal, 4 solver failure.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "nmrpath/evaluate.hpp"
#include "nmrpath/experiments.hpp"
#include "nmrpath/io.hpp"
#include "nmrpath/parallel.hpp"
#include "nmrpath/pipeline.hpp"
#include "nmrpath/simplex.hpp"
#include "nmrpath/simulate.hpp"

#ifndef NMRPATH_DATA_DIR
#define NMRPATH_DATA_DIR "data"
#endif

namespace fs = std::filesystem;
using namespace nmrpath;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitIncumbent = 3;
constexpr int kExitSolver = 4;

const fs::path kDataDir = NMRPATH_DATA_DIR;

// Expands `--config file.json` into extra flags. Keys mirror long flag names;
// a flag given on the command line wins over the same key in the file.
std::vector<std::string> expand_config(std::vector<std::string> args) {
    std::optional<std::string> path;
    std::vector<std::string> kept;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            path = args[++i];
        } else if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
        } else {
            kept.push_back(args[i]);
        }
    }
    if (!path) return kept;
    const Json cfg = read_json(*path);
    if (!cfg.is_object()) throw Error(ErrorCode::Parse, *path + ": config must be a JSON object");
    for (const auto& [key, value] : cfg.items()) {
        const std::string flag = "--" + key;
        bool given = false;
        for (const auto& a : kept)
            if (a == flag || a.rfind(flag + "=", 0) == 0) given = true;
        if (given) continue;
        if (value.is_boolean()) {
            if (value.get<bool>()) kept.push_back(flag);
        } else if (value.is_string()) {
            kept.push_back(flag);
            kept.push_back(value.get<std::string>());
        } else if (value.is_number_integer()) {
            kept.push_back(flag);
            kept.push_back(std::to_string(value.get<long long>()));
        } else if (value.is_number()) {
            kept.push_back(flag);
            kept.push_back(format_double(value.get<double>()));
        } else {
            throw Error(ErrorCode::Parse, "config key '" + key + "' must be a scalar");
        }
    }
    return kept;
}

struct ToleranceFlags {
    std::optional<double> delta1, delta2, delta3, delta, lambda;

    void add(CLI::App* app) {
        app->add_option("--delta1", delta1, "H match window (ppm)");
        app->add_option("--delta2", delta2, "N match window (ppm)");
        app->add_option("--delta3", delta3, "C match window (ppm)");
        app->add_option("--delta", delta, "typing threshold multiplier");
        app->add_option("--lambda", lambda, "reuse penalty for lian2");
    }
    Tolerances apply(Tolerances t) const {
        if (delta1) t.delta1 = *delta1;
        if (delta2) t.delta2 = *delta2;
        if (delta3) t.delta3 = *delta3;
        if (delta) t.delta = *delta;
        if (lambda) t.lambda = *lambda;
        t.validate();
        return t;
    }
};

// Inputs shared by assign and graph-stats.
struct DatasetFlags {
    std::string dataset, spins, peaks, sequence, priors, tolerances;
    ToleranceFlags tol;
    std::size_t top_k = 4;
    std::size_t component_budget = 64;
    unsigned threads = 0;

    void add(CLI::App* app) {
        app->add_option("--dataset", dataset, "directory written by simulate");
        app->add_option("--spins", spins, "spin system file");
        app->add_option("--peaks", peaks, "peak list file");
        app->add_option("--sequence", sequence, "sequence file (FASTA or plain)");
        app->add_option("--priors", priors, "prior table JSON");
        app->add_option("--tolerances", tolerances, "tolerances JSON");
        tol.add(app);
        app->add_option("--top-k", top_k, "maximal cliques kept per component (0 = all)");
        app->add_option("--component-budget", component_budget, "largest peak component accepted");
        app->add_option("--threads", threads, "worker threads (0 = machine parallelism)");
    }

    void resolve() {
        if (!dataset.empty()) {
            const fs::path d = dataset;
            auto fill = [&](std::string& field, const char* name) {
                if (field.empty() && fs::exists(d / name)) field = (d / name).string();
            };
            if (spins.empty() && peaks.empty()) {
                fill(spins, "spins.tsv");
                if (spins.empty()) fill(peaks, "peaks.tsv");
            }
            fill(sequence, "sequence.fasta");
            fill(priors, "priors.json");
            fill(tolerances, "tolerances.json");
        }
        if (priors.empty()) priors = (kDataDir / "priors.json").string();
        if (spins.empty() == peaks.empty())
            throw Error(ErrorCode::InvalidArgument, "give exactly one of --spins or --peaks (or --dataset)");
        if (sequence.empty()) throw Error(ErrorCode::InvalidArgument, "missing --sequence");
    }

    PipelineOptions options() const {
        PipelineOptions o;
        Tolerances base;
        if (!tolerances.empty()) base = tolerances_from_json(read_json(tolerances));
        o.tol = tol.apply(base);
        o.grouping.top_k = top_k == 0 ? kAllCliques : top_k;
        o.grouping.component_budget = component_budget;
        o.threads = threads == 0 ? default_threads() : threads;
        return o;
    }
};

std::string summary_counts(const std::vector<std::size_t>& v) {
    std::ostringstream os;
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? " " : "") << v[i];
    return os.str();
}

Json graph_export(const AssignmentGraph& g) {
    Json layers = Json::array();
    for (const auto& L : g.layers) {
        Json nodes = Json::array();
        for (const auto& n : L)
            nodes.push_back({{"index", n.index},
                             {"kind", std::string(to_string(n.kind))},
                             {"grouping", n.grouping_ref ? Json(*n.grouping_ref) : Json(nullptr)},
                             {"peaks", n.peaks}});
        layers.push_back(nodes);
    }
    Json edges = Json::array();
    for (std::size_t k = 0; k < g.edges.size(); ++k)
        for (const auto& e : g.edges[k]) edges.push_back(Json::array({k, e.from, e.to, e.cost}));
    return {{"sequence", g.sequence}, {"layers", layers}, {"edges", edges}};
}

struct SimulateCmd {
    std::string protocol = "cisa", noise = "low", reference, sequence, priors, spec, out = "simulation";
    std::uint64_t seed = 0;
    std::uint64_t reference_seed = 1;
    std::optional<double> deletion_rate;
    std::optional<std::size_t> decoys;
    std::vector<std::string> experiments;

    void add(CLI::App* app) {
        app->add_option("--protocol", protocol, "cisa or flya")->check(CLI::IsMember({"cisa", "flya"}));
        app->add_option("--noise", noise, "low or high (cisa)")->check(CLI::IsMember({"low", "high"}));
        app->add_option("--seed", seed, "random seed");
        app->add_option("--reference", reference, "reference shift JSON");
        app->add_option("--sequence", sequence, "sample a reference for this sequence instead");
        app->add_option("--reference-seed", reference_seed, "seed for a sampled reference");
        app->add_option("--priors", priors, "prior table JSON");
        app->add_option("--spec", spec, "simulation spec JSON");
        app->add_option("--deletion-rate", deletion_rate, "probability of dropping each peak (flya)");
        app->add_option("--decoys", decoys, "uniform artifact peaks (flya)");
        app->add_option("--experiments", experiments, "experiment set (flya)")->delimiter(',');
        app->add_option("--out", out, "output directory");
    }

    int run(CLI::App* app) const {
        const PriorTable base = priors_from_json(read_json(priors.empty() ? kDataDir / "priors.json" : fs::path(priors)));
        // Precedence: protocol defaults < --spec file < explicit flags.
        const bool from_file = !spec.empty();
        SimulationSpec s = from_file ? spec_from_json(read_json(spec))
                                     : (parse_protocol(protocol) == Protocol::CISA
                                            ? SimulationSpec::cisa(parse_noise(noise), seed)
                                            : SimulationSpec::flya(seed));
        if (from_file && app->count("--protocol") > 0 && parse_protocol(protocol) != s.protocol)
            s = parse_protocol(protocol) == Protocol::CISA ? SimulationSpec::cisa(parse_noise(noise), s.seed)
                                                           : SimulationSpec::flya(s.seed);
        if (from_file && app->count("--noise") > 0 && s.protocol == Protocol::CISA) {
            const auto level = SimulationSpec::cisa(parse_noise(noise), 0);
            s.sigma_alpha = level.sigma_alpha;
            s.sigma_beta = level.sigma_beta;
        }
        if (app->count("--seed") > 0) s.seed = seed;
        if (deletion_rate) s.deletion_rate = *deletion_rate;
        if (decoys) s.decoys = *decoys;
        if (!experiments.empty()) s.experiments = experiments;
        s.validate();

        ReferenceShifts ref;
        if (!reference.empty()) {
            ref = reference_from_json(read_json(reference));
        } else if (!sequence.empty()) {
            ref = sample_reference(read_sequence(sequence), base, reference_seed);
        } else {
            ref = reference_from_json(read_json(kDataDir / "reference60.json"));
        }

        const fs::path dir = out;
        fs::create_directories(dir);
        const PriorTable sim_priors = simulation_priors(base, s);
        write_text(dir / "sequence.fasta", ">simulated\n" + sequence_text(ref.sequence));
        write_json(dir / "priors.json", to_json(sim_priors));
        write_json(dir / "tolerances.json", to_json(simulation_tolerances(s)));
        write_json(dir / "simulation.json", to_json(s));
        write_json(dir / "reference.json", to_json(ref));

        std::size_t assignable = 0;
        if (s.protocol == Protocol::CISA) {
            const auto data = simulate_cisa(s, ref);
            std::ostringstream os;
            write_spins(os, data.spins);
            write_text(dir / "spins.tsv", os.str());
            write_json(dir / "ground_truth.json", to_json(data.truth));
            for (std::size_t k = 0; k < ref.sequence.size(); ++k) assignable += data.truth.assignable(k);
            std::cout << "simulated " << data.spins.size() << " spin systems for " << ref.sequence.size()
                      << " residues (" << assignable << " assignable)\n";
        } else {
            const auto data = simulate_flya(s, ref);
            std::ostringstream os;
            write_peaks(os, data.peaks);
            write_text(dir / "peaks.tsv", os.str());
            write_json(dir / "ground_truth.json", to_json(data.truth));
            for (std::size_t k = 0; k < ref.sequence.size(); ++k) assignable += data.truth.assignable(k);
            std::cout << "simulated " << data.peaks.size() << " peaks in " << s.experiments.size()
                      << " spectra for " << ref.sequence.size() << " residues (" << assignable << " assignable)\n";
        }
        return kExitOk;
    }
};

struct AssignCmd {
    DatasetFlags data;
    std::string variant = "lian1", backend = "bundled", out = "assignment";
    std::size_t node_limit = 100'000;

    void add(CLI::App* app) {
        data.add(app);
        app->add_option("--variant", variant, "dp, ilp, lian1 or lian2")
            ->check(CLI::IsMember({"dp", "ilp", "lian1", "lian2"}));
        app->add_option("--backend", backend, "bundled or external:<program>");
        app->add_option("--node-limit", node_limit, "branch-and-bound node limit");
        app->add_option("--out", out, "output directory");
    }

    int run() {
        data.resolve();
        PipelineOptions opts = data.options();
        opts.variant = parse_variant(variant);
        opts.node_limit = node_limit;
        auto lp_backend = make_backend(backend);
        opts.backend = lp_backend.get();
        const ProteinSequence seq = read_sequence(data.sequence);
        const PriorTable priors = priors_from_json(read_json(data.priors));

        PipelineResult r = !data.spins.empty() ? assign_spins(read_spins(data.spins), seq, priors, opts)
                                               : assign_peaks(read_peaks(data.peaks), seq, priors, opts);

        const fs::path dir = out;
        fs::create_directories(dir);
        write_json(dir / "assignment.json", to_json(r.assignment));
        const auto diag = diagnostics(r.assignment, r.graph);
        write_text(dir / "diagnostics.txt", diagnostics_table(diag));
        write_json(dir / "diagnostics.json", to_json(diag));
        write_json(dir / "graph_stats.json", to_json(r.stats));
        write_json(dir / "solver.json", solver_report(r));
        Json timings = Json::object();
        for (const auto& [stage, sec] : r.timings) timings[stage] = sec;
        write_json(dir / "timings.json", timings);

        std::size_t assigned = 0;
        for (const auto& res : r.assignment.residues) assigned += !res.dummy();
        std::cout << "assigned " << assigned << "/" << r.assignment.residues.size() << " residues, objective "
                  << format_fixed(r.assignment.objective, 4) << (r.optimal ? "" : " (not proven optimal)") << "\n";
        if (!r.assignment.reused.empty()) {
            std::cout << "reused:";
            for (const auto& [p, c] : r.assignment.reused) std::cout << ' ' << p << "x" << c;
            std::cout << '\n';
        }
        return r.optimal ? kExitOk : kExitIncumbent;
    }
};

struct EvaluateCmd {
    std::string assignment, truth, reference, dataset, out;

    void add(CLI::App* app) {
        app->add_option("--assignment", assignment, "assignment JSON")->required();
        app->add_option("--truth", truth, "ground truth JSON");
        app->add_option("--reference", reference, "reference shifts JSON (atom-level score)");
        app->add_option("--dataset", dataset, "directory written by simulate");
        app->add_option("--out", out, "output directory for score.json and score.txt");
    }

    int run() {
        if (!dataset.empty()) {
            const fs::path d = dataset;
            if (truth.empty()) truth = (d / "ground_truth.json").string();
            if (reference.empty() && fs::exists(d / "reference.json")) reference = (d / "reference.json").string();
        }
        if (truth.empty()) throw Error(ErrorCode::InvalidArgument, "missing --truth");
        const Assignment a = assignment_from_json(read_json(assignment));
        const GroundTruth gt = ground_truth_from_json(read_json(truth));
        ScoreReport rep = score(a, gt);
        if (!reference.empty()) rep.atoms = atom_correctness(a, gt, reference_from_json(read_json(reference)));
        if (!out.empty()) {
            const fs::path dir = out;
            fs::create_directories(dir);
            write_json(dir / "score.json", to_json(rep));
            write_text(dir / "score.txt", score_table(rep));
        }
        std::cout << format_fixed(rep.precision, 3) << ' ' << format_fixed(rep.recall, 3) << '\n';
        return kExitOk;
    }
};

struct GraphStatsCmd {
    DatasetFlags data;
    std::string out;

    void add(CLI::App* app) {
        data.add(app);
        app->add_option("--out", out, "output directory for graph_stats.json and graph.json");
    }

    int run() {
        data.resolve();
        const PipelineOptions opts = data.options();
        const ProteinSequence seq = read_sequence(data.sequence);
        const PriorTable priors = priors_from_json(read_json(data.priors));
        std::vector<PeakGrouping> groupings;
        std::optional<ObservationModel> model;
        if (!data.spins.empty()) {
            const auto spins = read_spins(data.spins);
            const auto rep = validate_dataset(spins, priors, seq);
            if (!rep.ok) throw Error(ErrorCode::InvalidArgument, rep.summary());
            groupings = spins_to_groupings(spins, priors);
            model = ObservationModel::for_spins();
        } else {
            const auto peaks = read_peaks(data.peaks);
            const auto rep = validate_dataset(peaks, priors, seq);
            if (!rep.ok) throw Error(ErrorCode::InvalidArgument, rep.summary());
            std::set<std::string> names;
            for (const auto& p : peaks) names.insert(p.spectrum_id);
            const std::vector<std::string> spectra(names.begin(), names.end());
            GroupingOptions go = opts.grouping;
            go.threads = opts.threads;
            groupings = enumerate_groupings(build_compatibility_graph(peaks, opts.tol), peaks, pattern_for(spectra),
                                            opts.tol, priors, go);
            model = ObservationModel::for_spectra(spectra);
        }
        std::cout << "groupings " << groupings.size() << std::endl;
        const AssignmentGraph g = build_graph(groupings, seq, priors, opts.tol, *model, GraphOptions{opts.threads});
        const GraphStats s = graph_stats(g);
        if (!out.empty()) {
            const fs::path dir = out;
            fs::create_directories(dir);
            write_json(dir / "graph_stats.json", to_json(s));
            write_json(dir / "graph.json", graph_export(g));
        }
        std::cout << "layers " << summary_counts(s.layer_sizes) << "\n";
        std::cout << "edges " << s.total_edges << " density " << format_fixed(s.density, 4) << "\n";
        return kExitOk;
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Backbone resonance assignment by constrained shortest paths"};
    app.require_subcommand(1);
    // Listed so that --help documents it; expand_config consumes it first.
    std::string config_note;
    auto add_config = [&](CLI::App* sub) {
        sub->add_option("--config", config_note, "JSON file of flag values (flags win)");
    };

    SimulateCmd simulate;
    AssignCmd assign;
    EvaluateCmd evaluate;
    GraphStatsCmd stats;
    auto* sim_app = app.add_subcommand("simulate", "generate a synthetic dataset with ground truth");
    simulate.add(sim_app);
    auto* assign_app = app.add_subcommand("assign", "assign a dataset to the sequence");
    assign.add(assign_app);
    auto* eval_app = app.add_subcommand("evaluate", "score an assignment against ground truth");
    evaluate.add(eval_app);
    auto* stats_app = app.add_subcommand("graph-stats", "build the assignment graph and report its size");
    stats.add(stats_app);
    for (auto* sub : {sim_app, assign_app, eval_app, stats_app}) add_config(sub);

    try {
        std::vector<std::string> args(argv + 1, argv + argc);
        args = expand_config(std::move(args));
        std::reverse(args.begin(), args.end());  // CLI11 consumes the vector from the back
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    }

    try {
        if (*sim_app) return simulate.run(sim_app);
        if (*assign_app) return assign.run();
        if (*eval_app) return evaluate.run();
        if (*stats_app) return stats.run();
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.code() == ErrorCode::SolverFailure ? kExitSolver : kExitInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    }
    return kExitInput;
}
