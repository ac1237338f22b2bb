// tests/acceptance.cpp
// Runs the acceptance criteria and prints one PASS/FAIL line per criterion.
// Exit status is non-zero when any of criteria 1-8 fails.

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <limits>
#include <random>
#include <sstream>

#include "nmrpath/evaluate.hpp"
#include "nmrpath/io.hpp"
#include "nmrpath/pipeline.hpp"
#include "nmrpath/rounding.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;
using namespace nmrpath;
using namespace nmrpath::testing;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

const std::string kData = NMRPATH_DATA_DIR;

const PriorTable& bundled_priors() {
    static const PriorTable p = priors_from_json(read_json(kData + "/priors.json"));
    return p;
}

std::string fmt(double v, int digits = 3) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(digits) << v;
    return os.str();
}

std::string sci(double v) {
    std::ostringstream os;
    os << std::scientific << std::setprecision(2) << v;
    return os.str();
}

// 1. Closed-form atom cost against adaptive quadrature.
Outcome cost_model_oracle() {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> mu(-10.0, 10.0), sigma(0.01, 5.0);
    std::uniform_int_distribution<int> count(1, 6);
    double worst = 0.0;
    for (int t = 0; t < 1000; ++t) {
        const double m = mu(rng), s = sigma(rng);
        // Observations drawn from the generative model: a latent shift from the
        // prior, then independent noise per observation.
        const double latent = std::normal_distribution<double>(m, s)(rng);
        std::vector<double> xs, ss;
        for (int l = count(rng); l > 0; --l) {
            ss.push_back(sigma(rng));
            xs.push_back(std::normal_distribution<double>(latent, ss.back())(rng));
        }
        const double closed =
            atom_cost(GaussianPrior{m, s}, std::span<const double>(xs), std::span<const double>(ss)).cost;
        worst = std::max(worst, std::abs(closed - quadrature_atom_cost(m, s, xs, ss)));
    }
    return {worst <= 1e-8, "1000 draws, max |closed - quadrature| = " + sci(worst)};
}

// 2. LIAN-1 without utilization rows is integral and matches the DP.
Outcome flow_integrality() {
    std::mt19937_64 rng(2);
    std::uniform_int_distribution<std::size_t> layers(1, 20), width(0, 10);
    std::size_t integral = 0;
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
        RandomGraphSpec spec;
        spec.n = layers(rng);
        spec.max_regular = width(rng);
        spec.quantized = false;
        spec.pool = 40;
        const auto g = random_layered_graph(rng, spec);
        const auto f = formulate(g, LpVariant::LIAN1, Tolerances{}, FormulateOptions{false, {}});
        const auto s = solve_lp(f.lp);
        if (s.status != LpStatus::Optimal) return {false, "graph " + std::to_string(t) + ": LP not optimal"};
        integral += s.integrality.all_integral();
        worst = std::max(worst, std::abs(s.objective - dp_shortest_path(g).total_cost));
    }
    return {integral == 100 && worst <= 1e-6,
            std::to_string(integral) + "/100 integral, max |LP - DP| = " + sci(worst)};
}

// 3. Rounding from LIAN-1 reaches the exact constrained optimum.
Outcome exact_rounding() {
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<std::size_t> layers(2, 6), width(1, 4), pool(4, 15);
    std::size_t agree = 0, instances = 0, fractional = 0;
    while (instances < 30) {
        RandomGraphSpec spec;
        spec.n = layers(rng);
        spec.max_regular = width(rng);
        spec.pool = pool(rng);
        const auto g = random_layered_graph(rng, spec);
        // Keep instances whose unconstrained optimum reuses a peak, so the
        // utilization rows matter.
        if (reused_peaks(g, dp_shortest_path(g).nodes).empty()) continue;
        ++instances;
        const Tolerances tol;
        const auto f = formulate(g, LpVariant::LIAN1, tol);
        const auto s = solve_lp(f.lp);
        if (s.status != LpStatus::Optimal) return {false, "instance " + std::to_string(instances) + ": LP not optimal"};
        fractional += !s.integrality.all_integral();
        const auto r = round_and_resolve(g, f, s, tol, LpVariant::LIAN1);
        agree += r.optimal && r.objective == exhaustive_constrained(g).total_cost && path_is_feasible(g, r.path, true);
    }
    return {agree == 30, std::to_string(agree) + "/30 equal to enumeration (" + std::to_string(fractional) +
                             " with fractional LP optima)"};
}

// 4. LIAN-2 on the conflict fixture.
Outcome lian2_penalty() {
    const auto g = conflict_fixture();
    std::string detail;
    bool ok = true;
    for (double lambda : {5.0, 100.0}) {
        Tolerances tol;
        tol.lambda = lambda;
        const auto r = solve_lian2(g, tol);
        const auto oracle = exhaustive_penalized(g, lambda);
        double extra = 0.0;
        for (const auto& [p, uses] : reused_peaks(g, oracle.nodes)) extra += uses - 1;
        const double oracle_obj = oracle.total_cost + lambda * extra;
        std::size_t reuse = 0;
        for (const auto& [p, uses] : r.reused) reuse += static_cast<std::size_t>(uses - 1);
        const double expected_obj = lambda == 5.0 ? 5.0 : 10.0;
        const std::size_t expected_reuse = lambda == 5.0 ? 1 : 0;
        ok = ok && r.objective == expected_obj && r.objective == oracle_obj && reuse == expected_reuse;
        detail += (detail.empty() ? "" : "; ") + std::string("lambda=") + fmt(lambda, 0) + ": objective " +
                  fmt(r.objective, 1) + " (oracle " + fmt(oracle_obj, 1) + "), reuse " + std::to_string(reuse);
    }
    return {ok, detail};
}

// 5. CISA protocol on the bundled 60-residue protein.
Outcome cisa_reproduction() {
    const auto ref = reference_from_json(read_json(kData + "/reference60.json"));
    std::string detail;
    bool ok = true;
    for (auto [level, name, bound] : {std::tuple{NoiseLevel::Low, "low", 0.90}, std::tuple{NoiseLevel::High, "high", 0.80}}) {
        double p = 0.0, r = 0.0;
        for (std::uint64_t seed = 1; seed <= 20; ++seed) {
            const auto spec = SimulationSpec::cisa(level, seed);
            const auto data = simulate_cisa(spec, ref);
            PipelineOptions opts;
            opts.variant = Variant::LIAN1;
            opts.tol = simulation_tolerances(spec);
            const auto res = assign_spins(data.spins, ref.sequence, simulation_priors(bundled_priors(), spec), opts);
            const auto s = score(res.assignment, data.truth);
            p += s.precision;
            r += s.recall;
        }
        p /= 20.0;
        r /= 20.0;
        ok = ok && p >= bound && r >= bound;
        detail += (detail.empty() ? "" : "; ") + std::string(name) + " noise mean P/R " + fmt(p) + "/" + fmt(r) +
                  " (need " + fmt(bound, 2) + ")";
    }
    return {ok, detail};
}

// 6. FLYA protocol on the bundled 40-residue protein.
Outcome flya_pipeline() {
    const auto ref = reference_from_json(read_json(kData + "/reference40.json"));
    double sum = 0.0;
    std::string runs;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto spec = SimulationSpec::flya(seed);
        const auto data = simulate_flya(spec, ref);
        PipelineOptions opts;
        opts.variant = Variant::LIAN1;
        opts.tol = simulation_tolerances(spec);
        const auto res = assign_peaks(data.peaks, ref.sequence, simulation_priors(bundled_priors(), spec), opts);
        const double f = atom_correctness(res.assignment, data.truth, ref).fraction();
        sum += f;
        runs += (runs.empty() ? "" : " ") + fmt(f);
    }
    const double mean = sum / 5.0;
    return {mean >= 0.85, "atom-level correctness per run " + runs + ", mean " + fmt(mean) + " (need 0.85)"};
}

// 7. Grouping completeness against brute-force subset enumeration.
Outcome grouping_completeness() {
    std::mt19937_64 rng(7);
    const Tolerances tol;
    const std::vector<std::string> three{"HSQC", "HNCACB", "HN(CO)CACB"};
    const auto pattern = pattern_for(three);
    std::size_t equal = 0, total_groupings = 0;
    for (int t = 0; t < 20; ++t) {
        const auto peaks = random_peak_instance(rng, 12, tol);
        GroupingOptions opts;
        opts.top_k = kAllCliques;
        opts.per_clique = kAllCliques;
        const auto got = enumerate_groupings(build_compatibility_graph(peaks, tol), peaks, pattern, tol,
                                             bundled_priors(), opts);
        std::set<std::pair<std::vector<std::string>, std::map<std::string, AtomRole>>> mine;
        for (const auto& g : got) mine.insert({g.member_peaks, g.labels});
        total_groupings += got.size();
        equal += mine.size() == got.size() && mine == brute_force_groupings(peaks, pattern, tol);
    }
    return {equal == 20, std::to_string(equal) + "/20 instances equal (" + std::to_string(total_groupings) +
                             " groupings in total)"};
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(NMRPATH_CLI) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// 8. simulate + assign + evaluate twice with one seed.
Outcome determinism() {
    const fs::path root = fs::temp_directory_path() / ("nmrpath_acceptance_" + std::to_string(::getpid()));
    fs::remove_all(root);
    std::size_t compared = 0;
    std::vector<std::string> differing;
    auto q = [](const fs::path& p) { return "'" + p.string() + "'"; };
    struct Case {
        std::string name, simulate_args;
    };
    const std::vector<Case> cases{{"cisa", "--protocol cisa --noise high --seed 8"},
                                  {"flya", "--protocol flya --seed 8 --reference " + q(kData + "/reference40.json")}};
    for (const auto& c : cases) {
        for (const char* rep : {"a", "b"}) {
            const fs::path d = root / c.name / rep;
            if (run_cli("simulate " + c.simulate_args + " --out " + q(d / "data")) != 0 ||
                run_cli("assign --dataset " + q(d / "data") + " --out " + q(d / "run")) != 0 ||
                run_cli("evaluate --assignment " + q(d / "run" / "assignment.json") + " --dataset " + q(d / "data") +
                        " --out " + q(d / "score")) != 0)
                return {false, c.name + ": a command failed"};
        }
        const fs::path a = root / c.name / "a", b = root / c.name / "b";
        for (const auto& entry : fs::recursive_directory_iterator(a)) {
            if (!entry.is_regular_file() || entry.path().filename() == "timings.json") continue;
            const fs::path rel = fs::relative(entry.path(), a);
            ++compared;
            if (!fs::exists(b / rel) || read_text(entry.path()) != read_text(b / rel))
                differing.push_back(c.name + "/" + rel.string());
        }
    }
    fs::remove_all(root);
    std::string detail = std::to_string(compared) + " files compared, " + std::to_string(differing.size()) + " differ";
    for (const auto& f : differing) detail += " " + f;
    return {differing.empty() && compared > 0, detail};
}

}  // namespace

int main() {
    using Clock = std::chrono::steady_clock;
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"1 cost-model oracle", cost_model_oracle},
        {"2 flow-polytope integrality", flow_integrality},
        {"3 exact-rounding equivalence", exact_rounding},
        {"4 LIAN-2 penalty semantics", lian2_penalty},
        {"5 CISA protocol", cisa_reproduction},
        {"6 FLYA protocol", flya_pipeline},
        {"7 grouping completeness", grouping_completeness},
        {"8 determinism", determinism},
    };
    int failed = 0;
    for (const auto& [name, fn] : criteria) {
        const auto t0 = Clock::now();
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double sec = std::chrono::duration<double>(Clock::now() - t0).count();
        failed += !o.pass;
        std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << name << ": " << o.detail << " [" << fmt(sec, 1)
                  << " s]" << std::endl;
    }
    std::cout << "INFO  criterion 9 experimental datasets: not reproducible (data not public); informational only"
              << std::endl;
    return failed == 0 ? 0 : 1;
}
