// tests/test_cli.cpp
// Drives the nmrpath binary end to end.

#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <cstdio>
#include <filesystem>

#include "doctest.h"
#include "nmrpath/evaluate.hpp"
#include "nmrpath/io.hpp"

namespace fs = std::filesystem;
using namespace nmrpath;

namespace {

struct Run {
    int code = -1;
    std::string out;
};

Run run(const std::string& args) {
    const std::string cmd = std::string(NMRPATH_CLI) + " " + args + " 2>/dev/null";
    Run r;
    FILE* p = popen(cmd.c_str(), "r");
    REQUIRE(p != nullptr);
    std::array<char, 4096> buf{};
    std::size_t got;
    while ((got = fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), got);
    const int status = pclose(p);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

fs::path scratch(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / ("nmrpath_cli_" + std::to_string(::getpid())) / name;
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

const std::string kData = NMRPATH_DATA_DIR;

}  // namespace

TEST_CASE("help exits 0 everywhere") {
    CHECK(run("--help").code == 0);
    for (const char* sub : {"simulate", "assign", "evaluate", "graph-stats"}) CHECK(run(std::string(sub) + " --help").code == 0);
}

TEST_CASE("usage errors exit 2") {
    CHECK(run("").code == 2);
    CHECK(run("assign --variant nope").code == 2);
    CHECK(run("assign --spins /nonexistent/spins.tsv --sequence /nonexistent/seq").code == 2);
    CHECK(run("simulate --protocol other").code == 2);
}

TEST_CASE("simulate writes one spin system per non-proline residue") {
    const auto d = scratch("cisa7");
    REQUIRE(run("simulate --protocol cisa --noise low --seed 7 --out " + q(d)).code == 0);
    const auto seq = read_sequence(d / "sequence.fasta");
    std::size_t expected = 0;
    for (char c : seq.str()) expected += c != 'P';
    CHECK(read_spins(d / "spins.tsv").size() == expected);
    CHECK(read_json(d / "simulation.json")["sigma_alpha"] == 0.08);
}

TEST_CASE("high noise uses the larger carbon sigmas") {
    const auto d = scratch("cisa_high");
    REQUIRE(run("simulate --protocol cisa --noise high --seed 7 --out " + q(d)).code == 0);
    const Json s = read_json(d / "simulation.json");
    CHECK(s["sigma_alpha"] == 0.16);
    CHECK(s["sigma_beta"] == 0.32);
}

TEST_CASE("simulate is byte-identical for a fixed seed") {
    const auto a = scratch("flya_a"), b = scratch("flya_b");
    const std::string ref = " --reference " + q(kData + "/reference40.json");
    REQUIRE(run("simulate --protocol flya --seed 7" + ref + " --out " + q(a)).code == 0);
    REQUIRE(run("simulate --protocol flya --seed 7" + ref + " --out " + q(b)).code == 0);
    for (const char* f : {"peaks.tsv", "ground_truth.json", "priors.json", "tolerances.json", "simulation.json"})
        CHECK(read_text(a / f) == read_text(b / f));
}

TEST_CASE("config file values yield to flags") {
    const auto d = scratch("config");
    write_text(d / "cfg.json", R"({"protocol": "cisa", "noise": "high", "seed": 3})");
    REQUIRE(run("simulate --config " + q(d / "cfg.json") + " --noise low --out " + q(d / "out")).code == 0);
    const Json s = read_json(d / "out" / "simulation.json");
    CHECK(s["sigma_alpha"] == 0.08);
    CHECK(s["seed"] == 3);
}

TEST_CASE("evaluate prints precision and recall") {
    const auto d = scratch("evaluate");
    GroundTruth gt;
    gt.sequence = std::string(12, 'A');
    for (int k = 0; k < 12; ++k) gt.residue_ids.push_back("S" + std::to_string(k + 1));
    gt.residue_peaks.assign(12, {});
    write_json(d / "truth.json", to_json(gt));
    write_json(d / "self.json", to_json(assignment_from_truth(gt)));
    CHECK(run("evaluate --assignment " + q(d / "self.json") + " --truth " + q(d / "truth.json")).out == "1.000 1.000\n");

    Assignment a = assignment_from_truth(gt);
    a.residues[9].id = "S12";
    a.residues[10].id.reset();
    a.residues[11].id.reset();
    write_json(d / "partial.json", to_json(a));
    const auto r = run("evaluate --assignment " + q(d / "partial.json") + " --truth " + q(d / "truth.json") +
                       " --out " + q(d / "report"));
    CHECK(r.code == 0);
    CHECK(r.out == "0.900 0.750\n");
    CHECK(fs::exists(d / "report" / "score.json"));
    CHECK(fs::exists(d / "report" / "score.txt"));

    GroundTruth shorter = gt;
    shorter.residue_ids.pop_back();
    shorter.residue_peaks.pop_back();
    shorter.sequence.pop_back();
    write_json(d / "short.json", to_json(shorter));
    CHECK(run("evaluate --assignment " + q(d / "self.json") + " --truth " + q(d / "short.json")).code == 2);
}

TEST_CASE("empty input assigns every residue to the dummy") {
    const auto d = scratch("empty");
    write_text(d / "spins.tsv", "");
    write_text(d / "seq.fasta", "ACD\n");
    REQUIRE(run("assign --spins " + q(d / "spins.tsv") + " --sequence " + q(d / "seq.fasta") + " --out " + q(d / "out"))
                .code == 0);
    const auto a = assignment_from_json(read_json(d / "out" / "assignment.json"));
    REQUIRE(a.residues.size() == 3);
    double thresholds = 0.0;
    for (const auto& r : a.residues) {
        CHECK(r.dummy());
        thresholds += r.threshold;
    }
    CHECK(a.total_cost == doctest::Approx(thresholds).epsilon(1e-12));
}

TEST_CASE("one spin system wanted by two residues") {
    // A single spin system fits both alanines, so the unconstrained path uses it twice.
    const auto d = scratch("conflict");
    write_text(d / "spins.tsv", "S1\t123.2\t8.19\t53.1\t19.0\t-\t-\n");
    write_text(d / "seq.fasta", "AA\n");
    const std::string in = "assign --spins " + q(d / "spins.tsv") + " --sequence " + q(d / "seq.fasta");

    REQUIRE(run(in + " --variant dp --out " + q(d / "dp")).code == 0);
    const auto dp = assignment_from_json(read_json(d / "dp" / "assignment.json"));
    CHECK_FALSE(dp.residues[0].dummy());
    CHECK_FALSE(dp.residues[1].dummy());

    REQUIRE(run(in + " --variant lian1 --out " + q(d / "lian1")).code == 0);
    const auto hard = assignment_from_json(read_json(d / "lian1" / "assignment.json"));
    CHECK(hard.residues[0].dummy() + hard.residues[1].dummy() == 1);
    CHECK(hard.reused.empty());

    REQUIRE(run(in + " --variant lian2 --lambda 5 --out " + q(d / "lian2")).code == 0);
    const auto soft = assignment_from_json(read_json(d / "lian2" / "assignment.json"));
    CHECK_FALSE(soft.residues[0].dummy());
    CHECK_FALSE(soft.residues[1].dummy());
    REQUIRE(soft.reused.size() == 1);
    CHECK(soft.reused[0] == std::pair<std::string, int>{"S1", 2});
    CHECK(soft.objective == doctest::Approx(soft.total_cost + 5.0));

    REQUIRE(run(in + " --variant ilp --out " + q(d / "ilp")).code == 0);
    const auto ilp = assignment_from_json(read_json(d / "ilp" / "assignment.json"));
    CHECK(ilp.total_cost == doctest::Approx(hard.total_cost));
}

TEST_CASE("simulate, assign and evaluate on the bundled 60-residue protein") {
    const auto d = scratch("pipeline");
    REQUIRE(run("simulate --protocol cisa --noise low --seed 11 --out " + q(d / "data")).code == 0);
    REQUIRE(run("assign --dataset " + q(d / "data") + " --out " + q(d / "run")).code == 0);
    const auto r = run("evaluate --assignment " + q(d / "run" / "assignment.json") + " --dataset " + q(d / "data"));
    REQUIRE(r.code == 0);
    const double precision = std::stod(r.out.substr(0, r.out.find(' ')));
    const double recall = std::stod(r.out.substr(r.out.find(' ') + 1));
    CHECK(precision >= 0.9);
    CHECK(recall >= 0.9);
    for (const char* f : {"assignment.json", "diagnostics.txt", "diagnostics.json", "graph_stats.json", "solver.json",
                          "timings.json"})
        CHECK(fs::exists(d / "run" / f));

    const auto stats = run("graph-stats --dataset " + q(d / "data") + " --out " + q(d / "stats"));
    CHECK(stats.code == 0);
    CHECK(stats.out.find("layers 1 ") != std::string::npos);
    CHECK(fs::exists(d / "stats" / "graph.json"));
}

TEST_CASE("external backend selector") {
    const auto d = scratch("external");
    REQUIRE(run("simulate --protocol cisa --seed 2 --out " + q(d / "data")).code == 0);
    CHECK(run("assign --dataset " + q(d / "data") + " --backend nonsense --out " + q(d / "x")).code == 2);
    CHECK(run("assign --dataset " + q(d / "data") + " --backend external:/bin/false --out " + q(d / "y")).code == 4);
}
