// tests/test_domain.cpp

#include <sstream>

#include "doctest.h"
#include "nmrpath/domain.hpp"
#include "nmrpath/experiments.hpp"
#include "nmrpath/io.hpp"

using namespace nmrpath;

namespace {

PriorTable small_priors() {
    PriorTable p;
    for (char r : std::string(kStandardResidues)) {
        p.set_prior(r, Atom::N, {120.0, 3.5});
        p.set_prior(r, Atom::HN, {8.2, 0.6});
        p.set_prior(r, Atom::CA, {56.0, 2.0});
        p.set_prior(r, Atom::CB, {35.0, 2.0});
        p.set_prior(r, Atom::CO, {176.0, 2.0});
    }
    p.set_absent('G', Atom::CB);
    p.set_absent('P', Atom::N);
    p.set_absent('P', Atom::HN);
    for (const auto& e : experiment_catalog()) {
        p.set_noise(e.name, "H", 0.01);
        p.set_noise(e.name, "N", 0.1);
        p.set_noise(e.name, "C", 0.1);
    }
    p.set_noise("spin", "H", 0.01);
    p.set_noise("spin", "N", 0.1);
    p.set_noise("spin", "C", 0.1);
    return p;
}

Peak peak(std::string id, std::string spec, double h, double n, std::optional<double> c = std::nullopt,
          int phase = 0) {
    Peak p;
    p.peak_id = std::move(id);
    p.spectrum_id = std::move(spec);
    p.h = h;
    p.n = n;
    p.c = c;
    p.phase = phase;
    return p;
}

}  // namespace

TEST_CASE("validate_dataset: empty peak list is ok with a warning") {
    const std::vector<Peak> none;
    const auto rep = validate_dataset(std::span<const Peak>(none), small_priors(), ProteinSequence("ACDEF"));
    CHECK(rep.ok);
    REQUIRE(rep.issues.size() == 1);
    CHECK(rep.issues[0].severity == Severity::Warning);
    CHECK(rep.issues[0].message == "0 peaks");
}

TEST_CASE("validate_dataset: duplicate peak ids are fatal") {
    const std::vector<Peak> peaks{peak("p1", "HSQC", 8.0, 120.0), peak("p1", "HSQC", 8.1, 121.0)};
    const auto rep = validate_dataset(std::span<const Peak>(peaks), small_priors(), ProteinSequence("ACDEF"));
    CHECK_FALSE(rep.ok);
    CHECK(rep.has(ErrorCode::DuplicateId));
}

TEST_CASE("validate_dataset: unknown residue type is fatal") {
    const std::vector<Peak> peaks{peak("p1", "HSQC", 8.0, 120.0)};
    const auto rep = validate_dataset(std::span<const Peak>(peaks), small_priors(), ProteinSequence("ACXEF"));
    CHECK_FALSE(rep.ok);
    CHECK(rep.has(ErrorCode::UnknownResidueType));
}

TEST_CASE("validate_dataset: spectra and coordinates") {
    const std::vector<Peak> bad_spec{peak("p1", "NOESY", 8.0, 120.0)};
    CHECK(validate_dataset(std::span<const Peak>(bad_spec), small_priors(), ProteinSequence("AC"))
              .has(ErrorCode::UnknownSpectrum));
    const std::vector<Peak> hsqc_with_c{peak("p1", "HSQC", 8.0, 120.0, 50.0)};
    CHECK(validate_dataset(std::span<const Peak>(hsqc_with_c), small_priors(), ProteinSequence("AC"))
              .has(ErrorCode::MalformedCoordinates));
    const std::vector<Peak> missing_c{peak("p1", "HNCA", 8.0, 120.0)};
    CHECK(validate_dataset(std::span<const Peak>(missing_c), small_priors(), ProteinSequence("AC"))
              .has(ErrorCode::MalformedCoordinates));
}

TEST_CASE("validate_dataset: spin systems need an amide value") {
    SpinSystem s;
    s.system_id = "S1";
    s.shifts[AtomRole::CA] = 55.0;
    const std::vector<SpinSystem> spins{s};
    CHECK(validate_dataset(std::span<const SpinSystem>(spins), small_priors(), ProteinSequence("A"))
              .has(ErrorCode::MalformedCoordinates));
    SpinSystem t = s;
    t.shifts[AtomRole::N] = 120.0;
    const std::vector<SpinSystem> good{t};
    CHECK(validate_dataset(std::span<const SpinSystem>(good), small_priors(), ProteinSequence("A")).ok);
}

TEST_CASE("validate_dataset is pure") {
    const std::vector<Peak> peaks{peak("p1", "HSQC", 8.0, 120.0), peak("p1", "HSQC", 8.1, 121.0)};
    const auto a = validate_dataset(std::span<const Peak>(peaks), small_priors(), ProteinSequence("ACXEF"));
    const auto b = validate_dataset(std::span<const Peak>(peaks), small_priors(), ProteinSequence("ACXEF"));
    CHECK(a.summary() == b.summary());
}

TEST_CASE("tolerances must be strictly positive") {
    Tolerances t;
    CHECK_NOTHROW(t.validate());
    CHECK(t.delta1 == 0.03);
    CHECK(t.delta2 == 0.3);
    CHECK(t.delta3 == 0.3);
    CHECK(t.delta == 3.0);
    CHECK(t.lambda == 5.0);
    t.delta3 = 0.0;
    CHECK_THROWS_AS(t.validate(), Error);
}

TEST_CASE("peak file round trip") {
    const std::vector<Peak> peaks{peak("p1", "HSQC", 8.123, 119.5), peak("p2", "HNCACB", 8.1, 120.0, 55.25, -1),
                                  peak("p3", "HNCA", 7.9, 118.0, 54.1, 0)};
    std::ostringstream os;
    write_peaks(os, peaks);
    std::istringstream is(os.str());
    CHECK(parse_peaks(is) == peaks);
}

TEST_CASE("peak file parsing: comments, optional columns, errors") {
    std::istringstream ok("# header\np1\tHSQC\t8.0\t120.0\n\np2 HNCA 8.0 120.0 55.0 +1\n");
    const auto peaks = parse_peaks(ok);
    REQUIRE(peaks.size() == 2);
    CHECK_FALSE(peaks[0].c.has_value());
    CHECK(peaks[1].phase == 1);
    std::istringstream bad("p1 HSQC 8.0\n");
    CHECK_THROWS_AS(parse_peaks(bad), Error);
    std::istringstream nan("p1 HSQC 8.0 abc\n");
    CHECK_THROWS_AS(parse_peaks(nan), Error);
}

TEST_CASE("spin file round trip") {
    SpinSystem a;
    a.system_id = "S1";
    a.shifts = {{AtomRole::N, 120.5}, {AtomRole::HN, 8.25}, {AtomRole::CA, 55.1}, {AtomRole::CB_prev, 30.0}};
    SpinSystem b;
    b.system_id = "S2";
    b.shifts = {{AtomRole::N, 110.0}, {AtomRole::HN, 7.5}};
    const std::vector<SpinSystem> spins{a, b};
    std::ostringstream os;
    write_spins(os, spins);
    std::istringstream is(os.str());
    CHECK(parse_spins(is) == spins);
}

TEST_CASE("prior table and tolerances JSON round trip") {
    const PriorTable p = small_priors();
    CHECK(priors_from_json(to_json(p)) == p);
    CHECK_FALSE(priors_from_json(to_json(p)).atom_present('G', Atom::CB));

    Tolerances t;
    t.delta3 = 0.9;
    t.lambda = 7.5;
    CHECK(tolerances_from_json(to_json(t)) == t);
    CHECK_THROWS_AS(tolerances_from_json(Json{{"delta9", 1.0}}), Error);
    CHECK_THROWS_AS(tolerances_from_json(Json{{"delta1", -1.0}}), Error);
}

TEST_CASE("sequence parsing skips FASTA headers") {
    const auto seq = parse_sequence(">prot\nACD\nEFG\n");
    CHECK(seq.str() == "ACDEFG");
    CHECK(seq.size() == 6);
    CHECK(parse_sequence(sequence_text(seq)) == seq);
}

TEST_CASE("prior lookups") {
    const PriorTable p = small_priors();
    CHECK(p.noise_for("HNCA", Atom::CA) == 0.1);
    CHECK(p.noise_for("HNCA", Atom::HN) == 0.01);
    CHECK_THROWS_AS(p.noise_for("NOESY", Atom::CA), Error);
    CHECK(p.prior('A', Atom::CA).mu == 56.0);
}
