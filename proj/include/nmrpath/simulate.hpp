// include/nmrpath/simulate.hpp
// Synthetic datasets with known answers: noisy spin systems (CISA protocol)
// and noisy peak lists (FLYA protocol), plus the ground truth used to score
// assignments.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "nmrpath/domain.hpp"
#include "nmrpath/io.hpp"

namespace nmrpath {

enum class Protocol { CISA, FLYA };
enum class NoiseLevel { Low, High };

std::string_view to_string(Protocol p);
Protocol parse_protocol(std::string_view s);
NoiseLevel parse_noise(std::string_view s);

// Per residue, the true shift of every atom the residue carries.
struct ReferenceShifts {
    ProteinSequence sequence;
    std::vector<std::map<Atom, double>> shifts;

    bool operator==(const ReferenceShifts&) const = default;
};

Json to_json(const ReferenceShifts& r);
ReferenceShifts reference_from_json(const Json& j);

// Draws one value per present atom from the priors (fixture generation).
ReferenceShifts sample_reference(const ProteinSequence& seq, const PriorTable& priors, std::uint64_t seed);

struct SimulationSpec {
    Protocol protocol = Protocol::CISA;
    std::uint64_t seed = 0;
    // CISA: carbon noise, amide copied exactly.
    double sigma_alpha = 0.08;
    double sigma_beta = 0.16;
    // FLYA: per-nucleus noise and truncation bounds.
    double sigma_h = 0.03 / 4;
    double sigma_n = 0.4 / 4;
    double sigma_c = 0.4 / 4;
    double bound_h = 0.04;
    double bound_n = 0.4;
    double bound_c = 0.4;
    double deletion_rate = 0.0;
    std::vector<std::string> experiments;  // FLYA experiment set
    std::size_t decoys = 0;                // uniform artifact peaks, FLYA only

    static SimulationSpec cisa(NoiseLevel level, std::uint64_t seed);
    static SimulationSpec flya(std::uint64_t seed);
    void validate() const;
};

Json to_json(const SimulationSpec& s);
SimulationSpec spec_from_json(const Json& j);

struct PeakOrigin {
    std::size_t residue = 0;  // residue whose amide produced the peak (0-based)
    std::optional<AtomRole> role;
};

struct GroundTruth {
    std::string sequence;
    bool spins = true;  // spin-system dataset, otherwise peak list
    // Per residue: spin id, or for peak lists the sorted peaks of its amide;
    // nullopt/empty when the residue yields no data (ABSENT).
    std::vector<std::optional<std::string>> residue_ids;
    std::vector<std::vector<std::string>> residue_peaks;
    std::map<std::string, PeakOrigin> peak_origin;

    bool assignable(std::size_t k) const;
    bool operator==(const GroundTruth&) const = default;
};

bool operator==(const PeakOrigin& a, const PeakOrigin& b);

Json to_json(const GroundTruth& g);
GroundTruth ground_truth_from_json(const Json& j);

struct SpinDataset {
    std::vector<SpinSystem> spins;
    GroundTruth truth;
};

struct PeakDataset {
    std::vector<Peak> peaks;
    GroundTruth truth;
};

SpinDataset simulate_cisa(const SimulationSpec& spec, const ReferenceShifts& ref);
PeakDataset simulate_flya(const SimulationSpec& spec, const ReferenceShifts& ref);

// Prior table whose experimental-noise entries match the protocol.
PriorTable simulation_priors(const PriorTable& base, const SimulationSpec& spec);
// Matching windows that contain the simulated noise.
Tolerances simulation_tolerances(const SimulationSpec& spec);

// Deterministic generator for a named substream of a seed.
std::mt19937_64 substream(std::uint64_t seed, std::string_view name);

}  // namespace nmrpath
