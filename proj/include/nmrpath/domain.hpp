// include/nmrpath/domain.hpp
// Shared value types for backbone resonance assignment: peaks, spin systems,
// sequences, chemical-shift priors, tolerances and observations.

#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace nmrpath {

enum class ErrorCode {
    DuplicateId,
    UnknownResidueType,
    UnknownSpectrum,
    MalformedCoordinates,
    PriorMissing,
    NoiseMissing,
    NonPositiveSigma,
    ComponentTooLarge,
    InstanceTooLarge,
    InfeasibleByEnumeration,
    SubgraphInfeasible,
    EmptyLayer,
    MissingReference,
    LengthMismatch,
    PathNotInGraph,
    Parse,
    Io,
    InvalidArgument,
    SolverFailure,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

// Backbone atoms carried by every residue (some are absent for Gly/Pro).
enum class Atom : std::uint8_t { N, HN, CA, CB, CO };
inline constexpr std::array<Atom, 5> kAllAtoms{Atom::N, Atom::HN, Atom::CA, Atom::CB, Atom::CO};

// Role of an observation relative to the residue whose amide produced it.
// The *_prev roles observe atoms of the preceding residue.
enum class AtomRole : std::uint8_t { N, HN, CA, CB, CO, CA_prev, CB_prev, CO_prev };
inline constexpr std::array<AtomRole, 8> kAllRoles{AtomRole::N,  AtomRole::HN,      AtomRole::CA,
                                                   AtomRole::CB, AtomRole::CO,      AtomRole::CA_prev,
                                                   AtomRole::CB_prev, AtomRole::CO_prev};
inline constexpr std::array<AtomRole, 6> kSpinRoles{AtomRole::N,  AtomRole::HN,      AtomRole::CA,
                                                    AtomRole::CB, AtomRole::CA_prev, AtomRole::CB_prev};

std::string_view to_string(Atom atom);
std::string_view to_string(AtomRole role);
std::optional<Atom> parse_atom(std::string_view name);
std::optional<AtomRole> parse_role(std::string_view name);

constexpr bool is_prev(AtomRole r) {
    return r == AtomRole::CA_prev || r == AtomRole::CB_prev || r == AtomRole::CO_prev;
}
constexpr Atom atom_of(AtomRole r) {
    switch (r) {
    case AtomRole::N: return Atom::N;
    case AtomRole::HN: return Atom::HN;
    case AtomRole::CA:
    case AtomRole::CA_prev: return Atom::CA;
    case AtomRole::CB:
    case AtomRole::CB_prev: return Atom::CB;
    case AtomRole::CO:
    case AtomRole::CO_prev: return Atom::CO;
    }
    return Atom::N;
}
constexpr AtomRole intra_role(Atom a) {
    switch (a) {
    case Atom::N: return AtomRole::N;
    case Atom::HN: return AtomRole::HN;
    case Atom::CA: return AtomRole::CA;
    case Atom::CB: return AtomRole::CB;
    case Atom::CO: return AtomRole::CO;
    }
    return AtomRole::N;
}
// Only carbons are observed across the peptide bond.
constexpr std::optional<AtomRole> prev_role(Atom a) {
    switch (a) {
    case Atom::CA: return AtomRole::CA_prev;
    case Atom::CB: return AtomRole::CB_prev;
    case Atom::CO: return AtomRole::CO_prev;
    default: return std::nullopt;
    }
}
// Spectral dimension an atom is measured on.
constexpr char dimension_of(Atom a) {
    return a == Atom::HN ? 'H' : (a == Atom::N ? 'N' : 'C');
}

struct Peak {
    std::string peak_id;
    std::string spectrum_id;
    double h = 0.0;
    double n = 0.0;
    std::optional<double> c;  // absent for 2-D spectra
    int phase = 0;            // +1, -1, or 0 when unknown

    bool operator==(const Peak&) const = default;
};

struct SpinSystem {
    std::string system_id;
    std::map<AtomRole, double> shifts;  // only roles in kSpinRoles

    std::optional<double> get(AtomRole r) const {
        auto it = shifts.find(r);
        if (it == shifts.end()) return std::nullopt;
        return it->second;
    }
    bool operator==(const SpinSystem&) const = default;
};

inline constexpr std::string_view kStandardResidues = "ACDEFGHIKLMNPQRSTVWY";

class ProteinSequence {
public:
    ProteinSequence() = default;
    // Accepts upper-case letters; non-standard codes are reported by validate_dataset.
    explicit ProteinSequence(std::string residues);

    std::size_t size() const { return residues_.size(); }
    char operator[](std::size_t i) const { return residues_[i]; }
    const std::string& str() const { return residues_; }
    bool is_standard() const;

    bool operator==(const ProteinSequence&) const = default;

private:
    std::string residues_;
};

struct GaussianPrior {
    double mu = 0.0;
    double sigma = 1.0;
    bool operator==(const GaussianPrior&) const = default;
};

// Per residue type and atom: a Gaussian prior, or nullopt when the atom is
// chemically absent (Gly CB, Pro amide). Per spectrum and dimension: the
// experimental noise. Keys in the noise table are spectrum ids ("spin" for
// spin-system input) and dimension labels ("H", "N", "C"); the spin table may
// also carry atom-specific keys such as "CA" that take precedence over "C".
class PriorTable {
public:
    using AtomEntries = std::map<Atom, std::optional<GaussianPrior>>;

    void set_prior(char residue, Atom atom, GaussianPrior prior);
    void set_absent(char residue, Atom atom);
    void set_noise(const std::string& spectrum, const std::string& dim, double sigma);

    bool has_residue(char residue) const { return residues_.count(residue) != 0; }
    // Entry lookup: nullopt if the table says nothing about (residue, atom).
    std::optional<std::optional<GaussianPrior>> entry(char residue, Atom atom) const;
    // True iff the residue carries the atom (entry present and not ABSENT).
    bool atom_present(char residue, Atom atom) const;
    // Throws PriorMissing when no entry exists, InvalidArgument when ABSENT.
    GaussianPrior prior(char residue, Atom atom) const;

    std::optional<double> find_noise(std::string_view spectrum, std::string_view dim) const;
    // Noise for an observation of `atom` in `spectrum`; throws NoiseMissing.
    double noise_for(std::string_view spectrum, Atom atom) const;

    const std::map<char, AtomEntries>& residues() const { return residues_; }
    const std::map<std::string, std::map<std::string, double>>& noise() const { return noise_; }

    bool operator==(const PriorTable&) const = default;

private:
    std::map<char, AtomEntries> residues_;
    std::map<std::string, std::map<std::string, double>> noise_;
};

struct Tolerances {
    double delta1 = 0.03;     // H match window, ppm
    double delta2 = 0.3;      // N match window, ppm
    double delta3 = 0.3;      // C match window, ppm
    double delta = 3.0;       // typing-threshold multiplier
    double lambda = 5.0;      // reuse penalty
    double round_eps = 1e-6;  // LP support cutoff

    void validate() const;
    bool operator==(const Tolerances&) const = default;
};

struct Observation {
    AtomRole role = AtomRole::N;
    double value = 0.0;
    std::string source;  // peak_id or spin system id
    double sigma = 1.0;
    std::string spectrum;

    bool operator==(const Observation&) const = default;
};

enum class Severity { Warning, Fatal };

struct ValidationIssue {
    Severity severity = Severity::Warning;
    ErrorCode code = ErrorCode::InvalidArgument;
    std::string message;
};

struct ValidationReport {
    bool ok = true;
    std::vector<ValidationIssue> issues;

    bool has(ErrorCode code) const;
    std::string summary() const;
};

ValidationReport validate_dataset(std::span<const Peak> peaks, const PriorTable& priors,
                                  const ProteinSequence& seq);
ValidationReport validate_dataset(std::span<const SpinSystem> spins, const PriorTable& priors,
                                  const ProteinSequence& seq);

}  // namespace nmrpath
