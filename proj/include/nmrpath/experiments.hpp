// include/nmrpath/experiments.hpp
// Catalogue of triple-resonance experiments: which carbon roles each spectrum
// observes, with the expected phase, and the per-residue observation counts
// that follow from an experiment set.

#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nmrpath/domain.hpp"

namespace nmrpath {

struct RoleSlot {
    AtomRole role;
    int phase = 0;  // expected sign, 0 when the spectrum does not separate by sign
};

struct Experiment {
    std::string name;
    bool has_carbon = true;
    std::vector<RoleSlot> slots;  // empty for 2-D (amide-only) spectra

    // Maximum number of peaks one amide contributes to this spectrum.
    int pattern_count() const { return has_carbon ? static_cast<int>(slots.size()) : 1; }
};

// Pseudo-spectrum id used for spin-system observations.
inline constexpr std::string_view kSpinSpectrum = "spin";

// Known experiments: HSQC, HNCACB, HN(CO)CACB, HNCO, HN(CO)CA, HN(CA)CO, HNCA.
const std::vector<Experiment>& experiment_catalog();
const Experiment* find_experiment(std::string_view name);

// Standard sets.
std::vector<std::string> three_experiment_set();  // HSQC, HNCACB, HN(CO)CACB
std::vector<std::string> seven_experiment_set();

// Roles a peak of this spectrum with this phase may be labelled with. An
// empty result for a 2-D spectrum means "amide only".
std::vector<AtomRole> candidate_roles(const Experiment& exp, int phase);

// Index of the slot within the spectrum for a role, or nullopt.
std::optional<int> slot_index(const Experiment& exp, AtomRole role);

// Observation model: which spectra contribute observations of each atom of a
// residue. Used to derive expected observation counts for typing thresholds.
class ObservationModel {
public:
    // Peak-list model over a set of spectrum names.
    static ObservationModel for_spectra(std::vector<std::string> spectra);
    // Spin-system model: one observation per role in kSpinRoles.
    static ObservationModel for_spins();

    bool spin_mode() const { return spin_mode_; }
    const std::vector<std::string>& spectra() const { return spectra_; }

    // Spectrum ids of the expected observations of `atom` for residue k
    // (0-based) of `seq`. Chemically absent atoms yield an empty list; the
    // caller checks presence through the prior table.
    std::vector<std::string> expected_sources(const ProteinSequence& seq, std::size_t k, Atom atom,
                                              const PriorTable& priors) const;

private:
    bool spin_mode_ = false;
    std::vector<std::string> spectra_;
};

}  // namespace nmrpath
