// src/experiments.cpp

#include "nmrpath/experiments.hpp"

#include <algorithm>

namespace nmrpath {

const std::vector<Experiment>& experiment_catalog() {
    static const std::vector<Experiment> catalog = {
        {"HSQC", false, {}},
        {"HNCACB",
         true,
         {{AtomRole::CA, +1}, {AtomRole::CB, -1}, {AtomRole::CA_prev, +1}, {AtomRole::CB_prev, -1}}},
        {"HN(CO)CACB", true, {{AtomRole::CA_prev, +1}, {AtomRole::CB_prev, -1}}},
        {"HNCO", true, {{AtomRole::CO_prev, 0}}},
        {"HN(CO)CA", true, {{AtomRole::CA_prev, 0}}},
        {"HN(CA)CO", true, {{AtomRole::CO, 0}, {AtomRole::CO_prev, 0}}},
        {"HNCA", true, {{AtomRole::CA, 0}, {AtomRole::CA_prev, 0}}},
    };
    return catalog;
}

const Experiment* find_experiment(std::string_view name) {
    for (const auto& e : experiment_catalog())
        if (e.name == name) return &e;
    return nullptr;
}

std::vector<std::string> three_experiment_set() { return {"HSQC", "HNCACB", "HN(CO)CACB"}; }

std::vector<std::string> seven_experiment_set() {
    return {"HSQC", "HNCACB", "HN(CO)CACB", "HNCO", "HN(CO)CA", "HN(CA)CO", "HNCA"};
}

std::vector<AtomRole> candidate_roles(const Experiment& exp, int phase) {
    std::vector<AtomRole> out;
    for (const auto& s : exp.slots)
        if (phase == 0 || s.phase == 0 || s.phase == phase) out.push_back(s.role);
    return out;
}

std::optional<int> slot_index(const Experiment& exp, AtomRole role) {
    for (std::size_t i = 0; i < exp.slots.size(); ++i)
        if (exp.slots[i].role == role) return static_cast<int>(i);
    return std::nullopt;
}

ObservationModel ObservationModel::for_spectra(std::vector<std::string> spectra) {
    std::sort(spectra.begin(), spectra.end());
    spectra.erase(std::unique(spectra.begin(), spectra.end()), spectra.end());
    for (const auto& s : spectra)
        if (!find_experiment(s)) throw Error(ErrorCode::UnknownSpectrum, s);
    ObservationModel m;
    m.spectra_ = std::move(spectra);
    return m;
}

ObservationModel ObservationModel::for_spins() {
    ObservationModel m;
    m.spin_mode_ = true;
    m.spectra_ = {std::string(kSpinSpectrum)};
    return m;
}

namespace {

// A residue yields amide peaks unless it is proline or lacks an amide prior.
bool has_amide(const ProteinSequence& seq, std::size_t k, const PriorTable& priors) {
    return priors.atom_present(seq[k], Atom::N) && priors.atom_present(seq[k], Atom::HN);
}

}  // namespace

std::vector<std::string> ObservationModel::expected_sources(const ProteinSequence& seq, std::size_t k,
                                                            Atom atom, const PriorTable& priors) const {
    std::vector<std::string> out;
    if (!priors.atom_present(seq[k], atom)) return out;
    const bool own_amide = has_amide(seq, k, priors);
    const bool next_amide = k + 1 < seq.size() && has_amide(seq, k + 1, priors);

    if (spin_mode_) {
        if (own_amide) out.emplace_back(kSpinSpectrum);
        if (prev_role(atom) && next_amide) out.emplace_back(kSpinSpectrum);
        return out;
    }

    for (const auto& name : spectra_) {
        const Experiment& exp = *find_experiment(name);
        if (atom == Atom::N || atom == Atom::HN) {
            if (!own_amide) continue;
            // Every peak of the amide observes N and HN; count the peaks this
            // residue produces (slots whose atoms exist).
            int count = 0;
            if (!exp.has_carbon) {
                count = 1;
            } else {
                for (const auto& s : exp.slots) {
                    const Atom a = atom_of(s.role);
                    if (is_prev(s.role)) {
                        if (k > 0 && priors.atom_present(seq[k - 1], a)) ++count;
                    } else if (priors.atom_present(seq[k], a)) {
                        ++count;
                    }
                }
            }
            for (int i = 0; i < count; ++i) out.push_back(name);
            continue;
        }
        for (const auto& s : exp.slots) {
            if (atom_of(s.role) != atom) continue;
            if (is_prev(s.role) ? next_amide : own_amide) out.push_back(name);
        }
    }
    return out;
}

}  // namespace nmrpath
