// src/domain.cpp

#include "nmrpath/domain.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "nmrpath/experiments.hpp"

namespace nmrpath {

std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::UnknownResidueType: return "UnknownResidueType";
    case ErrorCode::UnknownSpectrum: return "UnknownSpectrum";
    case ErrorCode::MalformedCoordinates: return "MalformedCoordinates";
    case ErrorCode::PriorMissing: return "PriorMissing";
    case ErrorCode::NoiseMissing: return "NoiseMissing";
    case ErrorCode::NonPositiveSigma: return "NonPositiveSigma";
    case ErrorCode::ComponentTooLarge: return "ComponentTooLarge";
    case ErrorCode::InstanceTooLarge: return "InstanceTooLarge";
    case ErrorCode::InfeasibleByEnumeration: return "InfeasibleByEnumeration";
    case ErrorCode::SubgraphInfeasible: return "SubgraphInfeasible";
    case ErrorCode::EmptyLayer: return "EmptyLayer";
    case ErrorCode::MissingReference: return "MissingReference";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::PathNotInGraph: return "PathNotInGraph";
    case ErrorCode::Parse: return "Parse";
    case ErrorCode::Io: return "Io";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::SolverFailure: return "SolverFailure";
    }
    return "Unknown";
}

std::string_view to_string(Atom atom) {
    switch (atom) {
    case Atom::N: return "N";
    case Atom::HN: return "HN";
    case Atom::CA: return "CA";
    case Atom::CB: return "CB";
    case Atom::CO: return "CO";
    }
    return "?";
}

std::string_view to_string(AtomRole role) {
    switch (role) {
    case AtomRole::N: return "N";
    case AtomRole::HN: return "HN";
    case AtomRole::CA: return "CA";
    case AtomRole::CB: return "CB";
    case AtomRole::CO: return "CO";
    case AtomRole::CA_prev: return "CA_prev";
    case AtomRole::CB_prev: return "CB_prev";
    case AtomRole::CO_prev: return "CO_prev";
    }
    return "?";
}

std::optional<Atom> parse_atom(std::string_view name) {
    for (Atom a : kAllAtoms)
        if (to_string(a) == name) return a;
    return std::nullopt;
}

std::optional<AtomRole> parse_role(std::string_view name) {
    for (AtomRole r : kAllRoles)
        if (to_string(r) == name) return r;
    return std::nullopt;
}

ProteinSequence::ProteinSequence(std::string residues) : residues_(std::move(residues)) {
    if (residues_.empty()) throw Error(ErrorCode::InvalidArgument, "empty protein sequence");
    for (char c : residues_)
        if (c < 'A' || c > 'Z')
            throw Error(ErrorCode::UnknownResidueType, std::string("invalid residue code '") + c + "'");
}

bool ProteinSequence::is_standard() const {
    return std::all_of(residues_.begin(), residues_.end(),
                       [](char c) { return kStandardResidues.find(c) != std::string_view::npos; });
}

void PriorTable::set_prior(char residue, Atom atom, GaussianPrior prior) {
    if (!(prior.sigma > 0.0) || !std::isfinite(prior.mu))
        throw Error(ErrorCode::NonPositiveSigma,
                    std::string("prior for ") + residue + "/" + std::string(to_string(atom)));
    residues_[residue][atom] = prior;
}

void PriorTable::set_absent(char residue, Atom atom) { residues_[residue][atom] = std::nullopt; }

void PriorTable::set_noise(const std::string& spectrum, const std::string& dim, double sigma) {
    if (!(sigma > 0.0)) throw Error(ErrorCode::NonPositiveSigma, "noise for " + spectrum + "/" + dim);
    noise_[spectrum][dim] = sigma;
}

std::optional<std::optional<GaussianPrior>> PriorTable::entry(char residue, Atom atom) const {
    auto r = residues_.find(residue);
    if (r == residues_.end()) return std::nullopt;
    auto a = r->second.find(atom);
    if (a == r->second.end()) return std::nullopt;
    return a->second;
}

bool PriorTable::atom_present(char residue, Atom atom) const {
    auto e = entry(residue, atom);
    return e && e->has_value();
}

GaussianPrior PriorTable::prior(char residue, Atom atom) const {
    auto e = entry(residue, atom);
    if (!e)
        throw Error(ErrorCode::PriorMissing,
                    std::string("no prior for ") + residue + "/" + std::string(to_string(atom)));
    if (!e->has_value())
        throw Error(ErrorCode::InvalidArgument,
                    std::string("atom absent for ") + residue + "/" + std::string(to_string(atom)));
    return **e;
}

std::optional<double> PriorTable::find_noise(std::string_view spectrum, std::string_view dim) const {
    auto s = noise_.find(std::string(spectrum));
    if (s == noise_.end()) return std::nullopt;
    auto d = s->second.find(std::string(dim));
    if (d == s->second.end()) return std::nullopt;
    return d->second;
}

double PriorTable::noise_for(std::string_view spectrum, Atom atom) const {
    if (auto v = find_noise(spectrum, to_string(atom))) return *v;
    if (auto v = find_noise(spectrum, std::string(1, dimension_of(atom)))) return *v;
    throw Error(ErrorCode::NoiseMissing,
                "no noise for spectrum " + std::string(spectrum) + " atom " + std::string(to_string(atom)));
}

void Tolerances::validate() const {
    const std::pair<const char*, double> fields[] = {{"delta1", delta1}, {"delta2", delta2},
                                                     {"delta3", delta3}, {"delta", delta},
                                                     {"lambda", lambda}, {"round_eps", round_eps}};
    for (const auto& [name, v] : fields)
        if (!(v > 0.0) || !std::isfinite(v))
            throw Error(ErrorCode::InvalidArgument, std::string(name) + " must be strictly positive");
}

bool ValidationReport::has(ErrorCode code) const {
    return std::any_of(issues.begin(), issues.end(), [&](const auto& i) { return i.code == code; });
}

std::string ValidationReport::summary() const {
    std::ostringstream os;
    for (const auto& i : issues)
        os << (i.severity == Severity::Fatal ? "error: " : "warning: ") << to_string(i.code) << ": "
           << i.message << "\n";
    return os.str();
}

namespace {

void add(ValidationReport& r, Severity s, ErrorCode c, std::string msg) {
    if (s == Severity::Fatal) r.ok = false;
    r.issues.push_back({s, c, std::move(msg)});
}

void check_sequence(ValidationReport& r, const PriorTable& priors, const ProteinSequence& seq,
                    std::span<const Atom> atoms) {
    std::set<char> seen;
    for (std::size_t i = 0; i < seq.size(); ++i) {
        const char c = seq[i];
        if (!seen.insert(c).second) continue;
        if (kStandardResidues.find(c) == std::string_view::npos) {
            add(r, Severity::Fatal, ErrorCode::UnknownResidueType,
                std::string("residue code '") + c + "' at position " + std::to_string(i + 1));
            continue;
        }
        if (!priors.has_residue(c)) {
            add(r, Severity::Fatal, ErrorCode::UnknownResidueType,
                std::string("residue type '") + c + "' absent from prior table");
            continue;
        }
        for (Atom a : atoms)
            if (!priors.entry(c, a))
                add(r, Severity::Fatal, ErrorCode::PriorMissing,
                    std::string("missing prior entry ") + c + "/" + std::string(to_string(a)));
    }
}

void check_noise(ValidationReport& r, const PriorTable& priors, std::string_view spectrum,
                 std::span<const Atom> atoms) {
    for (Atom a : atoms) {
        if (!priors.find_noise(spectrum, to_string(a)) &&
            !priors.find_noise(spectrum, std::string(1, dimension_of(a))))
            add(r, Severity::Fatal, ErrorCode::NoiseMissing,
                "no experimental noise for " + std::string(spectrum) + "/" + std::string(to_string(a)));
    }
}

}  // namespace

ValidationReport validate_dataset(std::span<const Peak> peaks, const PriorTable& priors,
                                  const ProteinSequence& seq) {
    ValidationReport r;
    if (peaks.empty()) add(r, Severity::Warning, ErrorCode::InvalidArgument, "0 peaks");

    std::set<std::string> ids;
    std::set<std::string> spectra;
    for (const auto& p : peaks) {
        if (!ids.insert(p.peak_id).second)
            add(r, Severity::Fatal, ErrorCode::DuplicateId, "duplicate peak_id " + p.peak_id);
        const Experiment* exp = find_experiment(p.spectrum_id);
        if (!exp) {
            add(r, Severity::Fatal, ErrorCode::UnknownSpectrum,
                "peak " + p.peak_id + " has unknown spectrum " + p.spectrum_id);
            continue;
        }
        spectra.insert(p.spectrum_id);
        const bool finite = std::isfinite(p.h) && std::isfinite(p.n) && (!p.c || std::isfinite(*p.c));
        if (!finite || exp->has_carbon != p.c.has_value() || p.phase < -1 || p.phase > 1)
            add(r, Severity::Fatal, ErrorCode::MalformedCoordinates, "peak " + p.peak_id);
    }

    std::set<Atom> used{Atom::N, Atom::HN};
    for (const auto& s : spectra)
        for (const auto& slot : find_experiment(s)->slots) used.insert(atom_of(slot.role));
    const std::vector<Atom> atoms(used.begin(), used.end());
    check_sequence(r, priors, seq, atoms);
    for (const auto& s : spectra) {
        std::vector<Atom> seen_atoms{Atom::N, Atom::HN};
        for (const auto& slot : find_experiment(s)->slots) seen_atoms.push_back(atom_of(slot.role));
        check_noise(r, priors, s, seen_atoms);
    }
    return r;
}

ValidationReport validate_dataset(std::span<const SpinSystem> spins, const PriorTable& priors,
                                  const ProteinSequence& seq) {
    ValidationReport r;
    if (spins.empty()) add(r, Severity::Warning, ErrorCode::InvalidArgument, "0 spin systems");

    std::set<std::string> ids;
    for (const auto& s : spins) {
        if (!ids.insert(s.system_id).second)
            add(r, Severity::Fatal, ErrorCode::DuplicateId, "duplicate system_id " + s.system_id);
        bool malformed = !s.get(AtomRole::N) && !s.get(AtomRole::HN);
        for (const auto& [role, v] : s.shifts) {
            if (!std::isfinite(v)) malformed = true;
            if (std::find(kSpinRoles.begin(), kSpinRoles.end(), role) == kSpinRoles.end()) malformed = true;
        }
        if (malformed) add(r, Severity::Fatal, ErrorCode::MalformedCoordinates, "spin system " + s.system_id);
    }
    static constexpr std::array<Atom, 4> atoms{Atom::N, Atom::HN, Atom::CA, Atom::CB};
    check_sequence(r, priors, seq, atoms);
    if (!spins.empty()) check_noise(r, priors, kSpinSpectrum, atoms);
    return r;
}

}  // namespace nmrpath
