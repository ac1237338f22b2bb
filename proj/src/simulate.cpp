// src/simulate.cpp

#include "nmrpath/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "nmrpath/experiments.hpp"

namespace nmrpath {

std::string_view to_string(Protocol p) { return p == Protocol::CISA ? "cisa" : "flya"; }

Protocol parse_protocol(std::string_view s) {
    if (s == "cisa" || s == "CISA") return Protocol::CISA;
    if (s == "flya" || s == "FLYA") return Protocol::FLYA;
    throw Error(ErrorCode::InvalidArgument, "unknown protocol '" + std::string(s) + "'");
}

NoiseLevel parse_noise(std::string_view s) {
    if (s == "low") return NoiseLevel::Low;
    if (s == "high") return NoiseLevel::High;
    throw Error(ErrorCode::InvalidArgument, "unknown noise level '" + std::string(s) + "'");
}

std::mt19937_64 substream(std::uint64_t seed, std::string_view name) {
    std::uint64_t h = 1469598103934665603ull;  // FNV-1a
    for (char c : name) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ull;
    }
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)};
    return std::mt19937_64(seq);
}

Json to_json(const ReferenceShifts& r) {
    Json shifts = Json::array();
    for (const auto& m : r.shifts) {
        Json row = Json::object();
        for (const auto& [atom, v] : m) row[std::string(to_string(atom))] = v;
        shifts.push_back(row);
    }
    return {{"sequence", r.sequence.str()}, {"shifts", shifts}};
}

ReferenceShifts reference_from_json(const Json& j) {
    ReferenceShifts r;
    try {
        r.sequence = ProteinSequence(j.at("sequence").get<std::string>());
        for (const auto& row : j.at("shifts")) {
            std::map<Atom, double> m;
            for (const auto& [name, v] : row.items()) {
                auto atom = parse_atom(name);
                if (!atom) throw Error(ErrorCode::Parse, "unknown atom '" + name + "' in reference");
                m[*atom] = v.get<double>();
            }
            r.shifts.push_back(std::move(m));
        }
    } catch (const Json::exception& e) {
        throw Error(ErrorCode::Parse, std::string("reference: ") + e.what());
    }
    if (r.shifts.size() != r.sequence.size())
        throw Error(ErrorCode::MissingReference, "reference covers " + std::to_string(r.shifts.size()) +
                                                     " of " + std::to_string(r.sequence.size()) + " residues");
    return r;
}

ReferenceShifts sample_reference(const ProteinSequence& seq, const PriorTable& priors, std::uint64_t seed) {
    auto rng = substream(seed, "reference");
    ReferenceShifts r;
    r.sequence = seq;
    for (std::size_t k = 0; k < seq.size(); ++k) {
        std::map<Atom, double> m;
        for (Atom a : kAllAtoms) {
            if (!priors.atom_present(seq[k], a)) continue;
            const auto p = priors.prior(seq[k], a);
            std::normal_distribution<double> d(p.mu, p.sigma);
            m[a] = std::round(d(rng) * 1000.0) / 1000.0;
        }
        r.shifts.push_back(std::move(m));
    }
    return r;
}

SimulationSpec SimulationSpec::cisa(NoiseLevel level, std::uint64_t seed) {
    SimulationSpec s;
    s.protocol = Protocol::CISA;
    s.seed = seed;
    s.sigma_alpha = level == NoiseLevel::Low ? 0.08 : 0.16;
    s.sigma_beta = level == NoiseLevel::Low ? 0.16 : 0.32;
    return s;
}

SimulationSpec SimulationSpec::flya(std::uint64_t seed) {
    SimulationSpec s;
    s.protocol = Protocol::FLYA;
    s.seed = seed;
    s.experiments = seven_experiment_set();
    return s;
}

void SimulationSpec::validate() const {
    const double sigmas[] = {sigma_alpha, sigma_beta, sigma_h, sigma_n, sigma_c};
    for (double s : sigmas)
        if (!(s >= 0.0) || !std::isfinite(s)) throw Error(ErrorCode::InvalidArgument, "noise sigma must be >= 0");
    if (protocol == Protocol::FLYA) {
        if (!(bound_h > 0.0) || !(bound_n > 0.0) || !(bound_c > 0.0))
            throw Error(ErrorCode::InvalidArgument, "truncation bounds must be > 0");
        if (experiments.empty()) throw Error(ErrorCode::InvalidArgument, "empty experiment set");
        for (const auto& e : experiments)
            if (!find_experiment(e)) throw Error(ErrorCode::UnknownSpectrum, e);
    }
    if (!(deletion_rate >= 0.0 && deletion_rate < 1.0))
        throw Error(ErrorCode::InvalidArgument, "deletion rate must be in [0, 1)");
}

Json to_json(const SimulationSpec& s) {
    return {{"protocol", std::string(to_string(s.protocol))},
            {"seed", s.seed},
            {"sigma_alpha", s.sigma_alpha},
            {"sigma_beta", s.sigma_beta},
            {"sigma_h", s.sigma_h},
            {"sigma_n", s.sigma_n},
            {"sigma_c", s.sigma_c},
            {"bound_h", s.bound_h},
            {"bound_n", s.bound_n},
            {"bound_c", s.bound_c},
            {"deletion_rate", s.deletion_rate},
            {"experiments", s.experiments},
            {"decoys", s.decoys}};
}

SimulationSpec spec_from_json(const Json& j) {
    SimulationSpec s;
    try {
        const Protocol p = parse_protocol(j.value("protocol", std::string("cisa")));
        if (p == Protocol::CISA) {
            s = SimulationSpec::cisa(parse_noise(j.value("noise", std::string("low"))), j.value("seed", 0ull));
        } else {
            s = SimulationSpec::flya(j.value("seed", 0ull));
        }
        s.sigma_alpha = j.value("sigma_alpha", s.sigma_alpha);
        s.sigma_beta = j.value("sigma_beta", s.sigma_beta);
        s.sigma_h = j.value("sigma_h", s.sigma_h);
        s.sigma_n = j.value("sigma_n", s.sigma_n);
        s.sigma_c = j.value("sigma_c", s.sigma_c);
        s.bound_h = j.value("bound_h", s.bound_h);
        s.bound_n = j.value("bound_n", s.bound_n);
        s.bound_c = j.value("bound_c", s.bound_c);
        s.deletion_rate = j.value("deletion_rate", s.deletion_rate);
        s.decoys = j.value("decoys", s.decoys);
        if (j.contains("experiments")) s.experiments = j.at("experiments").get<std::vector<std::string>>();
    } catch (const Json::exception& e) {
        throw Error(ErrorCode::Parse, std::string("simulation spec: ") + e.what());
    }
    s.validate();
    return s;
}

bool operator==(const PeakOrigin& a, const PeakOrigin& b) { return a.residue == b.residue && a.role == b.role; }

bool GroundTruth::assignable(std::size_t k) const {
    if (spins) return k < residue_ids.size() && residue_ids[k].has_value();
    return k < residue_peaks.size() && !residue_peaks[k].empty();
}

Json to_json(const GroundTruth& g) {
    Json residues = Json::array();
    for (std::size_t k = 0; k < g.sequence.size(); ++k) {
        Json r = {{"index", k + 1}, {"type", std::string(1, g.sequence[k])}};
        r["id"] = k < g.residue_ids.size() && g.residue_ids[k] ? Json(*g.residue_ids[k]) : Json(nullptr);
        if (!g.spins) r["peaks"] = k < g.residue_peaks.size() ? g.residue_peaks[k] : std::vector<std::string>{};
        residues.push_back(r);
    }
    Json origin = Json::object();
    for (const auto& [peak, o] : g.peak_origin)
        origin[peak] = {{"residue", o.residue + 1},
                        {"role", o.role ? Json(std::string(to_string(*o.role))) : Json(nullptr)}};
    Json j = {{"sequence", g.sequence}, {"kind", g.spins ? "spins" : "peaks"}, {"residues", residues}};
    if (!g.spins) j["peak_origin"] = origin;
    return j;
}

GroundTruth ground_truth_from_json(const Json& j) {
    GroundTruth g;
    try {
        g.sequence = j.at("sequence").get<std::string>();
        g.spins = j.at("kind").get<std::string>() == "spins";
        for (const auto& r : j.at("residues")) {
            g.residue_ids.push_back(r.at("id").is_null() ? std::nullopt
                                                         : std::optional<std::string>(r.at("id").get<std::string>()));
            if (!g.spins) g.residue_peaks.push_back(r.at("peaks").get<std::vector<std::string>>());
        }
        if (j.contains("peak_origin"))
            for (const auto& [peak, o] : j.at("peak_origin").items()) {
                PeakOrigin po;
                po.residue = o.at("residue").get<std::size_t>() - 1;
                if (!o.at("role").is_null()) po.role = parse_role(o.at("role").get<std::string>());
                g.peak_origin[peak] = po;
            }
    } catch (const Json::exception& e) {
        throw Error(ErrorCode::Parse, std::string("ground truth: ") + e.what());
    }
    if (g.residue_ids.size() != g.sequence.size())
        throw Error(ErrorCode::LengthMismatch, "ground truth residue count differs from its sequence");
    return g;
}

namespace {

double gaussian(std::mt19937_64& rng, double sigma) {
    if (sigma == 0.0) return 0.0;
    std::normal_distribution<double> d(0.0, sigma);
    return d(rng);
}

// Redraws until the deviation lies within the bound.
double truncated(std::mt19937_64& rng, double sigma, double bound) {
    if (sigma == 0.0) return 0.0;
    std::normal_distribution<double> d(0.0, sigma);
    for (;;) {
        const double v = d(rng);
        if (std::abs(v) <= bound) return v;
    }
}

void check_reference(const ReferenceShifts& ref) {
    if (ref.shifts.size() != ref.sequence.size())
        throw Error(ErrorCode::MissingReference, "reference does not cover the sequence");
}

std::optional<double> shift(const ReferenceShifts& ref, std::size_t k, Atom a) {
    auto it = ref.shifts[k].find(a);
    if (it == ref.shifts[k].end()) return std::nullopt;
    return it->second;
}

bool has_amide(const ReferenceShifts& ref, std::size_t k) {
    return shift(ref, k, Atom::N) && shift(ref, k, Atom::HN);
}

std::string numbered(char prefix, std::size_t i, std::size_t total) {
    const std::string num = std::to_string(i + 1);
    const std::size_t width = std::max<std::size_t>(3, std::to_string(total).size());
    return std::string(1, prefix) + std::string(width - std::min(width, num.size()), '0') + num;
}

}  // namespace

SpinDataset simulate_cisa(const SimulationSpec& spec, const ReferenceShifts& ref) {
    spec.validate();
    check_reference(ref);
    const std::size_t n = ref.sequence.size();
    auto noise = substream(spec.seed, "cisa.noise");
    auto perm_rng = substream(spec.seed, "cisa.ids");

    std::vector<std::size_t> residues;
    for (std::size_t k = 0; k < n; ++k)
        if (has_amide(ref, k)) residues.push_back(k);
    // Spin ids carry no positional information.
    std::vector<std::size_t> order(residues.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), perm_rng);

    SpinDataset out;
    out.truth.sequence = ref.sequence.str();
    out.truth.spins = true;
    out.truth.residue_ids.assign(n, std::nullopt);
    for (std::size_t i = 0; i < residues.size(); ++i) {
        const std::size_t k = residues[i];
        SpinSystem s;
        s.system_id = numbered('S', order[i], residues.size());
        s.shifts[AtomRole::N] = *shift(ref, k, Atom::N);
        s.shifts[AtomRole::HN] = *shift(ref, k, Atom::HN);
        if (auto v = shift(ref, k, Atom::CA)) s.shifts[AtomRole::CA] = *v + gaussian(noise, spec.sigma_alpha);
        if (auto v = shift(ref, k, Atom::CB)) s.shifts[AtomRole::CB] = *v + gaussian(noise, spec.sigma_beta);
        if (k > 0) {
            if (auto v = shift(ref, k - 1, Atom::CA))
                s.shifts[AtomRole::CA_prev] = *v + gaussian(noise, spec.sigma_alpha);
            if (auto v = shift(ref, k - 1, Atom::CB))
                s.shifts[AtomRole::CB_prev] = *v + gaussian(noise, spec.sigma_beta);
        }
        out.truth.residue_ids[k] = s.system_id;
        out.spins.push_back(std::move(s));
    }
    std::sort(out.spins.begin(), out.spins.end(),
              [](const SpinSystem& a, const SpinSystem& b) { return a.system_id < b.system_id; });
    return out;
}

PeakDataset simulate_flya(const SimulationSpec& spec, const ReferenceShifts& ref) {
    spec.validate();
    check_reference(ref);
    const std::size_t n = ref.sequence.size();
    auto noise = substream(spec.seed, "flya.noise");
    auto drop = substream(spec.seed, "flya.deletion");
    auto ids = substream(spec.seed, "flya.ids");
    auto decoy_rng = substream(spec.seed, "flya.decoys");
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    struct Raw {
        Peak peak;
        std::optional<std::size_t> residue;
        std::optional<AtomRole> role;
    };
    std::vector<Raw> raw;
    for (std::size_t k = 0; k < n; ++k) {
        if (!has_amide(ref, k)) continue;
        const double h0 = *shift(ref, k, Atom::HN), n0 = *shift(ref, k, Atom::N);
        for (const auto& name : spec.experiments) {
            const Experiment& e = *find_experiment(name);
            auto emit = [&](std::optional<AtomRole> role, std::optional<double> c, int phase) {
                Raw r;
                r.peak.spectrum_id = name;
                r.peak.h = h0 + truncated(noise, spec.sigma_h, spec.bound_h);
                r.peak.n = n0 + truncated(noise, spec.sigma_n, spec.bound_n);
                if (c) r.peak.c = *c + truncated(noise, spec.sigma_c, spec.bound_c);
                r.peak.phase = phase;
                r.residue = k;
                r.role = role;
                const bool deleted = spec.deletion_rate > 0.0 && unit(drop) < spec.deletion_rate;
                if (!deleted) raw.push_back(std::move(r));
            };
            if (!e.has_carbon) {
                emit(std::nullopt, std::nullopt, 0);
                continue;
            }
            for (const auto& slot : e.slots) {
                const Atom a = atom_of(slot.role);
                std::optional<double> c;
                if (is_prev(slot.role)) {
                    if (k > 0) c = shift(ref, k - 1, a);
                } else {
                    c = shift(ref, k, a);
                }
                if (c) emit(slot.role, c, slot.phase);
            }
        }
    }
    for (std::size_t d = 0; d < spec.decoys; ++d) {
        const auto& name = spec.experiments[d % spec.experiments.size()];
        const Experiment& e = *find_experiment(name);
        Raw r;
        r.peak.spectrum_id = name;
        r.peak.h = 6.5 + 3.5 * unit(decoy_rng);
        r.peak.n = 100.0 + 35.0 * unit(decoy_rng);
        if (e.has_carbon) r.peak.c = 15.0 + 170.0 * unit(decoy_rng);
        raw.push_back(std::move(r));
    }

    std::vector<std::size_t> order(raw.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), ids);

    PeakDataset out;
    out.truth.sequence = ref.sequence.str();
    out.truth.spins = false;
    out.truth.residue_ids.assign(n, std::nullopt);
    out.truth.residue_peaks.assign(n, {});
    for (std::size_t i = 0; i < raw.size(); ++i) {
        Raw& r = raw[i];
        r.peak.peak_id = numbered('P', order[i], raw.size());
        if (r.residue) {
            out.truth.residue_peaks[*r.residue].push_back(r.peak.peak_id);
            out.truth.peak_origin[r.peak.peak_id] = {*r.residue, r.role};
        }
        out.peaks.push_back(std::move(r.peak));
    }
    for (auto& v : out.truth.residue_peaks) std::sort(v.begin(), v.end());
    std::sort(out.peaks.begin(), out.peaks.end(), [](const Peak& a, const Peak& b) { return a.peak_id < b.peak_id; });
    return out;
}

PriorTable simulation_priors(const PriorTable& base, const SimulationSpec& spec) {
    PriorTable p;
    for (const auto& [residue, atoms] : base.residues())
        for (const auto& [atom, entry] : atoms) {
            if (entry)
                p.set_prior(residue, atom, *entry);
            else
                p.set_absent(residue, atom);
        }
    // Amide values are exact in the CISA protocol; a nominal spread keeps the
    // noise strictly positive.
    auto positive = [](double s, double floor) { return s > 0.0 ? s : floor; };
    if (spec.protocol == Protocol::CISA) {
        p.set_noise(std::string(kSpinSpectrum), "H", 0.01);
        p.set_noise(std::string(kSpinSpectrum), "N", 0.1);
        p.set_noise(std::string(kSpinSpectrum), "CA", positive(spec.sigma_alpha, 0.01));
        p.set_noise(std::string(kSpinSpectrum), "CB", positive(spec.sigma_beta, 0.01));
        p.set_noise(std::string(kSpinSpectrum), "C", positive(spec.sigma_alpha, 0.01));
    } else {
        for (const auto& e : experiment_catalog()) {
            p.set_noise(e.name, "H", positive(spec.sigma_h, 0.001));
            p.set_noise(e.name, "N", positive(spec.sigma_n, 0.01));
            if (e.has_carbon) p.set_noise(e.name, "C", positive(spec.sigma_c, 0.01));
        }
    }
    return p;
}

Tolerances simulation_tolerances(const SimulationSpec& spec) {
    Tolerances t;
    if (spec.protocol == Protocol::CISA) {
        // Sequential CB matching compares two noisy copies: spread sqrt(2)*sigma_beta.
        t.delta3 = std::max(0.3, 4.0 * std::sqrt(2.0) * std::max(spec.sigma_alpha, spec.sigma_beta));
    } else {
        t.delta1 = 2.0 * spec.bound_h;
        t.delta2 = 2.0 * spec.bound_n;
        t.delta3 = 2.0 * spec.bound_c;
    }
    return t;
}

}  // namespace nmrpath
