// src/grouping.cpp

#include "nmrpath/grouping.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "nmrpath/experiments.hpp"
#include "nmrpath/parallel.hpp"

namespace nmrpath {

const std::vector<Observation>& PeakGrouping::observations(AtomRole role) const {
    static const std::vector<Observation> empty;
    auto it = consensus.find(role);
    return it == consensus.end() ? empty : it->second;
}

bool CompatibilityGraph::has_edge(int u, int v) const {
    const auto& a = adjacency[static_cast<std::size_t>(u)];
    return std::binary_search(a.begin(), a.end(), v);
}

std::size_t CompatibilityGraph::edge_count() const {
    std::size_t total = 0;
    for (const auto& a : adjacency) total += a.size();
    return total / 2;
}

ExpectedPattern pattern_for(std::span<const std::string> spectra) {
    ExpectedPattern p;
    for (const auto& s : spectra) {
        const Experiment* e = find_experiment(s);
        if (!e) throw Error(ErrorCode::UnknownSpectrum, s);
        p[s] = e->pattern_count();
    }
    return p;
}

namespace {

// Candidate roles of a peak; 2-D peaks get the single amide "role" HN.
std::vector<AtomRole> roles_of(const Peak& p) {
    const Experiment* e = find_experiment(p.spectrum_id);
    if (!e) throw Error(ErrorCode::UnknownSpectrum, p.spectrum_id);
    if (!e->has_carbon) return {AtomRole::HN};
    return candidate_roles(*e, p.phase);
}

bool amide_match(const Peak& a, const Peak& b, const Tolerances& tol) {
    return std::abs(a.h - b.h) <= tol.delta1 && std::abs(a.n - b.n) <= tol.delta2;
}

bool pair_compatible(const Peak& a, const std::vector<AtomRole>& ra, const Peak& b,
                     const std::vector<AtomRole>& rb, const Tolerances& tol) {
    if (!amide_match(a, b, tol)) return false;
    if (ra.size() == 1 && rb.size() == 1 && ra[0] == rb[0]) {
        if (a.spectrum_id == b.spectrum_id) return false;
        if (a.c && b.c && std::abs(*a.c - *b.c) > tol.delta3) return false;
    }
    return true;
}

}  // namespace

CompatibilityGraph build_compatibility_graph(std::span<const Peak> peaks, const Tolerances& tol) {
    CompatibilityGraph g;
    const std::size_t m = peaks.size();
    g.vertices.reserve(m);
    g.adjacency.assign(m, {});
    std::vector<std::vector<AtomRole>> roles(m);
    for (std::size_t i = 0; i < m; ++i) {
        g.vertices.push_back(peaks[i].peak_id);
        roles[i] = roles_of(peaks[i]);
    }
    // Sort by H so the window scan is near-linear on realistic data.
    std::vector<int> order(m);
    for (std::size_t i = 0; i < m; ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return peaks[a].h < peaks[b].h || (peaks[a].h == peaks[b].h && a < b);
    });
    for (std::size_t x = 0; x < m; ++x) {
        const int u = order[x];
        for (std::size_t y = x + 1; y < m; ++y) {
            const int v = order[y];
            if (peaks[v].h - peaks[u].h > tol.delta1) break;
            if (pair_compatible(peaks[u], roles[u], peaks[v], roles[v], tol)) {
                g.adjacency[u].push_back(v);
                g.adjacency[v].push_back(u);
            }
        }
    }
    for (auto& a : g.adjacency) std::sort(a.begin(), a.end());
    return g;
}

std::vector<std::vector<int>> maximal_cliques(const std::vector<std::vector<int>>& adjacency,
                                              std::span<const int> vertices) {
    // Local bitset representation over the given vertex list.
    const std::size_t n = vertices.size();
    const std::size_t words = (n + 63) / 64;
    using Bits = std::vector<std::uint64_t>;
    std::unordered_map<int, std::size_t> local;
    for (std::size_t i = 0; i < n; ++i) local[vertices[i]] = i;
    std::vector<Bits> nbr(n, Bits(words, 0));
    for (std::size_t i = 0; i < n; ++i)
        for (int v : adjacency[static_cast<std::size_t>(vertices[i])]) {
            auto it = local.find(v);
            if (it != local.end() && it->second != i) nbr[i][it->second / 64] |= 1ull << (it->second % 64);
        }

    auto count = [&](const Bits& b) {
        std::size_t c = 0;
        for (auto w : b) c += static_cast<std::size_t>(__builtin_popcountll(w));
        return c;
    };
    auto empty = [&](const Bits& b) { return std::all_of(b.begin(), b.end(), [](auto w) { return w == 0; }); };

    std::vector<std::vector<int>> out;
    std::vector<int> r;
    auto bk = [&](auto&& self, Bits p, Bits x) -> void {
        if (empty(p) && empty(x)) {
            std::vector<int> c;
            for (std::size_t i : r) c.push_back(vertices[i]);
            std::sort(c.begin(), c.end());
            out.push_back(std::move(c));
            return;
        }
        // Pivot: vertex of P u X with most neighbours in P.
        std::size_t pivot = 0, best = 0;
        bool have = false;
        for (std::size_t w = 0; w < words; ++w) {
            std::uint64_t bits = p[w] | x[w];
            while (bits) {
                const std::size_t i = w * 64 + static_cast<std::size_t>(__builtin_ctzll(bits));
                bits &= bits - 1;
                Bits inter(words);
                for (std::size_t k = 0; k < words; ++k) inter[k] = p[k] & nbr[i][k];
                const std::size_t c = count(inter);
                if (!have || c > best) {
                    pivot = i;
                    best = c;
                    have = true;
                }
            }
        }
        for (std::size_t w = 0; w < words; ++w) {
            std::uint64_t cand = p[w] & ~nbr[pivot][w];
            while (cand) {
                const std::size_t i = w * 64 + static_cast<std::size_t>(__builtin_ctzll(cand));
                cand &= cand - 1;
                Bits np(words), nx(words);
                for (std::size_t k = 0; k < words; ++k) {
                    np[k] = p[k] & nbr[i][k];
                    nx[k] = x[k] & nbr[i][k];
                }
                r.push_back(static_cast<int>(i));
                self(self, std::move(np), std::move(nx));
                r.pop_back();
                p[i / 64] &= ~(1ull << (i % 64));
                x[i / 64] |= 1ull << (i % 64);
            }
        }
    };
    if (n == 0) return out;
    Bits all(words, 0);
    for (std::size_t i = 0; i < n; ++i) all[i / 64] |= 1ull << (i % 64);
    bk(bk, all, Bits(words, 0));
    std::sort(out.begin(), out.end());
    return out;
}

namespace {

struct Labelled {
    std::uint64_t mask = 0;             // over clique positions
    std::vector<std::pair<int, AtomRole>> labels;  // (peak index, role)
};

struct PeakInfo {
    const Peak* peak;
    const Experiment* exp;
    std::vector<AtomRole> roles;
};

// Placement state of a partial labelling inside one clique.
class SlotState {
public:
    SlotState(const std::vector<const PeakInfo*>& peaks, const ExpectedPattern& pattern, double delta3)
        : peaks_(peaks), delta3_(delta3) {
        std::map<std::string, int> spec_index;
        for (const PeakInfo* pi : peaks_) {
            auto [it, fresh] = spec_index.emplace(pi->peak->spectrum_id, static_cast<int>(limit_.size()));
            if (fresh) {
                auto pit = pattern.find(pi->peak->spectrum_id);
                limit_.push_back(pit == pattern.end() ? pi->exp->pattern_count() : pit->second);
            }
            spec_.push_back(it->second);
        }
        used_.assign(limit_.size(), 0);
        slot_.assign(limit_.size() * kRoles, 0);
    }

    bool can_place(std::size_t i, AtomRole role) const {
        const int s = spec_[i];
        if (used_[static_cast<std::size_t>(s)] >= limit_[static_cast<std::size_t>(s)]) return false;
        if (slot_[slot_index(s, role)]) return false;
        const PeakInfo& pi = *peaks_[i];
        if (!pi.exp->has_carbon) return true;
        const double v = *pi.peak->c;
        const auto& vals = carbons_[static_cast<std::size_t>(role)];
        return std::none_of(vals.begin(), vals.end(), [&](double w) { return std::abs(w - v) > delta3_; });
    }
    bool can_place_any(std::size_t i) const {
        const auto& roles = peaks_[i]->roles;
        return std::any_of(roles.begin(), roles.end(), [&](AtomRole r) { return can_place(i, r); });
    }
    void place(std::size_t i, AtomRole role) {
        const int s = spec_[i];
        ++used_[static_cast<std::size_t>(s)];
        slot_[slot_index(s, role)] = 1;
        if (peaks_[i]->exp->has_carbon) carbons_[static_cast<std::size_t>(role)].push_back(*peaks_[i]->peak->c);
    }
    void remove(std::size_t i, AtomRole role) {
        const int s = spec_[i];
        --used_[static_cast<std::size_t>(s)];
        slot_[slot_index(s, role)] = 0;
        if (peaks_[i]->exp->has_carbon) carbons_[static_cast<std::size_t>(role)].pop_back();
    }
    int spectrum(std::size_t i) const { return spec_[i]; }

private:
    static constexpr std::size_t kRoles = 8;
    std::size_t slot_index(int s, AtomRole role) const {
        return static_cast<std::size_t>(s) * kRoles + static_cast<std::size_t>(role);
    }

    const std::vector<const PeakInfo*>& peaks_;
    double delta3_;
    std::vector<int> spec_, limit_, used_;
    std::vector<char> slot_;
    std::array<std::vector<double>, kRoles> carbons_;
};

// True if every peak in `mask` can be labelled at once.
bool mask_valid(std::uint64_t mask, const std::vector<const PeakInfo*>& peaks, const ExpectedPattern& pattern,
                double delta3) {
    SlotState st(peaks, pattern, delta3);
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < peaks.size(); ++i)
        if (mask >> i & 1) members.push_back(i);
    auto dfs = [&](auto&& self, std::size_t pos) -> bool {
        if (pos == members.size()) return true;
        const std::size_t i = members[pos];
        for (AtomRole r : peaks[i]->roles) {
            if (!st.can_place(i, r)) continue;
            st.place(i, r);
            const bool ok = self(self, pos + 1);
            st.remove(i, r);
            if (ok) return true;
        }
        return false;
    };
    return dfs(dfs, 0);
}

// Labellings of the inclusion-maximal valid peak sets of a clique. Valid sets
// are closed under removal, so a set is maximal iff no single peak can join
// it. The search only follows branches in which every skipped peak can still
// be blocked by a later placement; the leaves are then checked against all
// relabellings.
std::vector<Labelled> expand_clique(const std::vector<int>& clique, const std::vector<PeakInfo>& info,
                                    const ExpectedPattern& pattern, const Tolerances& tol) {
    const std::size_t c = clique.size();
    std::vector<const PeakInfo*> peaks;
    for (int v : clique) peaks.push_back(&info[static_cast<std::size_t>(v)]);
    SlotState st(peaks, pattern, tol.delta3);

    // could_block[q][p]: placing p (p after q) may close some option of q.
    auto blocks = [&](std::size_t p, std::size_t q, AtomRole r) {
        if (st.spectrum(p) == st.spectrum(q)) return true;
        const auto& rp = peaks[p]->roles;
        if (std::find(rp.begin(), rp.end(), r) == rp.end()) return false;
        return peaks[p]->peak->c && peaks[q]->peak->c && std::abs(*peaks[p]->peak->c - *peaks[q]->peak->c) > tol.delta3;
    };

    std::vector<Labelled> out;
    std::unordered_map<std::uint64_t, bool> maximal_cache;
    std::vector<std::size_t> skipped;
    Labelled cur;

    auto skipped_blockable = [&](std::size_t next) {
        for (std::size_t q : skipped)
            for (AtomRole r : peaks[q]->roles) {
                if (!st.can_place(q, r)) continue;
                bool possible = false;
                for (std::size_t p = next; p < c && !possible; ++p) possible = blocks(p, q, r);
                if (!possible) return false;
            }
        return true;
    };

    auto dfs = [&](auto&& self, std::size_t pos) -> void {
        if (!skipped_blockable(pos)) return;
        if (pos == c) {
            if (cur.mask == 0) return;
            auto [it, fresh] = maximal_cache.emplace(cur.mask, true);
            if (fresh)
                for (std::size_t q = 0; q < c && it->second; ++q)
                    if (!(cur.mask >> q & 1) && mask_valid(cur.mask | (1ull << q), peaks, pattern, tol.delta3))
                        it->second = false;
            if (it->second) out.push_back(cur);
            return;
        }
        for (AtomRole role : peaks[pos]->roles) {
            if (!st.can_place(pos, role)) continue;
            st.place(pos, role);
            cur.mask |= 1ull << pos;
            cur.labels.emplace_back(clique[pos], role);
            self(self, pos + 1);
            cur.labels.pop_back();
            cur.mask &= ~(1ull << pos);
            st.remove(pos, role);
        }
        skipped.push_back(pos);
        self(self, pos + 1);
        skipped.pop_back();
    };
    dfs(dfs, 0);
    return out;
}

std::vector<std::vector<int>> components(const CompatibilityGraph& g) {
    const std::size_t m = g.vertices.size();
    std::vector<int> comp(m, -1);
    std::vector<std::vector<int>> out;
    for (std::size_t s = 0; s < m; ++s) {
        if (comp[s] >= 0) continue;
        std::vector<int> members{static_cast<int>(s)};
        comp[s] = static_cast<int>(out.size());
        for (std::size_t i = 0; i < members.size(); ++i)
            for (int v : g.adjacency[static_cast<std::size_t>(members[i])])
                if (comp[static_cast<std::size_t>(v)] < 0) {
                    comp[static_cast<std::size_t>(v)] = comp[s];
                    members.push_back(v);
                }
        std::sort(members.begin(), members.end());
        out.push_back(std::move(members));
    }
    return out;
}

Observation make_obs(const Peak& p, AtomRole role, double value, const PriorTable& priors) {
    Observation o;
    o.role = role;
    o.value = value;
    o.source = p.peak_id;
    o.spectrum = p.spectrum_id;
    o.sigma = priors.noise_for(p.spectrum_id, atom_of(role));
    return o;
}

PeakGrouping materialize(const std::vector<std::pair<int, AtomRole>>& labels, const std::vector<PeakInfo>& info,
                         const PriorTable& priors) {
    PeakGrouping g;
    double hsum = 0.0, nsum = 0.0;
    for (const auto& [idx, role] : labels) {
        const Peak& p = *info[static_cast<std::size_t>(idx)].peak;
        g.member_peaks.push_back(p.peak_id);
        g.labels[p.peak_id] = role;
        g.consensus[AtomRole::HN].push_back(make_obs(p, AtomRole::HN, p.h, priors));
        g.consensus[AtomRole::N].push_back(make_obs(p, AtomRole::N, p.n, priors));
        if (p.c) g.consensus[role].push_back(make_obs(p, role, *p.c, priors));
        hsum += p.h;
        nsum += p.n;
    }
    std::sort(g.member_peaks.begin(), g.member_peaks.end());
    for (auto& [role, obs] : g.consensus)
        std::sort(obs.begin(), obs.end(), [](const auto& a, const auto& b) { return a.source < b.source; });
    const double k = static_cast<double>(labels.size());
    g.fingerprint = {hsum / k, nsum / k};
    return g;
}

bool by_dispersion(const std::pair<double, PeakGrouping>& a, const std::pair<double, PeakGrouping>& b) {
    if (a.first != b.first) return a.first < b.first;
    if (a.second.member_peaks != b.second.member_peaks) return a.second.member_peaks < b.second.member_peaks;
    return a.second.labels < b.second.labels;
}

bool strict_subset(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    return a.size() < b.size() && std::includes(b.begin(), b.end(), a.begin(), a.end());
}

}  // namespace

std::vector<PeakGrouping> enumerate_groupings(const CompatibilityGraph& graph, std::span<const Peak> peaks,
                                              const ExpectedPattern& pattern, const Tolerances& tol,
                                              const PriorTable& priors, const GroupingOptions& opts) {
    if (graph.vertices.size() != peaks.size())
        throw Error(ErrorCode::InvalidArgument, "compatibility graph does not match peak list");
    std::vector<PeakInfo> info;
    info.reserve(peaks.size());
    for (const auto& p : peaks) info.push_back({&p, find_experiment(p.spectrum_id), roles_of(p)});

    const auto comps = components(graph);
    for (const auto& comp : comps)
        if (comp.size() > opts.component_budget || comp.size() > 64)
            throw Error(ErrorCode::ComponentTooLarge,
                        "component of " + std::to_string(comp.size()) + " peaks around " +
                            peaks[static_cast<std::size_t>(comp.front())].peak_id);

    std::vector<std::vector<PeakGrouping>> per_comp(comps.size());
    parallel_for(comps.size(), opts.threads, [&](std::size_t ci) {
        auto cliques = maximal_cliques(graph.adjacency, comps[ci]);
        auto ids = [&](const std::vector<int>& c) {
            std::vector<std::string> s;
            for (int v : c) s.push_back(graph.vertices[static_cast<std::size_t>(v)]);
            std::sort(s.begin(), s.end());
            return s;
        };
        std::vector<std::pair<std::vector<std::string>, std::vector<int>>> keyed;
        for (auto& c : cliques) keyed.emplace_back(ids(c), std::move(c));
        std::sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) {
            if (a.first.size() != b.first.size()) return a.first.size() > b.first.size();
            return a.first < b.first;
        });
        if (keyed.size() > opts.top_k) keyed.resize(opts.top_k);

        std::set<std::pair<std::vector<std::string>, std::map<std::string, AtomRole>>> seen;
        std::vector<PeakGrouping> found;
        for (const auto& [key, clique] : keyed) {
            std::vector<std::pair<double, PeakGrouping>> ranked;
            for (const auto& l : expand_clique(clique, info, pattern, tol)) {
                PeakGrouping g = materialize(l.labels, info, priors);
                const double d = amide_dispersion(g);
                ranked.emplace_back(d, std::move(g));
            }
            std::sort(ranked.begin(), ranked.end(), by_dispersion);
            if (ranked.size() > opts.per_clique) ranked.resize(opts.per_clique);
            for (auto& [d, g] : ranked)
                if (seen.insert({g.member_peaks, g.labels}).second) found.push_back(std::move(g));
        }
        // Drop groupings whose peak set is strictly inside another one found
        // in a different clique.
        std::vector<bool> dominated(found.size(), false);
        for (std::size_t i = 0; i < found.size(); ++i)
            for (std::size_t j = 0; j < found.size() && !dominated[i]; ++j)
                dominated[i] = j != i && strict_subset(found[i].member_peaks, found[j].member_peaks);
        std::vector<PeakGrouping> kept;
        for (std::size_t i = 0; i < found.size(); ++i)
            if (!dominated[i]) kept.push_back(std::move(found[i]));
        per_comp[ci] = std::move(kept);
    });

    std::vector<PeakGrouping> out;
    for (auto& v : per_comp)
        for (auto& g : v) out.push_back(std::move(g));
    std::sort(out.begin(), out.end(), [](const PeakGrouping& a, const PeakGrouping& b) {
        if (a.member_peaks != b.member_peaks) return a.member_peaks < b.member_peaks;
        return a.labels < b.labels;
    });
    const int width = static_cast<int>(std::to_string(out.size()).size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        std::string num = std::to_string(i + 1);
        out[i].grouping_id = "g" + std::string(static_cast<std::size_t>(width) - num.size(), '0') + num;
    }
    return out;
}

double amide_dispersion(const PeakGrouping& g) {
    double chi2 = 0.0;
    for (AtomRole role : {AtomRole::HN, AtomRole::N}) {
        const auto& obs = g.observations(role);
        double num = 0.0, den = 0.0;
        for (const auto& o : obs) {
            num += o.value / (o.sigma * o.sigma);
            den += 1.0 / (o.sigma * o.sigma);
        }
        if (den == 0.0) continue;
        const double mean = num / den;
        for (const auto& o : obs) chi2 += (o.value - mean) * (o.value - mean) / (o.sigma * o.sigma);
    }
    return chi2;
}

std::vector<PeakGrouping> spins_to_groupings(std::span<const SpinSystem> spins, const PriorTable& priors) {
    std::vector<PeakGrouping> out;
    out.reserve(spins.size());
    for (const auto& s : spins) {
        PeakGrouping g;
        g.grouping_id = s.system_id;
        g.member_peaks = {s.system_id};
        for (const auto& [role, value] : s.shifts) {
            Observation o;
            o.role = role;
            o.value = value;
            o.source = s.system_id;
            o.spectrum = std::string(kSpinSpectrum);
            o.sigma = priors.noise_for(kSpinSpectrum, atom_of(role));
            g.consensus[role].push_back(std::move(o));
        }
        g.fingerprint = {s.get(AtomRole::HN).value_or(0.0), s.get(AtomRole::N).value_or(0.0)};
        out.push_back(std::move(g));
    }
    return out;
}

bool grouping_is_consistent(const PeakGrouping& g, std::span<const Peak> peaks, const ExpectedPattern& pattern,
                            const Tolerances& tol) {
    std::map<std::string, const Peak*> by_id;
    for (const auto& p : peaks) by_id[p.peak_id] = &p;
    if (g.member_peaks.empty()) return false;
    std::set<std::string> unique(g.member_peaks.begin(), g.member_peaks.end());
    if (unique.size() != g.member_peaks.size() || g.labels.size() != g.member_peaks.size()) return false;

    std::vector<const Peak*> members;
    for (const auto& id : g.member_peaks) {
        auto it = by_id.find(id);
        if (it == by_id.end() || !g.labels.count(id)) return false;
        members.push_back(it->second);
    }
    for (std::size_t i = 0; i < members.size(); ++i)
        for (std::size_t j = i + 1; j < members.size(); ++j)
            if (!amide_match(*members[i], *members[j], tol)) return false;

    std::map<std::pair<std::string, AtomRole>, int> slots;
    std::map<std::string, int> per_spectrum;
    std::map<AtomRole, std::vector<double>> carbons;
    for (const Peak* p : members) {
        const AtomRole role = g.labels.at(p->peak_id);
        const auto roles = roles_of(*p);
        if (std::find(roles.begin(), roles.end(), role) == roles.end()) return false;
        if (++slots[{p->spectrum_id, role}] > 1) return false;
        auto pit = pattern.find(p->spectrum_id);
        if (pit == pattern.end() || ++per_spectrum[p->spectrum_id] > pit->second) return false;
        if (p->c) carbons[role].push_back(*p->c);
    }
    for (const auto& [role, vals] : carbons)
        for (std::size_t i = 0; i < vals.size(); ++i)
            for (std::size_t j = i + 1; j < vals.size(); ++j)
                if (std::abs(vals[i] - vals[j]) > tol.delta3) return false;

    // Consensus must mirror the labels: one N and HN observation per peak, one
    // carbon observation per 3-D peak under its role.
    if (g.observations(AtomRole::N).size() != members.size()) return false;
    if (g.observations(AtomRole::HN).size() != members.size()) return false;
    for (const auto& [role, vals] : carbons)
        if (g.observations(role).size() != vals.size()) return false;
    return true;
}

}  // namespace nmrpath
