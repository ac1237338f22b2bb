// src/graph.cpp

#include "nmrpath/graph.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "nmrpath/parallel.hpp"

namespace nmrpath {

std::string_view to_string(NodeKind kind) {
    switch (kind) {
    case NodeKind::Start: return "start";
    case NodeKind::End: return "end";
    case NodeKind::Dummy: return "dummy";
    case NodeKind::Regular: return "regular";
    }
    return "?";
}

const GraphEdge* AssignmentGraph::find_edge(std::size_t k, int from, int to) const {
    if (k >= edges.size()) return nullptr;
    const auto& e = edges[k];
    auto it = std::lower_bound(e.begin(), e.end(), std::make_pair(from, to), [](const GraphEdge& x, auto key) {
        return std::make_pair(x.from, x.to) < key;
    });
    if (it == e.end() || it->from != from || it->to != to) return nullptr;
    return &*it;
}

const PeakGrouping* AssignmentGraph::grouping_of(const AssignmentNode& node) const {
    if (!node.grouping_ref) return nullptr;
    for (const auto& g : groupings)
        if (g.grouping_id == *node.grouping_ref) return &g;
    return nullptr;
}

AssignmentNode& AssignmentGraph::add_node(std::size_t layer, NodeKind kind, std::optional<std::string> ref,
                                          std::vector<std::string> peaks) {
    if (layers.size() <= layer) layers.resize(layer + 1);
    AssignmentNode n;
    n.layer = static_cast<int>(layer);
    n.index = static_cast<int>(layers[layer].size());
    n.kind = kind;
    n.grouping_ref = std::move(ref);
    std::sort(peaks.begin(), peaks.end());
    n.peaks = std::move(peaks);
    layers[layer].push_back(std::move(n));
    return layers[layer].back();
}

void AssignmentGraph::add_edge(std::size_t k, int from, int to, double cost, double threshold) {
    if (edges.size() <= k) edges.resize(k + 1);
    edges[k].push_back({from, to, cost, threshold});
}

void AssignmentGraph::sort_edges() {
    for (auto& e : edges)
        std::sort(e.begin(), e.end(),
                  [](const GraphEdge& a, const GraphEdge& b) { return std::tie(a.from, a.to) < std::tie(b.from, b.to); });
}

void AssignmentGraph::check() const {
    auto fail = [](const std::string& msg) { throw Error(ErrorCode::InvalidArgument, "malformed graph: " + msg); };
    if (layers.size() < 3) fail("fewer than 3 layers");
    if (edges.size() != layers.size() - 1) fail("edge layer count");
    if (layers.front().size() != 1 || layers.front()[0].kind != NodeKind::Start) fail("start layer");
    if (layers.back().size() != 1 || layers.back()[0].kind != NodeKind::End) fail("end layer");
    for (std::size_t k = 1; k + 1 < layers.size(); ++k) {
        const auto& L = layers[k];
        if (L.empty()) throw Error(ErrorCode::EmptyLayer, "layer " + std::to_string(k));
        for (std::size_t i = 0; i < L.size(); ++i) {
            const bool last = i + 1 == L.size();
            if ((L[i].kind == NodeKind::Dummy) != last) fail("dummy must be the last node of layer " + std::to_string(k));
            if (L[i].kind == NodeKind::Start || L[i].kind == NodeKind::End) fail("terminal inside inner layer");
            if (L[i].index != static_cast<int>(i) || L[i].layer != static_cast<int>(k)) fail("node indexing");
        }
    }
    for (std::size_t k = 0; k < edges.size(); ++k) {
        const int a = static_cast<int>(layers[k].size()), b = static_cast<int>(layers[k + 1].size());
        for (std::size_t e = 0; e < edges[k].size(); ++e) {
            const auto& x = edges[k][e];
            if (x.from < 0 || x.from >= a || x.to < 0 || x.to >= b) fail("edge endpoint out of range");
            if (!std::isfinite(x.cost)) fail("non-finite edge cost");
            if (e > 0 && std::tie(edges[k][e - 1].from, edges[k][e - 1].to) >= std::tie(x.from, x.to))
                fail("edges not sorted or duplicated");
        }
        // Dummy reachability: every node of layer k reaches Dummy(k+1), and
        // Dummy(k) reaches every node of layer k+1.
        if (k + 1 < layers.size() - 1)
            for (int i = 0; i < a; ++i)
                if (!find_edge(k, i, b - 1)) fail("missing edge into dummy");
        if (k >= 1)
            for (int j = 0; j < b; ++j)
                if (!find_edge(k, a - 1, j)) fail("missing edge out of dummy");
    }
}

AtomObservations intra_observations(const PeakGrouping& g) {
    AtomObservations out;
    for (const auto& [role, obs] : g.consensus)
        if (!is_prev(role) && !obs.empty()) {
            auto& dst = out[atom_of(role)];
            dst.insert(dst.end(), obs.begin(), obs.end());
        }
    return out;
}

AtomObservations prev_observations(const PeakGrouping& g) {
    AtomObservations out;
    for (const auto& [role, obs] : g.consensus)
        if (is_prev(role) && !obs.empty()) {
            auto& dst = out[atom_of(role)];
            dst.insert(dst.end(), obs.begin(), obs.end());
        }
    return out;
}

std::optional<double> residue_cost(char residue, const AtomObservations& obs, const PriorTable& priors) {
    double total = 0.0;
    for (const auto& [atom, list] : obs) {
        if (list.empty()) continue;
        if (!priors.atom_present(residue, atom)) return std::nullopt;
        total += atom_cost(priors.prior(residue, atom), list).cost;
    }
    return total;
}

double residue_threshold(char residue, const AtomObservations& obs, const PriorTable& priors, double delta) {
    double total = 0.0;
    for (const auto& [atom, list] : obs) {
        if (list.empty() || !priors.atom_present(residue, atom)) continue;
        std::vector<double> sigmas;
        for (const auto& o : list) sigmas.push_back(o.sigma);
        total += typing_threshold(priors.prior(residue, atom), sigmas, delta);
    }
    return total;
}

double dummy_threshold(const ProteinSequence& seq, std::size_t k, const PriorTable& priors,
                       const ObservationModel& model, double delta) {
    double total = 0.0;
    for (Atom a : kAllAtoms) {
        if (!priors.atom_present(seq[k], a)) continue;
        std::vector<double> sigmas;
        for (const auto& s : model.expected_sources(seq, k, a, priors)) sigmas.push_back(priors.noise_for(s, a));
        total += typing_threshold(priors.prior(seq[k], a), sigmas, delta);
    }
    return total;
}

namespace {

bool prev_atoms_present(const AtomObservations& prev, const ProteinSequence& seq, std::size_t k,
                        const PriorTable& priors) {
    for (const auto& [atom, list] : prev) {
        if (list.empty()) continue;
        if (k == 0 || !priors.atom_present(seq[k - 1], atom)) return false;
    }
    return true;
}

// Every intra carbon value of one node within delta3 of every *_prev value of
// the next node, per atom.
bool sequential_match(const AtomObservations& intra, const AtomObservations& prev, double delta3) {
    for (const auto& [atom, pl] : prev) {
        auto it = intra.find(atom);
        if (it == intra.end() || pl.empty() || it->second.empty()) continue;
        for (const auto& x : it->second)
            for (const auto& y : pl)
                if (std::abs(x.value - y.value) > delta3) return false;
    }
    return true;
}

AtomObservations merge(const AtomObservations& a, const AtomObservations& b) {
    AtomObservations out = a;
    for (const auto& [atom, list] : b) {
        auto& dst = out[atom];
        dst.insert(dst.end(), list.begin(), list.end());
    }
    return out;
}

}  // namespace

TypingResult type_grouping(const PeakGrouping& g, const ProteinSequence& seq, std::size_t k,
                           const PriorTable& priors, const Tolerances& tol) {
    TypingResult r;
    const auto intra = intra_observations(g);
    if (!prev_atoms_present(prev_observations(g), seq, k, priors)) return r;
    const auto cost = residue_cost(seq[k], intra, priors);
    if (!cost) return r;
    r.cost = *cost;
    r.threshold = residue_threshold(seq[k], intra, priors, tol.delta);
    r.keep = r.cost <= r.threshold;
    return r;
}

std::vector<int> prune_by_typing(std::span<const PeakGrouping> candidates, const ProteinSequence& seq,
                                 std::size_t k, const PriorTable& priors, const Tolerances& tol) {
    std::vector<int> kept;
    for (std::size_t i = 0; i < candidates.size(); ++i)
        if (type_grouping(candidates[i], seq, k, priors, tol).keep) kept.push_back(static_cast<int>(i));
    return kept;
}

AssignmentGraph build_graph(std::span<const PeakGrouping> groupings, const ProteinSequence& seq,
                            const PriorTable& priors, const Tolerances& tol, const ObservationModel& model,
                            const GraphOptions& opts) {
    tol.validate();
    const std::size_t n = seq.size();
    AssignmentGraph g;
    g.sequence = seq.str();
    g.groupings.assign(groupings.begin(), groupings.end());

    std::vector<AtomObservations> intra(groupings.size()), prev(groupings.size());
    for (std::size_t i = 0; i < groupings.size(); ++i) {
        intra[i] = intra_observations(groupings[i]);
        prev[i] = prev_observations(groupings[i]);
    }

    std::vector<double> dummy_cost(n);
    std::vector<std::vector<std::pair<int, TypingResult>>> kept(n);
    parallel_for(n, opts.threads, [&](std::size_t k) {
        dummy_cost[k] = dummy_threshold(seq, k, priors, model, tol.delta);
        for (std::size_t i = 0; i < groupings.size(); ++i) {
            auto t = type_grouping(groupings[i], seq, k, priors, tol);
            if (t.keep) kept[k].emplace_back(static_cast<int>(i), t);
        }
    });

    g.layers.resize(n + 2);
    g.edges.resize(n + 1);
    g.add_node(0, NodeKind::Start);
    std::vector<std::vector<int>> source(n + 2);  // grouping index per node, -1 for dummy/terminal
    for (std::size_t k = 1; k <= n; ++k) {
        for (const auto& [gi, t] : kept[k - 1]) {
            const auto& grp = groupings[static_cast<std::size_t>(gi)];
            auto& node = g.add_node(k, NodeKind::Regular, grp.grouping_id, grp.member_peaks);
            node.node_cost = t.cost;
            node.node_threshold = t.threshold;
            source[k].push_back(gi);
        }
        auto& d = g.add_node(k, NodeKind::Dummy);
        d.node_cost = dummy_cost[k - 1];
        d.node_threshold = dummy_cost[k - 1];
        source[k].push_back(-1);
    }
    g.add_node(n + 1, NodeKind::End);
    source[0] = {-1};
    source[n + 1] = {-1};

    for (int j = 0; j < static_cast<int>(g.layers[1].size()); ++j) g.add_edge(0, 0, j, 0.0, 0.0);

    parallel_for(n, opts.threads, [&](std::size_t idx) {
        const std::size_t k = idx + 1;  // edges layer k -> k+1 price residue k-1 (0-based)
        const char res = seq[k - 1];
        const auto& from = g.layers[k];
        const auto& to = g.layers[k + 1];
        auto& out = g.edges[k];
        const int dummy_from = static_cast<int>(from.size()) - 1;
        for (int i = 0; i < static_cast<int>(from.size()); ++i) {
            const int gi = source[k][static_cast<std::size_t>(i)];
            for (int j = 0; j < static_cast<int>(to.size()); ++j) {
                const AssignmentNode& nj = to[static_cast<std::size_t>(j)];
                if (i == dummy_from) {
                    out.push_back({i, j, dummy_cost[k - 1], dummy_cost[k - 1]});
                    continue;
                }
                const AssignmentNode& ni = from[static_cast<std::size_t>(i)];
                if (nj.kind != NodeKind::Regular) {
                    out.push_back({i, j, ni.node_cost, ni.node_threshold});
                    continue;
                }
                const int gj = source[k + 1][static_cast<std::size_t>(j)];
                const auto& pi = intra[static_cast<std::size_t>(gi)];
                const auto& pj = prev[static_cast<std::size_t>(gj)];
                if (!sequential_match(pi, pj, tol.delta3)) continue;
                const auto combined = merge(pi, pj);
                const auto cost = residue_cost(res, combined, priors);
                if (!cost) continue;
                const double thr = residue_threshold(res, combined, priors, tol.delta);
                if (*cost > thr) continue;
                out.push_back({i, j, *cost, thr});
            }
        }
    });
    g.sort_edges();
    g.check();
    return g;
}

GraphStats graph_stats(const AssignmentGraph& g) {
    GraphStats s;
    for (const auto& L : g.layers) s.layer_sizes.push_back(L.size());
    double possible = 0.0;
    for (std::size_t k = 0; k < g.edges.size(); ++k) {
        const std::size_t c = g.edges[k].size();
        const double cap = static_cast<double>(g.layers[k].size() * g.layers[k + 1].size());
        s.edge_counts.push_back(c);
        s.total_edges += c;
        s.densities.push_back(cap > 0 ? static_cast<double>(c) / cap : 0.0);
        possible += cap;
    }
    s.density = possible > 0 ? static_cast<double>(s.total_edges) / possible : 0.0;
    return s;
}

std::vector<double> path_edge_costs(const AssignmentGraph& g, std::span<const int> nodes) {
    if (nodes.size() != g.layers.size())
        throw Error(ErrorCode::PathNotInGraph, "path length " + std::to_string(nodes.size()) + " vs " +
                                                   std::to_string(g.layers.size()) + " layers");
    std::vector<double> costs;
    for (std::size_t k = 0; k + 1 < nodes.size(); ++k) {
        const GraphEdge* e = g.find_edge(k, nodes[k], nodes[k + 1]);
        if (!e)
            throw Error(ErrorCode::PathNotInGraph, "no edge " + std::to_string(nodes[k]) + "->" +
                                                       std::to_string(nodes[k + 1]) + " after layer " +
                                                       std::to_string(k));
        costs.push_back(e->cost);
    }
    return costs;
}

}  // namespace nmrpath
