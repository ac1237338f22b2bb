// src/evaluate.cpp

#include "nmrpath/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <set>
#include <sstream>

namespace nmrpath {

namespace {

std::map<Atom, double> weighted_shifts(const AtomObservations& obs) {
    std::map<Atom, double> out;
    for (const auto& [atom, list] : obs) {
        if (list.empty()) continue;
        double num = 0.0, den = 0.0;
        for (const auto& o : list) {
            const double w = 1.0 / (o.sigma * o.sigma);
            num += w * o.value;
            den += w;
        }
        out[atom] = num / den;
    }
    return out;
}

void append(AtomObservations& dst, const AtomObservations& src) {
    for (const auto& [atom, list] : src) {
        auto& d = dst[atom];
        d.insert(d.end(), list.begin(), list.end());
    }
}

Json optional_string(const std::optional<std::string>& s) { return s ? Json(*s) : Json(nullptr); }

std::optional<std::string> string_or_null(const Json& j) {
    if (j.is_null()) return std::nullopt;
    return j.get<std::string>();
}

}  // namespace

Assignment assignment_from_path(const AssignmentGraph& g, const PathSolution& path, double lambda) {
    const std::size_t n = g.residues();
    if (path.nodes.size() != n + 2)
        throw Error(ErrorCode::PathNotInGraph, "path has " + std::to_string(path.nodes.size()) + " nodes");
    const auto costs = path_edge_costs(g, path.nodes);

    Assignment a;
    a.sequence = g.sequence;
    a.optimal = path.optimal;
    a.reused = reused_peaks(g, path.nodes);
    std::set<std::string> reused_set;
    double extra = 0.0;
    for (const auto& [p, c] : a.reused) {
        reused_set.insert(p);
        extra += c - 1;
    }

    auto grouping_at = [&](std::size_t layer) -> const PeakGrouping* {
        if (layer < 1 || layer > n) return nullptr;
        return g.grouping_of(g.layers[layer][static_cast<std::size_t>(path.nodes[layer])]);
    };

    for (std::size_t k = 1; k <= n; ++k) {
        const AssignmentNode& node = g.layers[k][static_cast<std::size_t>(path.nodes[k])];
        const GraphEdge* e = g.find_edge(k, path.nodes[k], path.nodes[k + 1]);
        ResidueAssignment r;
        r.index = k - 1;
        r.residue = k - 1 < g.sequence.size() ? g.sequence[k - 1] : 'X';
        r.node = path.nodes[k];
        r.edge_cost = e->cost;
        r.threshold = e->threshold;
        if (node.kind == NodeKind::Regular) {
            r.id = node.grouping_ref;
            r.peaks = node.peaks;
            for (const auto& p : node.peaks)
                if (reused_set.count(p)) r.reused.push_back(p);
        }
        AtomObservations obs;
        if (const PeakGrouping* cur = grouping_at(k)) append(obs, intra_observations(*cur));
        if (const PeakGrouping* next = grouping_at(k + 1)) append(obs, prev_observations(*next));
        r.shifts = weighted_shifts(obs);
        a.residues.push_back(std::move(r));
    }
    for (double c : costs) a.total_cost += c;
    a.objective = a.total_cost + lambda * extra;
    return a;
}

Assignment assignment_from_truth(const GroundTruth& gt) {
    Assignment a;
    a.sequence = gt.sequence;
    for (std::size_t k = 0; k < gt.sequence.size(); ++k) {
        ResidueAssignment r;
        r.index = k;
        r.residue = gt.sequence[k];
        if (gt.assignable(k)) {
            if (gt.spins) {
                r.id = gt.residue_ids[k];
                r.peaks = {*gt.residue_ids[k]};
            } else {
                r.id = "truth" + std::to_string(k + 1);
                r.peaks = gt.residue_peaks[k];
            }
        }
        a.residues.push_back(std::move(r));
    }
    return a;
}

Json to_json(const Assignment& a) {
    Json residues = Json::array();
    for (const auto& r : a.residues) {
        Json shifts = Json::object();
        for (const auto& [atom, v] : r.shifts) shifts[std::string(to_string(atom))] = v;
        residues.push_back({{"index", r.index + 1},
                            {"residue", std::string(1, r.residue)},
                            {"id", optional_string(r.id)},
                            {"peaks", r.peaks},
                            {"node", r.node},
                            {"shifts", shifts},
                            {"cost", r.edge_cost},
                            {"threshold", r.threshold},
                            {"reused", r.reused}});
    }
    Json reused = Json::array();
    for (const auto& [p, c] : a.reused) reused.push_back({{"peak", p}, {"uses", c}});
    return {{"sequence", a.sequence}, {"residues", residues}, {"total_cost", a.total_cost},
            {"objective", a.objective}, {"optimal", a.optimal}, {"reused", reused}};
}

Assignment assignment_from_json(const Json& j) {
    Assignment a;
    try {
        a.sequence = j.at("sequence").get<std::string>();
        for (const auto& rj : j.at("residues")) {
            ResidueAssignment r;
            r.index = rj.at("index").get<std::size_t>() - 1;
            const auto res = rj.at("residue").get<std::string>();
            r.residue = res.empty() ? 'X' : res[0];
            r.id = string_or_null(rj.at("id"));
            r.peaks = rj.value("peaks", std::vector<std::string>{});
            r.node = rj.value("node", 0);
            if (rj.contains("shifts"))
                for (const auto& [name, v] : rj.at("shifts").items()) {
                    auto atom = parse_atom(name);
                    if (!atom) throw Error(ErrorCode::Parse, "unknown atom '" + name + "' in assignment");
                    r.shifts[*atom] = v.get<double>();
                }
            r.edge_cost = rj.value("cost", 0.0);
            r.threshold = rj.value("threshold", 0.0);
            r.reused = rj.value("reused", std::vector<std::string>{});
            a.residues.push_back(std::move(r));
        }
        a.total_cost = j.value("total_cost", 0.0);
        a.objective = j.value("objective", a.total_cost);
        a.optimal = j.value("optimal", true);
        if (j.contains("reused"))
            for (const auto& u : j.at("reused")) a.reused.emplace_back(u.at("peak").get<std::string>(), u.at("uses").get<int>());
    } catch (const Json::exception& e) {
        throw Error(ErrorCode::Parse, std::string("assignment: ") + e.what());
    }
    return a;
}

ScoreReport score(const Assignment& a, const GroundTruth& gt) {
    if (a.residues.size() != gt.sequence.size() || gt.residue_ids.size() != gt.sequence.size())
        throw Error(ErrorCode::LengthMismatch, "assignment covers " + std::to_string(a.residues.size()) +
                                                   " residues, ground truth " + std::to_string(gt.sequence.size()));
    ScoreReport rep;
    for (std::size_t k = 0; k < a.residues.size(); ++k) {
        const auto& r = a.residues[k];
        ResidueVerdict v;
        v.index = k;
        v.assigned = r.id;
        const bool assignable = gt.assignable(k);
        if (assignable) {
            ++rep.m_assignable;
            v.truth = gt.spins ? gt.residue_ids[k] : std::optional<std::string>("peaks:" + std::to_string(gt.residue_peaks[k].size()));
        }
        if (r.dummy()) {
            v.verdict = assignable ? "unassigned" : "absent";
        } else {
            ++rep.m_assigned;
            bool correct = false;
            if (assignable) {
                if (gt.spins) {
                    correct = *r.id == *gt.residue_ids[k];
                } else {
                    auto peaks = r.peaks;
                    std::sort(peaks.begin(), peaks.end());
                    correct = peaks == gt.residue_peaks[k];
                }
            }
            if (correct) ++rep.m_correct;
            v.verdict = correct ? "correct" : (assignable ? "wrong" : "spurious");
        }
        rep.verdicts.push_back(std::move(v));
    }
    rep.precision_undefined = rep.m_assigned == 0;
    rep.precision = rep.m_assigned == 0 ? 0.0 : static_cast<double>(rep.m_correct) / rep.m_assigned;
    rep.recall = rep.m_assignable == 0 ? 0.0 : static_cast<double>(rep.m_correct) / rep.m_assignable;
    return rep;
}

AtomScore atom_correctness(const Assignment& a, const GroundTruth& gt, const ReferenceShifts& ref,
                           const AtomWindows& windows) {
    const std::size_t n = gt.sequence.size();
    if (a.residues.size() != n) throw Error(ErrorCode::LengthMismatch, "assignment and ground truth lengths differ");
    if (ref.shifts.size() != n) throw Error(ErrorCode::MissingReference, "reference does not cover the sequence");

    // (residue, atom) pairs that some simulated datum actually measured.
    std::set<std::pair<std::size_t, Atom>> observable;
    auto mark = [&](std::size_t k, Atom atom) {
        if (ref.shifts[k].count(atom)) observable.insert({k, atom});
    };
    if (gt.spins) {
        for (std::size_t k = 0; k < n; ++k) {
            if (!gt.assignable(k)) continue;
            for (Atom atom : {Atom::N, Atom::HN, Atom::CA, Atom::CB}) mark(k, atom);
            if (k > 0)
                for (Atom atom : {Atom::CA, Atom::CB}) mark(k - 1, atom);
        }
    } else {
        for (const auto& [peak, origin] : gt.peak_origin) {
            mark(origin.residue, Atom::N);
            mark(origin.residue, Atom::HN);
            if (!origin.role) continue;
            if (is_prev(*origin.role)) {
                if (origin.residue > 0) mark(origin.residue - 1, atom_of(*origin.role));
            } else {
                mark(origin.residue, atom_of(*origin.role));
            }
        }
    }

    AtomScore s;
    s.observable = observable.size();
    for (const auto& [k, atom] : observable) {
        const auto& got = a.residues[k].shifts;
        auto it = got.find(atom);
        if (it == got.end()) continue;
        const char dim = dimension_of(atom);
        const double w = dim == 'H' ? windows.h : dim == 'N' ? windows.n : windows.c;
        if (std::abs(it->second - ref.shifts[k].at(atom)) <= w) ++s.correct;
    }
    return s;
}

Json to_json(const ScoreReport& r) {
    Json verdicts = Json::array();
    for (const auto& v : r.verdicts)
        verdicts.push_back({{"index", v.index + 1},
                            {"assigned", optional_string(v.assigned)},
                            {"truth", optional_string(v.truth)},
                            {"verdict", v.verdict}});
    Json j = {{"m_assigned", r.m_assigned}, {"m_correct", r.m_correct},
              {"m_assignable", r.m_assignable}, {"precision", r.precision},
              {"recall", r.recall}, {"precision_undefined", r.precision_undefined},
              {"residues", verdicts}};
    if (r.atoms)
        j["atoms"] = {{"observable", r.atoms->observable}, {"correct", r.atoms->correct},
                      {"fraction", r.atoms->fraction()}};
    return j;
}

std::string score_table(const ScoreReport& r) {
    std::ostringstream os;
    os << std::left << std::setw(6) << "res" << std::setw(14) << "assigned" << std::setw(14) << "truth"
       << "verdict\n";
    for (const auto& v : r.verdicts)
        os << std::left << std::setw(6) << v.index + 1 << std::setw(14) << v.assigned.value_or("-") << std::setw(14)
           << v.truth.value_or("-") << v.verdict << '\n';
    os << "assigned " << r.m_assigned << "  correct " << r.m_correct << "  assignable " << r.m_assignable << '\n';
    os << "precision " << format_fixed(r.precision, 3) << (r.precision_undefined ? " (nothing assigned)" : "")
       << "  recall " << format_fixed(r.recall, 3) << '\n';
    if (r.atoms)
        os << "atoms " << r.atoms->correct << "/" << r.atoms->observable << " = "
           << format_fixed(r.atoms->fraction(), 3) << '\n';
    return os.str();
}

std::vector<DiagnosticRow> diagnostics(const Assignment& a, const AssignmentGraph& g) {
    const std::size_t n = g.residues();
    if (a.residues.size() != n)
        throw Error(ErrorCode::PathNotInGraph, "assignment has " + std::to_string(a.residues.size()) +
                                                   " residues, graph " + std::to_string(n));
    std::vector<int> nodes{0};
    for (std::size_t k = 0; k < n; ++k) {
        const auto& r = a.residues[k];
        const auto& layer = g.layers[k + 1];
        if (r.node < 0 || static_cast<std::size_t>(r.node) >= layer.size())
            throw Error(ErrorCode::PathNotInGraph, "residue " + std::to_string(k + 1) + " node out of range");
        const AssignmentNode& node = layer[static_cast<std::size_t>(r.node)];
        const bool is_dummy = node.kind == NodeKind::Dummy;
        if (is_dummy != r.dummy() || (!is_dummy && node.grouping_ref != r.id))
            throw Error(ErrorCode::PathNotInGraph, "residue " + std::to_string(k + 1) + " does not match its node");
        nodes.push_back(r.node);
    }
    nodes.push_back(0);
    path_edge_costs(g, nodes);  // throws when an edge is missing

    const auto reused = reused_peaks(g, nodes);
    std::vector<DiagnosticRow> rows;
    for (std::size_t k = 1; k <= n; ++k) {
        const GraphEdge* e = g.find_edge(k, nodes[k], nodes[k + 1]);
        const AssignmentNode& node = g.layers[k][static_cast<std::size_t>(nodes[k])];
        DiagnosticRow row;
        row.index = k - 1;
        row.residue = k - 1 < g.sequence.size() ? g.sequence[k - 1] : 'X';
        row.id = node.grouping_ref;
        row.cost = e->cost;
        row.threshold = e->threshold;
        row.margin = e->threshold - e->cost;
        for (const auto& [p, c] : reused)
            if (std::binary_search(node.peaks.begin(), node.peaks.end(), p)) row.reused.emplace_back(p, c);
        rows.push_back(std::move(row));
    }
    return rows;
}

Json to_json(const std::vector<DiagnosticRow>& rows) {
    Json out = Json::array();
    for (const auto& r : rows) {
        Json reused = Json::array();
        for (const auto& [p, c] : r.reused) reused.push_back({{"peak", p}, {"uses", c}});
        out.push_back({{"index", r.index + 1},
                       {"residue", std::string(1, r.residue)},
                       {"id", optional_string(r.id)},
                       {"cost", r.cost},
                       {"threshold", r.threshold},
                       {"margin", r.margin},
                       {"reused", reused}});
    }
    return out;
}

std::string diagnostics_table(const std::vector<DiagnosticRow>& rows) {
    std::ostringstream os;
    os << std::left << std::setw(6) << "res" << std::setw(5) << "aa" << std::setw(12) << "id" << std::right
       << std::setw(12) << "cost" << std::setw(12) << "threshold" << std::setw(12) << "margin"
       << "  reused\n";
    for (const auto& r : rows) {
        os << std::left << std::setw(6) << r.index + 1 << std::setw(5) << r.residue << std::setw(12)
           << r.id.value_or("NULL") << std::right << std::setw(12) << format_fixed(r.cost, 3) << std::setw(12)
           << format_fixed(r.threshold, 3) << std::setw(12) << format_fixed(r.margin, 3) << "  ";
        for (const auto& [p, c] : r.reused) os << p << "x" << c << ' ';
        os << '\n';
    }
    return os.str();
}

}  // namespace nmrpath
