// include/nmrpath/evaluate.hpp
// Assignments as produced by the solvers, precision/recall scoring against
// simulated ground truth, atom-level correctness, and per-residue diagnostics.

#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nmrpath/graph.hpp"
#include "nmrpath/io.hpp"
#include "nmrpath/shortest_path.hpp"
#include "nmrpath/simulate.hpp"

namespace nmrpath {

struct ResidueAssignment {
    std::size_t index = 0;  // 0-based residue position
    char residue = 'X';
    std::optional<std::string> id;   // grouping or spin id; nullopt for the dummy
    std::vector<std::string> peaks;  // peaks (or spin ids) consumed
    int node = 0;                    // node index in the residue's layer
    std::map<Atom, double> shifts;   // noise-weighted mean of the assigned observations
    double edge_cost = 0.0;
    double threshold = 0.0;
    std::vector<std::string> reused;  // consumed peaks that other residues also use

    bool dummy() const { return !id.has_value(); }
    bool operator==(const ResidueAssignment&) const = default;
};

struct Assignment {
    std::string sequence;
    std::vector<ResidueAssignment> residues;
    double total_cost = 0.0;
    double objective = 0.0;  // includes the reuse penalty for LIAN-2
    bool optimal = true;
    std::vector<std::pair<std::string, int>> reused;  // peak, use count

    bool operator==(const Assignment&) const = default;
};

Assignment assignment_from_path(const AssignmentGraph& g, const PathSolution& path, double lambda = 0.0);
// The assignment the simulator intended; ids follow the scoring rules, so it
// scores 1.0/1.0 against its own ground truth.
Assignment assignment_from_truth(const GroundTruth& gt);

Json to_json(const Assignment& a);
Assignment assignment_from_json(const Json& j);

struct ResidueVerdict {
    std::size_t index = 0;
    std::optional<std::string> assigned;
    std::optional<std::string> truth;
    std::string verdict;  // correct, wrong, unassigned, absent, spurious
};

struct AtomScore {
    std::size_t observable = 0;
    std::size_t correct = 0;
    double fraction() const { return observable == 0 ? 0.0 : static_cast<double>(correct) / observable; }
};

struct ScoreReport {
    std::size_t m_assigned = 0, m_correct = 0, m_assignable = 0;
    double precision = 0.0, recall = 0.0;
    bool precision_undefined = false;  // m_assigned == 0, precision reported as 0
    std::vector<ResidueVerdict> verdicts;
    std::optional<AtomScore> atoms;
};

// Spin datasets: correct iff the assigned spin id equals the true one. Peak
// datasets: correct iff the assigned peak set equals the true peak set.
ScoreReport score(const Assignment& a, const GroundTruth& gt);

struct AtomWindows {
    double h = 0.04;
    double n = 0.4;
    double c = 0.4;
};

// Fraction of atoms observable in the simulated data whose assigned shift lies
// within the per-nucleus window of the reference value.
AtomScore atom_correctness(const Assignment& a, const GroundTruth& gt, const ReferenceShifts& ref,
                           const AtomWindows& windows = {});

Json to_json(const ScoreReport& r);
std::string score_table(const ScoreReport& r);

struct DiagnosticRow {
    std::size_t index = 0;
    char residue = 'X';
    std::optional<std::string> id;
    double cost = 0.0;
    double threshold = 0.0;
    double margin = 0.0;  // threshold - cost
    std::vector<std::pair<std::string, int>> reused;
};

// Throws PathNotInGraph when the assignment does not trace a path of g.
std::vector<DiagnosticRow> diagnostics(const Assignment& a, const AssignmentGraph& g);

Json to_json(const std::vector<DiagnosticRow>& rows);
std::string diagnostics_table(const std::vector<DiagnosticRow>& rows);

}  // namespace nmrpath
