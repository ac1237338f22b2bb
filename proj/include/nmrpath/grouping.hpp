// include/nmrpath/grouping.hpp
// Peak groupings: sets of peaks sharing one amide whose carbon peaks carry a
// consistent role labelling. Groupings become the candidate nodes of the
// assignment graph.

#pragma once

#include <cstddef>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nmrpath/domain.hpp"

namespace nmrpath {

struct PeakGrouping {
    std::string grouping_id;
    std::vector<std::string> member_peaks;  // sorted
    // Role each member carries; HSQC peaks are labelled HN (amide only).
    std::map<std::string, AtomRole> labels;
    std::map<AtomRole, std::vector<Observation>> consensus;
    std::pair<double, double> fingerprint{0.0, 0.0};  // (H, N) consensus

    const std::vector<Observation>& observations(AtomRole role) const;
    bool operator==(const PeakGrouping&) const = default;
};

struct CompatibilityGraph {
    std::vector<std::string> vertices;          // peak ids, same order as the input peaks
    std::vector<std::vector<int>> adjacency;    // sorted neighbour lists

    bool has_edge(int u, int v) const;
    std::size_t edge_count() const;
};

// Expected number of peaks per spectrum for one amide.
using ExpectedPattern = std::map<std::string, int>;
ExpectedPattern pattern_for(std::span<const std::string> spectra);

// Edge iff the H/N windows hold, the pair does not compete for one fixed slot
// of the same spectrum, and two peaks whose only possible role is the same
// carbon agree within delta3.
CompatibilityGraph build_compatibility_graph(std::span<const Peak> peaks, const Tolerances& tol);

struct GroupingOptions {
    std::size_t top_k = 4;               // cliques per component; SIZE_MAX = all
    // Labelled groupings kept per clique, lowest amide dispersion first;
    // SIZE_MAX = all.
    std::size_t per_clique = 8;
    std::size_t component_budget = 64;   // ComponentTooLarge above this
    unsigned threads = 1;
};

inline constexpr std::size_t kAllCliques = std::numeric_limits<std::size_t>::max();

// Maximal cliques per connected component (largest first, ties by member
// ids), each expanded into the labelled groupings whose peak set is maximal
// among valid sets; groupings dominated by another emitted peak set are
// dropped. Output is sorted by member list, and grouping ids are assigned in
// that order.
// Amide dispersion: chi-square of the members' H and N values around their
// noise-weighted means.
std::vector<PeakGrouping> enumerate_groupings(const CompatibilityGraph& graph, std::span<const Peak> peaks,
                                              const ExpectedPattern& pattern, const Tolerances& tol,
                                              const PriorTable& priors, const GroupingOptions& opts = {});

double amide_dispersion(const PeakGrouping& g);

// One grouping per spin system, one observation per present role.
std::vector<PeakGrouping> spins_to_groupings(std::span<const SpinSystem> spins, const PriorTable& priors);

// Independent re-check of every invariant of a labelled grouping.
bool grouping_is_consistent(const PeakGrouping& g, std::span<const Peak> peaks, const ExpectedPattern& pattern,
                            const Tolerances& tol);

// Maximal cliques of an undirected graph (Bron-Kerbosch with pivoting),
// each sorted ascending.
std::vector<std::vector<int>> maximal_cliques(const std::vector<std::vector<int>>& adjacency,
                                              std::span<const int> vertices);

}  // namespace nmrpath
