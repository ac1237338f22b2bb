// include/nmrpath/graph.hpp
// Layered assignment graph: layer 0 holds Start, layers 1..n hold the
// candidate groupings of each residue plus one Dummy (always the last node),
// layer n+1 holds End.
//
// Cost attribution: the edge leaving layer k carries the cost of residue k.
// Its atoms are observed by the intra roles of the node in layer k and by the
// *_prev roles of the node in layer k+1. Start edges cost 0; every edge
// leaving a Dummy costs that residue's summed typing threshold.

#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nmrpath/costmodel.hpp"
#include "nmrpath/domain.hpp"
#include "nmrpath/experiments.hpp"
#include "nmrpath/grouping.hpp"

namespace nmrpath {

enum class NodeKind { Start, End, Dummy, Regular };
std::string_view to_string(NodeKind kind);

struct AssignmentNode {
    int layer = 0;
    int index = 0;  // position within the layer
    NodeKind kind = NodeKind::Regular;
    std::optional<std::string> grouping_ref;
    std::vector<std::string> peaks;  // peak or spin ids consumed (sorted)
    double node_cost = 0.0;          // intra-residue cost against this layer's residue
    double node_threshold = 0.0;     // typing threshold for the node's own observation counts
};

struct GraphEdge {
    int from = 0;  // node index in layer k
    int to = 0;    // node index in layer k+1
    double cost = 0.0;
    double threshold = 0.0;  // typing threshold of the residue this edge prices
};

struct AssignmentGraph {
    std::vector<std::vector<AssignmentNode>> layers;  // n + 2 layers
    std::vector<std::vector<GraphEdge>> edges;        // edges[k]: layer k -> k+1, sorted by (from, to)
    std::vector<PeakGrouping> groupings;              // referenced by grouping_ref
    std::string sequence;                             // empty for synthetic graphs

    std::size_t residues() const { return layers.size() < 2 ? 0 : layers.size() - 2; }
    int dummy_index(std::size_t layer) const { return static_cast<int>(layers[layer].size()) - 1; }
    const GraphEdge* find_edge(std::size_t k, int from, int to) const;
    const PeakGrouping* grouping_of(const AssignmentNode& node) const;

    // Appends a node/edge with consistent bookkeeping; used by synthetic generators.
    AssignmentNode& add_node(std::size_t layer, NodeKind kind, std::optional<std::string> ref = std::nullopt,
                             std::vector<std::string> peaks = {});
    void add_edge(std::size_t k, int from, int to, double cost, double threshold = 0.0);
    void sort_edges();

    // Structural checks: layer shapes, one Dummy per inner layer (last),
    // edges between consecutive layers with finite costs, Dummy connectivity.
    void check() const;
};

// Observations of a grouping split by the residue they describe.
AtomObservations intra_observations(const PeakGrouping& g);
AtomObservations prev_observations(const PeakGrouping& g);

// Definition-2 cost of one residue given its observations; nullopt when an
// observed atom is chemically absent from the residue.
std::optional<double> residue_cost(char residue, const AtomObservations& obs, const PriorTable& priors);

// Sum of per-atom typing thresholds for the noise levels of the supplied
// observations (only the sigmas matter).
double residue_threshold(char residue, const AtomObservations& obs, const PriorTable& priors, double delta);

// Threshold for the full expected observation set of residue k (0-based):
// the cost assigned to edges leaving the Dummy of that residue.
double dummy_threshold(const ProteinSequence& seq, std::size_t k, const PriorTable& priors,
                       const ObservationModel& model, double delta);

struct TypingResult {
    bool keep = false;
    double cost = 0.0;
    double threshold = 0.0;
};

// Statistical typing of one grouping at residue k (0-based): intra cost must
// not exceed the threshold for the grouping's own observation counts, and
// *_prev observations must refer to atoms the preceding residue carries.
TypingResult type_grouping(const PeakGrouping& g, const ProteinSequence& seq, std::size_t k,
                           const PriorTable& priors, const Tolerances& tol);

// Indices of the candidates retained by typing at residue k; ties retained.
std::vector<int> prune_by_typing(std::span<const PeakGrouping> candidates, const ProteinSequence& seq,
                                 std::size_t k, const PriorTable& priors, const Tolerances& tol);

struct GraphOptions {
    unsigned threads = 1;
};

AssignmentGraph build_graph(std::span<const PeakGrouping> groupings, const ProteinSequence& seq,
                            const PriorTable& priors, const Tolerances& tol, const ObservationModel& model,
                            const GraphOptions& opts = {});

struct GraphStats {
    std::vector<std::size_t> layer_sizes;
    std::vector<std::size_t> edge_counts;  // per layer pair
    std::size_t total_edges = 0;
    std::vector<double> densities;  // edges / (|L_k| * |L_k+1|)
    double density = 0.0;           // total over all layer pairs
};

GraphStats graph_stats(const AssignmentGraph& g);

// Walks a path given as one node index per layer and returns its edge costs in
// layer order; throws PathNotInGraph when an edge is missing.
std::vector<double> path_edge_costs(const AssignmentGraph& g, std::span<const int> nodes);

}  // namespace nmrpath
