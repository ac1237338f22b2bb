// src/rounding.cpp

#include "nmrpath/rounding.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace nmrpath {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

using Mask = std::vector<std::vector<char>>;  // [k][edge index]

Mask full_mask(const AssignmentGraph& g, char value) {
    Mask m(g.edges.size());
    for (std::size_t k = 0; k < g.edges.size(); ++k) m[k].assign(g.edges[k].size(), value);
    return m;
}

std::size_t mask_count(const Mask& m) {
    std::size_t c = 0;
    for (const auto& v : m) c += static_cast<std::size_t>(std::count(v.begin(), v.end(), 1));
    return c;
}

bool touches_dummy(const AssignmentGraph& g, std::size_t k, const GraphEdge& e) {
    const std::size_t n = g.residues();
    if (k >= 1 && e.from == g.dummy_index(k)) return true;
    if (k + 1 <= n && e.to == g.dummy_index(k + 1)) return true;
    return false;
}

}  // namespace

// Starting point for the relaxation: the DP path at 1, and as basis the
// shortest-path tree (one incoming edge per reachable inner node, placed in
// that node's coupling row). The tree is triangular, hence nonsingular. Path
// edges are tight against the tree, so the start is dual feasible and only
// the utilization rows of reused peaks are violated.
WarmStart warm_start(const AssignmentGraph& g, const Formulation& f, const std::vector<int>& path) {
    WarmStart ws;
    ws.x.assign(f.lp.num_vars(), 0.0);
    for (std::size_t k = 0; k + 1 < path.size(); ++k)
        for (std::size_t e = 0; e < g.edges[k].size(); ++e) {
            const auto& edge = g.edges[k][e];
            if (edge.from == path[k] && edge.to == path[k + 1] && f.edge_var[k][e] >= 0)
                ws.x[static_cast<std::size_t>(f.edge_var[k][e])] = 1.0;
        }
    const std::size_t L = g.layers.size();
    std::vector<std::vector<double>> dist(L);
    for (std::size_t k = 0; k < L; ++k) dist[k].assign(g.layers[k].size(), kInf);
    dist[0][0] = 0.0;
    for (std::size_t k = 0; k + 1 < L; ++k) {
        std::vector<int> pred(g.layers[k + 1].size(), -1);
        for (std::size_t e = 0; e < g.edges[k].size(); ++e) {
            const auto& edge = g.edges[k][e];
            const int v = f.edge_var[k][e];
            const double d = dist[k][static_cast<std::size_t>(edge.from)];
            if (v < 0 || !(d < kInf)) continue;
            auto& to = dist[k + 1][static_cast<std::size_t>(edge.to)];
            if (d + edge.cost < to) {
                to = d + edge.cost;
                pred[static_cast<std::size_t>(edge.to)] = v;
            }
        }
        if (k + 2 < L)
            for (std::size_t i = 0; i < pred.size(); ++i)
                if (pred[i] >= 0) ws.basis.emplace_back(f.coupling_row[k + 1][i], pred[i]);
    }
    // The last selection row carries the path's edge into End, so its dual
    // takes the path length; the other selection rows are implied by flow
    // conservation and keep their artificials.
    const std::size_t n = g.residues();
    if (n >= 1 && f.selection_rows == n && path.size() == L)
        if (const GraphEdge* e = g.find_edge(n, path[n], path[n + 1])) {
            const int v = f.edge_var[n][static_cast<std::size_t>(e - g.edges[n].data())];
            if (v >= 0) ws.basis.emplace_back(static_cast<int>(n) - 1, v);
        }
    return ws;
}

namespace {

int excess_uses(const std::vector<std::pair<std::string, int>>& reused) {
    int e = 0;
    for (const auto& [p, c] : reused) e += c - 1;
    return e;
}

struct Fixing {
    std::size_t k;
    std::size_t edge;
    bool one;
};

class BranchAndBound {
public:
    BranchAndBound(const AssignmentGraph& g, const Tolerances& tol, bool hard, const ResolveOptions& opts,
                   LpBackend& backend)
        : g_(g), tol_(tol), hard_(hard), opts_(opts), backend_(backend) {}

    void offer(const PathSolution& p) {
        const auto reused = reused_peaks(g_, p.nodes);
        if (hard_ && !reused.empty()) return;
        const double obj = p.total_cost + (hard_ ? 0.0 : tol_.lambda * excess_uses(reused));
        if (obj < best_obj_) {
            best_obj_ = obj;
            best_ = p;
            have_ = true;
        }
    }

    // Depth-first search over the subgraph given by `base`.
    void run(const Mask& base) {
        std::vector<std::vector<Fixing>> stack{{}};
        while (!stack.empty()) {
            if (nodes_ >= opts_.node_limit) {
                optimal_ = false;
                return;
            }
            auto fixings = std::move(stack.back());
            stack.pop_back();
            ++nodes_;
            Mask mask = base;
            for (const auto& f : fixings) {
                if (f.one) {
                    for (std::size_t e = 0; e < mask[f.k].size(); ++e)
                        if (e != f.edge) mask[f.k][e] = 0;
                } else {
                    mask[f.k][f.edge] = 0;
                }
            }
            auto branch = evaluate(mask);
            if (!branch) continue;
            auto one = fixings, zero = fixings;
            one.push_back({branch->first, branch->second, true});
            zero.push_back({branch->first, branch->second, false});
            stack.push_back(std::move(zero));
            stack.push_back(std::move(one));  // x = 1 explored first
        }
    }

    bool have() const { return have_; }
    const PathSolution& best() const { return best_; }
    double best_objective() const { return best_obj_; }
    bool optimal() const { return optimal_; }
    std::size_t nodes() const { return nodes_; }
    std::size_t lp_solves() const { return lp_solves_; }

private:
    bool prunable(double lb) const {
        return have_ && lb > best_obj_ + 1e-9 * std::max(1.0, std::abs(best_obj_));
    }

    // Returns the edge to branch on, or nullopt when the node is closed.
    std::optional<std::pair<std::size_t, std::size_t>> evaluate(const Mask& mask) {
        EdgeFilter keep = [&mask, this](std::size_t k, const GraphEdge& e) {
            const auto& list = g_.edges[k];
            const auto idx = static_cast<std::size_t>(&e - list.data());
            return mask[k][idx] != 0;
        };
        const auto values = backward_values(g_, keep);
        if (!(values[0][0] < kInf)) return std::nullopt;
        if (prunable(values[0][0])) return std::nullopt;
        const PathSolution dp = dp_shortest_path(g_, keep);
        const auto reused = reused_peaks(g_, dp.nodes);
        offer(dp);
        if (reused.empty()) return std::nullopt;  // relaxation optimum is feasible

        FormulateOptions fo;
        fo.keep = keep;
        const Formulation f = formulate(g_, hard_ ? LpVariant::LIAN1 : LpVariant::LIAN2, tol_, fo);
        const WarmStart start = warm_start(g_, f, dp.nodes);
        const LpSolution sol = backend_.solve(f.lp, &start);
        ++lp_solves_;
        if (sol.status == LpStatus::Infeasible) return std::nullopt;
        if (sol.status != LpStatus::Optimal)
            throw Error(ErrorCode::InvalidArgument, "LP at branch node ended with status " +
                                                        std::string(to_string(sol.status)));
        if (prunable(std::max(sol.objective, values[0][0]))) return std::nullopt;

        // Most fractional edge variable; ties go to the smallest index.
        int pick = -1;
        double dist = kInf;
        for (std::size_t v = 0; v < f.lp.num_vars(); ++v) {
            if (f.lp.vars[v].kind != LpVar::Kind::Edge) continue;
            const double x = sol.x[v];
            if (x <= 1e-9 || x >= 1.0 - 1e-9) continue;
            const double d = std::abs(x - 0.5);
            if (d < dist) {
                dist = d;
                pick = static_cast<int>(v);
            }
        }
        if (pick < 0) {
            // Integral: the support is a path and the LP value is the node optimum.
            std::vector<int> nodes{0};
            for (std::size_t k = 0; k < g_.edges.size(); ++k)
                for (std::size_t e = 0; e < g_.edges[k].size(); ++e) {
                    const int v = f.edge_var[k][e];
                    if (v >= 0 && sol.x[static_cast<std::size_t>(v)] > 0.5 && g_.edges[k][e].from == nodes.back()) {
                        nodes.push_back(g_.edges[k][e].to);
                        break;
                    }
                }
            if (nodes.size() == g_.layers.size()) offer(make_path(g_, nodes));
            return std::nullopt;
        }
        const auto& meta = f.lp.vars[static_cast<std::size_t>(pick)];
        const auto k = static_cast<std::size_t>(meta.k);
        for (std::size_t e = 0; e < g_.edges[k].size(); ++e)
            if (f.edge_var[k][e] == pick) return std::make_pair(k, e);
        return std::nullopt;
    }

    const AssignmentGraph& g_;
    const Tolerances& tol_;
    bool hard_;
    const ResolveOptions& opts_;
    LpBackend& backend_;
    PathSolution best_;
    double best_obj_ = kInf;
    bool have_ = false;
    bool optimal_ = true;
    std::size_t nodes_ = 0;
    std::size_t lp_solves_ = 0;
};

ResolveReport finish(const AssignmentGraph& g, const BranchAndBound& bb, ResolveReport r) {
    if (!bb.have()) throw Error(ErrorCode::SubgraphInfeasible, "no feasible path in the subgraph");
    r.path = bb.best();
    r.path.optimal = bb.optimal();
    r.objective = bb.best_objective();
    r.optimal = bb.optimal();
    r.bb_nodes += bb.nodes();
    r.lp_solves += bb.lp_solves();
    r.reused = reused_peaks(g, r.path.nodes);
    return r;
}

std::optional<std::vector<int>> integral_path(const AssignmentGraph& g, const Formulation& f, const LpSolution& sol,
                                              double eps) {
    for (std::size_t v = 0; v < f.lp.num_vars(); ++v)
        if (f.lp.vars[v].kind == LpVar::Kind::Edge && sol.x[v] > eps && sol.x[v] < 1.0 - eps) return std::nullopt;
    std::vector<int> nodes{0};
    for (std::size_t k = 0; k < g.edges.size(); ++k) {
        int next = -1;
        for (std::size_t e = 0; e < g.edges[k].size(); ++e) {
            const int v = f.edge_var[k][e];
            if (v >= 0 && sol.x[static_cast<std::size_t>(v)] > 0.5 && g.edges[k][e].from == nodes.back()) {
                next = g.edges[k][e].to;
                break;
            }
        }
        if (next < 0) return std::nullopt;
        nodes.push_back(next);
    }
    return nodes;
}

}  // namespace

ResolveReport round_and_resolve(const AssignmentGraph& g, const Formulation& f, const LpSolution& sol,
                                const Tolerances& tol, LpVariant variant, const ResolveOptions& opts) {
    if (sol.status != LpStatus::Optimal) throw Error(ErrorCode::InvalidArgument, "rounding needs an optimal LP");
    const bool hard = variant != LpVariant::LIAN2;
    BundledBackend bundled;
    LpBackend& backend = opts.backend ? *opts.backend : bundled;

    ResolveReport report;
    if (auto nodes = integral_path(g, f, sol, tol.round_eps)) {
        report.path = make_path(g, *nodes);
        report.reused = reused_peaks(g, report.path.nodes);
        report.objective = report.path.total_cost + (hard ? 0.0 : tol.lambda * excess_uses(report.reused));
        report.support_edges = report.path.nodes.size() - 1;
        return report;
    }

    Mask support = full_mask(g, 0);
    for (std::size_t k = 0; k < g.edges.size(); ++k)
        for (std::size_t e = 0; e < g.edges[k].size(); ++e) {
            const int v = f.edge_var[k][e];
            const bool in_support = v >= 0 && sol.x[static_cast<std::size_t>(v)] > tol.round_eps;
            if (in_support || (v >= 0 && touches_dummy(g, k, g.edges[k][e]))) support[k][e] = 1;
        }
    report.support_edges = mask_count(support);

    BranchAndBound bb(g, tol, hard, opts, backend);
    bb.run(support);
    if (!bb.have()) throw Error(ErrorCode::SubgraphInfeasible, "rounded subgraph has no feasible path");
    if (!opts.certify || !bb.optimal()) return finish(g, bb, report);

    // Any path using an edge whose reduced cost exceeds the gap costs more
    // than the incumbent, so the widened subgraph contains the optimum.
    Mask widened = support;
    if (sol.reduced_costs.size() == f.lp.num_vars()) {
        const double gap = bb.best_objective() - sol.objective;
        const double slack = 1e-7 * std::max(1.0, std::abs(bb.best_objective()));
        for (std::size_t k = 0; k < g.edges.size(); ++k)
            for (std::size_t e = 0; e < g.edges[k].size(); ++e) {
                const int v = f.edge_var[k][e];
                if (v >= 0 && sol.reduced_costs[static_cast<std::size_t>(v)] <= gap + slack) widened[k][e] = 1;
            }
    } else {
        for (std::size_t k = 0; k < g.edges.size(); ++k)
            for (std::size_t e = 0; e < g.edges[k].size(); ++e)
                if (f.edge_var[k][e] >= 0) widened[k][e] = 1;
    }
    if (widened == support) return finish(g, bb, report);
    report.certified_edges = mask_count(widened);
    bb.run(widened);
    return finish(g, bb, report);
}

AssignmentSolve solve_assignment(const AssignmentGraph& g, LpVariant variant, const Tolerances& tol,
                                 const ResolveOptions& opts) {
    AssignmentSolve out;
    out.variant = variant;
    BundledBackend bundled;
    LpBackend& backend = opts.backend ? *opts.backend : bundled;

    if (variant == LpVariant::ILP) {
        BranchAndBound bb(g, tol, true, opts, backend);
        bb.run(full_mask(g, 1));
        ResolveReport r;
        r.support_edges = mask_count(full_mask(g, 1));
        out.result = finish(g, bb, r);
        return out;
    }
    const Formulation f = formulate(g, variant, tol);
    out.lp_rows = f.lp.rows.size();
    out.lp_vars = f.lp.num_vars();
    const PathSolution dp = dp_shortest_path(g);
    const WarmStart start = warm_start(g, f, dp.nodes);
    out.lp = backend.solve(f.lp, &start);
    if (out.lp.status != LpStatus::Optimal)
        throw Error(ErrorCode::InvalidArgument, "root LP ended with status " + std::string(to_string(out.lp.status)));
    out.lp.integrality = integrality_of(f.lp, out.lp.x, tol.round_eps);
    out.result = round_and_resolve(g, f, out.lp, tol, variant, opts);
    out.result.lp_solves += 1;
    return out;
}

ResolveReport solve_lian2(const AssignmentGraph& g, const Tolerances& tol, const ResolveOptions& opts) {
    return solve_assignment(g, LpVariant::LIAN2, tol, opts).result;
}

bool path_is_feasible(const AssignmentGraph& g, const PathSolution& p, bool hard_utilization) {
    if (p.nodes.size() != g.layers.size() || p.nodes.front() != 0 || p.nodes.back() != 0) return false;
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < p.nodes.size(); ++k) {
        const GraphEdge* e = g.find_edge(k, p.nodes[k], p.nodes[k + 1]);
        if (!e) return false;
        if (k < p.edge_costs.size() && p.edge_costs[k] != e->cost) return false;
        total += e->cost;
    }
    if (total != p.total_cost) return false;
    return !hard_utilization || reused_peaks(g, p.nodes).empty();
}

}  // namespace nmrpath
