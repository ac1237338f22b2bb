// src/lp_formulate.cpp

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

#include "nmrpath/lp.hpp"
#include "nmrpath/io.hpp"

namespace nmrpath {

std::string_view to_string(LpVariant v) {
    switch (v) {
    case LpVariant::ILP: return "ilp";
    case LpVariant::LIAN1: return "lian1";
    case LpVariant::LIAN2: return "lian2";
    }
    return "?";
}

std::string_view to_string(LpStatus s) {
    switch (s) {
    case LpStatus::Optimal: return "optimal";
    case LpStatus::Infeasible: return "infeasible";
    case LpStatus::Unbounded: return "unbounded";
    case LpStatus::IterLimit: return "iteration_limit";
    }
    return "?";
}

int LinearProgram::add_var(double c, double lo, double hi, LpVar meta) {
    cost.push_back(c);
    lower.push_back(lo);
    upper.push_back(hi);
    vars.push_back(std::move(meta));
    return static_cast<int>(cost.size()) - 1;
}

void LinearProgram::add_row(LpRow row) {
    std::sort(row.coefs.begin(), row.coefs.end());
    rows.push_back(std::move(row));
}

void LinearProgram::check() const {
    const std::size_t n = cost.size();
    if (lower.size() != n || upper.size() != n || vars.size() != n)
        throw Error(ErrorCode::InvalidArgument, "LP dimension mismatch");
    for (std::size_t j = 0; j < n; ++j)
        if (!std::isfinite(cost[j]) || !std::isfinite(lower[j]) || upper[j] < lower[j])
            throw Error(ErrorCode::InvalidArgument, "bad bounds or cost for variable " + std::to_string(j));
    for (const auto& r : rows) {
        for (std::size_t t = 0; t < r.coefs.size(); ++t) {
            const auto [v, a] = r.coefs[t];
            if (v < 0 || static_cast<std::size_t>(v) >= n) throw Error(ErrorCode::InvalidArgument, "row " + r.name);
            if (t > 0 && r.coefs[t - 1].first == v)
                throw Error(ErrorCode::InvalidArgument, "duplicate coefficient in row " + r.name);
            if (!std::isfinite(a)) throw Error(ErrorCode::InvalidArgument, "non-finite coefficient in " + r.name);
        }
        if (!std::isfinite(r.rhs)) throw Error(ErrorCode::InvalidArgument, "non-finite rhs in " + r.name);
    }
}

Formulation formulate(const AssignmentGraph& g, LpVariant variant, const Tolerances& tol,
                      const FormulateOptions& opts) {
    Formulation f;
    auto& lp = f.lp;
    lp.integer = variant == LpVariant::ILP;
    const std::size_t L = g.layers.size();

    f.edge_var.resize(g.edges.size());
    std::vector<std::vector<std::vector<int>>> out_vars(L), in_vars(L);
    for (std::size_t k = 0; k < L; ++k) {
        out_vars[k].resize(g.layers[k].size());
        in_vars[k].resize(g.layers[k].size());
    }
    for (std::size_t k = 0; k < g.edges.size(); ++k) {
        f.edge_var[k].assign(g.edges[k].size(), -1);
        for (std::size_t e = 0; e < g.edges[k].size(); ++e) {
            const auto& edge = g.edges[k][e];
            if (opts.keep && !opts.keep(k, edge)) continue;
            LpVar meta;
            meta.kind = LpVar::Kind::Edge;
            meta.k = static_cast<int>(k);
            meta.from = edge.from;
            meta.to = edge.to;
            meta.name = "x_" + std::to_string(k) + "_" + std::to_string(edge.from) + "_" + std::to_string(edge.to);
            const int v = lp.add_var(edge.cost, 0.0, 1.0, std::move(meta));
            f.edge_var[k][e] = v;
            out_vars[k][static_cast<std::size_t>(edge.from)].push_back(v);
            in_vars[k + 1][static_cast<std::size_t>(edge.to)].push_back(v);
        }
    }

    // Selection rows for layer pairs 1..n; the pair leaving Start is implied
    // by flow conservation.
    for (std::size_t k = 1; k < g.edges.size(); ++k) {
        LpRow r;
        r.sense = Sense::Eq;
        r.rhs = 1.0;
        r.name = "sel_" + std::to_string(k);
        for (int v : f.edge_var[k])
            if (v >= 0) r.coefs.emplace_back(v, 1.0);
        lp.add_row(std::move(r));
        ++f.selection_rows;
    }
    // Flow coupling at each inner node: inflow equals outflow.
    f.coupling_row.resize(L);
    for (std::size_t k = 1; k + 1 < L; ++k)
        for (std::size_t i = 0; i < g.layers[k].size(); ++i) {
            f.coupling_row[k].push_back(static_cast<int>(lp.rows.size()));
            LpRow r;
            r.sense = Sense::Eq;
            r.rhs = 0.0;
            r.name = "flow_" + std::to_string(k) + "_" + std::to_string(i);
            for (int v : in_vars[k][i]) r.coefs.emplace_back(v, 1.0);
            for (int v : out_vars[k][i]) r.coefs.emplace_back(v, -1.0);
            lp.add_row(std::move(r));
            ++f.coupling_rows;
        }

    if (!opts.utilization) return f;

    // Peaks consumed in at least two layers; same-layer sharing needs no row
    // because one node per layer is selected.
    std::map<std::string, std::set<std::size_t>> layers_of;
    std::map<std::string, std::vector<int>> vars_of;
    for (std::size_t k = 1; k + 1 < L; ++k)
        for (std::size_t i = 0; i < g.layers[k].size(); ++i) {
            const auto& node = g.layers[k][i];
            if (out_vars[k][i].empty()) continue;
            for (const auto& p : node.peaks) {
                layers_of[p].insert(k);
                auto& vs = vars_of[p];
                vs.insert(vs.end(), out_vars[k][i].begin(), out_vars[k][i].end());
            }
        }
    for (auto& [peak, vs] : vars_of) {
        if (layers_of[peak].size() < 2) continue;
        std::sort(vs.begin(), vs.end());
        LpRow r;
        r.sense = Sense::Le;
        r.rhs = 1.0;
        r.name = "util_" + peak;
        for (int v : vs) r.coefs.emplace_back(v, 1.0);
        f.utilization.peak_vars[peak] = vs;
        if (variant == LpVariant::LIAN2) {
            LpVar meta;
            meta.kind = LpVar::Kind::Slack;
            meta.peak = peak;
            meta.name = "eps_" + std::to_string(f.slack_var.size());
            const int s = lp.add_var(tol.lambda, 0.0, kInfinity, std::move(meta));
            f.slack_var[peak] = s;
            r.coefs.emplace_back(s, -1.0);
        }
        lp.add_row(std::move(r));
        ++f.utilization_rows;
    }
    return f;
}

IntegralityReport integrality_of(const LinearProgram& lp, const std::vector<double>& x, double eps) {
    IntegralityReport r;
    for (std::size_t j = 0; j < lp.vars.size() && j < x.size(); ++j) {
        if (lp.vars[j].kind != LpVar::Kind::Edge) continue;
        if (std::abs(x[j]) <= eps || std::abs(x[j] - 1.0) <= eps)
            ++r.integral;
        else
            ++r.fractional;
    }
    return r;
}

double max_violation(const LinearProgram& lp, const std::vector<double>& x) {
    double worst = 0.0;
    for (std::size_t j = 0; j < lp.num_vars(); ++j) {
        worst = std::max(worst, lp.lower[j] - x[j]);
        if (lp.upper[j] < kInfinity) worst = std::max(worst, x[j] - lp.upper[j]);
    }
    for (const auto& r : lp.rows) {
        double a = 0.0;
        for (const auto& [v, c] : r.coefs) a += c * x[static_cast<std::size_t>(v)];
        const double d = a - r.rhs;
        if (r.sense == Sense::Le) worst = std::max(worst, d);
        else if (r.sense == Sense::Ge) worst = std::max(worst, -d);
        else worst = std::max(worst, std::abs(d));
    }
    return worst;
}

namespace {

std::string lp_name(const LpVar& v, std::size_t j) {
    std::string s = v.name.empty() ? "v" + std::to_string(j) : v.name;
    for (char& c : s)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') c = '_';
    return s;
}

void write_terms(std::ostream& os, const std::vector<std::pair<int, double>>& terms,
                 const std::vector<std::string>& names) {
    if (terms.empty()) {
        os << " 0 " << names.front();
        return;
    }
    for (const auto& [v, a] : terms) {
        os << (a < 0 ? " - " : " + ") << format_double(std::abs(a)) << " " << names[static_cast<std::size_t>(v)];
    }
}

}  // namespace

void write_cplex_lp(std::ostream& os, const LinearProgram& lp) {
    std::vector<std::string> names;
    for (std::size_t j = 0; j < lp.num_vars(); ++j) names.push_back(lp_name(lp.vars[j], j));
    if (names.empty()) names.push_back("dummy_var");
    os << "\\ assignment LP, " << lp.num_vars() << " variables, " << lp.rows.size() << " rows\n";
    os << "Minimize\n obj:";
    std::vector<std::pair<int, double>> obj;
    for (std::size_t j = 0; j < lp.num_vars(); ++j)
        if (lp.cost[j] != 0.0) obj.emplace_back(static_cast<int>(j), lp.cost[j]);
    write_terms(os, obj, names);
    os << "\nSubject To\n";
    for (std::size_t i = 0; i < lp.rows.size(); ++i) {
        const auto& r = lp.rows[i];
        LpVar tmp;
        tmp.name = r.name;
        os << " " << lp_name(tmp, i) << ":";
        write_terms(os, r.coefs, names);
        os << (r.sense == Sense::Le ? " <= " : r.sense == Sense::Ge ? " >= " : " = ") << format_double(r.rhs)
           << "\n";
    }
    os << "Bounds\n";
    for (std::size_t j = 0; j < lp.num_vars(); ++j) {
        os << " " << format_double(lp.lower[j]) << " <= " << names[j];
        if (lp.upper[j] < kInfinity) os << " <= " << format_double(lp.upper[j]);
        os << "\n";
    }
    if (lp.integer) {
        os << "Binaries\n";
        for (std::size_t j = 0; j < lp.num_vars(); ++j)
            if (lp.vars[j].kind == LpVar::Kind::Edge) os << " " << names[j] << "\n";
    }
    os << "End\n";
}

}  // namespace nmrpath
