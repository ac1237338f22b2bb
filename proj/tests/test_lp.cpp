// tests/test_lp.cpp

#include <cstdlib>
#include <random>
#include <sstream>

#include "doctest.h"
#include "nmrpath/lp.hpp"
#include "nmrpath/rounding.hpp"
#include "nmrpath/simplex.hpp"
#include "test_support.hpp"

using namespace nmrpath;
using namespace nmrpath::testing;

namespace {

AssignmentGraph dummy_chain(std::size_t n) {
    AssignmentGraph g;
    g.add_node(0, NodeKind::Start);
    for (std::size_t k = 1; k <= n; ++k) g.add_node(k, NodeKind::Dummy);
    g.add_node(n + 1, NodeKind::End);
    g.add_edge(0, 0, 0, 0.0);
    for (std::size_t k = 1; k <= n; ++k) g.add_edge(k, 0, 0, 2.0, 2.0);
    g.check();
    return g;
}

// n=2, layer 1 = {a(p1), b(p2), Dummy}, layer 2 = {c(p1, p3), d(p4), Dummy},
// every structural edge present; a and c share p1.
AssignmentGraph two_by_two() {
    AssignmentGraph g;
    g.add_node(0, NodeKind::Start);
    g.add_node(1, NodeKind::Regular, "a", {"p1"});
    g.add_node(1, NodeKind::Regular, "b", {"p2"});
    g.add_node(1, NodeKind::Dummy);
    g.add_node(2, NodeKind::Regular, "c", {"p1", "p3"});
    g.add_node(2, NodeKind::Regular, "d", {"p4"});
    g.add_node(2, NodeKind::Dummy);
    g.add_node(3, NodeKind::End);
    double c = 0.0;
    for (int j = 0; j < 3; ++j) g.add_edge(0, 0, j, c++);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) g.add_edge(1, i, j, c++);
    for (int i = 0; i < 3; ++i) g.add_edge(2, i, 0, c++);
    g.sort_edges();
    g.check();
    return g;
}

std::vector<std::vector<double>> dense(const LinearProgram& lp) {
    std::vector<std::vector<double>> m(lp.rows.size(), std::vector<double>(lp.num_vars(), 0.0));
    for (std::size_t i = 0; i < lp.rows.size(); ++i)
        for (const auto& [v, a] : lp.rows[i].coefs) m[i][static_cast<std::size_t>(v)] = a;
    return m;
}

LinearProgram one_var(double lo_row) {
    LinearProgram lp;
    lp.add_var(1.0, 0.0, 1.0);
    LpRow r;
    r.coefs = {{0, 1.0}};
    r.sense = Sense::Ge;
    r.rhs = lo_row;
    lp.add_row(r);
    return lp;
}

// Path cost plus lambda for every use of a peak beyond the first.
double penalized(const AssignmentGraph& g, const PathSolution& p, double lambda) {
    double extra = 0.0;
    for (const auto& [peak, uses] : reused_peaks(g, p.nodes)) extra += uses - 1;
    return p.total_cost + lambda * extra;
}

bool scipy_available() {
    static const bool ok = std::system("python3 -c 'import scipy' >/dev/null 2>&1") == 0;
    return ok;
}

}  // namespace

TEST_CASE("dummies-only formulation") {
    const auto f = formulate(dummy_chain(3), LpVariant::LIAN1, Tolerances{});
    CHECK(f.lp.num_vars() == 4);
    CHECK(f.selection_rows == 3);
    CHECK(f.coupling_rows == 3);
    CHECK(f.utilization_rows == 0);
    CHECK_NOTHROW(f.lp.check());
    const auto s = solve_lp(f.lp);
    CHECK(s.status == LpStatus::Optimal);
    CHECK(s.objective == doctest::Approx(6.0));
}

TEST_CASE("conflict fixture has one utilization row") {
    const auto g = conflict_fixture();
    const auto f = formulate(g, LpVariant::LIAN1, Tolerances{});
    CHECK(f.utilization_rows == 1);
    REQUIRE(f.utilization.peak_vars.count("p1") == 1);
    // The row counts a node through its outgoing edges: u1 -> u2, u1 -> Dummy, u2 -> End.
    std::vector<int> expected{f.edge_var[1][0], f.edge_var[1][1], f.edge_var[2][0]};
    CHECK(f.utilization.peak_vars.at("p1") == expected);
    const auto& row = f.lp.rows.back();
    CHECK(row.sense == Sense::Le);
    CHECK(row.rhs == 1.0);
}

TEST_CASE("n=2 fixture matches the hand-written matrix") {
    const auto g = two_by_two();
    const auto f = formulate(g, LpVariant::LIAN2, Tolerances{});
    // Vars: v0..v2 leave Start, v3 + 3i + j is layer-1 node i -> layer-2 node j,
    // v12..v14 enter End, v15 is the slack of p1.
    REQUIRE(f.lp.num_vars() == 16);
    for (int v = 0; v < 15; ++v) CHECK(f.lp.cost[static_cast<std::size_t>(v)] == static_cast<double>(v));
    CHECK(f.lp.cost[15] == 5.0);
    CHECK(f.lp.upper[15] >= kInfinity);

    const std::vector<std::vector<double>> A = {
        //  0  1  2  3  4  5  6  7  8  9 10 11 12 13 14 15
        {0, 0, 0, 1, 1, 1, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0},        // select layer pair 1
        {0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 1, 1, 0},        // select layer pair 2
        {1, 0, 0, -1, -1, -1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0},     // a
        {0, 1, 0, 0, 0, 0, -1, -1, -1, 0, 0, 0, 0, 0, 0, 0},     // b
        {0, 0, 1, 0, 0, 0, 0, 0, 0, -1, -1, -1, 0, 0, 0, 0},     // Dummy(1)
        {0, 0, 0, 1, 0, 0, 1, 0, 0, 1, 0, 0, -1, 0, 0, 0},       // c
        {0, 0, 0, 0, 1, 0, 0, 1, 0, 0, 1, 0, 0, -1, 0, 0},       // d
        {0, 0, 0, 0, 0, 1, 0, 0, 1, 0, 0, 1, 0, 0, -1, 0},       // Dummy(2)
        {0, 0, 0, 1, 1, 1, 0, 0, 0, 0, 0, 0, 1, 0, 0, -1},       // p1: a and c, minus slack
    };
    const std::vector<Sense> senses{Sense::Eq, Sense::Eq, Sense::Eq, Sense::Eq, Sense::Eq,
                                    Sense::Eq, Sense::Eq, Sense::Eq, Sense::Le};
    const std::vector<double> rhs{1, 1, 0, 0, 0, 0, 0, 0, 1};
    CHECK(dense(f.lp) == A);
    for (std::size_t i = 0; i < A.size(); ++i) {
        CHECK(f.lp.rows[i].sense == senses[i]);
        CHECK(f.lp.rows[i].rhs == rhs[i]);
    }
}

TEST_CASE("one-variable LP") {
    const auto s = solve_lp(one_var(0.5));
    REQUIRE(s.status == LpStatus::Optimal);
    CHECK(s.x[0] == doctest::Approx(0.5));
    CHECK(s.objective == doctest::Approx(0.5));
    CHECK(solve_lp(one_var(2.0)).status == LpStatus::Infeasible);
}

TEST_CASE("unbounded LP") {
    LinearProgram lp;
    lp.add_var(-1.0, 0.0, kInfinity);
    lp.add_var(0.0, 0.0, 1.0);
    LpRow r;
    r.coefs = {{0, 1.0}, {1, -1.0}};
    r.sense = Sense::Ge;
    r.rhs = 0.0;
    lp.add_row(r);
    CHECK(solve_lp(lp).status == LpStatus::Unbounded);
}

TEST_CASE("shortest-path LP on the A/B/C/D fixture is integral") {
    const auto g = abcd_fixture();
    const auto f = formulate(g, LpVariant::LIAN1, Tolerances{}, FormulateOptions{false, {}});
    const auto s = solve_lp(f.lp);
    REQUIRE(s.status == LpStatus::Optimal);
    CHECK(s.objective == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(s.integrality.all_integral());
    CHECK(max_violation(f.lp, s.x) < 1e-7);
    CHECK(s.objective == doctest::Approx(dp_shortest_path(g).total_cost));
}

TEST_CASE("flow polytope is integral on random graphs") {
    std::mt19937_64 rng(2024);
    for (int t = 0; t < 25; ++t) {
        RandomGraphSpec spec;
        spec.n = 1 + rng() % 12;
        spec.max_regular = 1 + rng() % 6;
        spec.quantized = false;
        const auto g = random_layered_graph(rng, spec);
        const auto f = formulate(g, LpVariant::LIAN1, Tolerances{}, FormulateOptions{false, {}});
        const auto s = solve_lp(f.lp);
        REQUIRE(s.status == LpStatus::Optimal);
        CHECK(s.integrality.all_integral());
        CHECK(std::abs(s.objective - dp_shortest_path(g).total_cost) < 1e-6);
    }
}

TEST_CASE("shortest-path tree start reaches the cold-start optimum") {
    std::mt19937_64 rng(31);
    int violated = 0;
    for (int t = 0; t < 30; ++t) {
        RandomGraphSpec spec;
        spec.n = 2 + rng() % 8;
        spec.max_regular = 1 + rng() % 5;
        spec.pool = 3 + rng() % 10;
        const auto g = random_layered_graph(rng, spec);
        Tolerances tol;
        tol.lambda = 2.5;
        for (auto v : {LpVariant::LIAN1, LpVariant::LIAN2}) {
            const auto f = formulate(g, v, tol);
            const auto dp = dp_shortest_path(g);
            violated += !reused_peaks(g, dp.nodes).empty();
            const WarmStart start = warm_start(g, f, dp.nodes);
            const auto cold = solve_simplex(f.lp);
            const auto warm = solve_simplex(f.lp, {}, &start);
            REQUIRE(cold.status == LpStatus::Optimal);
            REQUIRE(warm.status == LpStatus::Optimal);
            CHECK(std::abs(warm.objective - cold.objective) < 1e-7);
            CHECK(max_violation(f.lp, warm.x) < 1e-7);
        }
    }
    CHECK(violated > 0);  // the dual pivots actually ran somewhere
}

TEST_CASE("conflict fixture: LIAN-1 bound and rounding") {
    const auto g = conflict_fixture();
    const Tolerances tol;
    const auto f = formulate(g, LpVariant::LIAN1, tol);
    const auto s = solve_lp(f.lp);
    REQUIRE(s.status == LpStatus::Optimal);
    CHECK(s.objective <= 10.0 + 1e-9);
    const auto r = round_and_resolve(g, f, s, tol, LpVariant::LIAN1);
    CHECK(r.objective == 10.0);
    CHECK(r.optimal);
    CHECK(path_is_feasible(g, r.path, true));
    const int dummies = (r.path.nodes[1] == g.dummy_index(1)) + (r.path.nodes[2] == g.dummy_index(2));
    CHECK(dummies == 1);
}

TEST_CASE("LIAN-2 penalty on the conflict fixture") {
    const auto g = conflict_fixture();
    Tolerances tol;
    tol.lambda = 5.0;
    const auto cheap = solve_lian2(g, tol);
    CHECK(cheap.objective == 5.0);
    CHECK(cheap.path.total_cost == 0.0);
    REQUIRE(cheap.reused.size() == 1);
    CHECK(cheap.reused[0] == std::pair<std::string, int>{"p1", 2});
    CHECK(path_is_feasible(g, cheap.path, false));
    CHECK_FALSE(path_is_feasible(g, cheap.path, true));

    tol.lambda = 100.0;
    const auto strict = solve_lian2(g, tol);
    CHECK(strict.objective == 10.0);
    CHECK(strict.reused.empty());
}

TEST_CASE("LIAN-2 matches LIAN-1 when nothing conflicts") {
    const auto g = abcd_fixture();
    for (double lambda : {0.5, 5.0, 50.0}) {
        Tolerances tol;
        tol.lambda = lambda;
        const auto a = solve_assignment(g, LpVariant::LIAN1, tol);
        const auto b = solve_lian2(g, tol);
        CHECK(a.result.path.nodes == b.path.nodes);
        CHECK(a.result.objective == b.objective);
    }
}

TEST_CASE("integral LP support is returned unchanged") {
    const auto g = abcd_fixture();
    const Tolerances tol;
    const auto f = formulate(g, LpVariant::LIAN1, tol);
    const auto s = solve_lp(f.lp);
    REQUIRE(s.integrality.all_integral());
    const auto r = round_and_resolve(g, f, s, tol, LpVariant::LIAN1);
    for (std::size_t k = 0; k < g.edges.size(); ++k)
        for (std::size_t e = 0; e < g.edges[k].size(); ++e) {
            const auto& edge = g.edges[k][e];
            const bool on_path = r.path.nodes[k] == edge.from && r.path.nodes[k + 1] == edge.to;
            CHECK((s.x[static_cast<std::size_t>(f.edge_var[k][e])] > 0.5) == on_path);
        }
}

TEST_CASE("every variant reaches the constrained optimum on small random instances") {
    std::mt19937_64 rng(99);
    for (int t = 0; t < 15; ++t) {
        RandomGraphSpec spec;
        spec.n = 2 + rng() % 5;
        spec.max_regular = 4;
        spec.pool = 8;
        const auto g = random_layered_graph(rng, spec);
        const double oracle = exhaustive_constrained(g).total_cost;
        for (auto v : {LpVariant::ILP, LpVariant::LIAN1}) {
            const auto s = solve_assignment(g, v, Tolerances{});
            CHECK(s.result.objective == oracle);
            CHECK(path_is_feasible(g, s.result.path, true));
        }
        Tolerances tol;
        tol.lambda = 3.0;
        CHECK(solve_lian2(g, tol).objective == penalized(g, exhaustive_penalized(g, 3.0), 3.0));
    }
}

TEST_CASE("large lambda recovers the hard constraint") {
    std::mt19937_64 rng(7);
    for (int t = 0; t < 10; ++t) {
        RandomGraphSpec spec;
        spec.n = 2 + rng() % 4;
        spec.pool = 5;
        const auto g = random_layered_graph(rng, spec);
        Tolerances tol;
        tol.lambda = 1000.0;
        const auto r = solve_lian2(g, tol);
        CHECK(r.reused.empty());
        CHECK(r.objective == exhaustive_constrained(g).total_cost);
    }
}

TEST_CASE("node limit yields a flagged incumbent") {
    std::mt19937_64 rng(13);
    RandomGraphSpec spec;
    spec.n = 6;
    spec.max_regular = 4;
    spec.pool = 4;
    const auto g = random_layered_graph(rng, spec);
    ResolveOptions opts;
    opts.node_limit = 1;
    opts.certify = false;
    const auto s = solve_assignment(g, LpVariant::ILP, Tolerances{}, opts);
    CHECK(path_is_feasible(g, s.result.path, true));
    CHECK(s.result.objective >= exhaustive_constrained(g).total_cost);
}

TEST_CASE("CPLEX-LP export names every variable and row") {
    const auto f = formulate(conflict_fixture(), LpVariant::LIAN2, Tolerances{});
    std::ostringstream os;
    write_cplex_lp(os, f.lp);
    const auto text = os.str();
    CHECK(text.find("Minimize") != std::string::npos);
    CHECK(text.find("util_p1") != std::string::npos);
    CHECK(text.find("x_1_0_0") != std::string::npos);
    CHECK(text.find("End") != std::string::npos);
}

TEST_CASE("external backend through a scipy script") {
    if (!scipy_available()) {
        MESSAGE("python3 with scipy not found; external backend not exercised");
        return;
    }
    auto backend = make_backend(std::string("external:") + NMRPATH_TEST_DIR + "/scipy_lp.py");
    CHECK(backend->name().rfind("external:", 0) == 0);
    const auto s = backend->solve(one_var(0.5));
    REQUIRE(s.status == LpStatus::Optimal);
    CHECK(s.x[0] == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(backend->solve(one_var(2.0)).status == LpStatus::Infeasible);

    std::mt19937_64 rng(31);
    for (int t = 0; t < 5; ++t) {
        RandomGraphSpec spec;
        spec.n = 2 + rng() % 4;
        const auto g = random_layered_graph(rng, spec);
        ResolveOptions opts;
        opts.backend = backend.get();
        const auto ext = solve_assignment(g, LpVariant::LIAN1, Tolerances{}, opts);
        CHECK(ext.result.objective == exhaustive_constrained(g).total_cost);
    }
    CHECK_THROWS_AS(make_backend("cplex"), Error);
}
