// include/nmrpath/simplex.hpp
// Bundled LP solver: two-phase bounded-variable revised primal simplex with a
// sparse LU basis factorization and product-form updates.

#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "nmrpath/lp.hpp"

namespace nmrpath {

struct SimplexOptions {
    std::size_t iteration_limit = 1'000'000;
    std::size_t bland_after = 10'000;  // consecutive degenerate pivots before Bland's rule
    std::size_t refactor_every = 100;
    double feasibility_tol = 1e-9;
    double optimality_tol = 1e-9;
    double pivot_tol = 1e-7;
};

// Optional starting point. Structural variables start nonbasic at the bound
// nearest to x. When `basis` is given, each (row, var) pair starts basic in
// that row; other rows start with their slack or with an artificial fixed at
// zero. A dual feasible start is repaired with dual simplex pivots, anything
// else with a composite phase 1. A singular start falls
// back to the slack basis.
struct WarmStart {
    std::vector<double> x;
    std::vector<std::pair<int, int>> basis;
};

LpSolution solve_simplex(const LinearProgram& lp, const SimplexOptions& opts = {},
                         const WarmStart* start = nullptr);

// Solver selection: the bundled simplex, or an external program invoked as
// `<program> <lp.json> <solution.json>`.
class LpBackend {
public:
    virtual ~LpBackend() = default;
    virtual LpSolution solve(const LinearProgram& lp, const WarmStart* start = nullptr) = 0;
    virtual std::string name() const = 0;
};

class BundledBackend : public LpBackend {
public:
    explicit BundledBackend(SimplexOptions opts = {}) : opts_(opts) {}
    LpSolution solve(const LinearProgram& lp, const WarmStart* start = nullptr) override;
    std::string name() const override { return "bundled"; }

private:
    SimplexOptions opts_;
};

class ExternalBackend : public LpBackend {
public:
    explicit ExternalBackend(std::string program, std::string workdir = "");
    LpSolution solve(const LinearProgram& lp, const WarmStart* start = nullptr) override;
    std::string name() const override { return "external:" + program_; }

private:
    std::string program_;
    std::string workdir_;
    std::size_t calls_ = 0;
};

// "bundled" or "external:<path>"; throws InvalidArgument otherwise.
std::unique_ptr<LpBackend> make_backend(const std::string& selector);

// Convenience: solve with the bundled simplex.
LpSolution solve_lp(const LinearProgram& lp);

}  // namespace nmrpath
