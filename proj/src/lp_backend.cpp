// src/lp_backend.cpp
// Backend selection and the file-based contract for external LP solvers.

#include <cstdlib>
#include <filesystem>
#include <unistd.h>

#include "nmrpath/io.hpp"
#include "nmrpath/simplex.hpp"

namespace nmrpath {

namespace {

std::string shell_quote(const std::string& s) {
    std::string out = "'";
    for (char c : s) {
        if (c == '\'')
            out += "'\\''";
        else
            out += c;
    }
    return out + "'";
}

Json lp_to_json(const LinearProgram& lp, const WarmStart* start) {
    Json upper = Json::array();
    for (double u : lp.upper) upper.push_back(u < kInfinity ? Json(u) : Json(nullptr));
    Json rows = Json::array();
    for (const auto& r : lp.rows) {
        Json coefs = Json::array();
        for (const auto& [v, a] : r.coefs) coefs.push_back({v, a});
        rows.push_back({{"name", r.name},
                        {"coefs", coefs},
                        {"sense", r.sense == Sense::Le ? "<=" : r.sense == Sense::Ge ? ">=" : "="},
                        {"rhs", r.rhs}});
    }
    Json j = {{"num_vars", lp.num_vars()}, {"cost", lp.cost}, {"lower", lp.lower}, {"upper", upper}, {"rows", rows}};
    if (start && !start->x.empty()) j["hint"] = start->x;
    return j;
}

LpStatus parse_status(const std::string& s) {
    if (s == "optimal") return LpStatus::Optimal;
    if (s == "infeasible") return LpStatus::Infeasible;
    if (s == "unbounded") return LpStatus::Unbounded;
    if (s == "iteration_limit") return LpStatus::IterLimit;
    throw Error(ErrorCode::Parse, "unknown LP status '" + s + "'");
}

}  // namespace

ExternalBackend::ExternalBackend(std::string program, std::string workdir)
    : program_(std::move(program)), workdir_(std::move(workdir)) {
    if (program_.empty()) throw Error(ErrorCode::InvalidArgument, "external backend needs a program path");
    if (workdir_.empty())
        workdir_ = (std::filesystem::temp_directory_path() / ("nmrpath_lp_" + std::to_string(::getpid()))).string();
}

LpSolution ExternalBackend::solve(const LinearProgram& lp, const WarmStart* start) {
    lp.check();
    const std::filesystem::path dir(workdir_);
    std::filesystem::create_directories(dir);
    const auto id = std::to_string(calls_++);
    const auto in = dir / ("lp_" + id + ".json");
    const auto out = dir / ("solution_" + id + ".json");
    write_json(in, lp_to_json(lp, start));
    std::filesystem::remove(out);
    const std::string cmd = shell_quote(program_) + " " + shell_quote(in.string()) + " " + shell_quote(out.string());
    const int rc = std::system(cmd.c_str());
    if (rc != 0) throw Error(ErrorCode::Io, "external LP solver exited with status " + std::to_string(rc));
    const Json j = read_json(out);
    std::filesystem::remove(in);
    std::filesystem::remove(out);

    LpSolution sol;
    try {
        sol.status = parse_status(j.at("status").get<std::string>());
        if (sol.status == LpStatus::Optimal) {
            sol.x = j.at("x").get<std::vector<double>>();
            if (sol.x.size() != lp.num_vars()) throw Error(ErrorCode::Parse, "external solution has wrong length");
            sol.objective = 0.0;
            for (std::size_t v = 0; v < lp.num_vars(); ++v) sol.objective += lp.cost[v] * sol.x[v];
            if (j.contains("duals")) {
                sol.duals = j.at("duals").get<std::vector<double>>();
                if (sol.duals.size() == lp.rows.size()) {
                    sol.reduced_costs = lp.cost;
                    for (std::size_t i = 0; i < lp.rows.size(); ++i)
                        for (const auto& [v, a] : lp.rows[i].coefs)
                            sol.reduced_costs[static_cast<std::size_t>(v)] -= sol.duals[i] * a;
                } else {
                    sol.duals.clear();
                }
            }
        }
        if (j.contains("iterations")) sol.iterations = j.at("iterations").get<std::size_t>();
    } catch (const Json::exception& e) {
        throw Error(ErrorCode::Parse, std::string("external solution: ") + e.what());
    }
    sol.integrality = integrality_of(lp, sol.x, 1e-6);
    return sol;
}

std::unique_ptr<LpBackend> make_backend(const std::string& selector) {
    if (selector == "bundled") return std::make_unique<BundledBackend>();
    const std::string prefix = "external:";
    if (selector.rfind(prefix, 0) == 0) return std::make_unique<ExternalBackend>(selector.substr(prefix.size()));
    throw Error(ErrorCode::InvalidArgument, "unknown backend '" + selector + "'");
}

}  // namespace nmrpath
