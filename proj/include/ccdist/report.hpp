#pragma once

// JSON reports for solver results and golden fixtures, schema_version 1.
// Distances are keyed "r_12".."r_45"; doubles round-trip bit-exactly through
// nlohmann's shortest-representation serializer.

#include "ccdist/collinear.hpp"
#include "ccdist/oracle.hpp"
#include "ccdist/trapezoid.hpp"

#include <json.hpp>

#include <fstream>
#include <string>

namespace ccdist {

inline constexpr int kSchemaVersion = 1;

struct Provenance {
    uint64_t seed = 0;
    double solver_tol = 1e-12;
    double classification_tol = 1e-9;
    double clustering_tol = 1e-6;
    int iterations = 0;
    std::string produced_by;
};

inline nlohmann::json provenance_json(const Provenance& p)
{
    return {{"seed", p.seed},
            {"tolerances",
             {{"solver", p.solver_tol},
              {"classification", p.classification_tol},
              {"clustering", p.clustering_tol}}},
            {"iterations", p.iterations},
            {"produced_by", p.produced_by}};
}

inline std::string pair_key(int i, int j)
{
    return "r_" + std::to_string(i) + std::to_string(j);
}

inline nlohmann::json distances_json(const DistanceVector& r)
{
    nlohmann::json out;
    for (int p = 0; p < r.pairs(); ++p) {
        const auto [i, j, lin] = pair_from_linear(p, r.n());
        out[pair_key(i, j)] = r[p];
    }
    return out;
}

inline DistanceVector distances_from_json(const nlohmann::json& obj, int n)
{
    Eigen::VectorXd packed(pair_count(n));
    for (int p = 0; p < pair_count(n); ++p) {
        const auto [i, j, lin] = pair_from_linear(p, n);
        packed[p] = obj.at(pair_key(i, j)).get<double>();
    }
    return {n, std::move(packed)};
}

inline nlohmann::json trapezoid_json(const TrapezoidSolution& sol, const MassVector& m,
                                     Provenance prov, const std::string& command = "solve-trapezoid")
{
    prov.iterations = sol.iterations;
    nlohmann::json solution = distances_json(sol.r);
    solution["delta"] = sol.mult.delta;
    solution["omega"] = sol.mult.omega;
    solution["theta"] = sol.mult.theta;
    nlohmann::json j{
        {"schema_version", kSchemaVersion},
        {"command", command},
        {"masses", m.values()},
        {"solution", solution},
        {"residual_norm", sol.residual_norm},
        {"spectrum", {{"zeta", sol.spectrum}}},
        {"classification",
         {{"delta_positive", sol.flags.delta_positive},
          {"omega_positive", sol.flags.omega_positive},
          {"theta_positive", sol.flags.theta_positive},
          {"r24_eq_r25", sol.flags.r24_eq_r25},
          {"inequality_chain", sol.flags.inequality_chain},
          {"spectrum_positive", sol.flags.spectrum_positive},
          {"spectrum_matches_numeric", sol.flags.spectrum_matches_numeric},
          {"passed", sol.flags.all()},
          {"violations", sol.flags.violations}}},
        {"symmetry",
         {{"class", to_string(sol.symmetry.cls)},
          {"constraint_defects",
           {{"r12_minus_r23", sol.symmetry.constraint_defects[0]},
            {"r14_minus_r35", sol.symmetry.constraint_defects[1]},
            {"r15_minus_r34", sol.symmetry.constraint_defects[2]},
            {"r24_minus_r25", sol.symmetry.constraint_defects[3]}}},
          {"mass_defects",
           {{"m1_minus_m3", sol.symmetry.mass_defects[0]},
            {"m4_minus_m5", sol.symmetry.mass_defects[1]}}},
          {"mirrored", sol.symmetry.mirrored},
          {"violations", sol.symmetry.violations}}},
        {"provenance", provenance_json(prov)}};
    return j;
}

inline nlohmann::json collinear_solution_json(const CollinearSolution& sol, const MassVector& m)
{
    nlohmann::json solution = distances_json(sol.distances());
    solution["delta"] = sol.delta;
    nlohmann::json sigma;
    int idx = 0;
    const int n = sol.ordering.n();
    for (int i = 2; i <= n - 1; ++i)
        for (int j = i + 1; j <= n; ++j)
            sigma["sigma_" + std::to_string(i) + std::to_string(j)] = sol.sigma[idx++];
    return {{"ordering", sol.ordering.perm},
            {"gaps", std::vector<double>(sol.gaps.begin(), sol.gaps.end())},
            {"solution", solution},
            {"sigma", sigma},
            {"residual_norm", sol.residual_norm},
            {"spectrum", std::vector<double>(sol.spectrum.begin(), sol.spectrum.end())},
            {"s_signs", sol.s_signs},
            {"delta_bracket_ok", sol.delta_bracket_ok},
            {"masses", m.values()}};
}

inline nlohmann::json collinear_json(const CollinearSolution& sol, const MassVector& m,
                                     Provenance prov)
{
    prov.iterations = sol.iterations;
    nlohmann::json j = collinear_solution_json(sol, m);
    j["schema_version"] = kSchemaVersion;
    j["command"] = "solve-collinear";
    j["provenance"] = provenance_json(prov);
    return j;
}

inline nlohmann::json moulton_json(const std::vector<CollinearSolution>& sols,
                                   const MassVector& m, Provenance prov)
{
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& s : sols)
        arr.push_back(collinear_solution_json(s, m));
    return {{"schema_version", kSchemaVersion},
            {"command", "enumerate-moulton"},
            {"masses", m.values()},
            {"count", sols.size()},
            {"solutions", arr},
            {"provenance", provenance_json(prov)}};
}

inline nlohmann::json fuzz_json(const FuzzReport& rep, Provenance prov)
{
    return {{"schema_version", kSchemaVersion},
            {"command", "verify-identities"},
            {"trials", rep.trials},
            {"seed", rep.seed},
            {"failures", rep.failures},
            {"worst",
             {{"chain_rule", rep.worst_chain_rule},
              {"area_identity", rep.worst_area_identity},
              {"sine_identity", rep.worst_sine_identity},
              {"factorization", rep.worst_factorization}}},
            {"messages", rep.messages},
            {"pass", rep.pass},
            {"provenance", provenance_json(prov)}};
}

inline nlohmann::json uniqueness_json(const UniquenessReport& rep, const MassVector& m,
                                      Provenance prov)
{
    nlohmann::json reps = nlohmann::json::array();
    for (const auto& s : rep.representatives)
        reps.push_back(distances_json(s.r));
    return {{"schema_version", kSchemaVersion},
            {"command", "uniqueness-probe"},
            {"masses", m.values()},
            {"starts", rep.starts},
            {"converged", rep.converged},
            {"clusters", rep.clusters},
            {"cluster_sizes", rep.cluster_sizes},
            {"representatives", reps},
            {"note", rep.note},
            {"provenance", provenance_json(prov)}};
}

inline nlohmann::json cross_validate_json(const CrossValidation& cv, const MassVector& m,
                                          Provenance prov)
{
    return {{"schema_version", kSchemaVersion},
            {"command", "cross-validate"},
            {"masses", m.values()},
            {"max_rel_distance_error", cv.max_rel_distance_error},
            {"oracle",
             {{"lambda", cv.oracle.lambda},
              {"residual_norm", cv.oracle.residual_norm},
              {"per_body_residual_max", cv.oracle.per_body_residual_max},
              {"gauge", cv.oracle.gauge}}},
            {"pass", cv.max_rel_distance_error < 1e-8},
            {"provenance", provenance_json(prov)}};
}

inline void write_report(const nlohmann::json& j, const std::string& path)
{
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("write_report: cannot open " + path);
    out << j.dump(2) << "\n";
    if (!out)
        throw std::runtime_error("write_report: write failed for " + path);
}

inline nlohmann::json read_report(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("read_report: cannot open " + path);
    return nlohmann::json::parse(in);
}

}  // namespace ccdist
