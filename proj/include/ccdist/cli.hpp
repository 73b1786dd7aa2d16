#pragma once

// Command-line front end. Exit codes: 0 success, 1 non-convergence,
// 2 classification/invariant failure, 3 usage error. CCDIST_SEED overrides
// the default seed (0); an explicit --seed wins over both.

#include "ccdist/report.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace ccdist {

enum class Command {
    solve_trapezoid,
    solve_collinear,
    enumerate_moulton,
    verify_identities,
    cross_validate,
    uniqueness_probe
};

struct RunConfig {
    Command command = Command::solve_trapezoid;
    std::vector<double> masses;
    double tol = 1e-12;
    uint64_t seed = 0;
    std::string output_path;  // empty: stdout
    std::string input_path;
    std::vector<int> ordering;
    double rho = 0.5;
    double height = 1.0;
    int starts = 100;
    int trials = 1000;
};

namespace detail {

inline MassVector masses_from_config(const RunConfig& cfg)
{
    std::vector<double> masses = cfg.masses;
    if (masses.empty() && !cfg.input_path.empty()) {
        const auto doc = read_report(cfg.input_path);
        masses = doc.at("masses").get<std::vector<double>>();
    }
    if (masses.empty())
        throw CLI::ValidationError("--masses", "masses required (inline or via --input)");
    for (double v : masses)
        if (!(v > 0.0))
            throw CLI::ValidationError("--masses", "mass must be positive");
    return MassVector(masses);
}

inline void emit(const nlohmann::json& j, const RunConfig& cfg)
{
    if (cfg.output_path.empty())
        std::cout << j.dump(2) << "\n";
    else
        write_report(j, cfg.output_path);
}

}  // namespace detail

// Argument parsing only; does not run anything. Throws CLI::ParseError on
// bad input (run_cli turns that into exit code 3).
inline RunConfig parse_args(int argc, const char* const* argv)
{
    RunConfig cfg;
    if (const char* env = std::getenv("CCDIST_SEED"))
        cfg.seed = std::strtoull(env, nullptr, 10);

    CLI::App app{"central configurations in mutual-distance coordinates"};
    app.require_subcommand(1);
    app.failure_message(CLI::FailureMessage::simple);

    std::string masses_csv;
    const auto add_common = [&](CLI::App* sub) {
        sub->add_option("--masses", masses_csv, "comma-separated positive masses");
        sub->add_option("--input", cfg.input_path, "JSON file ({\"masses\": [...]} or a report)");
        sub->add_option("--output", cfg.output_path, "write the JSON report here (default stdout)");
        sub->add_option("--tol", cfg.tol, "solver tolerance on the residual norm");
        sub->add_option("--seed", cfg.seed, "RNG seed");
    };

    auto* trap = app.add_subcommand("solve-trapezoid",
                                    "solve the 5-body trapezoid stationarity system");
    add_common(trap);
    trap->add_option("--rho", cfg.rho, "initial guess: ratio r45/r13");
    trap->add_option("--height", cfg.height, "initial guess: trapezoid height");

    auto* coll = app.add_subcommand("solve-collinear",
                                    "solve one collinear ordering (default 1..n)");
    add_common(coll);
    coll->add_option("--ordering", cfg.ordering, "left-to-right body labels")->delimiter(',');

    auto* moul = app.add_subcommand("enumerate-moulton",
                                    "solve all n!/2 collinear orderings");
    add_common(moul);

    auto* fuzz = app.add_subcommand("verify-identities",
                                    "fuzz the distance-geometry identities");
    add_common(fuzz);
    fuzz->add_option("--trials", cfg.trials, "number of random trials");

    auto* xval = app.add_subcommand("cross-validate",
                                    "validate a solution report against the position-space oracle");
    add_common(xval);

    auto* uniq = app.add_subcommand("uniqueness-probe",
                                    "multi-start probe for distinct solutions");
    add_common(uniq);
    uniq->add_option("--starts", cfg.starts, "number of randomized starts");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        std::cout << app.help();
        throw;
    }

    if (trap->parsed())
        cfg.command = Command::solve_trapezoid;
    else if (coll->parsed())
        cfg.command = Command::solve_collinear;
    else if (moul->parsed())
        cfg.command = Command::enumerate_moulton;
    else if (fuzz->parsed())
        cfg.command = Command::verify_identities;
    else if (xval->parsed())
        cfg.command = Command::cross_validate;
    else
        cfg.command = Command::uniqueness_probe;

    if (!masses_csv.empty()) {
        std::stringstream ss(masses_csv);
        std::string item;
        while (std::getline(ss, item, ','))
            cfg.masses.push_back(std::stod(item));
        for (double v : cfg.masses)
            if (!(v > 0.0))
                throw CLI::ValidationError("--masses", "mass must be positive");
    }
    return cfg;
}

inline int run(const RunConfig& cfg)
{
    Provenance prov;
    prov.seed = cfg.seed;
    prov.solver_tol = cfg.tol;

    switch (cfg.command) {
        case Command::solve_trapezoid: {
            const MassVector m = detail::masses_from_config(cfg);
            prov.produced_by = "newton_solve on the 13x13 stationarity system";
            auto res = newton_solve(m, initial_guess_symmetric(m, cfg.rho, cfg.height),
                                    {cfg.tol, 100, -1.0});
            if (!converged(res)) {
                const auto& f = std::get<SolveFailure>(res);
                std::cerr << "solve-trapezoid failed: " << f.message
                          << " (last residual " << f.last_residual << ")\n";
                return f.kind == SolveFailure::Kind::invalid_region ? 2 : 1;
            }
            const auto& sol = std::get<TrapezoidSolution>(res);
            detail::emit(trapezoid_json(sol, m, prov), cfg);
            return sol.flags.all() && sol.symmetry.cls != SymmetryClass::violation ? 0 : 2;
        }
        case Command::solve_collinear: {
            const MassVector m = detail::masses_from_config(cfg);
            Ordering ord = cfg.ordering.empty() ? Ordering::identity(m.n())
                                                : Ordering{cfg.ordering};
            if (!ord.valid() || ord.n() != m.n())
                throw CLI::ValidationError("--ordering", "not a permutation of 1..n");
            prov.produced_by = "solve_ordering (gap-coordinate Newton)";
            auto res = solve_ordering(m, ord, {cfg.tol, 100, {}});
            if (!converged(res)) {
                std::cerr << "solve-collinear failed: " << std::get<SolveFailure>(res).message
                          << "\n";
                return 1;
            }
            const auto& sol = std::get<CollinearSolution>(res);
            detail::emit(collinear_json(sol, m, prov), cfg);
            return sol.delta_bracket_ok && (sol.spectrum.array() > 0.0).all() ? 0 : 2;
        }
        case Command::enumerate_moulton: {
            const MassVector m = detail::masses_from_config(cfg);
            prov.produced_by = "moulton_enumerate over reflection-canonical orderings";
            std::vector<CollinearSolution> sols;
            try {
                sols = moulton_enumerate(m, {cfg.tol, 100, {}});
            } catch (const EnumerationIncomplete& e) {
                std::cerr << e.what() << "\n";
                return 1;
            }
            detail::emit(moulton_json(sols, m, prov), cfg);
            return 0;
        }
        case Command::verify_identities: {
            prov.produced_by = "identity_fuzzer";
            const FuzzReport rep = identity_fuzzer(cfg.seed, cfg.trials);
            detail::emit(fuzz_json(rep, prov), cfg);
            return rep.pass ? 0 : 2;
        }
        case Command::cross_validate: {
            if (cfg.input_path.empty())
                throw CLI::ValidationError("--input", "a solution report is required");
            const auto doc = read_report(cfg.input_path);
            const MassVector m(doc.at("masses").get<std::vector<double>>());
            const DistanceVector r = distances_from_json(doc.at("solution"), m.n());
            prov.produced_by = "cross_validate (trilateration + position-space oracle)";
            try {
                const CrossValidation cv = cross_validate(r, m, {cfg.tol, 200, 1, 3, -1.0});
                detail::emit(cross_validate_json(cv, m, prov), cfg);
                return cv.max_rel_distance_error < 1e-8 ? 0 : 2;
            } catch (const ReconstructionError& e) {
                std::cerr << "cross-validate failed: " << e.what() << "\n";
                return 2;
            }
        }
        case Command::uniqueness_probe: {
            const MassVector m = detail::masses_from_config(cfg);
            prov.produced_by = "uniqueness_probe (multi-start newton_solve)";
            const UniquenessReport rep =
                uniqueness_probe(m, cfg.starts, cfg.seed, {cfg.tol, 100, -1.0});
            detail::emit(uniqueness_json(rep, m, prov), cfg);
            return rep.clusters <= 1 ? 0 : 2;
        }
    }
    return 3;
}

inline int run_cli(int argc, const char* const* argv)
{
    try {
        const RunConfig cfg = parse_args(argc, argv);
        return run(cfg);
    } catch (const CLI::CallForHelp&) {
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace ccdist
