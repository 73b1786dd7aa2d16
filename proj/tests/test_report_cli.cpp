#include "ccdist/cli.hpp"
#include "ccdist/report.hpp"

#include "helpers.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>

using namespace ccdist;
namespace fs = std::filesystem;

namespace {

int cli(std::initializer_list<const char*> args)
{
    std::vector<const char*> argv{"ccdist"};
    argv.insert(argv.end(), args.begin(), args.end());
    return run_cli(static_cast<int>(argv.size()), argv.data());
}

struct TempDir {
    fs::path path;
    TempDir()
    {
        path = fs::temp_directory_path() /
               ("ccdist_test_" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string feasible_masses_csv()
{
    static const std::string csv = [] {
        const MassVector m = testing::feasible_masses(1.0);
        char buf[256];
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g", m.mass(1), m.mass(2),
                      m.mass(3), m.mass(4), m.mass(5));
        return std::string(buf);
    }();
    return csv;
}

}  // namespace

TEST_CASE("parse_args")
{
    SECTION("inline masses")
    {
        const char* argv[] = {"ccdist", "solve-trapezoid", "--masses", "1,1,1,1,1"};
        const auto cfg = parse_args(4, argv);
        CHECK(cfg.command == Command::solve_trapezoid);
        CHECK(cfg.masses == std::vector<double>{1, 1, 1, 1, 1});
        CHECK(cfg.seed == 0);
    }
    SECTION("non-positive masses are rejected")
    {
        const char* argv[] = {"ccdist", "solve-collinear", "--masses", "1,0,1"};
        CHECK_THROWS_AS(parse_args(4, argv), CLI::ParseError);
        CHECK(cli({"solve-collinear", "--masses", "1,0,1"}) == 3);
    }
    SECTION("unknown command is a usage error")
    {
        CHECK(cli({"solve-everything"}) == 3);
        CHECK(cli({}) == 3);
    }
    SECTION("seed flag and n from masses")
    {
        const char* argv[] = {"ccdist", "enumerate-moulton", "--masses", "1,2,3,4",
                              "--seed",  "7"};
        const auto cfg = parse_args(6, argv);
        CHECK(cfg.command == Command::enumerate_moulton);
        CHECK(cfg.masses.size() == 4);
        CHECK(cfg.seed == 7);
    }
    SECTION("CCDIST_SEED overrides the default, --seed wins")
    {
        ::setenv("CCDIST_SEED", "42", 1);
        const char* argv[] = {"ccdist", "verify-identities"};
        CHECK(parse_args(2, argv).seed == 42);
        const char* argv2[] = {"ccdist", "verify-identities", "--seed", "9"};
        CHECK(parse_args(4, argv2).seed == 9);
        ::unsetenv("CCDIST_SEED");
    }
    SECTION("--help succeeds")
    {
        CHECK(cli({"--help"}) == 0);
    }
}

TEST_CASE("report schema and round-trip")
{
    const MassVector m = testing::feasible_masses(1.0);
    auto res = newton_solve(m, 1.16, 2.04);
    REQUIRE(converged(res));
    const auto& sol = std::get<TrapezoidSolution>(res);

    Provenance prov;
    prov.produced_by = "test";
    const nlohmann::json j = trapezoid_json(sol, m, prov);

    SECTION("required keys")
    {
        for (int p = 0; p < 10; ++p) {
            const auto [i, jj, lin] = pair_from_linear(p, 5);
            CHECK(j.at("solution").contains(pair_key(i, jj)));
        }
        CHECK(j.at("solution").contains("delta"));
        CHECK(j.at("solution").contains("omega"));
        CHECK(j.at("solution").contains("theta"));
        CHECK(j.at("spectrum").at("zeta").size() == 10);
        CHECK(j.at("schema_version").get<int>() == 1);
        CHECK(j.at("classification").contains("passed"));
        CHECK(j.at("symmetry").at("class").get<std::string>() == "symmetric_isosceles");
        CHECK(j.at("provenance").contains("seed"));
        CHECK(j.at("provenance").at("tolerances").contains("solver"));
    }

    SECTION("bitwise round-trip through dump/parse")
    {
        const auto parsed = nlohmann::json::parse(j.dump());
        const DistanceVector r2 = distances_from_json(parsed.at("solution"), 5);
        CHECK(r2.packed() == sol.r.packed());
        CHECK(parsed.at("solution").at("delta").get<double>() == sol.mult.delta);
        CHECK(parsed.at("solution").at("omega").get<double>() == sol.mult.omega);
        CHECK(parsed.at("solution").at("theta").get<double>() == sol.mult.theta);
        CHECK(parsed.at("residual_norm").get<double>() == sol.residual_norm);
        for (int k = 0; k < 10; ++k)
            CHECK(parsed.at("spectrum").at("zeta")[static_cast<size_t>(k)].get<double>() ==
                  sol.spectrum[static_cast<size_t>(k)]);
    }

    SECTION("determinism: identical runs serialize identically")
    {
        const nlohmann::json k = trapezoid_json(sol, m, prov);
        CHECK(j.dump() == k.dump());
    }
}

TEST_CASE("CLI end-to-end")
{
    TempDir tmp;

    SECTION("solve-trapezoid on the realizable family, then cross-validate")
    {
        const std::string out = tmp.file("trap.json");
        const std::string masses = feasible_masses_csv();
        CHECK(cli({"solve-trapezoid", "--masses", masses.c_str(), "--rho", "1.16", "--height",
                   "2.04", "--output", out.c_str()}) == 0);
        const auto doc = read_report(out);
        CHECK(doc.at("classification").at("passed").get<bool>());
        CHECK(cli({"cross-validate", "--input", out.c_str(), "--output",
                   tmp.file("xval.json").c_str()}) == 0);
        CHECK(read_report(tmp.file("xval.json")).at("pass").get<bool>());
    }

    SECTION("solve-trapezoid without a realizable solution exits 2")
    {
        CHECK(cli({"solve-trapezoid", "--masses", "1,1,1,1,1"}) == 2);
    }

    SECTION("unreachable tolerance exits 1")
    {
        const std::string masses = feasible_masses_csv();
        CHECK(cli({"solve-trapezoid", "--masses", masses.c_str(), "--tol", "1e-30"}) == 1);
    }

    SECTION("enumerate-moulton n = 3 emits three solutions")
    {
        const std::string out = tmp.file("moulton.json");
        CHECK(cli({"enumerate-moulton", "--masses", "1,2,3", "--output", out.c_str()}) == 0);
        const auto doc = read_report(out);
        CHECK(doc.at("count").get<int>() == 3);
        CHECK(doc.at("solutions").size() == 3);
    }

    SECTION("solve-collinear with an explicit ordering")
    {
        const std::string out = tmp.file("coll.json");
        CHECK(cli({"solve-collinear", "--masses", "1,2,3", "--ordering", "2,1,3", "--output",
                   out.c_str()}) == 0);
        const auto doc = read_report(out);
        CHECK(doc.at("ordering").get<std::vector<int>>() == std::vector<int>{2, 1, 3});
        CHECK(doc.at("delta_bracket_ok").get<bool>());
    }

    SECTION("masses can come from a JSON file")
    {
        const std::string in = tmp.file("masses.json");
        write_report(nlohmann::json{{"masses", {1.0, 2.0, 3.0}}}, in);
        const std::string out = tmp.file("coll2.json");
        CHECK(cli({"solve-collinear", "--input", in.c_str(), "--output", out.c_str()}) == 0);
        CHECK(read_report(out).at("masses").get<std::vector<double>>() ==
              std::vector<double>{1.0, 2.0, 3.0});
    }

    SECTION("verify-identities")
    {
        const std::string out = tmp.file("fuzz.json");
        CHECK(cli({"verify-identities", "--trials", "100", "--output", out.c_str()}) == 0);
        CHECK(read_report(out).at("pass").get<bool>());
    }

    SECTION("uniqueness-probe emits cluster counts")
    {
        const std::string out = tmp.file("uniq.json");
        const std::string masses = feasible_masses_csv();
        CHECK(cli({"uniqueness-probe", "--masses", masses.c_str(), "--starts", "6", "--output",
                   out.c_str()}) == 0);
        CHECK(read_report(out).at("clusters").get<int>() == 1);
    }

    SECTION("determinism across identical invocations")
    {
        const std::string a = tmp.file("a.json"), b = tmp.file("b.json");
        REQUIRE(cli({"verify-identities", "--trials", "60", "--seed", "5", "--output",
                     a.c_str()}) == 0);
        REQUIRE(cli({"verify-identities", "--trials", "60", "--seed", "5", "--output",
                     b.c_str()}) == 0);
        std::ifstream fa(a), fb(b);
        const std::string sa((std::istreambuf_iterator<char>(fa)),
                             std::istreambuf_iterator<char>());
        const std::string sb((std::istreambuf_iterator<char>(fb)),
                             std::istreambuf_iterator<char>());
        CHECK(sa == sb);
    }

    SECTION("unwritable output path is an I/O error")
    {
        CHECK(cli({"verify-identities", "--trials", "10", "--output",
                   "/nonexistent_dir/report.json"}) == 2);
    }
}

TEST_CASE("built binary answers --help")
{
    const std::string cmd = std::string(CCDIST_CLI_PATH) + " --help > /dev/null 2>&1";
    CHECK(std::system(cmd.c_str()) == 0);
}
