#include <catch_amalgamated.hpp>

#include "sklimit/cli.hpp"
#include "sklimit/io.hpp"

#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

using namespace sklimit;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome run(std::vector<std::string> args) {
    args.insert(args.begin(), "sklimit");
    std::vector<const char*> argv;
    for (const std::string& a : args) {
        argv.push_back(a.c_str());
    }
    std::ostringstream out, err;
    const int code = dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("sklimit_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

fs::path write(const fs::path& dir, const std::string& name, const std::string& text) {
    const fs::path p = dir / name;
    write_file(p, text);
    return p;
}

}  // namespace

TEST_CASE("solve prints J and the oracle gap", "[cli]") {
    const fs::path dir = scratch("solve");
    const fs::path input = write(dir, "lyap.json", R"({"gamma": [[2]], "Q": [[9]]})");
    const Outcome o = run({"solve", "--input", input.string(), "--oracle"});
    REQUIRE(o.code == 0);
    const auto j = nlohmann::json::parse(o.out);
    CHECK(j["J"][0][0].get<double>() == Catch::Approx(2.25).epsilon(1e-14));
    CHECK(j["residual"].get<double>() <= 1e-12);
    CHECK(j["oracle_gap"].get<double>() <= 1e-6);
}

TEST_CASE("solve handles Sylvester input and rejects mixtures", "[cli]") {
    const fs::path dir = scratch("sylv");
    const fs::path input = write(dir, "s.json", R"({"A": [[-1]], "B": [[3]], "C": [[4]]})");
    const Outcome o = run({"solve", "--input", input.string()});
    REQUIRE(o.code == 0);
    CHECK(nlohmann::json::parse(o.out)["Y"][0][0].get<double>() == Catch::Approx(-1.0).epsilon(1e-14));
    const fs::path bad = write(dir, "bad.json", R"({"gamma": [[1]], "Q": [[1]], "A": [[1]]})");
    CHECK(run({"solve", "--input", bad.string()}).code == 1);
    const fs::path unstable = write(dir, "u.json", R"({"gamma": [[-1]], "Q": [[1]]})");
    CHECK(run({"solve", "--input", unstable.string()}).code == 2);
    const fs::path garbage = write(dir, "g.json", "{not json");
    const Outcome g = run({"solve", "--input", garbage.string()});
    CHECK(g.code == 1);
    CHECK_FALSE(g.err.empty());
}

TEST_CASE("validate exits 2 when ellipticity fails", "[cli]") {
    const fs::path dir = scratch("validate");
    const fs::path cfg = write(dir, "cfg.json", R"({
      "model": {"family": "scalar-affine", "params": {"a": 0, "b": 1}},
      "probe": {"lo": -1, "hi": 1}
    })");
    const Outcome o = run({"validate", "--config", cfg.string()});
    CHECK(o.code == 2);
    CHECK_THAT(o.err, Catch::Matchers::ContainsSubstring("AssumptionViolated"));
    const fs::path good = write(dir, "good.json", R"({"model": {"family": "scalar-state", "params": {"a": 2}}})");
    const Outcome ok = run({"validate", "--config", good.string()});
    CHECK(ok.code == 0);
    CHECK(nlohmann::json::parse(ok.out)["assumptions"]["min_lambda"].get<double>() > 0.0);
}

TEST_CASE("usage and io failures map to their exit codes", "[cli]") {
    CHECK(run({"frobnicate"}).code == 64);
    CHECK(run({}).code == 64);
    CHECK(run({"converge"}).code == 64);
    CHECK(run({"--help"}).code == 0);
    CHECK(run({"validate", "--config", "/nonexistent/sklimit/cfg.json"}).code == 3);
    const fs::path dir = scratch("codes");
    const fs::path typo = write(dir, "t.json", R"({"model": {"family": "constant"}, "gamma_matrix_typo": 1})");
    const Outcome o = run({"validate", "--config", typo.string()});
    CHECK(o.code == 1);
    CHECK_THAT(o.err, Catch::Matchers::ContainsSubstring("gamma_matrix_typo"));
    const fs::path fam = write(dir, "f.json", R"({"model": {"family": "scalar-state", "params": {"a": 2}}})");
    CHECK(run({"reduce-check", "--config", fam.string()}).code == 1);
}

TEST_CASE("simulate writes a path table", "[cli]") {
    const fs::path dir = scratch("simulate");
    const fs::path cfg = write(dir, "cfg.json", R"({
      "model": {"family": "constant", "params": {"gamma": 2, "K": 1, "sigma": 1}},
      "simulation": {"T": 0.05, "epsilon": 0.1, "replicas": 2, "N": 2, "x0": [0.5]}
    })");
    const Outcome o = run({"simulate", "--config", cfg.string(), "--out", (dir / "out").string()});
    REQUIRE(o.code == 0);
    const std::string csv = read_file(dir / "out" / "paths.csv");
    std::istringstream lines(csv);
    std::string header;
    std::getline(lines, header);
    CHECK(header == "t,replica,particle,component,x_eps,v_eps,x_limit");
    std::size_t rows = 0;
    for (std::string line; std::getline(lines, line);) {
        ++rows;
    }
    // 6 recorded times x 2 replicas x 2 particles.
    CHECK(rows == 24);
}

TEST_CASE("converge and reduce-check through the real binary", "[cli]") {
    const fs::path dir = scratch("binary");
    const fs::path cfg = write(dir, "cfg.json", R"({
      "seed": 3,
      "model": {"family": "constant", "params": {"gamma": 2, "K": 1, "sigma": 1}},
      "simulation": {"T": 0.2, "epsilon_list": [0.1, 0.05, 0.02], "replicas": 8}
    })");
    auto invoke = [&](const std::string& sub, const fs::path& out, const std::string& extra) {
        const std::string cmd = std::string(SKLIMIT_CLI_PATH) + " " + sub + " --config " + cfg.string() +
                                " --out " + out.string() + " " + extra + " > " + (out.string() + ".stdout") +
                                " 2>&1";
        fs::create_directories(out);
        const int status = std::system(cmd.c_str());
        return WEXITSTATUS(status);
    };
    REQUIRE(invoke("converge", dir / "a", "--threads 1") == 0);
    REQUIRE(invoke("converge", dir / "b", "--threads 2") == 0);
    CHECK(read_file(dir / "a" / "report.json") == read_file(dir / "b" / "report.json"));
    CHECK(read_file(dir / "a" / "report.csv") == read_file(dir / "b" / "report.csv"));
    const auto report = nlohmann::json::parse(read_file(dir / "a" / "report.json"));
    CHECK(report["epsilons"].size() == 3);
    CHECK(report["replicas"][0].get<int>() == 8);
    CHECK(read_file(dir / "a" / "report.csv").rfind("epsilon,error,stderr,ratio_sqrt\n", 0) == 0);

    REQUIRE(invoke("reduce-check", dir / "r", "") == 0);
    const auto red = nlohmann::json::parse(read_file(fs::path(dir.string() + "/r.stdout")));
    CHECK(red["max_path_gap"].get<double>() == 0.0);
}
