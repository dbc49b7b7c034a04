// End-to-end tests of the command-line tool: exit codes, fit/predict round
// trips, experiment outputs and rerun determinism. The binary path comes
// from the build system.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "shapereg/csv.hpp"
#include "shapereg/estimators.hpp"
#include "shapereg/model_json.hpp"
#include "shapereg/synth.hpp"

using namespace shapereg;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::string kCli = SHAPEREG_CLI_PATH;

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("shapereg_cli_test_" + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

int run(const std::string& args) {
    const int rc = std::system((kCli + " " + args + " > /dev/null 2>&1").c_str());
    return WEXITSTATUS(rc);
}

void write(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    out << content;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const char* kFitConfig = R"({
  "schema": 1,
  "problem": {"d": 2, "g": "linear_sum", "noise": "gaussian", "noise_param": 0.5},
  "method": {"name": "knn", "k": 5},
  "experiment": {"n": 100, "seed": 7}
})";

} // namespace

TEST_CASE("fit writes a model and round-trips through predict") {
    TempDir tmp;
    write(tmp.file("cfg.json"), kFitConfig);
    CHECK(run("fit --config " + tmp.file("cfg.json") + " --out " + tmp.file("model.json")) == 0);

    // the same data and points in-process for an exact comparison
    RegressionProblem p;
    p.d = 2;
    p.noise_param = 0.5;
    const Dataset data = generate(p, 100, derive_seed(7, 100, 0, role::data));
    const LocalModel reference = fit_knn(data, 5);

    std::string pts = "x1,x2\n";
    Rng rng(9);
    std::vector<std::vector<double>> queries;
    for (int i = 0; i < 1000; ++i) {
        queries.push_back({rng.uniform(), rng.uniform()});
        pts += format_double(queries.back()[0]) + "," + format_double(queries.back()[1]) + "\n";
    }
    write(tmp.file("pts.csv"), pts);
    CHECK(run("predict --model " + tmp.file("model.json") + " --points " + tmp.file("pts.csv") +
              " --out " + tmp.file("pred.csv")) == 0);

    std::istringstream in(slurp(tmp.file("pred.csv")));
    std::string line;
    std::getline(in, line);
    CHECK(line == "x1,x2,yhat,flag");
    for (const auto& q : queries) {
        REQUIRE(std::getline(in, line));
        const auto pos = line.rfind(',');
        const auto pos2 = line.rfind(',', pos - 1);
        const std::string yhat = line.substr(pos2 + 1, pos - pos2 - 1);
        CHECK(yhat == format_double(reference.predict(q)));
    }
}

TEST_CASE("predict flags out-of-domain points but still evaluates") {
    TempDir tmp;
    write(tmp.file("cfg.json"), kFitConfig);
    REQUIRE(run("fit --config " + tmp.file("cfg.json") + " --out " + tmp.file("model.json")) == 0);
    write(tmp.file("pts.csv"), "x1,x2\n1.5,0.5\n");
    CHECK(run("predict --model " + tmp.file("model.json") + " --points " + tmp.file("pts.csv") +
              " --out " + tmp.file("pred.csv")) == 0);
    const std::string out = slurp(tmp.file("pred.csv"));
    CHECK(out.find("outside_domain") != std::string::npos);
}

TEST_CASE("predict on an empty points file emits only the header") {
    TempDir tmp;
    write(tmp.file("cfg.json"), kFitConfig);
    REQUIRE(run("fit --config " + tmp.file("cfg.json") + " --out " + tmp.file("model.json")) == 0);
    write(tmp.file("pts.csv"), "x1,x2\n");
    CHECK(run("predict --model " + tmp.file("model.json") + " --points " + tmp.file("pts.csv") +
              " --out " + tmp.file("pred.csv")) == 0);
    CHECK(slurp(tmp.file("pred.csv")) == "x1,x2,yhat,flag\n");
}

TEST_CASE("exit codes") {
    TempDir tmp;
    SUBCASE("malformed JSON config is a config error (2)") {
        write(tmp.file("bad.json"), "{nope");
        CHECK(run("fit --config " + tmp.file("bad.json") + " --out " + tmp.file("m.json")) == 2);
    }
    SUBCASE("unknown config key is a config error (2)") {
        write(tmp.file("bad.json"),
              R"({"schema":1,"problem":{"d":1,"g":"linear_sum","bogus":3},)"
              R"("method":{"name":"knn","k":2},"experiment":{"n":10}})");
        CHECK(run("fit --config " + tmp.file("bad.json") + " --out " + tmp.file("m.json")) == 2);
    }
    SUBCASE("missing schema is a config error (2)") {
        write(tmp.file("bad.json"),
              R"({"problem":{"d":1,"g":"linear_sum"},"method":{"name":"knn","k":2}})");
        CHECK(run("fit --config " + tmp.file("bad.json") + " --out " + tmp.file("m.json")) == 2);
    }
    SUBCASE("infeasible hyperparameters are a domain error (3)") {
        write(tmp.file("bad.json"),
              R"({"schema":1,"problem":{"d":1,"g":"linear_sum"},)"
              R"("method":{"name":"knn","k":500},"experiment":{"n":100,"seed":1}})");
        CHECK(run("fit --config " + tmp.file("bad.json") + " --out " + tmp.file("m.json")) == 3);
    }
    SUBCASE("missing input file is an I/O error (1)") {
        CHECK(run("fit --config " + tmp.file("absent.json") + " --out " + tmp.file("m.json")) ==
              1);
    }
    SUBCASE("unknown bound name lists valid names and exits 2") {
        CHECK(run("bound not_a_bound") == 2);
    }
    SUBCASE("unknown experiment kind is a config error (2)") {
        write(tmp.file("bad.json"), R"({"schema":1,"experiment":{"kind":"mystery"}})");
        CHECK(run("experiment --config " + tmp.file("bad.json") + " --out-dir " +
                  tmp.file("out")) == 2);
    }
    SUBCASE("delta outside (0,1) is a domain error (3)") {
        CHECK(run("bound variance --sigma2 1 --n 10 --v 2 --delta 1.5") == 3);
    }
    SUBCASE("dimension mismatch in predict is a domain error (3)") {
        write(tmp.file("cfg.json"), kFitConfig);
        REQUIRE(run("fit --config " + tmp.file("cfg.json") + " --out " + tmp.file("m.json")) ==
                0);
        write(tmp.file("pts.csv"), "x1\n0.5\n");
        CHECK(run("predict --model " + tmp.file("m.json") + " --points " + tmp.file("pts.csv") +
                  " --out " + tmp.file("p.csv")) == 3);
    }
}

TEST_CASE("fit accepts an external data CSV") {
    TempDir tmp;
    write(tmp.file("cfg.json"),
          R"({"schema":1,"method":{"name":"cart_like","m":5,"beta":2.0}})");
    std::string csv = "x1,x2,y\n";
    RegressionProblem p;
    p.d = 2;
    const Dataset data = generate(p, 60, 21);
    for (std::size_t i = 0; i < data.n(); ++i)
        csv += format_double(data.row(i)[0]) + "," + format_double(data.row(i)[1]) + "," +
               format_double(data.y[i]) + "\n";
    write(tmp.file("data.csv"), csv);
    CHECK(run("fit --config " + tmp.file("cfg.json") + " --data " + tmp.file("data.csv") +
              " --out " + tmp.file("m.json")) == 0);
    const json j = json::parse(slurp(tmp.file("m.json")));
    CHECK(j.at("method") == "cart_like");
    const LocalModel loaded = model_from_json(j);
    CHECK(loaded.data.n() == 60);
}

TEST_CASE("experiment command writes records and summary deterministically") {
    TempDir tmp;
    write(tmp.file("cfg.json"), R"({
      "schema": 1,
      "problem": {"d": 1, "g": "linear_sum", "noise": "gaussian", "noise_param": 0.5},
      "method": {"name": "knn", "k": "choose_k"},
      "experiment": {"kind": "rate", "n_grid": [64, 128, 256], "replicates": 3,
                     "seed": 3, "delta": 0.1, "eval": {"type": "supnorm"}}
    })");
    CHECK(run("experiment --config " + tmp.file("cfg.json") + " --out-dir " + tmp.file("a")) ==
          0);
    CHECK(run("experiment --config " + tmp.file("cfg.json") + " --out-dir " + tmp.file("b")) ==
          0);
    const std::string rec_a = slurp(tmp.file("a") + "/records.csv");
    CHECK(rec_a == slurp(tmp.file("b") + "/records.csv"));
    CHECK(rec_a.substr(0, rec_a.find('\n')) ==
          "n,replicate,method,params_json,error,wall_time_ms");
    const json summary = json::parse(slurp(tmp.file("a") + "/summary.json"));
    CHECK(summary.at("kind") == "rate");
    CHECK(summary.at("rate_fit").contains("slope"));
    CHECK(summary.at("per_n").size() == 3);
}

TEST_CASE("verification experiment kinds emit verdicts") {
    TempDir tmp;
    write(tmp.file("cfg.json"), R"({
      "schema": 1,
      "experiment": {"kind": "verify_aspect", "tree": "uniform", "N": 64, "d": 2,
                     "replicates": 2000, "seed": 5}
    })");
    CHECK(run("experiment --config " + tmp.file("cfg.json") + " --out-dir " + tmp.file("v")) ==
          0);
    const json summary = json::parse(slurp(tmp.file("v") + "/summary.json"));
    CHECK(summary.at("verdicts").at("above_prob_floor").get<bool>());
}

TEST_CASE("bound subcommand prints value and predicates") {
    TempDir tmp;
    const int rc = std::system((kCli + " bound cart --sigma2 0.25 --n 10000 --d 2 --delta 0.1"
                                       " --m 200 --beta 2 --b 1 --lip 1 > " +
                                tmp.file("out.json") + " 2>/dev/null")
                                   .c_str());
    REQUIRE(WEXITSTATUS(rc) == 0);
    const json j = json::parse(slurp(tmp.file("out.json")));
    CHECK(j.at("value").get<double>() > 0.0);
    CHECK(j.at("predicates").at("m_large_enough").get<bool>());
}

TEST_CASE("verify subcommand runs reduced-scale checks") {
    CHECK(run("verify --which volume --scale 10") == 0);
    CHECK(run("verify --which prt --scale 10") == 0);
    CHECK(run("verify --which all --scale 5") == 0);
}
