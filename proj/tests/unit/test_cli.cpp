#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "test_support.hpp"

using nlohmann::json;

namespace {

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = polyproc::cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

}  // namespace

TEST_CASE("classify reports the OU ladder") {
    const auto r = run({"classify", "--model", testing::model_path("ou.json")});
    REQUIRE(r.code == 0);
    const auto j = json::parse(r.out);
    CHECK(j["kind"] == "Reducing");
    CHECK(j["lambda"][0].get<double>() == doctest::Approx(-1.0).epsilon(1e-10));
    CHECK(j["lambda"][1].get<double>() == doctest::Approx(-2.0).epsilon(1e-10));
    CHECK(j["drift_parts"]["A"][0][0].get<double>() == -1.0);
}

TEST_CASE("moment of Brownian motion") {
    const auto r = run({"moment", "--model", testing::model_path("bm.json"), "--p", "0,0,1", "--h", "1", "--x", "0"});
    REQUIRE(r.code == 0);
    CHECK(json::parse(r.out)["value"].get<double>() == 1.0);
}

TEST_CASE("bundled model names resolve without a path") {
    CHECK(run({"classify", "--model", "bm.json"}).code == 0);
}

TEST_CASE("validate passes and is byte-identical across runs and thread counts") {
    const std::vector<std::string> args{"validate", "--model", testing::model_path("bm.json"), "--p", "0,0,1",
                                        "--T", "1", "--dt", "0.01", "--paths", "20000", "--seed", "7"};
    const auto a = run(args);
    const auto b = run(args);
    auto threaded = args;
    threaded.insert(threaded.end(), {"--threads", "3"});
    const auto c = run(threaded);
    CHECK(a.code == 0);
    CHECK(json::parse(a.out)["pass"] == true);
    CHECK(a.out == b.out);
    CHECK(a.out == c.out);
}

TEST_CASE("validate test selection") {
    const auto base = testing::model_path("ou.json");
    // Covariation needs the fine step; coarse steps inflate the realized sum's noise.
    const auto all = run({"validate", "--model", base, "--p", "0,1,0", "--dt", "0.001", "--paths", "1000", "--seed",
                          "1", "--test", "all"});
    CHECK(all.code == 0);
    CHECK(json::parse(all.out)["reports"].size() == 3);
    const auto cons = run({"validate", "--model", base, "--seed", "1", "--test", "consistency"});
    CHECK(cons.code == 0);
    const auto levy = run({"validate", "--model", testing::model_path("levy-gauss.json"), "--p", "0,0,1,0", "--dt",
                           "0.01", "--paths", "5000", "--seed", "2"});
    CHECK(levy.code == 0);
    CHECK(json::parse(levy.out)["reports"][0]["test"] == "eigen_action");
}

TEST_CASE("simulate summary and dumps") {
    const std::string file = "cli_dump_test.csv";
    const auto r = run({"simulate", "--model", testing::model_path("ou.json"), "--T", "0.1", "--dt", "0.05", "--paths",
                        "3", "--seed", "4", "--dump", file, "--format", "csv"});
    REQUIRE(r.code == 0);
    const auto j = json::parse(r.out);
    CHECK(j["steps"] == 2);
    std::ifstream in(file);
    std::string header;
    std::getline(in, header);
    CHECK(header == "path,0,0.050000000000000003,0.10000000000000001");
    std::remove(file.c_str());
}

TEST_CASE("demo-spectral reports norms and moment checks") {
    const auto r = run({"demo-spectral", "--t", "0.5", "--N-list", "10,20", "--paths", "2000", "--seed", "3",
                        "--sim-N", "12"});
    const auto j = json::parse(r.out);
    CHECK(j["b_norm_sq"] == json::array({10.0, 20.0}));
    CHECK(j["integral_norm_sq"].size() == 2);
    CHECK(j["moment_checks"].size() == 13);
    // 10 -> 20 does not converge to 1e-6, so the report fails honestly.
    CHECK(j["out_of_space"]["converged"] == false);
    CHECK(r.code == 1);
}

TEST_CASE("exit codes and error paths") {
    auto expect = [](std::vector<std::string> args, int code) {
        const auto r = run(std::move(args));
        CHECK(r.code == code);
        if (code == 2) {
            CHECK(r.out.empty());
            CHECK_FALSE(r.err.empty());
        }
    };
    expect({"frobnicate"}, 2);
    expect({}, 2);
    expect({"classify", "--model", "/nonexistent.json"}, 2);
    expect({"moment", "--model", testing::model_path("bm.json"), "--p", "0,1"}, 2);
    expect({"simulate", "--model", testing::model_path("bm.json")}, 2);  // no seed
    expect({"simulate", "--model", testing::model_path("drift2d.json"), "--seed", "1"}, 2);
    expect({"validate", "--model", testing::model_path("bm.json"), "--p", "0,0,1", "--seed", "1", "--h", "0.3333"},
           2);

    const std::string bad = "cli_bad_model.json";
    {
        std::ofstream f(bad);
        f << "{ not json";
    }
    expect({"classify", "--model", bad}, 2);
    {
        std::ofstream f(bad);
        f << R"({"schema_version": 1, "basis": {"entries": [
                 {"label": "1", "degree": 0, "eval": {"type": "constant"}},
                 {"label": "x", "degree": 1, "eval": {"type": "monomial", "powers": [1]}},
                 {"label": "x2", "degree": 2, "eval": {"type": "monomial", "powers": [2]}}]},
               "generator": {"matrix": [[0,0,0],[0,0,1],[0,0,0]]}})";
    }
    expect({"classify", "--model", bad}, 2);
    std::remove(bad.c_str());

    // A validation failure: the model claims G x = 0 while the paths drift.
    const std::string lying = "cli_lying_model.json";
    {
        std::ofstream f(lying);
        f << R"({"schema_version": 1, "basis": {"entries": [
                 {"label": "1", "degree": 0, "eval": {"type": "constant"}},
                 {"label": "x", "degree": 1, "eval": {"type": "monomial", "powers": [1]}}]},
               "generator": {"matrix": [[0,0],[0,0]]},
               "sde": {"drift": {"family": "linear", "mu": 1}, "sigma": {"family": "constant", "sigma": 1}, "x0": 0}})";
    }
    const auto fail = run({"validate", "--model", lying, "--p", "0,1", "--dt", "0.01", "--paths", "2000", "--seed", "1"});
    CHECK(fail.code == 1);
    CHECK(json::parse(fail.out)["pass"] == false);
    std::remove(lying.c_str());
}

TEST_CASE("help") {
    const auto r = run({"--help"});
    CHECK(r.code == 0);
    CHECK(r.out.find("demo-spectral") != std::string::npos);
}
