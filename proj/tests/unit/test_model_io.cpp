#include <doctest.h>

#include "polyproc/error.hpp"
#include "polyproc/model_io.hpp"
#include "polyproc/report_json.hpp"
#include "test_support.hpp"

using namespace polyproc;
using nlohmann::json;

namespace {

json minimal() {
    return json::parse(R"({
      "schema_version": 1,
      "name": "tiny",
      "basis": {"entries": [
        {"label": "1", "degree": 0, "eval": {"type": "constant"}},
        {"label": "x", "degree": 1, "eval": {"type": "monomial", "powers": [1]}}
      ]},
      "generator": {"matrix": [[0, 0], [0.5, -1]]}
    })");
}

}  // namespace

TEST_CASE("bundled models load") {
    for (const char* name : {"bm.json", "ou.json", "gbm.json", "linear-drift.json", "drift2d.json", "sigma-ode.json",
                             "levy-gauss.json"}) {
        CAPTURE(name);
        const LoadedModel m = load_model(testing::model_path(name));
        CHECK(m.generator->size() == m.basis->size());
        CHECK(check_grading(*m.generator).pass);
    }
    const auto ou = load_model(testing::model_path("ou.json"));
    CHECK(ou.generator->matrix() == testing::ou_generator(1.0, 1.0).matrix());
    REQUIRE(ou.process);
    CHECK(ou.process->x0 == 2.0);
    CHECK(check_generator_consistency(*ou.process).pass);
    const auto levy = load_model(testing::model_path("levy-gauss.json"));
    CHECK(levy.psi.has_value());
    CHECK(levy.basis->field() == ScalarField::Complex);
}

TEST_CASE("bundled diffusions agree with their generators") {
    for (const char* name : {"bm.json", "ou.json", "gbm.json", "linear-drift.json", "sigma-ode.json"}) {
        CAPTURE(name);
        const auto m = load_model(testing::model_path(name));
        REQUIRE(m.process);
        const auto r = check_generator_consistency(*m.process);
        CHECK(r.pass);
    }
}

TEST_CASE("generator columns and products") {
    auto doc = minimal();
    const auto m = parse_model(doc);
    CHECK(m.generator->matrix()(0, 1) == 0.5);
    CHECK(m.generator->matrix()(1, 1) == -1.0);
    CHECK(m.process == nullptr);

    doc["products"] = json::parse(R"([{"i": "x", "j": "x", "result": {"1": 1}}])");
    const auto with = parse_model(doc);
    const PolyVec* xx = with.products.find(1, 1);
    REQUIRE(xx);
    CHECK((*xx)[0] == 1.0);
}

TEST_CASE("schema errors") {
    auto expect_input_error = [](json doc) { CHECK_THROWS_AS(parse_model(doc), InputError); };
    {
        auto d = minimal();
        d.erase("schema_version");
        expect_input_error(d);
    }
    {
        auto d = minimal();
        d["schema_version"] = 2;
        expect_input_error(d);
    }
    {
        auto d = minimal();
        d["generator"]["matrix"] = json::parse("[[0, 0]]");
        expect_input_error(d);
    }
    {
        auto d = minimal();
        d["basis"]["entries"][1]["eval"]["type"] = "spline";
        expect_input_error(d);
    }
    {
        auto d = minimal();
        d["products"] = json::parse(R"([{"i": "x", "j": "y", "result": {}}])");
        expect_input_error(d);
    }
    {
        auto d = minimal();
        d["sde"] = json::parse(R"({"drift": {"family": "zero"}, "sigma": {"family": "cubic"}, "x0": 0})");
        expect_input_error(d);
    }
    {
        auto d = minimal();
        d["sde"] = json::parse(
            R"({"drift": {"family": "zero"}, "sigma": {"family": "constant", "sigma": 1}, "x0": 5, "range": [0, 1]})");
        expect_input_error(d);
    }
    {
        auto d = minimal();
        d["generator"]["matrix"] = json::parse("[[0, 1], [0, 0]]");
        CHECK_THROWS_AS(parse_model(d), GradingError);
    }
    CHECK_THROWS_AS(load_model("/nonexistent/model.json"), InputError);
}

TEST_CASE("command-line polynomial and list parsing") {
    const auto b = testing::monomials(2);
    CHECK(parse_polynomial(b, "0,0,1").coeffs() == PolyVec::unit(b, "x2").coeffs());
    CHECK(parse_polynomial(b, "1.5, -2,3e-1")[2] == 0.3);
    CHECK_THROWS_AS(parse_polynomial(b, "0,1"), InputError);
    CHECK_THROWS_AS(parse_polynomial(b, "0,a,1"), InputError);
    CHECK(parse_size_list("100,1000,10000") == std::vector<std::size_t>{100, 1000, 10000});
    CHECK_THROWS_AS(parse_size_list("10,-1"), InputError);
    CHECK_THROWS_AS(parse_size_list("10,x"), InputError);
    CHECK_THROWS_AS(parse_size_list("0"), InputError);
}

TEST_CASE("JSON writer") {
    Json j = Json::object();
    j["b"] = 0.1;
    j["a"] = 1;
    j["nan"] = std::nan("");
    j["s"] = "q\"uote";
    j["list"] = Json::array({1.0 / 3.0, true, nullptr});
    CHECK(write_json(j) ==
          R"({"b":0.10000000000000001,"a":1,"nan":null,"s":"q\"uote","list":[0.33333333333333331,true,null]})");
    const Json back = Json::parse(write_json(j));
    CHECK(back["b"].get<double>() == 0.1);
    CHECK(back["list"][0].get<double>() == 1.0 / 3.0);
}
