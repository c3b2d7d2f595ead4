#include <doctest.h>

#include <cmath>

#include "polyproc/action.hpp"
#include "polyproc/drift_cov.hpp"
#include "polyproc/error.hpp"
#include "polyproc/sim_harness.hpp"
#include "test_support.hpp"

using namespace polyproc;
using testing::Gen;
using testing::monomials;

namespace {

struct Diffusion {
    GeneratorMatrix g;
    double s0, s1, s2;
    double lo, hi;
};

std::vector<Diffusion> diffusions() {
    return {
        {testing::bm_generator(4), 1.0, 0.0, 0.0, -5.0, 5.0},
        {testing::ou_generator(1.0, 1.0, 4), 1.0, 0.0, 0.0, -5.0, 5.0},
        {testing::gbm_generator(0.05, 0.2, 4), 0.0, 0.0, 0.04, 0.0, 10.0},
        {GeneratorMatrix(monomials(4), testing::diffusion_matrix(4, 1.0, -1.0, 0.5, 0.5, 0.0)), 0.5, 0.5, 0.0, -1.0,
         30.0},
    };
}

}  // namespace

TEST_CASE("multiplication through the table") {
    const auto b = monomials(2);
    const auto table = ProductTable::derive(b);
    CHECK(multiply(table, PolyVec::unit(b, "x"), PolyVec::unit(b, "x")).coeffs() == PolyVec::unit(b, "x2").coeffs());
    const PolyVec one_x = PolyVec::from(b, {1.0, 1.0, 0.0});
    CHECK(multiply(table, one_x, one_x).coeffs() == PolyVec::from(b, {1.0, 2.0, 1.0}).coeffs());
    const PolyVec q = PolyVec::from(b, {0.5, -2.0, 3.0});
    CHECK(multiply(table, PolyVec::unit(b, "1", 2.5), q).coeffs() == (2.5 * q).coeffs());
    CHECK_THROWS_AS(multiply(table, PolyVec::unit(b, "x"), PolyVec::unit(b, "x2")), ProductGap);
}

TEST_CASE("table validation and hypotheses") {
    const auto b = monomials(3);
    auto table = ProductTable::derive(b);
    CHECK(table.find(1, 2) == table.find(2, 1));
    const auto ok = validate_product_table(table, -2.0, 2.0);
    CHECK(ok.pass);
    CHECK(ok.points == 33);
    CHECK(table.generated_by_linear_entries());

    table.set(1, 1, PolyVec::from(b, {0.0, 0.0, 1.0 + 1e-6, 0.0}));
    const auto bad = validate_product_table(table, -2.0, 2.0);
    CHECK_FALSE(bad.pass);
    CHECK(bad.failures == std::vector<std::string>{"x*x"});
    CHECK_THROWS_AS(table.set(0, 1, PolyVec::unit(b, "x3")), InputError);

    auto u = std::make_shared<const TabulatedFunction>(solve_sigma_ode(1.0, 1e-3));
    const auto model = make_sigma_ode_model(u);
    const auto utable = ProductTable::derive(model.basis());
    CHECK_FALSE(utable.generated_by_linear_entries());
    const PolyVec uu = PolyVec::unit(model.basis(), "u");
    CHECK_THROWS_AS(multiply(utable, uu, uu), ProductGap);
}

TEST_CASE("drift parts") {
    const auto ld = GeneratorMatrix(monomials(2), testing::diffusion_matrix(2, 0.7, -1.2, 1.0, 0.0, 0.0));
    const auto d = drift_parts(ld);
    CHECK(d.b(0) == 0.7);
    CHECK(d.A(0, 0) == -1.2);

    const auto bm = drift_parts(testing::bm_generator());
    CHECK(bm.b(0) == 0.0);
    CHECK(bm.A(0, 0) == 0.0);

    const auto b2 = GradedBasis::create({{"1", 0, Evaluator::constant_one()},
                                         {"x1", 1, Evaluator::monomial({1})},
                                         {"x2", 1, Evaluator::monomial({0, 1})}});
    Eigen::MatrixXd m(3, 3);
    m << 0, 0, 0,
         0, 1, 0,
         0, 1, 1;
    const auto d2 = drift_parts(GeneratorMatrix(b2, m));
    CHECK(d2.b.isZero(0.0));
    Eigen::MatrixXd expected(2, 2);
    expected << 1, 1,
                0, 1;
    CHECK(d2.A == expected);
    CHECK(d2.reconstruction_residual < 1e-10);
}

TEST_CASE("covariance polynomial examples") {
    const auto b = monomials(2);
    const auto table = ProductTable::derive(b);
    const PolyVec x = PolyVec::unit(b, "x");
    CHECK(covariance_poly(testing::bm_generator(), table, x, x).coeffs() == PolyVec::unit(b, "1").coeffs());

    const double alpha = 1.5, beta = -0.4;
    const GeneratorMatrix ld(b, testing::diffusion_matrix(2, 1.0, -1.0, 0.5, 0.5, 0.0));
    const PolyVec a = covariance_poly(ld, table, alpha * x, beta * x);
    const PolyVec sigma2 = PolyVec::from(b, {0.5, 0.5, 0.0});
    CHECK(testing::max_abs_diff(a.coeffs(), (alpha * beta * sigma2).coeffs()) < 1e-15);

    CHECK(covariance_poly(ld, table, PolyVec::unit(b, "1", 3.0), x).coeffs().isZero(0.0));
}

TEST_CASE("property: covariance polynomial is symmetric, bilinear and nonnegative") {
    Gen gen(41);
    const auto b = monomials(4);
    const auto table = ProductTable::derive(b);
    const auto linear = [&] { return PolyVec::from(b, {gen.uniform(-2, 2), gen.uniform(-2, 2), 0.0, 0.0, 0.0}); };
    const auto quadratic = [&] {
        return PolyVec::from(b, {gen.uniform(-2, 2), gen.uniform(-2, 2), gen.uniform(-2, 2), 0.0, 0.0});
    };
    for (const auto& d : diffusions()) {
        for (int trial = 0; trial < 50; ++trial) {
            const PolyVec p = quadratic();
            const PolyVec pp = quadratic();
            const PolyVec q = quadratic();
            const double alpha = gen.uniform(-3, 3);
            const PolyVec pq = covariance_poly(d.g, table, p, q);
            CHECK(testing::max_abs_diff(pq.coeffs(), covariance_poly(d.g, table, q, p).coeffs()) <
                  1e-13 * std::max(1.0, pq.coeffs().cwiseAbs().maxCoeff()));
            const PolyVec lhs = covariance_poly(d.g, table, alpha * p + pp, q);
            const PolyVec rhs = alpha * covariance_poly(d.g, table, p, q) + covariance_poly(d.g, table, pp, q);
            CHECK(testing::max_abs_diff(lhs.coeffs(), rhs.coeffs()) <
                  1e-12 * std::max(1.0, rhs.coeffs().cwiseAbs().maxCoeff()));

            const PolyVec l = linear();
            const PolyVec a = covariance_poly(d.g, table, l, l);
            for (int k = 0; k <= 32; ++k) {
                const double x = d.lo + (d.hi - d.lo) * k / 32.0;
                const double value = evaluate(a, StatePoint{x});
                CHECK(value >= -1e-10);
                // sigma^2(x) p'(x)^2 for the scalar models.
                const double slope = l[1];
                const double sigma2 = d.s0 + d.s1 * x + d.s2 * x * x;
                CHECK(value == doctest::Approx(sigma2 * slope * slope).epsilon(1e-12).scale(1.0));
            }
        }
    }
}

TEST_CASE("property: affine reconstruction and the generator as a derivative") {
    Gen gen(42);
    for (const auto& d : diffusions()) {
        std::vector<StatePoint> points;
        for (int k = 0; k <= 16; ++k) points.push_back(StatePoint{d.lo + (d.hi - d.lo) * k / 16.0});
        const auto parts = drift_parts(d.g, points);
        CHECK(parts.reconstruction_residual < 1e-10);

        for (int trial = 0; trial < 20; ++trial) {
            const PolyVec p = PolyVec::from(d.g.basis(), {gen.uniform(-1, 1), gen.uniform(-1, 1),
                                                          gen.uniform(-1, 1), 0.0, 0.0});
            const StatePoint x{gen.uniform(std::max(d.lo, -3.0), std::min(d.hi, 3.0))};
            const double step = 1e-5;
            const double fd = (conditional_moment(d.g, p, step, x) - conditional_moment(d.g, p, -step, x)) / (2 * step);
            CHECK(std::abs(fd - evaluate(d.g.apply(p), x)) < 1e-6);
        }
    }
}
