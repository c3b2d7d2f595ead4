#include <doctest.h>

#include <cmath>

#include "polyproc/action.hpp"
#include "polyproc/sim_harness.hpp"
#include "test_support.hpp"

using namespace polyproc;

namespace {

std::shared_ptr<const ProcessModel> ou_model() {
    return std::make_shared<const ProcessModel>(
        make_polynomial_diffusion("ou", {0.0, -1.0, 1.0, 0.0, 0.0}, 2.0, {-1e9, 1e9}));
}

double terminal_mean(const PathEnsemble& ens) {
    const auto xt = ens.map_paths<double>([](std::size_t, std::span<const double> xs) { return xs.back(); });
    return sample_moments(xt).mean;
}

}  // namespace

TEST_CASE("Euler weak error halves with the step") {
    // Both ensembles are driven by the same Brownian path (refinement pairing),
    // so the difference of biases is far less noisy than either mean.
    const auto model = ou_model();
    const double exact = 2.0 * std::exp(-1.0);
    const std::size_t n = 1'000'000;
    SimulationOptions coarse_opts;
    coarse_opts.refinement = 1;
    SimulationOptions fine_opts;
    fine_opts.refinement = 2;
    const auto coarse = simulate(model, 1.0, 0.02, n, 31, coarse_opts);
    const auto fine = simulate(model, 1.0, 0.01, n, 31, fine_opts);
    const double bias_coarse = std::abs(terminal_mean(coarse) - exact);
    const double bias_fine = std::abs(terminal_mean(fine) - exact);
    MESSAGE("bias(dt) = " << bias_coarse << ", bias(dt/2) = " << bias_fine);
    CHECK(bias_fine < 0.75 * bias_coarse);
}

TEST_CASE("integrability statistic is stable across seeds") {
    const auto model = ou_model();
    const auto x2 = PolyVec::unit(model->basis(), "x2");
    std::vector<double> averages;
    for (std::uint64_t seed : {1, 2, 3, 4}) {
        const auto ens = simulate(model, 1.0, 0.01, 20000, seed);
        const auto r = moment_integrability_check(ens, x2);
        CHECK(r.finite);
        averages.push_back(r.time_average);
    }
    for (double a : averages) CHECK(a == doctest::Approx(averages[0]).epsilon(0.05));
}

TEST_CASE("martingale increments are uncorrelated") {
    testing::Gen gen(91);
    for (int trial = 0; trial < 3; ++trial) {
        const double kappa = gen.uniform(0.5, 2.0);
        const auto model = std::make_shared<const ProcessModel>(
            make_polynomial_diffusion("ou", {0.3, -kappa, 1.0, 0.0, 0.0}, gen.uniform(-1, 1), {-1e9, 1e9}));
        const auto ens = simulate(model, 1.0, 0.005, 20000, 100 + static_cast<std::uint64_t>(trial));
        for (const char* label : {"x", "x2"}) {
            CAPTURE(label);
            const auto r = martingale_increment_test(ens, *model->generator, PolyVec::unit(model->basis(), label), 0.0,
                                                     0.5, 1.0);
            CHECK(r.pass);
        }
    }
}
