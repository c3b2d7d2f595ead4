#pragma once

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "polyproc/generator.hpp"
#include "polyproc/graded_space.hpp"

#ifndef POLYPROC_TEST_MODELS_DIR
#define POLYPROC_TEST_MODELS_DIR "models"
#endif

namespace testing {

using namespace polyproc;

inline std::string model_path(const std::string& name) { return std::string(POLYPROC_TEST_MODELS_DIR) + "/" + name; }

// Small generator helpers for property tests; fixed seeds keep failures reproducible.
class Gen {
public:
    explicit Gen(std::uint64_t seed) : engine_(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }
    double nonzero(double lo, double hi) {
        double v = 0.0;
        while (v == 0.0) v = uniform(lo, hi) * (integer(0, 1) ? 1.0 : -1.0);
        return v;
    }

    // Random polynomial; each coefficient is zero with probability 1/4.
    PolyVec poly(const BasisPtr& basis, double scale = 2.0) {
        Eigen::VectorXd c(static_cast<Eigen::Index>(basis->size()));
        for (Eigen::Index k = 0; k < c.size(); ++k) c(k) = integer(0, 3) == 0 ? 0.0 : uniform(-scale, scale);
        return PolyVec(basis, std::move(c));
    }

private:
    std::mt19937_64 engine_;
};

// Monomial basis 1, x, ..., x^d in one variable, assembled independently of the library helpers.
inline BasisPtr monomials(unsigned d) {
    std::vector<BasisEntry> entries;
    entries.push_back({"1", 0, Evaluator::constant_one()});
    for (unsigned k = 1; k <= d; ++k) {
        entries.push_back({k == 1 ? "x" : "x" + std::to_string(k), k, Evaluator::monomial({k})});
    }
    return GradedBasis::create(std::move(entries));
}

// G x^k = k(mu + gamma x) x^{k-1} + (k(k-1)/2) sigma^2(x) x^{k-2} with sigma^2 = s0 + s1 x + s2 x^2,
// written out column by column.
inline Eigen::MatrixXd diffusion_matrix(unsigned d, double mu, double gamma, double s0, double s1, double s2) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(d + 1, d + 1);
    for (unsigned k = 1; k <= d; ++k) {
        const double kk = k;
        const double c2 = kk * (kk - 1.0) / 2.0;
        m(k - 1, k) += kk * mu + c2 * s1;
        m(k, k) += kk * gamma + c2 * s2;
        if (k >= 2) m(k - 2, k) += c2 * s0;
    }
    return m;
}

inline GeneratorMatrix bm_generator(unsigned d = 2) {
    return {monomials(d), diffusion_matrix(d, 0.0, 0.0, 1.0, 0.0, 0.0)};
}
inline GeneratorMatrix ou_generator(double kappa, double sigma, unsigned d = 2) {
    return {monomials(d), diffusion_matrix(d, 0.0, -kappa, sigma * sigma, 0.0, 0.0)};
}
inline GeneratorMatrix gbm_generator(double gamma, double sigma, unsigned d = 2) {
    return {monomials(d), diffusion_matrix(d, 0.0, gamma, 0.0, 0.0, sigma * sigma)};
}

inline double max_abs_diff(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace testing
