#include "polyproc/sim_harness.hpp"

#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "polyproc/random.hpp"

namespace polyproc {

void parallel_chunks(std::size_t n, std::size_t threads,
                     const std::function<void(std::size_t, std::size_t)>& body) {
    const std::size_t workers = std::max<std::size_t>(1, std::min(threads, n));
    if (workers == 1) {
        if (n > 0) body(0, n);
        return;
    }
    std::vector<std::thread> pool;
    std::exception_ptr failure;
    std::mutex failure_mutex;
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(n, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&, begin, end] {
            try {
                body(begin, end);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

namespace {

ValidationCheck se_check(std::string name, double statistic, double se, double allowance, double multiple) {
    ValidationCheck c;
    c.name = std::move(name);
    c.statistic = statistic;
    c.standard_error = se;
    c.allowance = allowance;
    c.threshold = multiple * se + allowance;
    c.pass = std::abs(statistic) <= c.threshold;
    return c;
}

void finalize(ValidationReport& r, const PathEnsemble& ens) {
    r.clipped_fraction = ens.clipped_fraction();
    r.pass = true;
    for (const auto& c : r.checks) r.pass = r.pass && c.pass;
    if (r.clipped_fraction > kMaxClippedFraction) {
        r.pass = false;
        r.flags.push_back("clipped fraction above limit");
    }
    if (!r.checks.empty()) {
        r.statistic = r.checks.front().statistic;
        r.standard_error = r.checks.front().standard_error;
    }
}

double trapezoid(std::span<const double> values, std::size_t from, std::size_t to, double dt) {
    if (to <= from) return 0.0;
    double sum = 0.5 * (values[from] + values[to]);
    for (std::size_t k = from + 1; k < to; ++k) sum += values[k];
    return sum * dt;
}

void require_real(const ScalarPolynomial& p, const char* what) {
    if (!p.is_real_valued()) throw DomainError(std::string(what) + " needs a real-valued polynomial");
}

}  // namespace

SampleMoments sample_moments(std::span<const double> v) {
    SampleMoments m;
    if (v.empty()) return m;
    const double shift = v[0];
    double sum = 0.0;
    for (double x : v) sum += x - shift;
    const double n = static_cast<double>(v.size());
    const double dev_mean = sum / n;
    m.mean = shift + dev_mean;
    if (v.size() > 1) {
        double ss = 0.0;
        for (double x : v) {
            const double d = (x - shift) - dev_mean;
            ss += d * d;
        }
        m.sd = std::sqrt(ss / (n - 1.0));
        m.se = m.sd / std::sqrt(n);
    }
    return m;
}

BasisPtr monomial_basis(unsigned degree) {
    std::vector<BasisEntry> entries;
    for (unsigned k = 0; k <= degree; ++k) {
        const std::string label = k == 0 ? "1" : (k == 1 ? "x" : "x" + std::to_string(k));
        entries.push_back({label, k, Evaluator::monomial(k == 0 ? std::vector<unsigned>{} : std::vector<unsigned>{k})});
    }
    return GradedBasis::create(std::move(entries));
}

GeneratorMatrix polynomial_diffusion_generator(const BasisPtr& monomials, const PolynomialDiffusion& d) {
    const auto n = static_cast<Eigen::Index>(monomials->size());
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index k = 1; k < n; ++k) {
        const double kk = static_cast<double>(k);
        const double half_kk1 = 0.5 * kk * (kk - 1.0);
        m(k - 1, k) += kk * d.mu + half_kk1 * d.s1;
        m(k, k) += kk * d.gamma + half_kk1 * d.s2;
        if (k >= 2) m(k - 2, k) += half_kk1 * d.s0;
    }
    return GeneratorMatrix(monomials, std::move(m));
}

ProcessModel make_polynomial_diffusion(std::string name, const PolynomialDiffusion& d, double x0,
                                       Interval range, unsigned degree) {
    ProcessModel model;
    model.name = std::move(name);
    model.drift = [d](double x) { return d.mu + d.gamma * x; };
    model.sigma = [d](double x) { return std::sqrt(std::max(0.0, d.s0 + d.s1 * x + d.s2 * x * x)); };
    model.state_range = range;
    model.x0 = x0;
    model.generator = std::make_shared<const GeneratorMatrix>(
        polynomial_diffusion_generator(monomial_basis(degree), d));
    return model;
}

ConsistencyReport check_generator_consistency(const ProcessModel& model, std::size_t n_grid, double fd_step,
                                              double tol) {
    const auto& basis = *model.basis();
    if (basis.state_dim() != 1) throw DomainError("consistency check needs a scalar state");
    if (n_grid < 2) throw DomainError("consistency grid needs at least two points");
    constexpr double eps = std::numeric_limits<double>::epsilon();

    ConsistencyReport out;
    double lo = std::max(model.state_range.lo, -kConsistencyWindow);
    double hi = std::min(model.state_range.hi, kConsistencyWindow);
    if (!(lo < hi)) {
        lo = std::max(model.state_range.lo, model.x0 - kConsistencyWindow);
        hi = std::min(model.state_range.hi, model.x0 + kConsistencyWindow);
    }
    lo += 2.0 * fd_step;
    hi -= 2.0 * fd_step;
    double worst_excess = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < basis.size(); ++k) {
        const auto& f = basis.entry(k).eval;
        const PolyVec gf = model.generator->apply(PolyVec::unit(model.basis(), k));
        for (std::size_t i = 0; i < n_grid; ++i) {
            const double x = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n_grid - 1);
            const Complex fm = f.at(x - fd_step);
            const Complex f0 = f.at(x);
            const Complex fp = f.at(x + fd_step);
            const Complex d1 = (fp - fm) / (2.0 * fd_step);
            const Complex d2 = (fp - 2.0 * f0 + fm) / (fd_step * fd_step);
            const double b = model.drift(x);
            const double s = model.sigma(x);
            const Complex expected = b * d1 + 0.5 * s * s * d2;
            const Complex got = evaluate_complex(gf, StatePoint{x});
            const double scale = std::max({std::abs(fm), std::abs(f0), std::abs(fp)});
            const double floor = 8.0 * eps * scale * (std::abs(b) / fd_step + s * s / (fd_step * fd_step)) +
                                 8.0 * eps * std::abs(got);
            const double deviation = std::abs(got - expected);
            const double excess = deviation - (tol + floor);
            if (deviation > out.max_deviation) out.max_deviation = deviation;
            if (excess > worst_excess) {
                worst_excess = excess;
                out.worst_entry = basis.entry(k).label;
                out.worst_x = x;
            }
        }
    }
    out.pass = worst_excess <= 0.0;
    return out;
}

std::size_t TimeGrid::index_of(double t) const {
    if (!std::isfinite(t) || t < 0.0) throw DomainError("time must be finite and non-negative");
    const double pos = t / dt;
    const double k = std::round(pos);
    if (std::abs(pos - k) > 1e-9 * std::max(1.0, pos) || k > static_cast<double>(steps)) {
        throw DomainError("time " + std::to_string(t) + " is not on the simulation grid");
    }
    return static_cast<std::size_t>(k);
}

double PathEnsemble::clipped_fraction() const {
    const double total = static_cast<double>(n_paths_) * static_cast<double>(grid_.steps);
    return total > 0.0 ? static_cast<double>(clipped_steps_) / total : 0.0;
}

void PathEnsemble::path(std::size_t i, std::span<double> out) const {
    if (i >= n_paths_) throw DomainError("path index out of range");
    if (out.size() != n_times()) throw DomainError("path buffer has the wrong length");
    if (stored()) {
        const auto first = storage_.begin() + static_cast<std::ptrdiff_t>(i * n_times());
        std::copy(first, first + static_cast<std::ptrdiff_t>(n_times()), out.begin());
        return;
    }
    generate_path(*model_, grid_, seed_, options_.refinement, i, out);
}

std::size_t generate_path(const ProcessModel& model, const TimeGrid& grid, std::uint64_t seed,
                          std::size_t refinement, std::size_t path_index, std::span<double> out) {
    const NormalStream stream(seed, path_index, StreamDomain::Diffusion);
    const double sqrt_dt = std::sqrt(grid.dt);
    const double combine = 1.0 / std::sqrt(static_cast<double>(refinement));
    const auto [lo, hi] = model.state_range;

    std::uint64_t fine = 0;
    std::array<double, 2> cached{};
    auto next_normal = [&] {
        if (fine % 2 == 0) cached = stream.pair(fine / 2);
        return cached[fine++ % 2];
    };

    std::size_t clipped = 0;
    double x = model.x0;
    out[0] = x;
    for (std::size_t k = 0; k < grid.steps; ++k) {
        double z = 0.0;
        if (refinement == 1) {
            z = next_normal();
        } else {
            for (std::size_t j = 0; j < refinement; ++j) z += next_normal();
            z *= combine;
        }
        double next = x + model.drift(x) * grid.dt + model.sigma(x) * sqrt_dt * z;
        if (!std::isfinite(next)) {
            throw SimulationError("non-finite state at step " + std::to_string(k + 1) + " of path " +
                                  std::to_string(path_index));
        }
        if (next < lo) {
            next = lo;
            ++clipped;
        } else if (next > hi) {
            next = hi;
            ++clipped;
        }
        out[k + 1] = next;
        x = next;
    }
    return clipped;
}

PathEnsemble simulate(std::shared_ptr<const ProcessModel> model, double horizon, double dt, std::size_t n_paths,
                      std::uint64_t seed, SimulationOptions options) {
    if (!model || !model->drift || !model->sigma || !model->generator) {
        throw InputError("simulation needs a complete process model");
    }
    if (!(dt > 0.0) || !std::isfinite(dt)) throw DomainError("dt must be positive");
    if (!(horizon >= dt) || !std::isfinite(horizon)) throw DomainError("horizon must be at least dt");
    if (n_paths == 0) throw DomainError("at least one path is required");
    if (options.refinement == 0) throw DomainError("refinement must be positive");
    if (!model->state_range.contains(model->x0)) throw DomainError("x0 outside the state range");

    const double steps = std::round(horizon / dt);
    if (std::abs(steps * dt - horizon) > 1e-9 * horizon) {
        throw DomainError("horizon is not a multiple of dt");
    }

    PathEnsemble ens;
    ens.model_ = std::move(model);
    ens.grid_ = TimeGrid{dt, static_cast<std::size_t>(steps)};
    ens.n_paths_ = n_paths;
    ens.seed_ = seed;
    ens.options_ = options;

    const std::size_t n_times = ens.n_times();
    if (options.store_paths) ens.storage_.assign(n_paths * n_times, 0.0);
    std::vector<std::size_t> clipped(n_paths, 0);
    parallel_chunks(n_paths, options.threads, [&](std::size_t begin, std::size_t end) {
        std::vector<double> buffer(n_times);
        for (std::size_t i = begin; i < end; ++i) {
            clipped[i] = generate_path(*ens.model_, ens.grid_, seed, options.refinement, i, buffer);
            if (options.store_paths) {
                std::copy(buffer.begin(), buffer.end(),
                          ens.storage_.begin() + static_cast<std::ptrdiff_t>(i * n_times));
            }
        }
    });
    for (std::size_t c : clipped) ens.clipped_steps_ += c;
    return ens;
}

std::vector<ValidationReport> moment_mc_tests(const PathEnsemble& ens, const GeneratorMatrix& g,
                                              const std::vector<PolyVec>& ps, double h, double tolerance_multiple) {
    for (const auto& p : ps) require_same_basis(g.basis(), p.basis(), "moment test");
    const std::size_t kh = ens.grid().index_of(h);
    std::vector<ScalarPolynomial> sps;
    for (const auto& p : ps) sps.emplace_back(p);
    const StatePoint x0{ens.model().x0};

    // Quarter points that fall on the grid go into the detail table.
    std::vector<std::size_t> idx;
    for (int q = 1; q <= 4; ++q) {
        try {
            const std::size_t k = ens.grid().index_of(h * q / 4.0);
            if (idx.empty() || idx.back() != k) idx.push_back(k);
        } catch (const DomainError&) {
        }
    }
    if (idx.empty() || idx.back() != kh) idx.push_back(kh);

    const std::size_t width = idx.size();
    const auto samples = ens.map_paths<std::vector<Complex>>([&](std::size_t, std::span<const double> xs) {
        std::vector<Complex> v(sps.size() * width);
        for (std::size_t a = 0; a < sps.size(); ++a) {
            for (std::size_t j = 0; j < width; ++j) v[a * width + j] = sps[a].complex_at(xs[idx[j]]);
        }
        return v;
    });

    std::vector<ValidationReport> reports;
    const std::size_t n = ens.n_paths();
    std::vector<double> re(n), im(n);
    for (std::size_t a = 0; a < ps.size(); ++a) {
        ValidationReport r;
        r.test = "moment";
        r.tolerance_multiple = tolerance_multiple;
        for (std::size_t j = 0; j < width; ++j) {
            for (std::size_t i = 0; i < n; ++i) {
                re[i] = samples[i][a * width + j].real();
                im[i] = samples[i][a * width + j].imag();
            }
            const double t = ens.grid().time(idx[j]);
            const Complex predicted = conditional_moment_complex(g, ps[a], t, x0);
            const SampleMoments mr = sample_moments(re);
            r.details.push_back({t, "mean p(X)", mr.mean, predicted.real(), mr.se});
            if (idx[j] != kh) continue;

            const double allowance = kEulerBiasConstant * ens.grid().dt * t * std::max(1.0, std::abs(predicted));
            r.checks.push_back(se_check("mean p(X_h) - T_h p(x0)", mr.mean - predicted.real(), mr.se, allowance,
                                        tolerance_multiple));
            if (!sps[a].is_real_valued()) {
                const SampleMoments mi = sample_moments(im);
                r.details.push_back({t, "mean Im p(X)", mi.mean, predicted.imag(), mi.se});
                r.checks.push_back(se_check("imaginary part", mi.mean - predicted.imag(), mi.se, allowance,
                                            tolerance_multiple));
            }
        }
        finalize(r, ens);
        reports.push_back(std::move(r));
    }
    return reports;
}

ValidationReport moment_mc_test(const PathEnsemble& ens, const GeneratorMatrix& g, const PolyVec& p, double h,
                                double tolerance_multiple) {
    return moment_mc_tests(ens, g, {p}, h, tolerance_multiple).front();
}

ValidationReport martingale_residual_test(const PathEnsemble& ens, const GeneratorMatrix& g, const PolyVec& p,
                                          double s, double t, double tolerance_multiple) {
    require_same_basis(g.basis(), p.basis(), "martingale test");
    if (!(s < t)) throw DomainError("martingale test needs s < t");
    const std::size_t ks = ens.grid().index_of(s);
    const std::size_t kt = ens.grid().index_of(t);
    const ScalarPolynomial sp(p);
    const ScalarPolynomial sgp(g.apply(p));
    require_real(sp, "martingale test");
    const double dt = ens.grid().dt;

    struct Sample {
        double increment;
        double p_s;
        double p_t;
    };
    const auto samples = ens.map_paths<Sample>([&](std::size_t, std::span<const double> xs) {
        std::vector<double> gp(kt - ks + 1);
        for (std::size_t k = ks; k <= kt; ++k) gp[k - ks] = sgp(xs[k]);
        const double p_s = sp(xs[ks]);
        const double p_t = sp(xs[kt]);
        return Sample{p_t - p_s - trapezoid(gp, 0, kt - ks, dt), p_s, p_t};
    });

    const std::size_t n = ens.n_paths();
    std::vector<double> inc(n), ps(n), pt(n);
    for (std::size_t i = 0; i < n; ++i) {
        inc[i] = samples[i].increment;
        ps[i] = samples[i].p_s;
        pt[i] = samples[i].p_t;
    }
    const SampleMoments mi = sample_moments(inc);
    const SampleMoments mps = sample_moments(ps);
    const SampleMoments mpt = sample_moments(pt);
    std::vector<double> products(n);
    for (std::size_t i = 0; i < n; ++i) products[i] = (inc[i] - mi.mean) * (ps[i] - mps.mean);
    const SampleMoments mc = sample_moments(products);

    ValidationReport r;
    r.test = "martingale";
    r.tolerance_multiple = tolerance_multiple;
    const double allowance = kEulerBiasConstant * dt * (t - s) * std::max(1.0, std::abs(mpt.mean));
    r.checks.push_back(se_check("mean M_t - M_s", mi.mean, mi.se, allowance, tolerance_multiple));
    r.checks.push_back(se_check("cov(M_t - M_s, p(X_s))", mc.mean, mc.se, allowance * std::max(1.0, mps.sd),
                                tolerance_multiple));
    r.details.push_back({s, "mean p(X)", mps.mean, 0.0, mps.se});
    r.details.push_back({t, "mean p(X)", mpt.mean, 0.0, mpt.se});
    r.details.push_back({t, "mean M_t - M_s", mi.mean, 0.0, mi.se});
    finalize(r, ens);
    return r;
}

ValidationReport martingale_increment_test(const PathEnsemble& ens, const GeneratorMatrix& g, const PolyVec& p,
                                           double t0, double t1, double t2, double tolerance_multiple) {
    require_same_basis(g.basis(), p.basis(), "martingale test");
    if (!(t0 < t1 && t1 < t2)) throw DomainError("martingale increment test needs t0 < t1 < t2");
    const std::size_t k0 = ens.grid().index_of(t0);
    const std::size_t k1 = ens.grid().index_of(t1);
    const std::size_t k2 = ens.grid().index_of(t2);
    const ScalarPolynomial sp(p);
    const ScalarPolynomial sgp(g.apply(p));
    require_real(sp, "martingale test");
    const double dt = ens.grid().dt;

    const auto samples = ens.map_paths<std::array<double, 2>>([&](std::size_t, std::span<const double> xs) {
        std::vector<double> gp(k2 - k0 + 1);
        for (std::size_t k = k0; k <= k2; ++k) gp[k - k0] = sgp(xs[k]);
        const double first = sp(xs[k1]) - sp(xs[k0]) - trapezoid(gp, 0, k1 - k0, dt);
        const double second = sp(xs[k2]) - sp(xs[k1]) - trapezoid(gp, k1 - k0, k2 - k0, dt);
        return std::array<double, 2>{first, second};
    });

    const std::size_t n = ens.n_paths();
    std::vector<double> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
        a[i] = samples[i][0];
        b[i] = samples[i][1];
    }
    const SampleMoments ma = sample_moments(a);
    const SampleMoments mb = sample_moments(b);
    std::vector<double> products(n);
    for (std::size_t i = 0; i < n; ++i) products[i] = (a[i] - ma.mean) * (b[i] - mb.mean);
    const SampleMoments mc = sample_moments(products);

    ValidationReport r;
    r.test = "martingale_increments";
    r.tolerance_multiple = tolerance_multiple;
    const double allowance = kEulerBiasConstant * dt * (t2 - t0) * std::max(1.0, ma.sd * mb.sd);
    r.checks.push_back(se_check("cov of disjoint increments", mc.mean, mc.se, allowance, tolerance_multiple));
    const double corr = (ma.sd > 0.0 && mb.sd > 0.0) ? mc.mean / (ma.sd * mb.sd) : 0.0;
    r.details.push_back({t2, "correlation", corr, 0.0, 0.0});
    finalize(r, ens);
    return r;
}

ValidationReport covariation_test(const PathEnsemble& ens, const GeneratorMatrix& g, const ProductTable& table,
                                  const PolyVec& p, const PolyVec& q, double threshold) {
    const PolyVec a = covariance_poly(g, table, p, q);
    const ScalarPolynomial sp(p);
    const ScalarPolynomial sq(q);
    const ScalarPolynomial sa(a);
    require_real(sp, "covariation test");
    require_real(sq, "covariation test");
    const double dt = ens.grid().dt;
    const std::size_t steps = ens.grid().steps;

    struct Sample {
        double realized;
        double integral;
        double relative;
    };
    const auto samples = ens.map_paths<Sample>([&](std::size_t, std::span<const double> xs) {
        double realized = 0.0;
        double integral = 0.5 * (sa(xs[0]) + sa(xs[steps]));
        double prev_p = sp(xs[0]);
        double prev_q = sq(xs[0]);
        for (std::size_t k = 1; k <= steps; ++k) {
            const double cp = sp(xs[k]);
            const double cq = sq(xs[k]);
            realized += (cp - prev_p) * (cq - prev_q);
            prev_p = cp;
            prev_q = cq;
            if (k < steps) integral += sa(xs[k]);
        }
        integral *= dt;
        double relative = 0.0;
        if (integral != 0.0) {
            relative = std::abs(realized - integral) / std::abs(integral);
        } else if (realized != 0.0) {
            relative = std::numeric_limits<double>::infinity();
        }
        return Sample{realized, integral, relative};
    });

    const std::size_t n = ens.n_paths();
    std::vector<double> rel(n), realized(n), integral(n);
    for (std::size_t i = 0; i < n; ++i) {
        rel[i] = samples[i].relative;
        realized[i] = samples[i].realized;
        integral[i] = samples[i].integral;
    }
    const SampleMoments mrel = sample_moments(rel);
    const SampleMoments mrc = sample_moments(realized);
    const SampleMoments mint = sample_moments(integral);

    ValidationReport r;
    r.test = "covariation";
    r.tolerance_multiple = 0.0;
    ValidationCheck c;
    c.name = "mean relative error";
    c.statistic = mrel.mean;
    c.standard_error = mrel.se;
    c.threshold = threshold;
    c.pass = std::isfinite(mrel.mean) && mrel.mean < threshold;
    r.checks.push_back(c);
    r.details.push_back({ens.grid().horizon(), "mean realized covariation", mrc.mean, mint.mean, mrc.se});
    if (!table.generated_by_linear_entries()) {
        r.flags.push_back("outside product hypotheses: basis not generated by its degree-1 entries");
    }
    if (dt > 1e-3) r.flags.push_back("dt above the 1e-3 guidance");
    finalize(r, ens);
    return r;
}

ValidationReport eigen_mc_test(const PathEnsemble& ens, const LevyExponent& psi, const ComplexPolyVec& p, double h,
                               double tolerance_multiple) {
    const std::size_t kh = ens.grid().index_of(h);
    const auto& basis = *p.basis();
    if (basis.state_dim() != 1) throw DomainError("eigen test needs a scalar state");
    const StatePoint x0{ens.model().x0};
    const Complex predicted = evaluate(eigen_act(psi, p, h), x0);

    const auto samples = ens.map_paths<Complex>([&](std::size_t, std::span<const double> xs) {
        Complex v = 0.0;
        for (std::size_t k = 0; k < basis.size(); ++k) {
            if (p[k] != Complex(0.0)) v += p[k] * basis.entry(k).eval.at(xs[kh]);
        }
        return v;
    });
    const std::size_t n = ens.n_paths();
    std::vector<double> re(n), im(n);
    for (std::size_t i = 0; i < n; ++i) {
        re[i] = samples[i].real();
        im[i] = samples[i].imag();
    }
    const SampleMoments mr = sample_moments(re);
    const SampleMoments mi = sample_moments(im);

    ValidationReport r;
    r.test = "eigen_action";
    r.tolerance_multiple = tolerance_multiple;
    const double allowance = kEulerBiasConstant * ens.grid().dt * h * std::max(1.0, std::abs(predicted));
    r.checks.push_back(se_check("real part", mr.mean - predicted.real(), mr.se, allowance, tolerance_multiple));
    r.checks.push_back(se_check("imaginary part", mi.mean - predicted.imag(), mi.se, allowance, tolerance_multiple));
    r.details.push_back({h, "mean Re p(X)", mr.mean, predicted.real(), mr.se});
    r.details.push_back({h, "mean Im p(X)", mi.mean, predicted.imag(), mi.se});
    finalize(r, ens);
    return r;
}

IntegrabilityReport moment_integrability_check(const PathEnsemble& ens, const PolyVec& p) {
    const ScalarPolynomial sp(p);
    require_real(sp, "integrability check");
    const auto averages = ens.map_paths<double>([&](std::size_t, std::span<const double> xs) {
        double sum = 0.0;
        for (double x : xs) {
            const double v = sp(x);
            sum += v * v;
        }
        return sum / static_cast<double>(xs.size());
    });
    IntegrabilityReport out;
    out.time_average = sample_moments(averages).mean;
    out.finite = std::isfinite(out.time_average);
    return out;
}

TabulatedFunction solve_sigma_ode(double x_max, double step) {
    if (!(x_max > 0.0) || !(step > 0.0) || !std::isfinite(x_max) || !std::isfinite(step)) {
        throw InputError("sigma ODE needs x_max > 0 and step > 0");
    }
    const auto n = static_cast<std::size_t>(std::llround(x_max / step));
    if (n < 2) throw InputError("sigma ODE step is larger than half the range");

    // Integrates w = u - 1 so that the small deviation near zero keeps full
    // relative precision: (w, v)' = (v, x^2 / (1 + w)).
    auto rhs = [](double x, double w, double v, double& dw, double& dv) {
        const double u = 1.0 + w;
        if (!(u > 0.0)) throw DomainError("sigma ODE: u lost positivity at x = " + std::to_string(x));
        dw = v;
        dv = x * x / u;
    };
    auto integrate = [&](double h, std::vector<double>& us, std::vector<double>& vs) {
        us.assign(n + 1, 0.0);
        vs.assign(n + 1, 0.0);
        double w = 0.0, v = 0.0;
        us[0] = 1.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double x = h * static_cast<double>(i);
            double k1w, k1v, k2w, k2v, k3w, k3v, k4w, k4v;
            rhs(x, w, v, k1w, k1v);
            rhs(x + 0.5 * h, w + 0.5 * h * k1w, v + 0.5 * h * k1v, k2w, k2v);
            rhs(x + 0.5 * h, w + 0.5 * h * k2w, v + 0.5 * h * k2v, k3w, k3v);
            rhs(x + h, w + h * k3w, v + h * k3v, k4w, k4v);
            w += h / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w);
            v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
            us[i + 1] = 1.0 + w;
            vs[i + 1] = v;
            if (!(us[i + 1] > 0.0)) {
                throw DomainError("sigma ODE: u lost positivity at x = " + std::to_string(x + h));
            }
        }
    };

    std::vector<double> u_pos, v_pos, u_neg, v_neg;
    integrate(step, u_pos, v_pos);
    integrate(-step, u_neg, v_neg);

    std::vector<double> values(2 * n + 1), derivs(2 * n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
        values[n + i] = u_pos[i];
        derivs[n + i] = v_pos[i];
        values[n - i] = u_neg[i];
        derivs[n - i] = v_neg[i];
    }

    for (std::size_t i = 1; i + 1 < values.size(); ++i) {
        const double central = (values[i + 1] - values[i - 1]) / (2.0 * step);
        if (std::abs(central - derivs[i]) > 1e-6) {
            throw InputError("sigma ODE step too coarse: u' disagrees with the table derivative by " +
                             std::to_string(std::abs(central - derivs[i])));
        }
    }
    return TabulatedFunction(-step * static_cast<double>(n), step, std::move(values), std::move(derivs));
}

ProcessModel make_sigma_ode_model(std::shared_ptr<const TabulatedFunction> u, double x0) {
    if (!u) throw InputError("sigma ODE model needs a table");
    std::vector<BasisEntry> entries{
        {"1", 0, Evaluator::constant_one()},
        {"x", 1, Evaluator::monomial({1})},
        {"x2", 2, Evaluator::monomial({2})},
        {"u", 2, Evaluator::tabulated(u)},
    };
    auto basis = GradedBasis::create(std::move(entries));
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(4, 4);
    m(3, 2) = 1.0;  // G x2 = u
    m(2, 3) = 0.5;  // G u = x^2 / 2

    ProcessModel model;
    model.name = "sigma-ode";
    model.drift = [](double) { return 0.0; };
    model.sigma = [u](double x) { return std::sqrt((*u)(x)); };
    model.state_range = {u->x_min(), u->x_max()};
    model.x0 = x0;
    model.generator = std::make_shared<const GeneratorMatrix>(basis, std::move(m));
    return model;
}

}  // namespace polyproc
