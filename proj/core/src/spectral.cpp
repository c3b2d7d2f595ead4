#include "polyproc/spectral.hpp"

#include <cmath>
#include <numbers>

#include "polyproc/random.hpp"

namespace polyproc {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double frac(double x) { return x - std::floor(x); }

double rate(std::size_t n) { return kTwoPi * static_cast<double>(n); }

// (e^{i w h} - 1) / (i w) = sin(th)/w + i 2 sin^2(th/2)/w, th = w h mod 2 pi.
Complex rotation_integral(std::size_t n, double h) {
    const double w = rate(n);
    const double th = kTwoPi * frac(static_cast<double>(n) * h);
    const double s = std::sin(0.5 * th);
    return {std::sin(th) / w, 2.0 * s * s / w};
}

struct StepLaw {
    Complex rotation;
    Complex drift;
    double l11 = 0.0;  // Cholesky factor of the (Re, Im) covariance
    double l21 = 0.0;
    double l22 = 0.0;
};

StepLaw step_law(const TruncatedSpectralModel& model, std::size_t n) {
    const double dt = model.t_grid.dt;
    const double w = rate(n);
    const double q = model.q_decay[n - 1];
    const double th = kTwoPi * frac(static_cast<double>(n) * dt);
    const double vrr = q * (0.5 * dt + std::sin(2.0 * th) / (4.0 * w));
    const double vii = q * (0.5 * dt - std::sin(2.0 * th) / (4.0 * w));
    const double s = std::sin(th);
    const double vri = q * s * s / (2.0 * w);

    StepLaw law;
    law.rotation = TruncatedSpectralModel::phase(n, dt);
    law.drift = rotation_integral(n, dt);
    law.l11 = std::sqrt(std::max(0.0, vrr));
    law.l21 = law.l11 > 0.0 ? vri / law.l11 : 0.0;
    law.l22 = std::sqrt(std::max(0.0, vii - law.l21 * law.l21));
    return law;
}

std::uint64_t spectral_stream(std::size_t path, std::size_t n) {
    return (static_cast<std::uint64_t>(path) << 20) + static_cast<std::uint64_t>(n);
}

Complex advance(const StepLaw& law, Complex x, const std::array<double, 2>& z) {
    const double re = law.l11 * z[0];
    const double im = law.l21 * z[0] + law.l22 * z[1];
    return law.rotation * x + law.drift + Complex(re, im);
}

ValidationCheck check(std::string name, double statistic, double se, double multiple) {
    ValidationCheck c;
    c.name = std::move(name);
    c.statistic = statistic;
    c.standard_error = se;
    c.threshold = multiple * se;
    c.pass = std::abs(statistic) <= c.threshold;
    return c;
}

}  // namespace

TruncatedSpectralModel TruncatedSpectralModel::create(std::size_t N, double horizon, std::size_t steps) {
    if (N == 0) throw DomainError("spectral truncation needs N >= 1");
    if (steps == 0 || !(horizon > 0.0) || !std::isfinite(horizon)) {
        throw DomainError("spectral grid needs a positive horizon and at least one step");
    }
    TruncatedSpectralModel m;
    m.N = N;
    m.rotation_rates.resize(N);
    m.q_decay.resize(N);
    for (std::size_t n = 1; n <= N; ++n) {
        m.rotation_rates[n - 1] = rate(n);
        const double d = 1.0 + static_cast<double>(n);
        m.q_decay[n - 1] = 1.0 / (d * d);
    }
    m.t_grid = TimeGrid{horizon / static_cast<double>(steps), steps};
    return m;
}

Complex TruncatedSpectralModel::phase(std::size_t n, double h) {
    return std::polar(1.0, kTwoPi * frac(static_cast<double>(n) * h));
}

std::vector<Complex> rotate(const std::vector<Complex>& x, double h) {
    std::vector<Complex> y(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) y[k] = TruncatedSpectralModel::phase(k + 1, h) * x[k];
    return y;
}

DriftIntegral drift_integral(double t, std::size_t N) {
    if (!(t >= 0.0) || !std::isfinite(t)) throw DomainError("drift integral needs a finite t >= 0");
    if (N == 0) throw DomainError("drift integral needs N >= 1");
    DriftIntegral out;
    out.components.resize(N);
    for (std::size_t n = 1; n <= N; ++n) {
        out.components[n - 1] = rotation_integral(n, t);
        out.norm_sq += std::norm(out.components[n - 1]);
    }
    out.norm = std::sqrt(out.norm_sq);
    return out;
}

Complex quadrature_component(std::size_t n, double t, double step) {
    if (!(t >= 0.0) || !(step > 0.0)) throw DomainError("quadrature needs t >= 0 and step > 0");
    if (t == 0.0) return 0.0;
    auto m = static_cast<std::size_t>(std::ceil(t / step));
    if (m % 2 == 1) ++m;
    const double h = t / static_cast<double>(m);
    auto f = [&](std::size_t k) { return TruncatedSpectralModel::phase(n, h * static_cast<double>(k)); };
    Complex sum = f(0) + f(m);
    for (std::size_t k = 1; k < m; ++k) sum += (k % 2 == 1 ? 4.0 : 2.0) * f(k);
    return sum * (h / 3.0);
}

OutOfSpaceReport out_of_space_report(double t, const std::vector<std::size_t>& N_list) {
    if (N_list.empty()) throw DomainError("N list is empty");
    for (std::size_t k = 1; k < N_list.size(); ++k) {
        if (N_list[k] <= N_list[k - 1]) throw DomainError("N list must be increasing");
    }
    OutOfSpaceReport r;
    r.t = t;
    r.N_list = N_list;
    for (std::size_t N : N_list) {
        double ones = 0.0;
        for (std::size_t n = 0; n < N; ++n) ones += 1.0;
        r.b_norm_sq.push_back(ones);
        r.b_unbounded = r.b_unbounded && ones == static_cast<double>(N);
        r.integral_norm_sq.push_back(drift_integral(t, N).norm_sq);
    }
    if (N_list.size() >= 2) {
        const std::size_t k = N_list.size() - 1;
        r.last_change = std::abs(r.integral_norm_sq[k] - r.integral_norm_sq[k - 1]);
    }
    r.converged = r.last_change < kSpectralConvergenceTol;

    const auto closed = drift_integral(t, kQuadratureModes);
    for (std::size_t n = 1; n <= kQuadratureModes; ++n) {
        const double err = std::abs(closed.components[n - 1] - quadrature_component(n, t, kQuadratureStep));
        r.quadrature_max_error = std::max(r.quadrature_max_error, err);
    }
    r.quadrature_pass = r.quadrature_max_error < kQuadratureTol;
    r.pass = r.b_unbounded && r.converged && r.quadrature_pass;
    return r;
}

std::vector<Complex> spectral_path(const TruncatedSpectralModel& model, std::uint64_t seed, std::size_t path,
                                   std::size_t n) {
    if (n == 0 || n > model.N) throw DomainError("spectral coordinate out of range");
    const StepLaw law = step_law(model, n);
    const NormalStream stream(seed, spectral_stream(path, n), StreamDomain::Spectral);
    std::vector<Complex> xs(model.t_grid.steps + 1);
    xs[0] = 0.0;
    for (std::size_t k = 0; k < model.t_grid.steps; ++k) xs[k + 1] = advance(law, xs[k], stream.pair(k));
    return xs;
}

SpectralEnsemble simulate_spectral_ou(const TruncatedSpectralModel& model, std::size_t n_paths,
                                      std::uint64_t seed, std::size_t threads, double tolerance_multiple) {
    if (model.N == 0 || model.N > 10000) throw DomainError("spectral simulation needs 1 <= N <= 10000");
    if (n_paths == 0) throw DomainError("at least one path is required");

    SpectralEnsemble ens;
    ens.model = model;
    ens.n_paths = n_paths;
    ens.seed = seed;
    ens.terminal.assign(n_paths * model.N, Complex(0.0));

    std::vector<StepLaw> laws(model.N);
    for (std::size_t n = 1; n <= model.N; ++n) laws[n - 1] = step_law(model, n);

    parallel_chunks(n_paths, threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            for (std::size_t n = 1; n <= model.N; ++n) {
                const NormalStream stream(seed, spectral_stream(i, n), StreamDomain::Spectral);
                Complex x = 0.0;
                for (std::size_t k = 0; k < model.t_grid.steps; ++k) x = advance(laws[n - 1], x, stream.pair(k));
                ens.terminal[i * model.N + (n - 1)] = x;
            }
        }
    });

    const double t = model.t_grid.horizon();
    const auto expected = drift_integral(t, model.N);
    ValidationReport& r = ens.report;
    r.test = "spectral_ou";
    r.tolerance_multiple = tolerance_multiple;
    std::vector<double> re(n_paths), im(n_paths), dev(n_paths);
    const double bessel = n_paths > 1 ? static_cast<double>(n_paths) / static_cast<double>(n_paths - 1) : 1.0;
    for (std::size_t n : kSpectralCheckedModes) {
        if (n > model.N) continue;
        for (std::size_t i = 0; i < n_paths; ++i) {
            re[i] = ens.at(i, n).real();
            im[i] = ens.at(i, n).imag();
        }
        const SampleMoments mr = sample_moments(re);
        const SampleMoments mi = sample_moments(im);
        const Complex mean(mr.mean, mi.mean);
        for (std::size_t i = 0; i < n_paths; ++i) dev[i] = bessel * std::norm(ens.at(i, n) - mean);
        const SampleMoments mv = sample_moments(dev);
        const Complex target = expected.components[n - 1];
        const double variance = t * model.q_decay[n - 1];
        const std::string tag = "X" + std::to_string(n);
        r.checks.push_back(check("mean Re " + tag, mr.mean - target.real(), mr.se, tolerance_multiple));
        r.checks.push_back(check("mean Im " + tag, mi.mean - target.imag(), mi.se, tolerance_multiple));
        r.checks.push_back(check("variance " + tag, mv.mean - variance, mv.se, tolerance_multiple));
        r.details.push_back({t, "mean Re " + tag, mr.mean, target.real(), mr.se});
        r.details.push_back({t, "mean Im " + tag, mi.mean, target.imag(), mi.se});
        r.details.push_back({t, "variance " + tag, mv.mean, variance, mv.se});
    }
    if (model.N >= 2) {
        std::vector<double> r1(n_paths), r2(n_paths);
        for (std::size_t i = 0; i < n_paths; ++i) {
            r1[i] = ens.at(i, 1).real();
            r2[i] = ens.at(i, 2).real();
        }
        const SampleMoments m1 = sample_moments(r1);
        const SampleMoments m2 = sample_moments(r2);
        for (std::size_t i = 0; i < n_paths; ++i) dev[i] = (r1[i] - m1.mean) * (r2[i] - m2.mean);
        const SampleMoments mc = sample_moments(dev);
        r.checks.push_back(check("cov(Re X1, Re X2)", mc.mean, mc.se, tolerance_multiple));
        r.details.push_back({t, "cov(Re X1, Re X2)", mc.mean, 0.0, mc.se});
    }
    r.pass = true;
    for (const auto& c : r.checks) r.pass = r.pass && c.pass;
    if (!r.checks.empty()) {
        r.statistic = r.checks.front().statistic;
        r.standard_error = r.checks.front().standard_error;
    }
    return ens;
}

}  // namespace polyproc
