#include "polyproc/tabulated.hpp"

#include <cmath>
#include <string>

#include "polyproc/error.hpp"

namespace polyproc {

TabulatedFunction::TabulatedFunction(double x_min, double step, std::vector<double> values,
                                     std::vector<double> derivatives)
    : x_min_(x_min), step_(step), values_(std::move(values)), derivatives_(std::move(derivatives)) {
    if (!(step_ > 0.0) || !std::isfinite(x_min_)) {
        throw InputError("tabulated function needs a finite origin and a positive step");
    }
    if (values_.size() < 2 || values_.size() != derivatives_.size()) {
        throw InputError("tabulated function needs at least two nodes with matching derivatives");
    }
}

std::size_t TabulatedFunction::locate(double x, double& t) const {
    const double pos = (x - x_min_) / step_;
    const auto last = static_cast<double>(values_.size() - 1);
    // Allow a rounding sliver at both ends.
    if (!(pos >= -1e-9) || !(pos <= last + 1e-9)) {
        throw DomainError("tabulated function evaluated at " + std::to_string(x) +
                          " outside [" + std::to_string(x_min_) + ", " +
                          std::to_string(x_max()) + "]");
    }
    double cell = std::floor(pos);
    if (cell < 0.0) cell = 0.0;
    if (cell > last - 1.0) cell = last - 1.0;
    t = pos - cell;
    return static_cast<std::size_t>(cell);
}

double TabulatedFunction::operator()(double x) const {
    double t = 0.0;
    const std::size_t i = locate(x, t);
    const double t2 = t * t;
    const double t3 = t2 * t;
    const double h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    const double h10 = t3 - 2.0 * t2 + t;
    const double h01 = -2.0 * t3 + 3.0 * t2;
    const double h11 = t3 - t2;
    return h00 * values_[i] + h10 * step_ * derivatives_[i] + h01 * values_[i + 1] +
           h11 * step_ * derivatives_[i + 1];
}

double TabulatedFunction::derivative(double x) const {
    double t = 0.0;
    const std::size_t i = locate(x, t);
    const double t2 = t * t;
    const double d00 = 6.0 * t2 - 6.0 * t;
    const double d10 = 3.0 * t2 - 4.0 * t + 1.0;
    const double d01 = -6.0 * t2 + 6.0 * t;
    const double d11 = 3.0 * t2 - 2.0 * t;
    return (d00 * values_[i] + d01 * values_[i + 1]) / step_ + d10 * derivatives_[i] +
           d11 * derivatives_[i + 1];
}

double TabulatedFunction::linear(double x) const {
    double t = 0.0;
    const std::size_t i = locate(x, t);
    return (1.0 - t) * values_[i] + t * values_[i + 1];
}

}  // namespace polyproc
