#pragma once

#include <cstddef>
#include <vector>

namespace polyproc {

/// A function tabulated on a uniform grid together with its derivative.
///
/// The default call operator uses cubic Hermite interpolation (values and
/// derivatives), which keeps finite-difference second derivatives of the
/// interpolant accurate. `linear()` gives plain piecewise-linear interpolation.
class TabulatedFunction {
public:
    TabulatedFunction(double x_min, double step, std::vector<double> values,
                      std::vector<double> derivatives);

    double operator()(double x) const;
    double derivative(double x) const;
    double linear(double x) const;

    double x_min() const { return x_min_; }
    double x_max() const { return x_min_ + step_ * static_cast<double>(values_.size() - 1); }
    double step() const { return step_; }
    std::size_t size() const { return values_.size(); }
    double node(std::size_t i) const { return x_min_ + step_ * static_cast<double>(i); }
    const std::vector<double>& values() const { return values_; }
    const std::vector<double>& derivatives() const { return derivatives_; }

private:
    // Cell index and local coordinate in [0, 1]; throws DomainError outside the table.
    std::size_t locate(double x, double& t) const;

    double x_min_;
    double step_;
    std::vector<double> values_;
    std::vector<double> derivatives_;
};

}  // namespace polyproc
