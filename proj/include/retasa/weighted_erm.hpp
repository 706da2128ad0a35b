#pragma once

#include "retasa/point_set.hpp"

#include <span>
#include <vector>

namespace retasa {

//! f(x) = intercept + sum_k sum_{p=1..degree} c_{k,p} x_k^p
//! Per-coordinate powers only; no cross terms.
struct PolynomialModel
{
  int degree{ 1 };
  std::size_t dim{ 1 };
  std::vector<double> coefficients; //!< dim * degree, coordinate-major
  double intercept{ 0.0 };

  double coefficient(std::size_t k, int power) const
  {
    return coefficients[k * static_cast<std::size_t>(degree) + static_cast<std::size_t>(power - 1)];
  }
};

//! argmin_f sum_i w_i (f(x_i) - y_i)^2. Weights must be nonnegative with a
//! positive sum; throws NumericalError when the weighted design is rank
//! deficient.
PolynomialModel fit_weighted(const PointSet& x,
                             std::span<const double> y,
                             std::span<const double> w,
                             int degree);

double predict(const PolynomialModel& model, std::span<const double> x);
std::vector<double> predict(const PolynomialModel& model, const PointSet& x);

} // namespace retasa
