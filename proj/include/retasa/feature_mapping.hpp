#pragma once

#include "retasa/point_set.hpp"

#include <functional>
#include <span>
#include <vector>

namespace retasa {

//! z = intercept + <coefficients, x>
struct LinearMap
{
  std::vector<double> coefficients;
  double intercept{ 0.0 };

  double operator()(std::span<const double> x) const;
};

//! Any scalar summary z = f(x). Plug-in point for mappings fitted elsewhere.
using ScalarMapping = std::function<double(std::span<const double>)>;

//! Ordinary least squares of y on x with an intercept. Requires n > p + 1
//! and a full-rank design; throws NumericalError when rank deficient.
LinearMap fit_mapping(const PointSet& source_x, std::span<const double> source_y);

double apply_mapping(const LinearMap& map, std::span<const double> x);

//! Maps every point to a one-dimensional point set.
PointSet apply_mapping(const ScalarMapping& map, const PointSet& x);
PointSet apply_mapping(const LinearMap& map, const PointSet& x);

} // namespace retasa
