#include "retasa/feature_mapping.hpp"

#include "retasa/errors.hpp"

#include <Eigen/Dense>

#include <string>

namespace retasa {

double
LinearMap::operator()(std::span<const double> x) const
{
  if (x.size() != coefficients.size())
    throw DataError("mapping expects dimension " + std::to_string(coefficients.size()) +
                    ", got " + std::to_string(x.size()));
  double z = intercept;
  for (std::size_t k = 0; k < x.size(); ++k)
    z += coefficients[k] * x[k];
  return z;
}

LinearMap
fit_mapping(const PointSet& source_x, std::span<const double> source_y)
{
  const std::size_t n = source_y.size();
  const std::size_t p = source_x.dim();
  if (source_x.size() != n)
    throw DataError("covariates and responses differ in length");
  if (p == 0 || n <= p + 1)
    throw DataError("linear mapping needs n > p + 1 observations");

  // Centering separates the intercept and keeps the QR well scaled.
  Eigen::MatrixXd design(n, p);
  Eigen::VectorXd means(p);
  for (std::size_t k = 0; k < p; ++k) {
    const auto col = source_x.coord(k);
    double m = 0.0;
    for (double v : col)
      m += v;
    m /= static_cast<double>(n);
    means[static_cast<Eigen::Index>(k)] = m;
    for (std::size_t i = 0; i < n; ++i)
      design(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = col[i] - m;
  }
  Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(source_y.data(), static_cast<Eigen::Index>(n));
  const double y_mean = y.mean();
  y.array() -= y_mean;

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (static_cast<std::size_t>(qr.rank()) < p)
    throw NumericalError("rank-deficient design in linear mapping fit");
  const Eigen::VectorXd beta = qr.solve(y);

  LinearMap map;
  map.coefficients.assign(beta.data(), beta.data() + p);
  map.intercept = y_mean - beta.dot(means);
  return map;
}

double
apply_mapping(const LinearMap& map, std::span<const double> x)
{
  return map(x);
}

PointSet
apply_mapping(const ScalarMapping& map, const PointSet& x)
{
  PointSet z(x.size(), 1);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto row = x.row(i);
    z.at(i, 0) = map(row);
  }
  return z;
}

PointSet
apply_mapping(const LinearMap& map, const PointSet& x)
{
  return apply_mapping(ScalarMapping(map), x);
}

} // namespace retasa
