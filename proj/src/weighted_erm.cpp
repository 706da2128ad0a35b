#include "retasa/weighted_erm.hpp"

#include "retasa/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>

namespace retasa {

PolynomialModel
fit_weighted(const PointSet& x, std::span<const double> y, std::span<const double> w, int degree)
{
  const std::size_t n = y.size();
  if (degree < 1)
    throw ConfigError("polynomial degree must be >= 1");
  if (x.size() != n || w.size() != n)
    throw DataError("covariates, responses and weights differ in length");
  double w_total = 0.0;
  for (double wi : w) {
    if (!(wi >= 0.0) || !std::isfinite(wi))
      throw DataError("weights must be finite and nonnegative");
    w_total += wi;
  }
  if (!(w_total > 0.0))
    throw NumericalError("all regression weights are zero");

  const std::size_t d = x.dim();
  const auto deg = static_cast<std::size_t>(degree);
  const std::size_t cols = 1 + d * deg;

  // Columns are rescaled by their max magnitude before the QR; degree-5
  // Vandermonde columns otherwise span many orders of magnitude.
  Eigen::MatrixXd design(n, cols);
  design.col(0).setOnes();
  for (std::size_t k = 0; k < d; ++k) {
    const auto xk = x.coord(k);
    for (std::size_t i = 0; i < n; ++i) {
      double p = 1.0;
      for (std::size_t q = 0; q < deg; ++q) {
        p *= xk[i];
        design(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(1 + k * deg + q)) = p;
      }
    }
  }
  Eigen::VectorXd col_scale(cols);
  for (Eigen::Index c = 0; c < design.cols(); ++c) {
    const double s = design.col(c).cwiseAbs().maxCoeff();
    col_scale[c] = s > 0.0 ? s : 1.0;
    design.col(c) /= col_scale[c];
  }

  Eigen::VectorXd rhs(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double sw = std::sqrt(w[i]);
    design.row(static_cast<Eigen::Index>(i)) *= sw;
    rhs[static_cast<Eigen::Index>(i)] = sw * y[i];
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (static_cast<std::size_t>(qr.rank()) < cols)
    throw NumericalError("weighted polynomial design is rank deficient (rank " +
                         std::to_string(qr.rank()) + " < " + std::to_string(cols) + ")");
  const Eigen::VectorXd beta = qr.solve(rhs).cwiseQuotient(col_scale);

  PolynomialModel model;
  model.degree = degree;
  model.dim = d;
  model.intercept = beta[0];
  model.coefficients.assign(beta.data() + 1, beta.data() + cols);
  return model;
}

double
predict(const PolynomialModel& model, std::span<const double> x)
{
  if (x.size() != model.dim)
    throw DataError("model expects dimension " + std::to_string(model.dim) + ", got " +
                    std::to_string(x.size()));
  double f = model.intercept;
  for (std::size_t k = 0; k < model.dim; ++k) {
    double p = 1.0;
    for (int q = 1; q <= model.degree; ++q) {
      p *= x[k];
      f += model.coefficient(k, q) * p;
    }
  }
  return f;
}

std::vector<double>
predict(const PolynomialModel& model, const PointSet& x)
{
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    out[i] = predict(model, x.row(i));
  return out;
}

} // namespace retasa
