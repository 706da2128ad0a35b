#pragma once

#include "retasa/point_set.hpp"

#include <span>
#include <vector>

namespace retasa {

enum class KernelKind
{
  gaussian,
  epanechnikov
};

//! A symmetric kernel scaled by a bandwidth h > 0 (same units as the data).
struct KernelSpec
{
  KernelKind kind{ KernelKind::gaussian };
  double bandwidth{ 1.0 };

  //! Throws ConfigError unless the bandwidth is finite and positive.
  void validate() const;
};

//! How a bandwidth is derived from a sample.
struct BandwidthRule
{
  enum class Kind
  {
    silverman,
    scott,
    fixed
  };

  Kind kind{ Kind::silverman };
  double h{ 0.0 }; //!< only used by Kind::fixed

  static BandwidthRule silverman() { return { Kind::silverman, 0.0 }; }
  static BandwidthRule scott() { return { Kind::scott, 0.0 }; }
  static BandwidthRule fixed(double h);
};

//! K(u/h)/h for the one-dimensional kernel.
double kernel_eval(const KernelSpec& spec, double u);

//! Silverman: 0.9 min(sd, IQR/1.34) n^(-1/5); Scott: 1.06 sd n^(-1/5).
//! Quartiles use linear interpolation between order statistics. Throws
//! DataError for fewer than two samples or zero spread.
double select_bandwidth(std::span<const double> samples, const BandwidthRule& rule);

//! Bandwidth for a point set: the rule is applied to each coordinate and the
//! geometric mean is returned (a single scalar bandwidth per estimator).
double select_bandwidth(const PointSet& points, const BandwidthRule& rule);

//! Product-kernel density estimate (n h^d)^-1 sum_i prod_k K((q_k - x_ik)/h).
double kde_pdf(const PointSet& points, const KernelSpec& spec, std::span<const double> query);

//! Univariate form; same arithmetic as the d = 1 product kernel.
double kde_pdf(std::span<const double> samples, const KernelSpec& spec, double query);

//! kde_pdf evaluated at every point of `queries`.
std::vector<double> kde_pdf(const PointSet& points, const KernelSpec& spec, const PointSet& queries);

//! Nadaraya-Watson weights of `query` against `points`: nonnegative, sum to 1.
//! Throws NumericalError when every kernel value is zero (compact kernels
//! with the query outside all supports).
std::vector<double> nw_weights(std::span<const double> query,
                               const PointSet& points,
                               const KernelSpec& spec);

//! Writes the NW weights into `out` (size n) without allocating.
void nw_weights_into(std::span<const double> query,
                     const PointSet& points,
                     const KernelSpec& spec,
                     std::span<double> out);

} // namespace retasa
