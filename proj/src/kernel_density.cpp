#include "retasa/kernel_density.hpp"

#include "retasa/errors.hpp"
#include "retasa/simd/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace retasa {
namespace {

constexpr double inv_sqrt_2pi = 0.3989422804014326779399461;
constexpr double epanechnikov_norm = 0.75;

void
check_dims(const PointSet& points, std::size_t query_dim)
{
  if (points.dim() != query_dim)
    throw DataError("dimension mismatch: points have dimension " +
                    std::to_string(points.dim()) + ", query has " +
                    std::to_string(query_dim));
}

// Unnormalized kernel products prod_k k((q_k - x_ik)/h) written to `out`.
// For the Gaussian the exponent is shifted by `shift` (subtracted from the
// squared distance) so that callers normalizing afterwards avoid underflow.
void
kernel_products(std::span<const double> query,
                const PointSet& points,
                const KernelSpec& spec,
                std::span<double> out,
                bool shift_to_max)
{
  const auto& simd = simd::active_kernels();
  const std::size_t n = points.size();
  const double inv_h = 1.0 / spec.bandwidth;
  if (spec.kind == KernelKind::gaussian) {
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t k = 0; k < points.dim(); ++k)
      simd.accumulate_sq_scaled_diff(query[k], points.coord(k).data(), n, inv_h, out.data());
    if (shift_to_max && n > 0) {
      const double lo = *std::min_element(out.begin(), out.end());
      for (auto& v : out)
        v -= lo;
    }
    simd.gaussian_from_sq(out.data(), n, out.data());
  } else {
    std::fill(out.begin(), out.end(), 1.0);
    for (std::size_t k = 0; k < points.dim(); ++k)
      simd.multiply_epanechnikov(query[k], points.coord(k).data(), n, inv_h, out.data());
  }
}

double
kernel_constant(const KernelSpec& spec, std::size_t dim)
{
  const double c = spec.kind == KernelKind::gaussian ? inv_sqrt_2pi : epanechnikov_norm;
  return std::pow(c / spec.bandwidth, static_cast<double>(dim));
}

double
sample_sd(std::span<const double> v)
{
  double mean = 0.0;
  for (double x : v)
    mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v)
    ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

// Linear interpolation between order statistics (the "type 7" quantile).
double
quantile_sorted(std::span<const double> sorted, double p)
{
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

} // namespace

void
KernelSpec::validate() const
{
  if (!(bandwidth > 0.0) || !std::isfinite(bandwidth))
    throw ConfigError("kernel bandwidth must be finite and > 0, got " +
                      std::to_string(bandwidth));
}

BandwidthRule
BandwidthRule::fixed(double h)
{
  if (!(h > 0.0) || !std::isfinite(h))
    throw ConfigError("fixed bandwidth must be finite and > 0");
  return { Kind::fixed, h };
}

double
kernel_eval(const KernelSpec& spec, double u)
{
  spec.validate();
  const double t = u / spec.bandwidth;
  if (spec.kind == KernelKind::gaussian)
    return inv_sqrt_2pi * std::exp(-0.5 * t * t) / spec.bandwidth;
  return std::abs(t) <= 1.0 ? epanechnikov_norm * (1.0 - t * t) / spec.bandwidth : 0.0;
}

double
select_bandwidth(std::span<const double> samples, const BandwidthRule& rule)
{
  if (rule.kind == BandwidthRule::Kind::fixed) {
    if (!(rule.h > 0.0))
      throw ConfigError("fixed bandwidth must be > 0");
    return rule.h;
  }
  if (samples.size() < 2)
    throw DataError("bandwidth selection needs at least two samples");
  const double sd = sample_sd(samples);
  if (!(sd > 0.0))
    throw DataError("bandwidth selection on a degenerate sample (all values identical)");
  const double n_factor = std::pow(static_cast<double>(samples.size()), -0.2);
  if (rule.kind == BandwidthRule::Kind::scott)
    return 1.06 * sd * n_factor;

  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
  double spread = std::min(sd, iqr / 1.34);
  if (!(spread > 0.0))
    spread = sd;
  return 0.9 * spread * n_factor;
}

double
select_bandwidth(const PointSet& points, const BandwidthRule& rule)
{
  if (points.dim() == 0)
    throw DataError("bandwidth selection on an empty point set");
  double log_sum = 0.0;
  for (std::size_t k = 0; k < points.dim(); ++k)
    log_sum += std::log(select_bandwidth(points.coord(k), rule));
  return std::exp(log_sum / static_cast<double>(points.dim()));
}

double
kde_pdf(const PointSet& points, const KernelSpec& spec, std::span<const double> query)
{
  spec.validate();
  check_dims(points, query.size());
  if (points.empty())
    throw DataError("kde_pdf needs at least one sample point");
  std::vector<double> buf(points.size());
  kernel_products(query, points, spec, buf, false);
  const double s = simd::active_kernels().sum(buf.data(), buf.size());
  return s * kernel_constant(spec, points.dim()) / static_cast<double>(points.size());
}

double
kde_pdf(std::span<const double> samples, const KernelSpec& spec, double query)
{
  const double q[1] = { query };
  return kde_pdf(PointSet::from_scalars(samples), spec, std::span<const double>(q, 1));
}

std::vector<double>
kde_pdf(const PointSet& points, const KernelSpec& spec, const PointSet& queries)
{
  spec.validate();
  check_dims(points, queries.dim());
  if (points.empty())
    throw DataError("kde_pdf needs at least one sample point");
  const auto& simd = simd::active_kernels();
  const double c = kernel_constant(spec, points.dim()) / static_cast<double>(points.size());
  std::vector<double> buf(points.size());
  std::vector<double> q(queries.dim());
  std::vector<double> out(queries.size());
  for (std::size_t j = 0; j < queries.size(); ++j) {
    for (std::size_t k = 0; k < queries.dim(); ++k)
      q[k] = queries.at(j, k);
    kernel_products(q, points, spec, buf, false);
    out[j] = simd.sum(buf.data(), buf.size()) * c;
  }
  return out;
}

void
nw_weights_into(std::span<const double> query,
                const PointSet& points,
                const KernelSpec& spec,
                std::span<double> out)
{
  spec.validate();
  check_dims(points, query.size());
  if (points.empty())
    throw DataError("Nadaraya-Watson weights need at least one point");
  if (out.size() != points.size())
    throw DataError("output span has the wrong length");
  kernel_products(query, points, spec, out, true);
  const auto& simd = simd::active_kernels();
  const double total = simd.sum(out.data(), out.size());
  if (!(total > 0.0))
    throw NumericalError("all kernel values are zero at the query; it lies outside "
                         "every kernel's support (increase the bandwidth)");
  simd.scale(out.data(), out.size(), 1.0 / total);
}

std::vector<double>
nw_weights(std::span<const double> query, const PointSet& points, const KernelSpec& spec)
{
  std::vector<double> w(points.size());
  nw_weights_into(query, points, spec, w);
  return w;
}

} // namespace retasa
