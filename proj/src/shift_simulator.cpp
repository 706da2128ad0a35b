#include "retasa/shift_simulator.hpp"

#include "retasa/errors.hpp"
#include "retasa/random.hpp"

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace retasa {
namespace {

const boost::math::normal standard_normal;

} // namespace

void
ShiftSpec::validate() const
{
  if (!(sigma > 0.0) || !std::isfinite(sigma))
    throw ConfigError("shift sigma must be finite and > 0");
  if (!(mu >= 0.0 && mu <= 1.0))
    throw ConfigError("shift mu must lie in [0, 1]");
}

ShiftLaw
ShiftLaw::uniform()
{
  return ShiftLaw();
}

ShiftLaw
ShiftLaw::truncated_normal(const ShiftSpec& spec)
{
  spec.validate();
  ShiftLaw law;
  law.uniform_ = false;
  law.spec_ = spec;
  const double a = (0.0 - spec.mu) / spec.sigma;
  const double b = (1.0 - spec.mu) / spec.sigma;
  law.cdf_lo_ = boost::math::cdf(standard_normal, a);
  law.mass_ = boost::math::cdf(standard_normal, b) - law.cdf_lo_;
  if (!(law.mass_ > 0.0))
    throw ConfigError("truncated normal has no mass on [0, 1]");
  return law;
}

double
ShiftLaw::pdf(double u) const
{
  if (u < 0.0 || u > 1.0)
    return 0.0;
  if (uniform_)
    return 1.0;
  const double z = (u - spec_.mu) / spec_.sigma;
  return boost::math::pdf(standard_normal, z) / (spec_.sigma * mass_);
}

double
ShiftLaw::cdf(double u) const
{
  if (u <= 0.0)
    return 0.0;
  if (u >= 1.0)
    return 1.0;
  if (uniform_)
    return u;
  const double z = (u - spec_.mu) / spec_.sigma;
  return (boost::math::cdf(standard_normal, z) - cdf_lo_) / mass_;
}

double
ShiftLaw::quantile(double p) const
{
  if (!(p > 0.0 && p < 1.0))
    throw ConfigError("quantile level must lie in (0, 1)");
  if (uniform_)
    return p;
  const double z = boost::math::quantile(standard_normal, cdf_lo_ + p * mass_);
  return std::clamp(spec_.mu + spec_.sigma * z, 0.0, 1.0);
}

double
ShiftLaw::mean() const
{
  if (uniform_)
    return 0.5;
  const double a = (0.0 - spec_.mu) / spec_.sigma;
  const double b = (1.0 - spec_.mu) / spec_.sigma;
  return spec_.mu + spec_.sigma *
                      (boost::math::pdf(standard_normal, a) - boost::math::pdf(standard_normal, b)) /
                      mass_;
}

EmpiricalCdf::EmpiricalCdf(std::span<const double> values)
  : sorted_y_(values.begin(), values.end())
{
  if (sorted_y_.empty())
    throw DataError("empirical CDF of an empty sample");
  std::sort(sorted_y_.begin(), sorted_y_.end());
}

double
EmpiricalCdf::operator()(double y) const
{
  const auto it = std::upper_bound(sorted_y_.begin(), sorted_y_.end(), y);
  return static_cast<double>(it - sorted_y_.begin()) / static_cast<double>(sorted_y_.size());
}

std::vector<double>
sample_shift_law(const ShiftLaw& law, std::size_t m, std::uint64_t seed, std::uint64_t stream)
{
  if (m == 0)
    throw ConfigError("sample size must be >= 1");
  Philox rng(seed, stream);
  std::vector<double> u(m);
  for (auto& v : u) {
    v = law.quantile(uniform_open01(rng));
    // The clamp in quantile() can only bite for p within an ulp of 0 or 1.
    v = std::clamp(v, std::nextafter(0.0, 1.0), std::nextafter(1.0, 0.0));
  }
  return u;
}

std::vector<double>
sample_truncnorm(const ShiftSpec& spec, std::size_t m, std::uint64_t seed, std::uint64_t stream)
{
  return sample_shift_law(ShiftLaw::truncated_normal(spec), m, seed, stream);
}

std::size_t
inverse_ecdf_rank(double u, std::size_t n)
{
  const double nd = static_cast<double>(n);
  auto j = static_cast<std::size_t>(std::clamp(std::ceil(u * nd), 1.0, nd));
  // Align with the literal test j / N >= u under floating point.
  while (j > 1 && static_cast<double>(j - 1) / nd >= u)
    --j;
  while (j < n && static_cast<double>(j) / nd < u)
    ++j;
  return j;
}

ShiftedSample
simulate_target_shift(const LabeledData& source,
                      std::size_t m,
                      const ShiftLaw& law,
                      std::uint64_t seed,
                      std::uint64_t stream,
                      SortPolicy policy)
{
  const std::size_t n = source.size();
  if (n == 0)
    throw DataError("cannot simulate a shift from an empty source sample");
  if (source.x.size() != n)
    throw DataError("source covariates and responses differ in length");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{ 0 });
  ShiftedSample out;
  if (!std::is_sorted(source.y.begin(), source.y.end())) {
    if (policy == SortPolicy::require_sorted)
      throw DataError("source sample must be sorted ascending in y");
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return source.y[a] < source.y[b];
    });
    out.sorted_internally = true;
  }

  const auto u = sample_shift_law(law, m, seed, stream);
  out.source_indices.resize(m);
  for (std::size_t i = 0; i < m; ++i)
    out.source_indices[i] = order[inverse_ecdf_rank(u[i], n) - 1];
  out.target = source.select(out.source_indices);
  return out;
}

std::vector<double>
oracle_weights(std::span<const double> y_values, const ShiftLaw& law, const EmpiricalCdf& cdf)
{
  std::vector<double> w(y_values.size());
  for (std::size_t i = 0; i < w.size(); ++i)
    w[i] = law.pdf(cdf(y_values[i]));
  return w;
}

} // namespace retasa
