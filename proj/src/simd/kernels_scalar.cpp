#include "retasa/simd/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace retasa::simd {
namespace {

void
accumulate_sq_scaled_diff(double q,
                          const double* pts,
                          std::size_t n,
                          double inv_h,
                          double* acc)
{
  for (std::size_t i = 0; i < n; ++i) {
    const double u = (q - pts[i]) * inv_h;
    acc[i] += u * u;
  }
}

void
gaussian_from_sq(const double* acc, std::size_t n, double* out)
{
  for (std::size_t i = 0; i < n; ++i)
    out[i] = std::exp(-0.5 * acc[i]);
}

void
multiply_epanechnikov(double q,
                      const double* pts,
                      std::size_t n,
                      double inv_h,
                      double* prod)
{
  for (std::size_t i = 0; i < n; ++i) {
    const double u = (q - pts[i]) * inv_h;
    prod[i] *= std::max(0.0, 1.0 - u * u);
  }
}

double
dot(const double* a, const double* b, std::size_t n)
{
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    s += a[i] * b[i];
  return s;
}

double
sum(const double* a, std::size_t n)
{
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    s += a[i];
  return s;
}

void
scale(double* a, std::size_t n, double s)
{
  for (std::size_t i = 0; i < n; ++i)
    a[i] *= s;
}

} // namespace

const KernelTable&
scalar_kernels()
{
  static const KernelTable table{ "scalar",
                                  accumulate_sq_scaled_diff,
                                  gaussian_from_sq,
                                  multiply_epanechnikov,
                                  dot,
                                  sum,
                                  scale };
  return table;
}

} // namespace retasa::simd
