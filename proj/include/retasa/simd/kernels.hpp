#pragma once

// Data-parallel inner loops behind the kernel estimators. Each entry has a
// scalar reference implementation; vector variants are chosen once at
// startup from the CPU features and must agree with the reference to a few
// ulp (see tests/unit/test_simd.cpp).

#include <cstddef>
#include <string_view>

namespace retasa::simd {

struct KernelTable
{
  std::string_view name;

  //! acc[i] += ((q - pts[i]) * inv_h)^2
  void (*accumulate_sq_scaled_diff)(double q,
                                    const double* pts,
                                    std::size_t n,
                                    double inv_h,
                                    double* acc);

  //! out[i] = exp(-0.5 * acc[i]); acc may alias out.
  void (*gaussian_from_sq)(const double* acc, std::size_t n, double* out);

  //! prod[i] *= max(0, 1 - ((q - pts[i]) * inv_h)^2)
  void (*multiply_epanechnikov)(double q,
                                const double* pts,
                                std::size_t n,
                                double inv_h,
                                double* prod);

  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*sum)(const double* a, std::size_t n);
  //! a[i] *= s
  void (*scale)(double* a, std::size_t n, double s);
};

const KernelTable& scalar_kernels();

//! nullptr when the variant was not compiled in or the CPU lacks it.
const KernelTable* avx2_kernels();

//! The table used by the estimators. Resolved on first use; setting the
//! environment variable RETASA_SIMD=scalar forces the reference path.
const KernelTable& active_kernels();

//! Overrides the active table (tests and benchmarks). Not thread-safe with
//! respect to concurrent estimator calls.
void set_active_kernels(const KernelTable& table);

} // namespace retasa::simd
