#pragma once

// Target-shift simulation by inverse sampling through the source empirical
// CDF: draw u from a law g on (0, 1) and emit the first sorted source pair
// whose rank j satisfies j / N >= u. The oracle weight of a response y is
// g(F_s(y)).

#include "retasa/point_set.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace retasa {

//! TNORM on [0, 1] with location mu in [0, 1] and scale sigma > 0.
struct ShiftSpec
{
  double mu{ 0.5 };
  double sigma{ 0.1 };

  void validate() const;
};

//! Law of U_t = F_s(Y_t): uniform (no shift) or a truncated normal.
class ShiftLaw
{
public:
  static ShiftLaw uniform();
  static ShiftLaw truncated_normal(const ShiftSpec& spec);

  bool is_uniform() const { return uniform_; }
  const ShiftSpec& spec() const { return spec_; }

  //! Density on [0, 1]; zero outside.
  double pdf(double u) const;
  double cdf(double u) const;
  //! Inverse CDF for p in (0, 1).
  double quantile(double p) const;
  double mean() const;

private:
  ShiftLaw() = default;

  bool uniform_{ true };
  ShiftSpec spec_{};
  double cdf_lo_{ 0.0 }; // Phi(a)
  double mass_{ 1.0 };   // Phi(b) - Phi(a)
};

class EmpiricalCdf
{
public:
  explicit EmpiricalCdf(std::span<const double> values);

  //! #{y_i <= y} / N
  double operator()(double y) const;
  const std::vector<double>& sorted() const { return sorted_y_; }

private:
  std::vector<double> sorted_y_;
};

//! m inverse-CDF draws from TNORM(mu, sigma) on (0, 1).
std::vector<double> sample_truncnorm(const ShiftSpec& spec,
                                     std::size_t m,
                                     std::uint64_t seed,
                                     std::uint64_t stream = 0);

//! m draws from an arbitrary shift law (uniform or truncated normal).
std::vector<double> sample_shift_law(const ShiftLaw& law,
                                     std::size_t m,
                                     std::uint64_t seed,
                                     std::uint64_t stream = 0);

//! 1-based rank j = min{ j : j / N >= u }.
std::size_t inverse_ecdf_rank(double u, std::size_t n);

enum class SortPolicy
{
  sort_if_needed, //!< stable-sort by y and flag it
  require_sorted  //!< throw DataError on unsorted input
};

struct ShiftedSample
{
  LabeledData target;
  std::vector<std::size_t> source_indices; //!< row of `source` behind each target row
  bool sorted_internally{ false };
};

ShiftedSample simulate_target_shift(const LabeledData& source,
                                    std::size_t m,
                                    const ShiftLaw& law,
                                    std::uint64_t seed,
                                    std::uint64_t stream = 0,
                                    SortPolicy policy = SortPolicy::sort_if_needed);

//! g(F_s(y)) for every y.
std::vector<double> oracle_weights(std::span<const double> y_values,
                                   const ShiftLaw& law,
                                   const EmpiricalCdf& cdf);

} // namespace retasa
