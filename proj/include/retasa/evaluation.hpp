#pragma once

#include <span>

namespace retasa {

//! mean_i (estimated_i - oracle_i)^2
double weight_mse(std::span<const double> estimated, std::span<const double> oracle);

//! mean_i (prediction_i - truth_i)^2
double prediction_mse(std::span<const double> predictions, std::span<const double> truth);

//! 100 (baseline - adapted) / baseline, in percent.
double delta_accuracy(double adapted_mse, double nonadapted_mse);

struct TrimmedSummary
{
  double mean{ 0.0 };
  double sd{ 0.0 };    //!< sample (n - 1) sd; 0 when one value survives
  std::size_t kept{ 0 };
};

//! Drops floor(trim_fraction * k) values from each end of the sorted input.
TrimmedSummary trimmed_summary(std::span<const double> values, double trim_fraction);

} // namespace retasa
