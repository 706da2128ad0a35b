#include "retasa/evaluation.hpp"

#include "retasa/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace retasa {
namespace {

double
mean_squared_difference(std::span<const double> a, std::span<const double> b, const char* what)
{
  if (a.size() != b.size())
    throw DataError(std::string(what) + ": length mismatch (" + std::to_string(a.size()) + " vs " +
                    std::to_string(b.size()) + ")");
  if (a.empty())
    throw DataError(std::string(what) + ": empty input");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s / static_cast<double>(a.size());
}

} // namespace

double
weight_mse(std::span<const double> estimated, std::span<const double> oracle)
{
  return mean_squared_difference(estimated, oracle, "weight_mse");
}

double
prediction_mse(std::span<const double> predictions, std::span<const double> truth)
{
  return mean_squared_difference(predictions, truth, "prediction_mse");
}

double
delta_accuracy(double adapted_mse, double nonadapted_mse)
{
  if (!(nonadapted_mse > 0.0))
    throw NumericalError("delta accuracy needs a positive baseline MSE");
  return 100.0 * (nonadapted_mse - adapted_mse) / nonadapted_mse;
}

TrimmedSummary
trimmed_summary(std::span<const double> values, double trim_fraction)
{
  if (!(trim_fraction >= 0.0 && trim_fraction < 0.5))
    throw ConfigError("trim fraction must lie in [0, 0.5)");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const auto cut = static_cast<std::size_t>(std::floor(trim_fraction * static_cast<double>(v.size())));
  if (v.size() <= 2 * cut)
    throw DataError("no values left after trimming");
  const std::span<const double> kept(v.data() + cut, v.size() - 2 * cut);

  TrimmedSummary s;
  s.kept = kept.size();
  for (double x : kept)
    s.mean += x;
  s.mean /= static_cast<double>(kept.size());
  if (kept.size() > 1) {
    double ss = 0.0;
    for (double x : kept)
      ss += (x - s.mean) * (x - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(kept.size() - 1));
  }
  return s;
}

} // namespace retasa
