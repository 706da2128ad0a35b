#include "retasa/density_ratio.hpp"

#include "retasa/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace retasa {

EtaEstimate
estimate_eta(const PointSet& source_x,
             const PointSet& target_x,
             const KernelSpec& spec_source,
             const KernelSpec& spec_target,
             const EtaOptions& options)
{
  if (source_x.empty() || target_x.empty())
    throw DataError("density ratio needs nonempty source and target samples");
  if (source_x.dim() != target_x.dim())
    throw DataError("dimension mismatch between source and target covariates");
  if (options.floor && !(*options.floor >= 0.0))
    throw ConfigError("density floor must be >= 0");

  const auto p_s = kde_pdf(source_x, spec_source, source_x);
  const auto p_t = kde_pdf(target_x, spec_target, source_x);

  EtaEstimate est;
  est.floor_used = options.floor.value_or(1e-8 * *std::max_element(p_s.begin(), p_s.end()));
  est.values.resize(p_s.size());
  for (std::size_t i = 0; i < p_s.size(); ++i) {
    const double denom = std::max(p_s[i], est.floor_used);
    if (!(denom > 0.0))
      throw NumericalError("source density is zero at covariate " + std::to_string(i) +
                           " and no floor is set");
    est.values[i] = p_t[i] / denom - 1.0;
  }
  if (options.center) {
    const double mean = std::accumulate(est.values.begin(), est.values.end(), 0.0) /
                        static_cast<double>(est.values.size());
    for (auto& v : est.values)
      v -= mean;
    est.centered = true;
  }
  return est;
}

} // namespace retasa
