#pragma once

#include "retasa/kernel_density.hpp"
#include "retasa/point_set.hpp"

#include <optional>
#include <vector>

namespace retasa {

//! eta(x_i) = p_t(x_i) / p_s(x_i) - 1 at every source covariate.
struct EtaEstimate
{
  std::vector<double> values;
  double floor_used{ 0.0 }; //!< clamp applied to the source density
  bool centered{ false };   //!< empirical mean subtracted
};

struct EtaOptions
{
  //! Lower clamp on p_s(x_i). Unset: 1e-8 * max_i p_s(x_i).
  std::optional<double> floor;
  //! Subtract the empirical mean so that the values average to zero.
  bool center{ false };
};

EtaEstimate estimate_eta(const PointSet& source_x,
                         const PointSet& target_x,
                         const KernelSpec& spec_source,
                         const KernelSpec& spec_target,
                         const EtaOptions& options = {});

} // namespace retasa
