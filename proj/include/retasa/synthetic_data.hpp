#pragma once

#include "retasa/point_set.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace retasa {

//! Coefficients of the five-dimensional linear design.
inline constexpr std::array<double, 5> linear_design_beta{ 1.132, 2.465, 7.776, 0.0, 0.0 };

//! y = x'beta + eps with x ~ N(0, I_5), eps ~ N(0, 1); no trimming.
LabeledData gen_linear_raw(std::size_t n, std::uint64_t seed);

//! Drops floor(fraction * n) rows from each tail of y (by rank). Row order of
//! the survivors is preserved.
LabeledData trim_response_tails(const LabeledData& data, double fraction);

//! gen_linear_raw followed by 5% two-sided trimming. Requires n >= 20.
LabeledData gen_linear(std::size_t n, std::uint64_t seed);

struct NonlinearDesign
{
  double source_mean{ 0.0 };
  double source_sd{ 2.0 };
  double target_sd{ 0.5 };
  double noise_sd{ 1.0 };
};

struct DomainPair
{
  LabeledData source;
  LabeledData target; //!< target responses are kept for evaluation only
};

//! x = y + 3 tanh(y) + eps, eps ~ N(0, 1); source y ~ N(0, 2^2), target
//! y ~ N(mu_t, 0.5^2). m defaults to round(0.8 n).
DomainPair gen_nonlinear(std::size_t n,
                         std::optional<std::size_t> m,
                         double mu_t,
                         std::uint64_t seed,
                         const NonlinearDesign& design = {});

//! p_t(y) / p_s(y) for the nonlinear design.
double nonlinear_true_weight(double y, double mu_t, const NonlinearDesign& design = {});

struct CsvLoadResult
{
  LabeledData data;
  std::size_t dropped_rows{ 0 };
  std::vector<std::string> feature_names;
};

//! Comma-separated file with a header row. Rows with a missing value ("",
//! "NA" or "?") in any used column are dropped and counted. Throws DataError
//! for missing files or columns, nonnumeric cells, and log of nonpositive y.
CsvLoadResult load_csv(const std::string& path,
                       const std::string& response_column,
                       const std::vector<std::string>& feature_columns,
                       bool log_response);

} // namespace retasa
