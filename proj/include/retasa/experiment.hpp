#pragma once

// One replication = build source/target samples, estimate eta and the
// operators, solve for the weights, fit each arm's weighted model and score
// it on the target. Replications are independent and seeded from
// (config.seed, rep), so they can run on any number of threads.

#include "retasa/config.hpp"
#include "retasa/errors.hpp"
#include "retasa/evaluation.hpp"
#include "retasa/synthetic_data.hpp"
#include "retasa/weight_solver.hpp"

#include <map>
#include <memory>
#include <string>
#include <vector>

namespace retasa {

//! Source/target samples of one replication with the oracle weights at the
//! source responses.
struct ReplicationData
{
  LabeledData source;
  LabeledData target;
  std::vector<double> oracle;
  bool sorted_internally{ false };
};

//! Everything the weight estimate of one replication depends on.
struct WeightProblem
{
  PointSet z_source; //!< covariates after the optional mapping
  PointSet z_target;
  KernelSpec spec_x;
  KernelSpec spec_y;
  EtaEstimate eta;
  OperatorMatrices ops;
};

struct ArmRecord
{
  std::size_t rep{ 0 };
  Arm arm{ Arm::none };
  double weight_mse{ 0.0 };
  double pred_mse{ 0.0 };
  double delta_acc{ 0.0 };
  double alpha_used{ 0.0 }; //!< 0 for arms without a regularized solve
  double wall_time_ms{ 0.0 };
  std::size_t clamped_count{ 0 };
};

struct ExperimentReport
{
  std::vector<ArmRecord> rows; //!< sorted by (rep, arm)
  //! arm -> metric -> trimmed summary
  std::map<std::string, std::map<std::string, TrimmedSummary>> summary;
};

//! Shared, immutable inputs (the loaded CSV, if any). Thread-safe to share.
class ExperimentContext
{
public:
  explicit ExperimentContext(ExperimentConfig config);

  const ExperimentConfig& config() const { return config_; }

  //! Stage "data".
  ReplicationData make_data(std::size_t rep) const;
  //! Mapping, eta and operators (stage "estimate").
  WeightProblem make_problem(const ReplicationData& data) const;

private:
  ExperimentConfig config_;
  std::shared_ptr<const LabeledData> csv_;
};

std::vector<ArmRecord> run_replication(const ExperimentContext& ctx, std::size_t rep);

//! Runs every replication, using up to max_threads() workers.
ExperimentReport run_experiment(const ExperimentConfig& config);

ExperimentReport summarize(std::vector<ArmRecord> rows, double trim);

//! Worker count: RETASA_THREADS if set (>= 1), else hardware concurrency.
std::size_t max_threads();

//! Metric names in output order.
const std::vector<std::string>& metric_names();
double metric_value(const ArmRecord& r, const std::string& metric);

//! Runs `fn` and prefixes any library error with "[stage] ", keeping its type.
template<class Fn>
auto
in_stage(const char* stage, Fn&& fn) -> decltype(fn())
{
  try {
    return fn();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("[") + stage + "] " + e.what());
  } catch (const DataError& e) {
    throw DataError(std::string("[") + stage + "] " + e.what());
  } catch (const NumericalError& e) {
    throw NumericalError(std::string("[") + stage + "] " + e.what());
  }
}

} // namespace retasa
