#pragma once

// Experiment configuration. A config file is a JSON object with nested
// sections; it is merged over default_config_json(), then `--set` style
// overrides (dotted keys) are applied, and the result is hashed and parsed.

#include "retasa/kernel_density.hpp"
#include "retasa/shift_simulator.hpp"
#include "retasa/weight_solver.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace retasa {

enum class DatasetKind
{
  nonlinear,
  linear,
  csv
};

enum class TargetKind
{
  generated, //!< target drawn from the generative model (nonlinear only)
  tnorm,     //!< inverse sampling through the source ECDF with a TNORM law
  bootstrap  //!< uniform law, i.e. no shift
};

enum class MappingKind
{
  none,
  linear
};

enum class Arm
{
  none,
  oracle,
  retasa
};

struct ExperimentConfig
{
  struct Dataset
  {
    DatasetKind kind{ DatasetKind::nonlinear };
    std::optional<std::size_t> n;
    std::optional<std::size_t> m;
    double mu_t{ 0.5 };
    std::string path;
    std::string response;
    std::vector<std::string> features;
    bool log_response{ false };
  } dataset;

  struct Shift
  {
    TargetKind kind{ TargetKind::generated };
    ShiftSpec spec{};
    double size_ratio{ 0.8 };
  } shift;

  MappingKind mapping{ MappingKind::none };
  int degree{ 5 };

  KernelKind kernel_x{ KernelKind::gaussian };
  KernelKind kernel_y{ KernelKind::gaussian };
  BandwidthRule bw_x{};
  BandwidthRule bw_y{};
  BandwidthRule bw_eta_source{};
  BandwidthRule bw_eta_target{};

  std::optional<double> eta_floor;
  bool eta_center{ false };

  bool tune_alpha{ true };
  double alpha{ 0.1 };
  std::vector<double> alpha_grid;
  TuningCriterion criterion{ TuningCriterion::residual };
  AlphaSelection selection{ AlphaSelection::first_local_minimum };
  WeightPolicy policy{ WeightPolicy::clamp_rescale };

  std::vector<Arm> arms{ Arm::none, Arm::oracle, Arm::retasa };
  std::uint64_t seed{ 1 };
  std::size_t reps{ 20 };
  double trim{ 0.05 };
  std::string output_dir{ "out" };
  bool record_timing{ false };

  struct Sweep
  {
    std::string axis;
    std::vector<double> grid;
  } sweep;

  nlohmann::json source;    //!< merged JSON this was parsed from
  std::string hash;         //!< FNV-1a of source.dump()
};

nlohmann::json default_config_json();

//! Reads a JSON file; throws ConfigError on I/O or syntax errors.
nlohmann::json load_config_file(const std::string& path);

//! "a.b.c=VALUE": VALUE is parsed as JSON when possible, else kept as a string.
void apply_override(nlohmann::json& config, const std::string& assignment);

//! Sets a dotted key to a JSON value, creating objects along the way.
void set_dotted(nlohmann::json& config, const std::string& dotted_key, nlohmann::json value);

//! Merges `user` over the defaults and parses. Throws ConfigError.
ExperimentConfig parse_config(const nlohmann::json& user);

std::string config_hash(const nlohmann::json& merged);

std::string to_string(Arm arm);
std::string to_string(TargetKind kind);

} // namespace retasa
