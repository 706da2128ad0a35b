#include "retasa/config.hpp"

#include "retasa/errors.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace retasa {

using nlohmann::json;

namespace {

const json&
section(const json& root, const char* key)
{
  if (!root.contains(key) || !root.at(key).is_object())
    throw ConfigError(std::string("config section '") + key + "' must be an object");
  return root.at(key);
}

double
number(const json& obj, const char* key, const std::string& where)
{
  const auto& v = obj.at(key);
  if (!v.is_number())
    throw ConfigError(where + "." + key + " must be a number");
  return v.get<double>();
}

std::optional<std::size_t>
optional_count(const json& obj, const char* key, const std::string& where)
{
  if (!obj.contains(key) || obj.at(key).is_null())
    return std::nullopt;
  const auto& v = obj.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 1)
    throw ConfigError(where + "." + key + " must be a positive integer or null");
  return static_cast<std::size_t>(v.get<long long>());
}

std::string
text(const json& obj, const char* key, const std::string& where)
{
  const auto& v = obj.at(key);
  if (!v.is_string())
    throw ConfigError(where + "." + key + " must be a string");
  return v.get<std::string>();
}

KernelKind
parse_kernel(const std::string& s)
{
  if (s == "gaussian")
    return KernelKind::gaussian;
  if (s == "epanechnikov")
    return KernelKind::epanechnikov;
  throw ConfigError("unknown kernel '" + s + "'");
}

BandwidthRule
parse_bandwidth(const json& v, const std::string& where)
{
  if (v.is_number())
    return BandwidthRule::fixed(v.get<double>());
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "silverman")
      return BandwidthRule::silverman();
    if (s == "scott")
      return BandwidthRule::scott();
  }
  throw ConfigError(where + " must be \"silverman\", \"scott\" or a positive number");
}

std::vector<double>
parse_alpha_grid(const json& v)
{
  if (v.is_array()) {
    std::vector<double> g;
    for (const auto& a : v) {
      if (!a.is_number() || !(a.get<double>() > 0.0))
        throw ConfigError("alpha.grid entries must be positive numbers");
      g.push_back(a.get<double>());
    }
    if (g.empty())
      throw ConfigError("alpha.grid is empty");
    return g;
  }
  if (v.is_object()) {
    const double lo = number(v, "lo", "alpha.grid");
    const double hi = number(v, "hi", "alpha.grid");
    const auto count = v.at("count");
    if (!count.is_number_integer() || count.get<long long>() < 1)
      throw ConfigError("alpha.grid.count must be a positive integer");
    return log_grid(lo, hi, static_cast<std::size_t>(count.get<long long>()));
  }
  throw ConfigError("alpha.grid must be a list or {lo, hi, count}");
}

json
parse_scalar_text(const std::string& s)
{
  try {
    return json::parse(s);
  } catch (const json::parse_error&) {
    return json(s);
  }
}

} // namespace

json
default_config_json()
{
  return json::parse(R"({
    "dataset": { "kind": "nonlinear", "n": 500, "m": null, "mu_t": 0.5,
                 "path": "", "response": "", "features": [], "log_response": false },
    "shift": { "kind": "generated", "mu": 0.5, "sigma": 0.1, "size_ratio": 0.8 },
    "mapping": "none",
    "model": { "degree": 5 },
    "kernel": { "x": "gaussian", "y": "gaussian" },
    "bandwidth": { "x": "silverman", "y": "silverman",
                   "eta_source": "silverman", "eta_target": "silverman" },
    "eta": { "floor": null, "center": false },
    "alpha": { "mode": "tune", "value": 0.1,
               "grid": { "lo": 0.001, "hi": 10.0, "count": 25 },
               "criterion": "residual", "selection": "first_local_minimum" },
    "weights": { "policy": "clamp_rescale" },
    "arms": ["none", "oracle", "retasa"],
    "seed": 1,
    "reps": 20,
    "trim": 0.05,
    "output": { "dir": "out", "timing": false },
    "sweep": { "axis": "", "grid": [] }
  })");
}

json
load_config_file(const std::string& path)
{
  std::ifstream in(path);
  if (!in)
    throw ConfigError("cannot open config file '" + path + "'");
  try {
    return json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file '" + path + "': " + e.what());
  }
}

void
set_dotted(json& config, const std::string& dotted_key, json value)
{
  if (dotted_key.empty())
    throw ConfigError("empty override key");
  json* node = &config;
  std::size_t start = 0;
  while (true) {
    const auto dot = dotted_key.find('.', start);
    const std::string part = dotted_key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty())
      throw ConfigError("malformed override key '" + dotted_key + "'");
    if (!node->is_object())
      *node = json::object();
    if (dot == std::string::npos) {
      (*node)[part] = std::move(value);
      return;
    }
    node = &(*node)[part];
    start = dot + 1;
  }
}

void
apply_override(json& config, const std::string& assignment)
{
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("override must look like KEY=VALUE, got '" + assignment + "'");
  set_dotted(config, assignment.substr(0, eq), parse_scalar_text(assignment.substr(eq + 1)));
}

std::string
config_hash(const json& merged)
{
  // Where results are written does not change them.
  json keyed = merged;
  if (keyed.contains("output") && keyed["output"].is_object())
    keyed["output"].erase("dir");
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : keyed.dump()) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ExperimentConfig
parse_config(const json& user)
{
  if (!user.is_object())
    throw ConfigError("config must be a JSON object");
  json merged = default_config_json();
  merged.merge_patch(user);

  ExperimentConfig cfg;
  try {
    const auto& ds = section(merged, "dataset");
    const auto kind = text(ds, "kind", "dataset");
    if (kind == "nonlinear")
      cfg.dataset.kind = DatasetKind::nonlinear;
    else if (kind == "linear")
      cfg.dataset.kind = DatasetKind::linear;
    else if (kind == "csv")
      cfg.dataset.kind = DatasetKind::csv;
    else
      throw ConfigError("unknown dataset.kind '" + kind + "'");
    cfg.dataset.n = optional_count(ds, "n", "dataset");
    cfg.dataset.m = optional_count(ds, "m", "dataset");
    cfg.dataset.mu_t = number(ds, "mu_t", "dataset");
    cfg.dataset.path = text(ds, "path", "dataset");
    cfg.dataset.response = text(ds, "response", "dataset");
    for (const auto& f : ds.at("features")) {
      if (!f.is_string())
        throw ConfigError("dataset.features must be a list of column names");
      cfg.dataset.features.push_back(f.get<std::string>());
    }
    if (!ds.at("log_response").is_boolean())
      throw ConfigError("dataset.log_response must be true or false");
    cfg.dataset.log_response = ds.at("log_response").get<bool>();
    if (cfg.dataset.kind != DatasetKind::csv && !cfg.dataset.n)
      throw ConfigError("dataset.n is required for generated datasets");
    if (cfg.dataset.kind == DatasetKind::csv &&
        (cfg.dataset.path.empty() || cfg.dataset.response.empty() || cfg.dataset.features.empty()))
      throw ConfigError("csv datasets need dataset.path, dataset.response and dataset.features");

    const auto& sh = section(merged, "shift");
    const auto skind = text(sh, "kind", "shift");
    if (skind == "generated")
      cfg.shift.kind = TargetKind::generated;
    else if (skind == "tnorm")
      cfg.shift.kind = TargetKind::tnorm;
    else if (skind == "bootstrap")
      cfg.shift.kind = TargetKind::bootstrap;
    else
      throw ConfigError("unknown shift.kind '" + skind + "'");
    cfg.shift.spec = { number(sh, "mu", "shift"), number(sh, "sigma", "shift") };
    cfg.shift.spec.validate();
    cfg.shift.size_ratio = number(sh, "size_ratio", "shift");
    if (!(cfg.shift.size_ratio > 0.0))
      throw ConfigError("shift.size_ratio must be > 0");
    if (cfg.shift.kind == TargetKind::generated && cfg.dataset.kind != DatasetKind::nonlinear)
      throw ConfigError("shift.kind 'generated' is only available for the nonlinear dataset");

    const auto mapping = merged.at("mapping");
    if (mapping == "none")
      cfg.mapping = MappingKind::none;
    else if (mapping == "linear")
      cfg.mapping = MappingKind::linear;
    else
      throw ConfigError("mapping must be \"none\" or \"linear\"");

    const auto& model = section(merged, "model");
    if (!model.at("degree").is_number_integer() || model.at("degree").get<int>() < 1)
      throw ConfigError("model.degree must be an integer >= 1");
    cfg.degree = model.at("degree").get<int>();

    const auto& kern = section(merged, "kernel");
    cfg.kernel_x = parse_kernel(text(kern, "x", "kernel"));
    cfg.kernel_y = parse_kernel(text(kern, "y", "kernel"));

    const auto& bw = section(merged, "bandwidth");
    cfg.bw_x = parse_bandwidth(bw.at("x"), "bandwidth.x");
    cfg.bw_y = parse_bandwidth(bw.at("y"), "bandwidth.y");
    cfg.bw_eta_source = parse_bandwidth(bw.at("eta_source"), "bandwidth.eta_source");
    cfg.bw_eta_target = parse_bandwidth(bw.at("eta_target"), "bandwidth.eta_target");

    const auto& eta = section(merged, "eta");
    if (eta.contains("floor") && !eta.at("floor").is_null()) {
      const double f = number(eta, "floor", "eta");
      if (!(f >= 0.0))
        throw ConfigError("eta.floor must be >= 0");
      cfg.eta_floor = f;
    }
    if (!eta.at("center").is_boolean())
      throw ConfigError("eta.center must be true or false");
    cfg.eta_center = eta.at("center").get<bool>();

    const auto& al = section(merged, "alpha");
    const auto mode = text(al, "mode", "alpha");
    if (mode != "tune" && mode != "fixed")
      throw ConfigError("alpha.mode must be \"tune\" or \"fixed\"");
    cfg.tune_alpha = mode == "tune";
    cfg.alpha = number(al, "value", "alpha");
    if (!(cfg.alpha > 0.0))
      throw ConfigError("alpha.value must be > 0");
    cfg.alpha_grid = parse_alpha_grid(al.at("grid"));
    const auto crit = text(al, "criterion", "alpha");
    if (crit == "residual")
      cfg.criterion = TuningCriterion::residual;
    else if (crit == "extended")
      cfg.criterion = TuningCriterion::extended;
    else
      throw ConfigError("alpha.criterion must be \"residual\" or \"extended\"");
    const auto sel = text(al, "selection", "alpha");
    if (sel == "first_local_minimum")
      cfg.selection = AlphaSelection::first_local_minimum;
    else if (sel == "global_minimum")
      cfg.selection = AlphaSelection::global_minimum;
    else
      throw ConfigError("alpha.selection must be \"first_local_minimum\" or \"global_minimum\"");

    const auto policy = text(section(merged, "weights"), "policy", "weights");
    if (policy == "clamp_rescale")
      cfg.policy = WeightPolicy::clamp_rescale;
    else if (policy == "clamp_only")
      cfg.policy = WeightPolicy::clamp_only;
    else if (policy == "raw")
      cfg.policy = WeightPolicy::raw;
    else
      throw ConfigError("unknown weights.policy '" + policy + "'");

    cfg.arms.clear();
    for (const auto& a : merged.at("arms")) {
      if (a == "none")
        cfg.arms.push_back(Arm::none);
      else if (a == "oracle")
        cfg.arms.push_back(Arm::oracle);
      else if (a == "retasa")
        cfg.arms.push_back(Arm::retasa);
      else
        throw ConfigError("unknown arm " + a.dump());
    }
    if (cfg.arms.empty())
      throw ConfigError("at least one arm is required");
    std::sort(cfg.arms.begin(), cfg.arms.end());
    cfg.arms.erase(std::unique(cfg.arms.begin(), cfg.arms.end()), cfg.arms.end());

    if (!merged.at("seed").is_number_integer() || merged.at("seed").get<long long>() < 0)
      throw ConfigError("seed must be a nonnegative integer");
    cfg.seed = merged.at("seed").get<std::uint64_t>();
    if (!merged.at("reps").is_number_integer() || merged.at("reps").get<long long>() < 1)
      throw ConfigError("reps must be a positive integer");
    cfg.reps = merged.at("reps").get<std::size_t>();
    cfg.trim = number(merged, "trim", "config");
    if (!(cfg.trim >= 0.0 && cfg.trim < 0.5))
      throw ConfigError("trim must lie in [0, 0.5)");

    const auto& out = section(merged, "output");
    cfg.output_dir = text(out, "dir", "output");
    if (!out.at("timing").is_boolean())
      throw ConfigError("output.timing must be true or false");
    cfg.record_timing = out.at("timing").get<bool>();

    const auto& sw = section(merged, "sweep");
    cfg.sweep.axis = text(sw, "axis", "sweep");
    for (const auto& v : sw.at("grid")) {
      if (!v.is_number())
        throw ConfigError("sweep.grid must be a list of numbers");
      cfg.sweep.grid.push_back(v.get<double>());
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }

  cfg.source = merged;
  cfg.hash = config_hash(merged);
  return cfg;
}

std::string
to_string(Arm arm)
{
  switch (arm) {
    case Arm::none:
      return "none";
    case Arm::oracle:
      return "oracle";
    case Arm::retasa:
      return "retasa";
  }
  return "?";
}

std::string
to_string(TargetKind kind)
{
  switch (kind) {
    case TargetKind::generated:
      return "generated";
    case TargetKind::tnorm:
      return "tnorm";
    case TargetKind::bootstrap:
      return "bootstrap";
  }
  return "?";
}

} // namespace retasa
