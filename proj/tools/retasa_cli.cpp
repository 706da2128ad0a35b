// retasa: experiment driver for continuous target-shift adaptation.
//
//   retasa adapt    --config cfg.json [--seed N] [--reps N] [--out DIR] [--set k=v ...]
//   retasa sweep    --config cfg.json --axis n --grid 100,200,500,1000
//   retasa simulate --config cfg.json
//   retasa tune     --config cfg.json
//
// Exit codes: 0 success, 2 config error, 3 data error, 4 numerical failure.

#include "retasa/config.hpp"
#include "retasa/errors.hpp"
#include "retasa/experiment.hpp"
#include "retasa/simd/kernels.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace retasa;

namespace {

constexpr int exit_config = 2;
constexpr int exit_data = 3;
constexpr int exit_numerical = 4;

struct CommonOptions
{
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> reps;
  std::string out;
  std::vector<std::string> sets;
};

void
add_common(CLI::App* cmd, CommonOptions& opt)
{
  cmd->add_option("--config", opt.config_path, "JSON experiment config");
  cmd->add_option("--seed", opt.seed, "master seed (overrides 'seed')");
  cmd->add_option("--reps", opt.reps, "replications (overrides 'reps')");
  cmd->add_option("--out", opt.out, "output directory (overrides 'output.dir')");
  cmd->add_option("--set", opt.sets, "KEY=VALUE override with a dotted key (repeatable)");
}

json
assemble_config(const CommonOptions& opt)
{
  json cfg = opt.config_path.empty() ? json::object() : load_config_file(opt.config_path);
  if (!cfg.is_object())
    throw ConfigError("config file must hold a JSON object");
  for (const auto& s : opt.sets)
    apply_override(cfg, s);
  if (opt.seed)
    set_dotted(cfg, "seed", *opt.seed);
  if (opt.reps)
    set_dotted(cfg, "reps", *opt.reps);
  if (!opt.out.empty())
    set_dotted(cfg, "output.dir", opt.out);
  return cfg;
}

std::string
fmt(double v)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::ofstream
open_output(const ExperimentConfig& cfg, const std::string& name)
{
  fs::create_directories(cfg.output_dir);
  const auto path = fs::path(cfg.output_dir) / name;
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw DataError("cannot write '" + path.string() + "'");
  out << "# retasa config_hash=" << cfg.hash << " seed=" << cfg.seed << "\n";
  return out;
}

json
summary_json(const ExperimentReport& report)
{
  json s = json::object();
  for (const auto& [arm, metrics] : report.summary)
    for (const auto& [metric, t] : metrics)
      s[arm][metric] = { { "trimmed_mean", t.mean }, { "trimmed_sd", t.sd }, { "kept", t.kept } };
  return s;
}

int
cmd_adapt(const ExperimentConfig& cfg)
{
  const auto report = run_experiment(cfg);

  auto reps = open_output(cfg, "adapt_reps.csv");
  reps << "rep,arm,weight_mse,pred_mse,delta_acc,alpha_used,wall_time_ms\n";
  for (const auto& r : report.rows)
    reps << r.rep << ',' << to_string(r.arm) << ',' << fmt(r.weight_mse) << ',' << fmt(r.pred_mse) << ','
         << fmt(r.delta_acc) << ',' << fmt(r.alpha_used) << ',' << fmt(r.wall_time_ms) << '\n';

  auto summary = open_output(cfg, "adapt_summary.csv");
  summary << "arm,metric,trimmed_mean,trimmed_sd,kept,trim\n";
  for (const auto& [arm, metrics] : report.summary)
    for (const auto& metric : metric_names()) {
      const auto& t = metrics.at(metric);
      summary << arm << ',' << metric << ',' << fmt(t.mean) << ',' << fmt(t.sd) << ',' << t.kept << ','
              << fmt(cfg.trim) << '\n';
    }

  json rows = json::array();
  for (const auto& r : report.rows)
    rows.push_back({ { "rep", r.rep },
                     { "arm", to_string(r.arm) },
                     { "weight_mse", r.weight_mse },
                     { "pred_mse", r.pred_mse },
                     { "delta_acc", r.delta_acc },
                     { "alpha_used", r.alpha_used },
                     { "wall_time_ms", r.wall_time_ms },
                     { "clamped_count", r.clamped_count } });
  json doc{ { "config", cfg.source },
            { "config_hash", cfg.hash },
            { "seed", cfg.seed },
            { "simd", std::string(simd::active_kernels().name) },
            { "eta_centered", cfg.eta_center },
            { "rows", rows },
            { "summary", summary_json(report) } };
  fs::create_directories(cfg.output_dir);
  std::ofstream(fs::path(cfg.output_dir) / "adapt_report.json", std::ios::binary) << doc.dump(2) << '\n';

  for (const auto& [arm, metrics] : report.summary)
    std::cout << arm << ": weight_mse " << fmt(metrics.at("weight_mse").mean) << "  pred_mse "
              << fmt(metrics.at("pred_mse").mean) << "  delta_acc " << fmt(metrics.at("delta_acc").mean)
              << "%\n";
  return 0;
}

json
sweep_point(const json& base, const std::string& axis, double v)
{
  json cfg = base;
  if (axis == "alpha") {
    set_dotted(cfg, "alpha.mode", "fixed");
    set_dotted(cfg, "alpha.value", v);
  } else if (axis == "sigma") {
    set_dotted(cfg, "shift.sigma", v);
  } else if (axis == "mu_t") {
    set_dotted(cfg, "dataset.mu_t", v);
  } else if (axis == "n") {
    if (v < 1.0 || v != static_cast<double>(static_cast<long long>(v)))
      throw ConfigError("sweep values on axis 'n' must be positive integers");
    set_dotted(cfg, "dataset.n", static_cast<long long>(v));
  } else if (axis == "size_ratio") {
    set_dotted(cfg, "shift.size_ratio", v);
    set_dotted(cfg, "dataset.m", nullptr);
  } else {
    throw ConfigError("unknown sweep axis '" + axis + "' (alpha, sigma, mu_t, n, size_ratio)");
  }
  return cfg;
}

int
cmd_sweep(const ExperimentConfig& cfg)
{
  const auto& axis = cfg.sweep.axis;
  if (cfg.sweep.grid.empty())
    throw ConfigError("sweep grid is empty");
  std::vector<ExperimentConfig> points;
  for (double v : cfg.sweep.grid)
    points.push_back(parse_config(sweep_point(cfg.source, axis, v)));

  auto longf = open_output(cfg, "sweep_" + axis + ".csv");
  auto sumf = open_output(cfg, "sweep_" + axis + "_summary.csv");
  longf << "axis,value,rep,arm,metric,metric_value\n";
  sumf << "axis,value,arm,metric,trimmed_mean,trimmed_sd\n";
  for (std::size_t p = 0; p < points.size(); ++p) {
    const double v = cfg.sweep.grid[p];
    const auto report = run_experiment(points[p]);
    for (const auto& r : report.rows)
      for (const auto& metric : metric_names())
        longf << axis << ',' << fmt(v) << ',' << r.rep << ',' << to_string(r.arm) << ',' << metric << ','
              << fmt(metric_value(r, metric)) << '\n';
    for (const auto& [arm, metrics] : report.summary)
      for (const auto& metric : metric_names())
        sumf << axis << ',' << fmt(v) << ',' << arm << ',' << metric << ',' << fmt(metrics.at(metric).mean)
             << ',' << fmt(metrics.at(metric).sd) << '\n';
    std::cout << axis << '=' << fmt(v) << " done\n";
  }
  return 0;
}

void
write_labeled(std::ofstream& out, const LabeledData& d, std::span<const double> oracle)
{
  for (std::size_t k = 0; k < d.x.dim(); ++k)
    out << 'x' << (k + 1) << ',';
  out << "y,oracle_weight\n";
  for (std::size_t i = 0; i < d.size(); ++i) {
    for (std::size_t k = 0; k < d.x.dim(); ++k)
      out << fmt(d.x.at(i, k)) << ',';
    out << fmt(d.y[i]) << ',' << fmt(oracle[i]) << '\n';
  }
}

int
cmd_simulate(const ExperimentConfig& cfg)
{
  const ExperimentContext ctx(cfg);
  const auto data = in_stage("data", [&] { return ctx.make_data(0); });

  std::vector<double> target_oracle(data.target.size());
  if (cfg.shift.kind == TargetKind::generated) {
    for (std::size_t i = 0; i < target_oracle.size(); ++i)
      target_oracle[i] = nonlinear_true_weight(data.target.y[i], cfg.dataset.mu_t);
  } else {
    const ShiftLaw law = cfg.shift.kind == TargetKind::tnorm ? ShiftLaw::truncated_normal(cfg.shift.spec)
                                                             : ShiftLaw::uniform();
    target_oracle = oracle_weights(data.target.y, law, EmpiricalCdf(data.source.y));
  }
  auto src = open_output(cfg, "source.csv");
  write_labeled(src, data.source, data.oracle);
  auto tgt = open_output(cfg, "target.csv");
  write_labeled(tgt, data.target, target_oracle);
  std::cout << "wrote " << data.source.size() << " source and " << data.target.size() << " target rows to "
            << cfg.output_dir << "\n";
  if (data.sorted_internally)
    std::cout << "note: source sample was sorted by y before inverse sampling\n";
  return 0;
}

int
cmd_tune(const ExperimentConfig& cfg)
{
  const ExperimentContext ctx(cfg);
  auto out = open_output(cfg, "tune.csv");
  out << "rep,alpha,ss_residual,ss_extended,weight_mse,selected_residual,selected_extended\n";
  for (std::size_t rep = 0; rep < cfg.reps; ++rep) {
    const auto data = in_stage("data", [&] { return ctx.make_data(rep); });
    const auto problem = in_stage("estimate", [&] { return ctx.make_problem(data); });
    in_stage("solve", [&] {
      const TikhonovSystem system(problem.ops, problem.eta.values);
      const auto res = tune_alpha(cfg.alpha_grid, TuningCriterion::residual, system, cfg.selection);
      const auto ext = tune_alpha(cfg.alpha_grid, TuningCriterion::extended, system, cfg.selection);
      for (std::size_t i = 0; i < res.table.size(); ++i) {
        const double a = res.table[i].alpha;
        const Eigen::VectorXd rho = system.solve(a);
        const auto w = finalize_weights({ rho.data(), static_cast<std::size_t>(rho.size()) }, cfg.policy);
        out << rep << ',' << fmt(a) << ',' << fmt(res.table[i].ss) << ',' << fmt(ext.table[i].ss) << ','
            << fmt(weight_mse(w.omega, data.oracle)) << ',' << (i == res.index ? 1 : 0) << ','
            << (i == ext.index ? 1 : 0) << '\n';
      }
      std::cout << "rep " << rep << ": alpha(residual) " << fmt(res.alpha) << "  alpha(extended) "
                << fmt(ext.alpha) << '\n';
    });
  }
  return 0;
}

} // namespace

int
main(int argc, char** argv)
{
  CLI::App app{ "Continuous target-shift adaptation experiments" };
  app.require_subcommand(1);

  CommonOptions adapt_opt, sweep_opt, sim_opt, tune_opt;
  std::string axis;
  std::vector<double> grid;

  auto* adapt = app.add_subcommand("adapt", "run the none/oracle/retasa arms and report metrics");
  add_common(adapt, adapt_opt);
  auto* sweep = app.add_subcommand("sweep", "repeat 'adapt' along one parameter axis");
  add_common(sweep, sweep_opt);
  sweep->add_option("--axis", axis, "alpha | sigma | mu_t | n | size_ratio");
  sweep->add_option("--grid", grid, "comma-separated axis values")->delimiter(',');
  auto* simulate = app.add_subcommand("simulate", "write one simulated source/target pair as CSV");
  add_common(simulate, sim_opt);
  auto* tune = app.add_subcommand("tune", "tabulate both residual criteria over the alpha grid");
  add_common(tune, tune_opt);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_config;
  }

  try {
    if (adapt->parsed())
      return cmd_adapt(parse_config(assemble_config(adapt_opt)));
    if (sweep->parsed()) {
      json cfg = assemble_config(sweep_opt);
      if (!axis.empty())
        set_dotted(cfg, "sweep.axis", axis);
      if (!grid.empty())
        set_dotted(cfg, "sweep.grid", grid);
      return cmd_sweep(parse_config(cfg));
    }
    if (simulate->parsed())
      return cmd_simulate(parse_config(assemble_config(sim_opt)));
    if (tune->parsed())
      return cmd_tune(parse_config(assemble_config(tune_opt)));
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return exit_config;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return exit_data;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return exit_numerical;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return exit_data;
  }
  return 0;
}
