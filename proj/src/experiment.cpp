#include "retasa/experiment.hpp"

#include "retasa/density_ratio.hpp"
#include "retasa/errors.hpp"
#include "retasa/feature_mapping.hpp"
#include "retasa/random.hpp"
#include "retasa/shift_simulator.hpp"
#include "retasa/weighted_erm.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

namespace retasa {
namespace {

constexpr std::uint64_t stream_shift = 0x5348494654;
constexpr std::uint64_t stream_subsample = 0x53554253;

std::size_t
target_size(const ExperimentConfig& cfg, std::size_t source_size)
{
  if (cfg.dataset.m)
    return *cfg.dataset.m;
  const auto m = static_cast<std::size_t>(std::lround(cfg.shift.size_ratio * static_cast<double>(source_size)));
  return std::max<std::size_t>(m, 1);
}

LabeledData
subsample(const LabeledData& data, std::size_t n, std::uint64_t seed)
{
  std::vector<std::size_t> idx(data.size());
  std::iota(idx.begin(), idx.end(), std::size_t{ 0 });
  Philox rng(seed, stream_subsample);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t span = idx.size() - i;
    const auto j = i + static_cast<std::size_t>(uniform_open01(rng) * static_cast<double>(span));
    std::swap(idx[i], idx[std::min(j, idx.size() - 1)]);
  }
  idx.resize(n);
  std::sort(idx.begin(), idx.end());
  return data.select(idx);
}

double
elapsed_ms(std::chrono::steady_clock::time_point start)
{
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

} // namespace

ExperimentContext::ExperimentContext(ExperimentConfig config)
  : config_(std::move(config))
{
  if (config_.dataset.kind == DatasetKind::csv) {
    auto loaded = in_stage("data", [&] {
      return load_csv(config_.dataset.path,
                      config_.dataset.response,
                      config_.dataset.features,
                      config_.dataset.log_response);
    });
    csv_ = std::make_shared<const LabeledData>(std::move(loaded.data));
  }
}

ReplicationData
ExperimentContext::make_data(std::size_t rep) const
{
  const auto& cfg = config_;
  const std::uint64_t seed = derive_seed(cfg.seed, rep);
  ReplicationData out;

  switch (cfg.dataset.kind) {
    case DatasetKind::nonlinear: {
      const std::size_t n = *cfg.dataset.n;
      auto pair = gen_nonlinear(n, target_size(cfg, n), cfg.dataset.mu_t, seed);
      out.source = std::move(pair.source);
      if (cfg.shift.kind == TargetKind::generated) {
        out.target = std::move(pair.target);
        out.oracle.resize(out.source.size());
        for (std::size_t i = 0; i < out.source.size(); ++i)
          out.oracle[i] = nonlinear_true_weight(out.source.y[i], cfg.dataset.mu_t);
        return out;
      }
      break;
    }
    case DatasetKind::linear:
      out.source = gen_linear(*cfg.dataset.n, seed);
      break;
    case DatasetKind::csv:
      if (cfg.dataset.n && *cfg.dataset.n < csv_->size())
        out.source = subsample(*csv_, *cfg.dataset.n, seed);
      else
        out.source = *csv_;
      break;
  }

  const ShiftLaw law = cfg.shift.kind == TargetKind::tnorm ? ShiftLaw::truncated_normal(cfg.shift.spec)
                                                           : ShiftLaw::uniform();
  auto shifted = simulate_target_shift(out.source, target_size(cfg, out.source.size()), law, seed, stream_shift);
  out.target = std::move(shifted.target);
  out.sorted_internally = shifted.sorted_internally;
  out.oracle = oracle_weights(out.source.y, law, EmpiricalCdf(out.source.y));
  return out;
}

WeightProblem
ExperimentContext::make_problem(const ReplicationData& data) const
{
  const auto& cfg = config_;
  WeightProblem p;
  if (cfg.mapping == MappingKind::linear) {
    const LinearMap map = fit_mapping(data.source.x, data.source.y);
    p.z_source = apply_mapping(map, data.source.x);
    p.z_target = apply_mapping(map, data.target.x);
  } else {
    p.z_source = data.source.x;
    p.z_target = data.target.x;
  }

  const KernelSpec eta_source{ cfg.kernel_x, select_bandwidth(p.z_source, cfg.bw_eta_source) };
  const KernelSpec eta_target{ cfg.kernel_x, select_bandwidth(p.z_target, cfg.bw_eta_target) };
  p.eta = estimate_eta(p.z_source, p.z_target, eta_source, eta_target, { cfg.eta_floor, cfg.eta_center });

  p.spec_x = { cfg.kernel_x, select_bandwidth(p.z_source, cfg.bw_x) };
  p.spec_y = { cfg.kernel_y, select_bandwidth(data.source.y, cfg.bw_y) };
  p.ops = build_operators(p.z_source, data.source.y, p.spec_x, p.spec_y);
  return p;
}

std::vector<ArmRecord>
run_replication(const ExperimentContext& ctx, std::size_t rep)
{
  const auto& cfg = ctx.config();
  const auto data = in_stage("data", [&] { return ctx.make_data(rep); });

  auto score = [&](std::span<const double> w, double& pred_mse) {
    const auto model = fit_weighted(data.source.x, data.source.y, w, cfg.degree);
    pred_mse = prediction_mse(predict(model, data.target.x), data.target.y);
  };

  const std::vector<double> ones(data.source.size(), 1.0);
  double baseline_mse = 0.0;
  in_stage("adapt", [&] { score(ones, baseline_mse); });

  std::vector<ArmRecord> records;
  for (Arm arm : cfg.arms) {
    const auto start = std::chrono::steady_clock::now();
    ArmRecord r;
    r.rep = rep;
    r.arm = arm;
    std::vector<double> weights;
    switch (arm) {
      case Arm::none:
        weights = ones;
        break;
      case Arm::oracle:
        weights = data.oracle;
        break;
      case Arm::retasa: {
        const auto problem = in_stage("estimate", [&] { return ctx.make_problem(data); });
        in_stage("solve", [&] {
          const TikhonovSystem system(problem.ops, problem.eta.values);
          r.alpha_used = cfg.tune_alpha ? tune_alpha(cfg.alpha_grid, cfg.criterion, system, cfg.selection).alpha
                                        : cfg.alpha;
          const Eigen::VectorXd rho = system.solve(r.alpha_used);
          auto fw = finalize_weights({ rho.data(), static_cast<std::size_t>(rho.size()) }, cfg.policy);
          weights = std::move(fw.omega);
          r.clamped_count = fw.clamped_count;
        });
        break;
      }
    }
    in_stage("evaluate", [&] {
      r.weight_mse = weight_mse(weights, data.oracle);
      if (arm == Arm::none) {
        r.pred_mse = baseline_mse;
      } else {
        score(weights, r.pred_mse);
      }
      r.delta_acc = delta_accuracy(r.pred_mse, baseline_mse);
    });
    if (cfg.record_timing)
      r.wall_time_ms = elapsed_ms(start);
    records.push_back(r);
  }
  return records;
}

std::size_t
max_threads()
{
  if (const char* env = std::getenv("RETASA_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v >= 1)
      return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

const std::vector<std::string>&
metric_names()
{
  static const std::vector<std::string> names{ "weight_mse", "pred_mse", "delta_acc", "alpha_used" };
  return names;
}

double
metric_value(const ArmRecord& r, const std::string& metric)
{
  if (metric == "weight_mse")
    return r.weight_mse;
  if (metric == "pred_mse")
    return r.pred_mse;
  if (metric == "delta_acc")
    return r.delta_acc;
  if (metric == "alpha_used")
    return r.alpha_used;
  if (metric == "wall_time_ms")
    return r.wall_time_ms;
  throw ConfigError("unknown metric '" + metric + "'");
}

ExperimentReport
summarize(std::vector<ArmRecord> rows, double trim)
{
  std::sort(rows.begin(), rows.end(), [](const ArmRecord& a, const ArmRecord& b) {
    return a.rep != b.rep ? a.rep < b.rep : a.arm < b.arm;
  });
  ExperimentReport report;
  std::map<Arm, std::vector<const ArmRecord*>> by_arm;
  for (const auto& r : rows)
    by_arm[r.arm].push_back(&r);
  for (const auto& [arm, recs] : by_arm) {
    for (const auto& metric : metric_names()) {
      std::vector<double> v;
      for (const auto* r : recs)
        v.push_back(metric_value(*r, metric));
      report.summary[to_string(arm)][metric] = trimmed_summary(v, trim);
    }
  }
  report.rows = std::move(rows);
  return report;
}

ExperimentReport
run_experiment(const ExperimentConfig& config)
{
  const ExperimentContext ctx(config);
  const std::size_t reps = config.reps;
  std::vector<std::vector<ArmRecord>> per_rep(reps);
  std::vector<std::exception_ptr> errors(reps);
  std::atomic<std::size_t> next{ 0 };

  auto worker = [&] {
    for (std::size_t rep = next++; rep < reps; rep = next++) {
      try {
        per_rep[rep] = run_replication(ctx, rep);
      } catch (...) {
        errors[rep] = std::current_exception();
      }
    }
  };
  const std::size_t n_threads = std::min(max_threads(), reps);
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < n_threads; ++t)
      pool.emplace_back(worker);
  }
  for (const auto& e : errors)
    if (e)
      std::rethrow_exception(e);

  std::vector<ArmRecord> rows;
  for (auto& r : per_rep)
    rows.insert(rows.end(), r.begin(), r.end());
  return summarize(std::move(rows), config.trim);
}

} // namespace retasa
