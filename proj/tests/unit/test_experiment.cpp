#include "retasa/errors.hpp"
#include "retasa/experiment.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <string>

using namespace retasa;
using nlohmann::json;

namespace {

ExperimentConfig
small_config(const char* extra = "{}")
{
  json j = json::parse(R"({"dataset": {"n": 150}, "reps": 4, "alpha": {"grid": {"count": 9}}})");
  j.merge_patch(json::parse(extra));
  return parse_config(j);
}

bool
same_rows(const ExperimentReport& a, const ExperimentReport& b)
{
  if (a.rows.size() != b.rows.size())
    return false;
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    const auto &x = a.rows[i], &y = b.rows[i];
    if (x.rep != y.rep || x.arm != y.arm || x.weight_mse != y.weight_mse || x.pred_mse != y.pred_mse ||
        x.delta_acc != y.delta_acc || x.alpha_used != y.alpha_used)
      return false;
  }
  return true;
}

double
correlation(std::span<const double> a, std::span<const double> b)
{
  const double n = static_cast<double>(a.size());
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i] / n;
    mb += b[i] / n;
  }
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

} // namespace

TEST_CASE("report layout")
{
  const auto report = run_experiment(small_config());
  REQUIRE(report.rows.size() == 12);
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    CHECK(report.rows[i].rep == i / 3);
    CHECK(report.rows[i].arm == static_cast<Arm>(i % 3));
    CHECK(report.rows[i].wall_time_ms == 0.0);
  }
  for (const auto& r : report.rows) {
    if (r.arm == Arm::none) {
      CHECK(r.delta_acc == 0.0);
      CHECK(r.alpha_used == 0.0);
    }
    if (r.arm == Arm::oracle)
      CHECK(r.weight_mse == 0.0);
    if (r.arm == Arm::retasa)
      CHECK(r.alpha_used > 0.0);
  }
  for (const char* arm : { "none", "oracle", "retasa" })
    for (const auto& m : metric_names())
      CHECK(report.summary.at(arm).count(m) == 1);
}

TEST_CASE("replication data")
{
  const ExperimentContext ctx(small_config());
  const auto d = ctx.make_data(2);
  CHECK(d.source.size() == 150);
  CHECK(d.target.size() == 120);
  for (std::size_t i = 0; i < d.source.size(); ++i)
    CHECK(d.oracle[i] == nonlinear_true_weight(d.source.y[i], 0.5));
  CHECK(ctx.make_data(2).source.y == d.source.y);
  CHECK(ctx.make_data(3).source.y != d.source.y);

  const ExperimentContext boot(small_config(R"({"shift": {"kind": "bootstrap"}})"));
  const auto b = boot.make_data(0);
  for (double w : b.oracle)
    CHECK(w == 1.0);

  const ExperimentContext lin(small_config(R"({"dataset": {"kind": "linear", "n": 200}, "shift": {"kind": "tnorm"}})"));
  const auto l = lin.make_data(0);
  CHECK(l.source.size() == 180);
  CHECK(l.target.size() == 144);
  CHECK(l.source.x.dim() == 5);
}

TEST_CASE("deterministic across thread counts")
{
  const auto cfg = small_config(R"({"reps": 5})");
  setenv("RETASA_THREADS", "1", 1);
  CHECK(max_threads() == 1);
  const auto serial = run_experiment(cfg);
  setenv("RETASA_THREADS", "4", 1);
  const auto parallel = run_experiment(cfg);
  unsetenv("RETASA_THREADS");
  CHECK(same_rows(serial, parallel));
}

TEST_CASE("timing is opt-in")
{
  const auto report = run_experiment(small_config(R"({"reps": 1, "output": {"timing": true}})"));
  bool any = false;
  for (const auto& r : report.rows)
    any = any || r.wall_time_ms > 0.0;
  CHECK(any);
}

TEST_CASE("linear mapping on a scalar covariate")
{
  const ExperimentContext plain(small_config(R"({"dataset": {"n": 300}})"));
  const ExperimentContext mapped(small_config(R"({"dataset": {"n": 300}, "mapping": "linear"})"));
  const auto data = plain.make_data(0);
  const auto p0 = plain.make_problem(data);
  const auto p1 = mapped.make_problem(data);
  const auto w0 = solve_tikhonov(p0.ops, p0.eta, 0.1).omega;
  const auto w1 = solve_tikhonov(p1.ops, p1.eta, 0.1).omega;
  CHECK(correlation(w0, w1) > 0.99);
}

TEST_CASE("fixed alpha and arm subsets")
{
  const auto report =
    run_experiment(small_config(R"({"reps": 2, "alpha": {"mode": "fixed", "value": 0.3}, "arms": ["retasa"]})"));
  REQUIRE(report.rows.size() == 2);
  for (const auto& r : report.rows) {
    CHECK(r.arm == Arm::retasa);
    CHECK(r.alpha_used == 0.3);
  }
}

TEST_CASE("errors carry the stage")
{
  auto cfg = small_config(R"({"dataset": {"kind": "csv", "path": "/nonexistent.csv", "response": "y",
                              "features": ["x"]}, "shift": {"kind": "tnorm"}})");
  try {
    run_experiment(cfg);
    FAIL("expected a DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).rfind("[data]", 0) == 0);
  }
}

TEST_CASE("csv dataset")
{
  const auto cfg = small_config(
    (std::string(R"({"dataset": {"kind": "csv", "path": ")") + RETASA_FIXTURE_DIR +
     R"(/crime_schema.csv", "response": "ViolentCrimesPerPop", "log_response": true,
        "features": ["PctHousOccup", "PctEmploy"], "n": null}, "shift": {"kind": "tnorm"},
        "model": {"degree": 1}, "mapping": "linear", "reps": 1, "arms": ["none", "oracle"]})")
      .c_str());
  const ExperimentContext ctx(cfg);
  const auto d = ctx.make_data(0);
  CHECK(d.source.size() == 11);
  CHECK(d.target.size() == 9);
}
