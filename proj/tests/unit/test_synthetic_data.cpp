#include "retasa/errors.hpp"
#include "retasa/synthetic_data.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

using namespace retasa;

namespace {

struct Moments
{
  double mean, sd;
};

Moments
moments(std::span<const double> v)
{
  const double n = static_cast<double>(v.size());
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : v)
    ss += (x - mean) * (x - mean);
  return { mean, std::sqrt(ss / (n - 1.0)) };
}

std::vector<double>
noise_residuals(const LabeledData& d)
{
  std::vector<double> r(d.size());
  for (std::size_t i = 0; i < d.size(); ++i)
    r[i] = d.x.at(i, 0) - d.y[i] - 3.0 * std::tanh(d.y[i]);
  return r;
}

std::string
fixture(const char* name)
{
  return std::string(RETASA_FIXTURE_DIR) + "/" + name;
}

std::string
write_temp(const std::string& name, const std::string& body)
{
  const auto path = std::filesystem::temp_directory_path() / ("retasa_" + name);
  std::ofstream(path) << body;
  return path.string();
}

} // namespace

TEST_CASE("gen_linear")
{
  for (std::size_t n : { 20u, 99u, 1000u, 1234u }) {
    const auto d = gen_linear(n, 3);
    CHECK(d.size() == n - 2 * (n / 20));
    CHECK(d.x.dim() == 5);
  }
  CHECK_THROWS_AS(gen_linear(19, 1), ConfigError);

  SUBCASE("survivors lie inside the trimmed range")
  {
    const auto raw = gen_linear_raw(1000, 8);
    const auto trimmed = trim_response_tails(raw, 0.05);
    auto sorted = raw.y;
    std::sort(sorted.begin(), sorted.end());
    for (double y : trimmed.y) {
      CHECK(y > sorted[49]);
      CHECK(y < sorted[950]);
    }
    CHECK(trimmed.size() == 900);
    // Order of survivors follows the raw order.
    std::size_t j = 0;
    for (std::size_t i = 0; i < raw.size() && j < trimmed.size(); ++i)
      if (raw.y[i] == trimmed.y[j]) {
        CHECK(raw.x.at(i, 2) == trimmed.x.at(j, 2));
        ++j;
      }
    CHECK(j == trimmed.size());
  }
  SUBCASE("response variance")
  {
    const auto raw = gen_linear_raw(100000, 5);
    double var = 1.0;
    for (double b : linear_design_beta)
      var += b * b;
    CHECK(std::abs(moments(raw.y).sd - std::sqrt(var)) <= 0.02 * std::sqrt(var));
  }
  SUBCASE("reproducible")
  {
    const auto a = gen_linear(500, 42), b = gen_linear(500, 42), c = gen_linear(500, 43);
    CHECK(a.y == b.y);
    CHECK(a.y != c.y);
  }
}

TEST_CASE("gen_nonlinear")
{
  SUBCASE("default target size")
  {
    CHECK(gen_nonlinear(500, std::nullopt, 0.5, 1).target.size() == 400);
    CHECK(gen_nonlinear(7, std::nullopt, 0.5, 1).target.size() == 6);
    CHECK(gen_nonlinear(50, 13, 0.5, 1).target.size() == 13);
  }
  SUBCASE("target concentration")
  {
    const auto d = gen_nonlinear(10000, 10000, 0.0, 2);
    const auto t = moments(d.target.y), s = moments(d.source.y);
    CHECK(std::abs(t.sd * t.sd - 0.25) <= 0.05 * 0.25);
    CHECK(std::abs(s.sd * s.sd - 4.0) <= 0.05 * 4.0);
    CHECK(std::abs(t.mean) <= 0.02);
  }
  SUBCASE("shared conditional law")
  {
    const auto d = gen_nonlinear(10000, 10000, 0.5, 3);
    for (const auto* part : { &d.source, &d.target }) {
      const auto m = moments(noise_residuals(*part));
      CHECK(std::abs(m.mean) <= 0.03);
      CHECK(std::abs(m.sd - 1.0) <= 0.03);
    }
  }
  SUBCASE("reproducible")
  {
    const auto a = gen_nonlinear(100, std::nullopt, 0.5, 9);
    const auto b = gen_nonlinear(100, std::nullopt, 0.5, 9);
    CHECK(a.source.y == b.source.y);
    CHECK(a.target.y == b.target.y);
  }
  SUBCASE("true weight is the normal density ratio")
  {
    for (double y : { -1.0, 0.0, 0.5, 2.0 }) {
      const double pt = std::exp(-0.5 * std::pow((y - 0.5) / 0.5, 2)) / 0.5;
      const double ps = std::exp(-0.5 * std::pow(y / 2.0, 2)) / 2.0;
      CHECK(nonlinear_true_weight(y, 0.5) == doctest::Approx(pt / ps).epsilon(1e-12));
    }
  }
}

TEST_CASE("load_csv")
{
  SUBCASE("missing cell")
  {
    const auto r = load_csv(fixture("three_rows.csv"), "y", { "x1", "x2" }, false);
    CHECK(r.data.size() == 2);
    CHECK(r.dropped_rows == 1);
    CHECK(r.data.x.at(1, 0) == 1.5);
    CHECK(r.data.y == std::vector<double>{ 2.0, 4.0 });
  }
  SUBCASE("log response")
  {
    const auto path = write_temp("log.csv", "x,y\n1,1\n2,2.718281828459045\n3,7.38905609893065\n");
    const auto r = load_csv(path, "y", { "x" }, true);
    CHECK(r.data.y[0] == doctest::Approx(0.0));
    CHECK(r.data.y[1] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(r.data.y[2] == doctest::Approx(2.0).epsilon(1e-14));
    const auto bad = write_temp("logbad.csv", "x,y\n1,0\n");
    CHECK_THROWS_AS(load_csv(bad, "y", { "x" }, true), DataError);
  }
  SUBCASE("crime schema")
  {
    const std::vector<std::string> features{ "HousVacant",     "PctHousOccup",  "PctHousOwnOcc", "PctVacantBoarded",
                                             "PctVacMore6Mos", "PctUnemployed", "PctEmploy" };
    const auto r = load_csv(fixture("crime_schema.csv"), "ViolentCrimesPerPop", features, true);
    CHECK(r.data.x.dim() == 7);
    CHECK(r.data.size() == 10);
    CHECK(r.dropped_rows == 2);
    CHECK(r.feature_names == features);
  }
  SUBCASE("errors")
  {
    CHECK_THROWS_AS(load_csv(fixture("nope.csv"), "y", { "x1" }, false), DataError);
    CHECK_THROWS_AS(load_csv(fixture("three_rows.csv"), "z", { "x1" }, false), DataError);
    CHECK_THROWS_AS(load_csv(fixture("three_rows.csv"), "y", { "x9" }, false), DataError);
    const auto text = write_temp("text.csv", "x,y\nabc,1\n");
    CHECK_THROWS_AS(load_csv(text, "y", { "x" }, false), DataError);
  }
  SUBCASE("comments, BOM, quotes and NA tokens")
  {
    const auto path = write_temp("dialect.csv",
                                 "\xEF\xBB\xBF# produced elsewhere\n"
                                 "name,x,y\n"
                                 "\"a, b\",1.5,2\n"
                                 "c,NA,3\n"
                                 "d,?,4\n"
                                 "e,2.5,-1e-3\n");
    const auto r = load_csv(path, "y", { "x" }, false);
    CHECK(r.data.size() == 2);
    CHECK(r.dropped_rows == 2);
    CHECK(r.data.y[1] == -1e-3);
  }
}
