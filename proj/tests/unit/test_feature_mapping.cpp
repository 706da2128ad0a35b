#include "retasa/errors.hpp"
#include "retasa/feature_mapping.hpp"
#include "retasa/synthetic_data.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace retasa;

namespace {

PointSet
random_design(std::size_t n, std::size_t p, unsigned seed)
{
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  PointSet x(n, p);
  for (std::size_t k = 0; k < p; ++k)
    for (auto& v : x.coord(k))
      v = nd(rng);
  return x;
}

} // namespace

TEST_CASE("noiseless linear data is interpolated")
{
  const auto x = random_design(50, 3, 1);
  const std::vector<double> beta{ 2.0, -0.5, 1.25 };
  std::vector<double> y(50);
  for (std::size_t i = 0; i < 50; ++i)
    y[i] = 4.0 + beta[0] * x.at(i, 0) + beta[1] * x.at(i, 1) + beta[2] * x.at(i, 2);
  const auto map = fit_mapping(x, y);
  REQUIRE(map.coefficients.size() == 3);
  for (std::size_t k = 0; k < 3; ++k)
    CHECK(std::abs(map.coefficients[k] - beta[k]) <= 1e-8);
  CHECK(std::abs(map.intercept - 4.0) <= 1e-8);
  for (std::size_t i = 0; i < 50; ++i)
    CHECK(std::abs(apply_mapping(map, x.row(i)) - y[i]) <= 1e-8);
}

TEST_CASE("constant response")
{
  const auto x = random_design(20, 2, 2);
  const std::vector<double> y(20, 3.5);
  const auto map = fit_mapping(x, y);
  for (double c : map.coefficients)
    CHECK(std::abs(c) <= 1e-12);
  CHECK(map.intercept == doctest::Approx(3.5).epsilon(1e-14));
}

TEST_CASE("normal-equation gradient vanishes")
{
  const auto x = random_design(200, 4, 3);
  std::mt19937_64 rng(4);
  std::normal_distribution<double> nd;
  std::vector<double> y(200);
  double ymax = 0.0;
  for (std::size_t i = 0; i < 200; ++i) {
    y[i] = x.at(i, 0) - 2.0 * x.at(i, 3) + nd(rng);
    ymax = std::max(ymax, std::abs(y[i]));
  }
  const auto map = fit_mapping(x, y);
  std::vector<double> grad(5, 0.0);
  for (std::size_t i = 0; i < 200; ++i) {
    const double r = y[i] - map(x.row(i));
    grad[0] += r;
    for (std::size_t k = 0; k < 4; ++k)
      grad[k + 1] += x.at(i, k) * r;
  }
  for (double g : grad)
    CHECK(std::abs(g) <= 1e-8 * 200 * ymax);
}

TEST_CASE("recovers the synthetic linear design")
{
  const auto data = gen_linear_raw(5000, 77);
  const auto map = fit_mapping(data.x, data.y);
  for (std::size_t k = 0; k < 5; ++k)
    CHECK(std::abs(map.coefficients[k] - linear_design_beta[k]) <= 0.1);
}

TEST_CASE("apply_mapping")
{
  const LinearMap constant{ { 0.0, 0.0 }, 3.0 };
  const std::vector<double> any{ 9.0, -4.0 };
  CHECK(apply_mapping(constant, any) == 3.0);
  const LinearMap ident{ { 1.0 }, 0.0 };
  const std::vector<double> seven{ 7.0 };
  CHECK(apply_mapping(ident, seven) == 7.0);
  const std::vector<double> wrong{ 1.0, 2.0 };
  CHECK_THROWS_AS(apply_mapping(ident, wrong), DataError);

  const LinearMap lin{ { 0.5, -2.0 }, 0.0 };
  const std::vector<double> a{ 1.0, 2.0 }, b{ -3.0, 0.25 };
  std::vector<double> comb(2);
  for (std::size_t k = 0; k < 2; ++k)
    comb[k] = 2.0 * a[k] + 3.0 * b[k];
  CHECK(lin(comb) == doctest::Approx(2.0 * lin(a) + 3.0 * lin(b)).epsilon(1e-15));

  const auto x = random_design(10, 2, 9);
  const auto z = apply_mapping(lin, x);
  REQUIRE(z.dim() == 1);
  const ScalarMapping f = [&](std::span<const double> v) { return lin(v); };
  const auto z2 = apply_mapping(f, x);
  for (std::size_t i = 0; i < 10; ++i) {
    CHECK(z.at(i, 0) == lin(x.row(i)));
    CHECK(z2.at(i, 0) == z.at(i, 0));
  }
}

TEST_CASE("fit preconditions")
{
  const auto x = random_design(3, 2, 5);
  const std::vector<double> y{ 1.0, 2.0, 3.0 };
  CHECK_THROWS_AS(fit_mapping(x, y), DataError);

  PointSet dup(10, 2);
  for (std::size_t i = 0; i < 10; ++i)
    dup.at(i, 0) = dup.at(i, 1) = static_cast<double>(i);
  std::vector<double> y10(10, 1.0);
  CHECK_THROWS_AS(fit_mapping(dup, y10), NumericalError);
  CHECK_THROWS_AS(fit_mapping(random_design(10, 2, 1), y), DataError);
}
