#include "retasa/errors.hpp"
#include "retasa/kernel_density.hpp"
#include "retasa/simd/kernels.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

using namespace retasa;

namespace {

double
phi(double u)
{
  return std::exp(-0.5 * u * u) / std::sqrt(2.0 * M_PI);
}

std::vector<double>
normal_draws(std::size_t n, unsigned seed)
{
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  std::vector<double> v(n);
  for (auto& x : v)
    x = nd(rng);
  return v;
}

double
trapezoid_kde(std::span<const double> samples, const KernelSpec& spec, double lo, double hi, double step)
{
  const auto pts = PointSet::from_scalars(samples);
  const auto steps = static_cast<std::size_t>(std::llround((hi - lo) / step));
  double total = 0.0;
  for (std::size_t i = 0; i <= steps; ++i) {
    const double q[1] = { lo + static_cast<double>(i) * step };
    const double f = kde_pdf(pts, spec, q);
    total += (i == 0 || i == steps) ? 0.5 * f : f;
  }
  return total * step;
}

} // namespace

TEST_CASE("kernel_eval")
{
  CHECK(kernel_eval({ KernelKind::gaussian, 1.0 }, 0.0) == doctest::Approx(0.39894228).epsilon(1e-8));
  CHECK(kernel_eval({ KernelKind::gaussian, 2.0 }, 0.0) == doctest::Approx(0.19947114).epsilon(1e-8));
  CHECK(kernel_eval({ KernelKind::epanechnikov, 1.0 }, 1.5) == 0.0);
  CHECK(kernel_eval({ KernelKind::epanechnikov, 1.0 }, 0.0) == 0.75);
  CHECK_THROWS_AS(kernel_eval({ KernelKind::gaussian, 0.0 }, 0.0), ConfigError);
  CHECK_THROWS_AS(kernel_eval({ KernelKind::gaussian, -1.0 }, 0.0), ConfigError);

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int i = 0; i < 200; ++i) {
    const double x = u(rng);
    for (auto kind : { KernelKind::gaussian, KernelKind::epanechnikov }) {
      const KernelSpec s{ kind, 0.7 };
      CHECK(kernel_eval(s, x) == kernel_eval(s, -x));
      CHECK(kernel_eval(s, x) >= 0.0);
    }
  }
}

TEST_CASE("kernels integrate to one")
{
  for (auto kind : { KernelKind::gaussian, KernelKind::epanechnikov }) {
    const KernelSpec s{ kind, 0.8 };
    double total = 0.0;
    const double step = 1e-4;
    for (double x = -8.0; x <= 8.0; x += step)
      total += kernel_eval(s, x) * step;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("select_bandwidth")
{
  std::vector<double> grid(100);
  std::iota(grid.begin(), grid.end(), 0.0);

  SUBCASE("fixed")
  {
    CHECK(select_bandwidth(grid, BandwidthRule::fixed(0.5)) == 0.5);
    CHECK_THROWS_AS(BandwidthRule::fixed(0.0), ConfigError);
  }
  SUBCASE("silverman on the integer grid")
  {
    // sd of 0..99 is sqrt(sum (i - 49.5)^2 / 99); quartiles 24.75 and 74.25.
    double ss = 0.0;
    for (int i = 0; i < 100; ++i)
      ss += (i - 49.5) * (i - 49.5);
    const double sd = std::sqrt(ss / 99.0);
    const double expected = 0.9 * std::min(sd, 49.5 / 1.34) * std::pow(100.0, -0.2);
    CHECK(select_bandwidth(grid, BandwidthRule::silverman()) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(expected == doctest::Approx(10.39471468564849).epsilon(1e-12));
  }
  SUBCASE("scott on normal draws")
  {
    const auto v = normal_draws(1000, 11);
    const double h = select_bandwidth(v, BandwidthRule::scott());
    CHECK(std::abs(h - 1.06 * std::pow(1000.0, -0.2)) <= 0.1 * 0.266);
  }
  SUBCASE("degenerate samples")
  {
    const std::vector<double> same(10, 3.0);
    CHECK_THROWS_AS(select_bandwidth(same, BandwidthRule::silverman()), DataError);
    CHECK_THROWS_AS(select_bandwidth(same, BandwidthRule::scott()), DataError);
    CHECK(select_bandwidth(same, BandwidthRule::fixed(1.0)) == 1.0);
    const std::vector<double> one{ 1.0 };
    CHECK_THROWS_AS(select_bandwidth(one, BandwidthRule::silverman()), DataError);
  }
  SUBCASE("zero IQR falls back to sd")
  {
    std::vector<double> v(20, 0.0);
    v.back() = 10.0;
    CHECK(select_bandwidth(v, BandwidthRule::silverman()) > 0.0);
  }
}

TEST_CASE("kde_pdf")
{
  const KernelSpec g1{ KernelKind::gaussian, 1.0 };
  const std::vector<double> zero{ 0.0 };
  CHECK(kde_pdf(zero, g1, 0.0) == doctest::Approx(0.39894228).epsilon(1e-8));
  const std::vector<double> pair{ -1.0, 1.0 };
  CHECK(kde_pdf(pair, g1, 0.0) == doctest::Approx(0.24197072451914337).epsilon(1e-13));

  SUBCASE("trapezoid normalization")
  {
    const auto v = normal_draws(200, 3);
    CHECK(trapezoid_kde(v, g1, -6.0, 6.0, 0.01) == doctest::Approx(1.0).epsilon(1e-3));
    const KernelSpec silver{ KernelKind::gaussian, select_bandwidth(v, BandwidthRule::silverman()) };
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    CHECK(trapezoid_kde(v, silver, *lo - 6 * silver.bandwidth, *hi + 6 * silver.bandwidth, 0.005) ==
          doctest::Approx(1.0).epsilon(1e-3));
    const KernelSpec epa{ KernelKind::epanechnikov, 0.4 };
    CHECK(trapezoid_kde(v, epa, *lo - 1.0, *hi + 1.0, 0.001) == doctest::Approx(1.0).epsilon(1e-3));
  }
  SUBCASE("matches a direct kernel sum")
  {
    const auto v = normal_draws(57, 5);
    const KernelSpec s{ KernelKind::gaussian, 0.3 };
    for (double q : { -2.0, -0.1, 0.0, 0.7, 3.0 }) {
      double direct = 0.0;
      for (double x : v)
        direct += kernel_eval(s, q - x);
      direct /= static_cast<double>(v.size());
      CHECK(kde_pdf(v, s, q) == doctest::Approx(direct).epsilon(1e-13));
    }
  }
  SUBCASE("d = 1 point set equals the univariate form")
  {
    const auto v = normal_draws(40, 9);
    const auto ps = PointSet::from_rows([&] {
      std::vector<std::vector<double>> rows;
      for (double x : v)
        rows.push_back({ x });
      return rows;
    }());
    for (double q : { -1.3, 0.2, 2.2 }) {
      const double qq[1] = { q };
      CHECK(kde_pdf(ps, g1, qq) == kde_pdf(v, g1, q));
    }
  }
  SUBCASE("product kernel in two dimensions")
  {
    const auto ps = PointSet::from_rows({ { 0.0, 0.0 }, { 1.0, -1.0 } });
    const KernelSpec s{ KernelKind::gaussian, 0.5 };
    const double q[2] = { 0.2, 0.1 };
    const double direct = 0.5 / (0.5 * 0.5) *
                          (phi(0.2 / 0.5) * phi(0.1 / 0.5) + phi(-0.8 / 0.5) * phi(1.1 / 0.5));
    CHECK(kde_pdf(ps, s, q) == doctest::Approx(direct).epsilon(1e-13));
  }
  SUBCASE("permutation invariance")
  {
    auto v = normal_draws(64, 13);
    const double before = kde_pdf(v, g1, 0.3);
    std::mt19937_64 rng(1);
    std::shuffle(v.begin(), v.end(), rng);
    CHECK(kde_pdf(v, g1, 0.3) == doctest::Approx(before).epsilon(1e-14));
  }
  SUBCASE("dimension mismatch")
  {
    const auto ps = PointSet::from_rows({ { 0.0, 0.0 } });
    const double q[1] = { 0.0 };
    CHECK_THROWS_AS(kde_pdf(ps, g1, q), DataError);
  }
}

TEST_CASE("nw_weights")
{
  const auto two = PointSet::from_scalars(std::vector<double>{ -1.0, 1.0 });
  const double q0[1] = { 0.0 };
  for (double h : { 0.1, 1.0, 7.0 }) {
    const auto w = nw_weights(q0, two, { KernelKind::gaussian, h });
    CHECK(w[0] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(w[1] == doctest::Approx(0.5).epsilon(1e-15));
  }

  SUBCASE("far-apart points")
  {
    const double h = 0.25;
    const auto pts = PointSet::from_scalars(std::vector<double>{ 0.0, 20 * h });
    const auto w = nw_weights(q0, pts, { KernelKind::gaussian, h });
    CHECK(w[0] >= 1.0 - 1e-6);
  }
  SUBCASE("three points, hand-evaluated")
  {
    const auto pts = PointSet::from_scalars(std::vector<double>{ 0.0, 1.0, 2.0 });
    const double q[1] = { 0.5 };
    const auto w = nw_weights(q, pts, { KernelKind::gaussian, 1.0 });
    const double k0 = phi(0.5), k1 = phi(-0.5), k2 = phi(-1.5);
    const double s = k0 + k1 + k2;
    CHECK(w[0] == doctest::Approx(k0 / s).epsilon(1e-14));
    CHECK(w[1] == doctest::Approx(k1 / s).epsilon(1e-14));
    CHECK(w[2] == doctest::Approx(k2 / s).epsilon(1e-14));
    CHECK(w[0] == doctest::Approx(0.4223187982515182).epsilon(1e-13));
    CHECK(w[2] == doctest::Approx(0.15536240349696362).epsilon(1e-13));
  }
  SUBCASE("query far from every gaussian kernel still normalizes")
  {
    const auto pts = PointSet::from_scalars(std::vector<double>{ 0.0, 1.0 });
    const double q[1] = { 1e4 };
    const auto w = nw_weights(q, pts, { KernelKind::gaussian, 0.1 });
    CHECK(w[1] == 1.0);
    CHECK(w[0] == 0.0);
  }
  SUBCASE("epanechnikov outside every support")
  {
    const auto pts = PointSet::from_scalars(std::vector<double>{ 0.0, 1.0 });
    const double q[1] = { 5.0 };
    CHECK_THROWS_AS(nw_weights(q, pts, { KernelKind::epanechnikov, 0.5 }), NumericalError);
  }
  SUBCASE("empty points")
  {
    CHECK_THROWS_AS(nw_weights(q0, PointSet(0, 1), { KernelKind::gaussian, 1.0 }), DataError);
  }
}

TEST_CASE("nw_weights simplex property on random cases")
{
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> size(1, 40), dim(1, 3);
  std::uniform_real_distribution<double> coord(-5.0, 5.0), bw(0.05, 3.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = size(rng), d = dim(rng);
    std::vector<std::vector<double>> rows(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(d)));
    for (auto& r : rows)
      for (auto& c : r)
        c = coord(rng);
    const auto pts = PointSet::from_rows(rows);
    std::vector<double> q(static_cast<std::size_t>(d));
    for (auto& c : q)
      c = coord(rng);
    const KernelSpec spec{ trial % 4 == 0 ? KernelKind::epanechnikov : KernelKind::gaussian, bw(rng) };
    std::vector<double> w;
    try {
      w = nw_weights(q, pts, spec);
    } catch (const NumericalError&) {
      REQUIRE(spec.kind == KernelKind::epanechnikov);
      continue;
    }
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    CHECK(std::abs(total - 1.0) <= 1e-12);
    CHECK(std::all_of(w.begin(), w.end(), [](double x) { return x >= 0.0; }));
  }
}
