#include "retasa/weight_solver.hpp"

#include "retasa/errors.hpp"
#include "retasa/simd/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace retasa {
namespace {

void
check_alpha(double alpha)
{
  if (!(alpha > 0.0) || !std::isfinite(alpha))
    throw ConfigError("regularization parameter alpha must be finite and > 0, got " +
                      std::to_string(alpha));
}

Eigen::Map<const Eigen::VectorXd>
as_vector(std::span<const double> v)
{
  return { v.data(), static_cast<Eigen::Index>(v.size()) };
}

void
check_eta_size(const OperatorMatrices& ops, std::size_t n)
{
  if (ops.c_xy.rows() != ops.c_xy.cols() || ops.c_yx.rows() != ops.c_yx.cols() ||
      ops.c_xy.rows() != ops.c_yx.rows())
    throw DataError("operator matrices must be square and of equal size");
  if (ops.size() != n)
    throw DataError("eta has length " + std::to_string(n) + ", operators are " +
                    std::to_string(ops.size()) + "x" + std::to_string(ops.size()));
}

} // namespace

OperatorMatrices
build_operators(const PointSet& source_x,
                std::span<const double> source_y,
                const KernelSpec& spec_x,
                const KernelSpec& spec_y)
{
  const std::size_t n = source_y.size();
  if (source_x.size() != n)
    throw DataError("source covariates and responses differ in length");
  if (n < 2)
    throw DataError("operator matrices need at least two source observations");
  spec_x.validate();
  spec_y.validate();

  const PointSet y = PointSet::from_scalars(source_y);
  OperatorMatrices ops{ RowMatrix(n, n), RowMatrix(n, n) };
  std::vector<double> q(source_x.dim());
  for (std::size_t i = 0; i < n; ++i) {
    nw_weights_into(std::span<const double>(&source_y[i], 1),
                    y,
                    spec_y,
                    std::span<double>(ops.c_xy.row(static_cast<Eigen::Index>(i)).data(), n));
    for (std::size_t k = 0; k < q.size(); ++k)
      q[k] = source_x.at(i, k);
    nw_weights_into(q,
                    source_x,
                    spec_x,
                    std::span<double>(ops.c_yx.row(static_cast<Eigen::Index>(i)).data(), n));
  }
  return ops;
}

FinalizedWeights
finalize_weights(std::span<const double> rho, WeightPolicy policy)
{
  FinalizedWeights out;
  out.omega.resize(rho.size());
  for (std::size_t i = 0; i < rho.size(); ++i) {
    if (!std::isfinite(rho[i]))
      throw NumericalError("non-finite rho at index " + std::to_string(i));
    out.omega[i] = rho[i] + 1.0;
  }
  if (policy == WeightPolicy::raw)
    return out;

  for (auto& w : out.omega) {
    if (w < 0.0) {
      w = 0.0;
      ++out.clamped_count;
    }
  }
  const double total = std::accumulate(out.omega.begin(), out.omega.end(), 0.0);
  if (!(total > 0.0))
    throw NumericalError("every weight is zero after clamping");
  if (policy == WeightPolicy::clamp_rescale) {
    out.rescale_factor = static_cast<double>(out.omega.size()) / total;
    for (auto& w : out.omega)
      w *= out.rescale_factor;
  }
  return out;
}

TikhonovSystem::TikhonovSystem(const OperatorMatrices& ops, std::span<const double> eta)
  : ops_(&ops)
{
  check_eta_size(ops, eta.size());
  eta_ = as_vector(eta);
  product_.noalias() = ops.c_xy * ops.c_yx;
  rhs_.noalias() = ops.c_xy * eta_;
}

Eigen::PartialPivLU<Eigen::MatrixXd>
TikhonovSystem::factorize(double alpha) const
{
  check_alpha(alpha);
  Eigen::MatrixXd a = product_;
  a.diagonal().array() += alpha;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
  const double rcond = lu.rcond();
  if (!(rcond > std::numeric_limits<double>::epsilon()))
    throw NumericalError("Tikhonov system is numerically singular (rcond " +
                         std::to_string(rcond) + ")");
  return lu;
}

Eigen::VectorXd
TikhonovSystem::refine(const Eigen::PartialPivLU<Eigen::MatrixXd>& lu,
                       double alpha,
                       const Eigen::VectorXd* shift) const
{
  // Mixed-precision iterative refinement. The residual is formed from the
  // factors C_xy and C_yx in long double, so the result is accurate for the
  // system as given rather than for the rounded product used by the LU.
  const auto n = static_cast<Eigen::Index>(size());
  const auto& ops = *ops_;
  auto matvec = [n](const RowMatrix& m, const std::vector<long double>& v) {
    std::vector<long double> out(static_cast<std::size_t>(n), 0.0L);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double* row = m.data() + i * n;
      long double acc = 0.0L;
      for (Eigen::Index j = 0; j < n; ++j)
        acc += static_cast<long double>(row[j]) * v[static_cast<std::size_t>(j)];
      out[static_cast<std::size_t>(i)] = acc;
    }
    return out;
  };

  std::vector<long double> eta_ld(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i)
    eta_ld[static_cast<std::size_t>(i)] = eta_(i);
  auto target = matvec(ops.c_xy, eta_ld);
  if (shift != nullptr)
    for (Eigen::Index i = 0; i < n; ++i)
      target[static_cast<std::size_t>(i)] += static_cast<long double>(alpha) * (*shift)(i);

  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i)
    b(i) = static_cast<double>(target[static_cast<std::size_t>(i)]);
  Eigen::VectorXd x = lu.solve(b);

  std::vector<long double> x_ld(static_cast<std::size_t>(n));
  Eigen::VectorXd r(n);
  for (int step = 0; step < 2; ++step) {
    for (Eigen::Index i = 0; i < n; ++i)
      x_ld[static_cast<std::size_t>(i)] = x(i);
    const auto ax = matvec(ops.c_xy, matvec(ops.c_yx, x_ld));
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto k = static_cast<std::size_t>(i);
      r(i) = static_cast<double>(target[k] - ax[k] - static_cast<long double>(alpha) * x_ld[k]);
    }
    x += lu.solve(r);
  }
  return x;
}

Eigen::VectorXd
TikhonovSystem::solve(double alpha) const
{
  return refine(factorize(alpha), alpha, nullptr);
}

TikhonovSystem::Iterated
TikhonovSystem::solve_iterated(double alpha) const
{
  const auto lu = factorize(alpha);
  Iterated out;
  out.rho = refine(lu, alpha, nullptr);
  out.rho2 = refine(lu, alpha, &out.rho);
  return out;
}

Eigen::VectorXd
TikhonovSystem::solve_iterated(double alpha, const Eigen::VectorXd& rho_first) const
{
  if (static_cast<std::size_t>(rho_first.size()) != size())
    throw DataError("first-stage solution has the wrong length");
  return refine(factorize(alpha), alpha, &rho_first);
}

double
TikhonovSystem::residual_norm(double alpha, const Eigen::VectorXd& rho) const
{
  return (alpha * rho + product_ * rho - rhs_).lpNorm<Eigen::Infinity>();
}

WeightEstimate
solve_tikhonov(const OperatorMatrices& ops, const EtaEstimate& eta, double alpha, WeightPolicy policy)
{
  check_alpha(alpha);
  const TikhonovSystem system(ops, eta.values);
  WeightEstimate est;
  est.alpha = alpha;
  est.rho = system.solve(alpha);
  auto fw = finalize_weights(std::span<const double>(est.rho.data(), static_cast<std::size_t>(est.rho.size())), policy);
  est.omega = std::move(fw.omega);
  est.clamped_count = fw.clamped_count;
  est.rescale_factor = fw.rescale_factor;
  return est;
}

Eigen::VectorXd
solve_iterated_tikhonov(const OperatorMatrices& ops,
                        const EtaEstimate& eta,
                        double alpha,
                        const Eigen::VectorXd& rho_first)
{
  const TikhonovSystem system(ops, eta.values);
  return system.solve_iterated(alpha, rho_first);
}

OffsampleEvaluator::OffsampleEvaluator(std::span<const double> source_y,
                                       const KernelSpec& spec_y,
                                       const OperatorMatrices& ops,
                                       const Eigen::VectorXd& rho,
                                       std::span<const double> eta,
                                       double alpha)
  : source_y_(PointSet::from_scalars(source_y))
  , spec_y_(spec_y)
  , alpha_(alpha)
{
  check_alpha(alpha);
  check_eta_size(ops, eta.size());
  if (source_y.size() != ops.size() || static_cast<std::size_t>(rho.size()) != ops.size())
    throw DataError("off-sample evaluation inputs differ in length");
  bracket_ = as_vector(eta) - ops.c_yx * rho;
}

double
OffsampleEvaluator::operator()(double y) const
{
  std::vector<double> zeta(source_y_.size());
  nw_weights_into(std::span<const double>(&y, 1), source_y_, spec_y_, zeta);
  return simd::active_kernels().dot(zeta.data(), bracket_.data(), zeta.size()) / alpha_;
}

double
evaluate_rho_offsample(double y,
                       std::span<const double> source_y,
                       const KernelSpec& spec_y,
                       const OperatorMatrices& ops,
                       const Eigen::VectorXd& rho,
                       const EtaEstimate& eta,
                       double alpha)
{
  return OffsampleEvaluator(source_y, spec_y, ops, rho, eta.values, alpha)(y);
}

double
residual_ss(double alpha,
            const OperatorMatrices& ops,
            std::span<const double> eta,
            const Eigen::VectorXd& rho2)
{
  check_alpha(alpha);
  check_eta_size(ops, eta.size());
  const Eigen::VectorXd r = ops.c_yx * rho2 - as_vector(eta);
  return r.squaredNorm() / alpha;
}

double
extended_residual_ss(double alpha,
                     const OperatorMatrices& ops,
                     std::span<const double> eta,
                     const Eigen::VectorXd& rho2)
{
  check_alpha(alpha);
  check_eta_size(ops, eta.size());
  const Eigen::VectorXd eps = ops.c_xy * (ops.c_yx * rho2 - as_vector(eta));
  return eps.squaredNorm() / (alpha * alpha);
}

std::size_t
select_alpha_index(std::span<const double> ss, AlphaSelection selection)
{
  if (ss.empty())
    throw ConfigError("alpha grid is empty");
  const std::size_t n = ss.size();
  if (selection == AlphaSelection::first_local_minimum) {
    // A valley is a run of equal scores [i, j] with strictly larger scores on
    // both sides; its right end is taken.
    std::size_t i = 1;
    while (i + 1 < n) {
      std::size_t j = i;
      while (j + 1 < n && ss[j + 1] == ss[i])
        ++j;
      if (j + 1 < n && ss[i - 1] > ss[i] && ss[j + 1] > ss[j])
        return j;
      i = j + 1;
    }
  }
  std::size_t best = 0;
  for (std::size_t k = 1; k < n; ++k)
    if (ss[k] <= ss[best])
      best = k;
  return best;
}

TuneResult
tune_alpha(std::span<const double> grid,
           TuningCriterion criterion,
           const TikhonovSystem& system,
           AlphaSelection selection)
{
  if (grid.empty())
    throw ConfigError("alpha grid is empty");
  std::vector<double> alphas(grid.begin(), grid.end());
  for (double a : alphas)
    check_alpha(a);
  std::sort(alphas.begin(), alphas.end());
  alphas.erase(std::unique(alphas.begin(), alphas.end()), alphas.end());

  TuneResult out;
  std::vector<double> scores;
  scores.reserve(alphas.size());
  for (double a : alphas) {
    const auto it = system.solve_iterated(a);
    const double ss = criterion == TuningCriterion::residual
                        ? residual_ss(a, system.operators(), { system.eta().data(), system.size() }, it.rho2)
                        : extended_residual_ss(a, system.operators(), { system.eta().data(), system.size() }, it.rho2);
    out.table.push_back({ a, ss });
    scores.push_back(ss);
  }
  out.index = select_alpha_index(scores, selection);
  out.alpha = alphas[out.index];
  return out;
}

std::vector<double>
log_grid(double lo, double hi, std::size_t count)
{
  if (!(lo > 0.0) || !(hi >= lo) || count == 0)
    throw ConfigError("log grid needs 0 < lo <= hi and count >= 1");
  std::vector<double> g(count);
  if (count == 1) {
    g[0] = lo;
    return g;
  }
  const double a = std::log10(lo);
  const double b = std::log10(hi);
  for (std::size_t i = 0; i < count; ++i)
    g[i] = std::pow(10.0, a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1));
  g.front() = lo;
  g.back() = hi;
  return g;
}

std::vector<double>
default_alpha_grid()
{
  return log_grid(1e-3, 10.0, 25);
}

} // namespace retasa
