#pragma once

// Regularized solution of the discretized target-shift integral equation
//
//   (alpha I + C_xy C_yx) rho = C_xy eta,     omega = rho + 1,
//
// where row i of C_xy holds the Nadaraya-Watson weights of y_i against the
// source responses (the conditional expectation given y) and row i of C_yx
// holds those of x_i against the source covariates (given x).

#include "retasa/density_ratio.hpp"
#include "retasa/kernel_density.hpp"
#include "retasa/point_set.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <vector>

namespace retasa {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

//! Row-stochastic discretizations of E[. | y] (c_xy) and E[. | x] (c_yx).
struct OperatorMatrices
{
  RowMatrix c_xy;
  RowMatrix c_yx;

  std::size_t size() const { return static_cast<std::size_t>(c_xy.rows()); }
};

OperatorMatrices build_operators(const PointSet& source_x,
                                 std::span<const double> source_y,
                                 const KernelSpec& spec_x,
                                 const KernelSpec& spec_y);

enum class WeightPolicy
{
  clamp_rescale, //!< max(rho + 1, 0), then scaled to mean 1
  clamp_only,    //!< max(rho + 1, 0)
  raw            //!< rho + 1
};

struct FinalizedWeights
{
  std::vector<double> omega;
  std::size_t clamped_count{ 0 };
  double rescale_factor{ 1.0 };
};

//! Throws NumericalError if clamping leaves every weight at zero.
FinalizedWeights finalize_weights(std::span<const double> rho, WeightPolicy policy);

struct WeightEstimate
{
  double alpha{ 0.0 };
  Eigen::VectorXd rho;
  std::vector<double> omega;
  std::size_t clamped_count{ 0 };
  double rescale_factor{ 1.0 };
};

//! Caches C_xy C_yx and C_xy eta for repeated solves at different alpha.
//! Keeps a pointer to `ops`, which must outlive the system.
class TikhonovSystem
{
public:
  TikhonovSystem(const OperatorMatrices& ops, std::span<const double> eta);

  std::size_t size() const { return static_cast<std::size_t>(rhs_.size()); }
  const OperatorMatrices& operators() const { return *ops_; }
  const Eigen::VectorXd& eta() const { return eta_; }
  const Eigen::VectorXd& rhs() const { return rhs_; }
  const Eigen::MatrixXd& product() const { return product_; }

  //! rho solving (alpha I + C_xy C_yx) rho = C_xy eta.
  Eigen::VectorXd solve(double alpha) const;

  struct Iterated
  {
    Eigen::VectorXd rho;  //!< first Tikhonov solution
    Eigen::VectorXd rho2; //!< iterated solution
  };
  //! Both solves from a single factorization.
  Iterated solve_iterated(double alpha) const;

  //! rho2 solving (alpha I + C_xy C_yx) rho2 = C_xy eta + alpha rho_first.
  Eigen::VectorXd solve_iterated(double alpha, const Eigen::VectorXd& rho_first) const;

  //! || (alpha I + C_xy C_yx) rho - C_xy eta ||_inf
  double residual_norm(double alpha, const Eigen::VectorXd& rho) const;

private:
  Eigen::PartialPivLU<Eigen::MatrixXd> factorize(double alpha) const;
  //! Solution of (alpha I + C_xy C_yx) x = C_xy eta + alpha shift.
  Eigen::VectorXd refine(const Eigen::PartialPivLU<Eigen::MatrixXd>& lu,
                         double alpha,
                         const Eigen::VectorXd* shift) const;

  const OperatorMatrices* ops_;
  Eigen::VectorXd eta_;
  Eigen::MatrixXd product_;
  Eigen::VectorXd rhs_;
};

WeightEstimate solve_tikhonov(const OperatorMatrices& ops,
                              const EtaEstimate& eta,
                              double alpha,
                              WeightPolicy policy = WeightPolicy::clamp_rescale);

Eigen::VectorXd solve_iterated_tikhonov(const OperatorMatrices& ops,
                                        const EtaEstimate& eta,
                                        double alpha,
                                        const Eigen::VectorXd& rho_first);

//! rho(y) off the sample grid:
//!   alpha^-1 sum_j zeta_j(y) { eta(x_j) - sum_i xi_i(x_j) rho(y_i) }.
//! At y = y_i this reproduces rho_i.
class OffsampleEvaluator
{
public:
  OffsampleEvaluator(std::span<const double> source_y,
                     const KernelSpec& spec_y,
                     const OperatorMatrices& ops,
                     const Eigen::VectorXd& rho,
                     std::span<const double> eta,
                     double alpha);

  double operator()(double y) const;

private:
  PointSet source_y_;
  KernelSpec spec_y_;
  Eigen::VectorXd bracket_; // eta - C_yx rho
  double alpha_;
};

double evaluate_rho_offsample(double y,
                              std::span<const double> source_y,
                              const KernelSpec& spec_y,
                              const OperatorMatrices& ops,
                              const Eigen::VectorXd& rho,
                              const EtaEstimate& eta,
                              double alpha);

//! alpha^-1 sum_j { (C_yx rho2)_j - eta_j }^2
double residual_ss(double alpha,
                   const OperatorMatrices& ops,
                   std::span<const double> eta,
                   const Eigen::VectorXd& rho2);

//! alpha^-2 || C_xy (C_yx rho2 - eta) ||^2
double extended_residual_ss(double alpha,
                            const OperatorMatrices& ops,
                            std::span<const double> eta,
                            const Eigen::VectorXd& rho2);

enum class TuningCriterion
{
  residual,
  extended
};

//! How a minimizer is read off the score curve.
//!
//! Both residual scores carry a 1/alpha (or 1/alpha^2) factor and therefore
//! decay to zero as alpha grows past the operator's spectrum, so on a wide
//! grid the global minimum sits at the largest alpha. `first_local_minimum`
//! takes the first interior valley of the curve (scanning from small alpha)
//! and falls back to the global minimum when the curve has none.
enum class AlphaSelection
{
  first_local_minimum,
  global_minimum
};

struct AlphaScore
{
  double alpha;
  double ss;
};

struct TuneResult
{
  double alpha{ 0.0 };
  std::size_t index{ 0 };
  std::vector<AlphaScore> table; //!< ascending in alpha
};

//! Index chosen from scores listed in ascending alpha order. Ties go to the
//! larger alpha.
std::size_t select_alpha_index(std::span<const double> ss, AlphaSelection selection);

TuneResult tune_alpha(std::span<const double> grid,
                      TuningCriterion criterion,
                      const TikhonovSystem& system,
                      AlphaSelection selection = AlphaSelection::first_local_minimum);

//! `count` log-spaced values in [lo, hi].
std::vector<double> log_grid(double lo, double hi, std::size_t count);

//! 25 log-spaced values in [1e-3, 10].
std::vector<double> default_alpha_grid();

} // namespace retasa
