#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "uar/ar_model.hpp"
#include "uar/loss.hpp"
#include "uar/random.hpp"
#include "uar/stable.hpp"

namespace uar {

/// Moments of the score under the innovation law.
struct LossMoments {
  double e_psi2 = 0.0;       ///< E psi(e)^2
  double e_psi_prime = 0.0;  ///< E psi'(e)
  /// corr(e, psi(e)); only finite when E e^2 < inf (alpha = 2), zero otherwise.
  double corr_eps_psi = 0.0;
};

/// Quadrature of psi^2, psi' and e psi against the innovation density. Bounded
/// scores are integrated up to the last knot and closed with the exact tail mass.
LossMoments loss_moments(const LossFunction& loss, const InnovationSpec& spec);

/// Partial-sum processes evaluated at t_i = i / grid_size (value at [n t_i]).
struct PartialSumBundle {
  std::vector<double> grid;
  std::vector<double> s, s1;    ///< a_n^{-1} sums of e_k and (-1)^k e_k
  std::vector<double> t1, t2;   ///< a_n^{-1} sums of (cos k theta, sin k theta) e_k
  std::vector<double> w, v;     ///< n^{-1/2} sums of psi(e_k) and psi'(e_k) - E psi'
  std::vector<double> r1, r2;   ///< n^{-1/2} sums of (sin (k-1) theta, cos (k-1) theta) psi(e_k)
};

/// T and R are filled only when theta is given.
PartialSumBundle partial_sums(const std::vector<double>& eps, const LossFunction& loss, double a_n,
                              double e_psi_prime, std::size_t grid_size,
                              std::optional<double> theta = std::nullopt);

/// Lower-triangular matrix with row i = ((-1)^j binom(i-1, j))_j (alternating = true)
/// or (binom(i-1, j))_j.
Eigen::MatrixXd binomial_matrix(std::size_t r, bool alternating);

/// Maps (w_{t}, ..., w_{t-2d+1}) to (y_t(1), y_{t-1}(1), ..., y_t(d), y_{t-1}(d)) with
/// y(j) = (1 - 2 cos(theta) B + B^2)^{d-j} w.
Eigen::MatrixXd complex_basis_matrix(std::size_t d, double theta);

/// N_n^{-1} C with N_n = diag(n^{r-1/2} a_n, ..., n^{1/2} a_n).
Eigen::MatrixXd normalizer_J(std::size_t r, std::size_t n, double a_n);
/// Same ladder with the unsigned binomial matrix.
Eigen::MatrixXd normalizer_K(std::size_t s, std::size_t n, double a_n);
/// M_n^{-1} D with the j-th 2x2 block of M_n equal to n^{(2j-1)/2} a_n I.
Eigen::MatrixXd normalizer_L(std::size_t d, double theta, std::size_t n, double a_n);

enum class LimitCase { PlusOne, MinusOne, Complex };

/// One realization of a matrix/vector pair and the solved vector.
struct LimitLawSample {
  LimitCase kind = LimitCase::PlusOne;
  std::size_t multiplicity = 1;
  double theta = 0.0;
  Eigen::MatrixXd matrix;
  Eigen::VectorXd vector;
  Eigen::VectorXd solution;
  bool singular = false;     ///< solution unavailable (finite-n) or resampling exhausted (limit)
  std::size_t resamples = 0;
  std::string diagnostic;

  std::string label() const;
};

/// Per-root blocks of the normalized Hessian/score system and the full stacked system.
struct FiniteNStatistic {
  std::vector<LimitLawSample> blocks;  ///< order: +1, -1, complex pairs in spec order
  Eigen::MatrixXd full_matrix;
  Eigen::VectorXd full_vector;
  Eigen::VectorXd full_solution;
  double cross_block_max = 0.0;  ///< largest |entry| outside the diagonal blocks
  std::size_t singular_blocks = 0;
};

/**
 * Builds sum z_{t-1} z_{t-1}' psi'(e_t) and sum z_{t-1} psi(e_t), t = p+1..n, where
 * z stacks (J_n u, K_n v, L_n(k) w(k)) from the component filters of the series.
 * Needs the innovation trace. For quadratic loss and a single complex pair the
 * block solution is n^{1/2} a_n (Phi_LS - Phi) exactly.
 */
FiniteNStatistic finite_n_statistic(const TimeSeries& series, const RootSpec& spec,
                                    const LossFunction& loss, double a_n);

struct LimitOptions {
  std::size_t mesh = 1000;
  std::size_t truncation = kDefaultTruncation;
  double max_condition = 1e12;
  std::size_t max_resamples = 20;
};

/**
 * Gamma^{-1} F (root +1) or Upsilon^{-1} H (root -1): iterated integrals of a
 * stable path against an independent Brownian motion. At alpha = 2 the Brownian
 * motion is coupled to the path's driver with correlation corr(e, psi(e)).
 */
LimitLawSample limit_sample_real_root(std::size_t r, double alpha, const LossMoments& moments,
                                      const RandomStream& stream, RealRoot sign = RealRoot::Plus,
                                      const LimitOptions& options = {});

/// Lambda^{-1} G for a complex pair of multiplicity d, driven by the bivariate
/// process T on the orbit of theta and an independent Brownian pair R.
LimitLawSample limit_sample_complex(double theta, std::size_t d, double alpha,
                                    const LossMoments& moments, const RandomStream& stream,
                                    const LimitOptions& options = {});

/// Condition number in the 2-norm (infinite when singular).
double condition_number(const Eigen::MatrixXd& m);

/// "case,component,value" rows for the matrix, vector and solution of a draw.
std::string to_csv_rows(const LimitLawSample& sample, std::size_t draw);

}  // namespace uar
