#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "uar/ar_model.hpp"
#include "uar/loss.hpp"

namespace uar {

/// Degenerate or rank-deficient design.
class EstimationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EstimationResult {
  std::vector<double> phi_hat;
  std::vector<double> residuals;  ///< e_t, t = p+1..n
  double objective = 0.0;
  double gradient_norm = 0.0;  ///< max-norm of the score at phi_hat
  std::size_t iterations = 0;
  bool converged = false;
  std::string method;
  std::string diagnostic;

  /// "key=value" lines.
  std::string to_text() const;
  /// "index,estimate" rows with a header.
  std::string to_csv() const;
};

enum class SolverMethod {
  Irls,    ///< reweighted least squares, Newton step taken when it does better
  Newton,  ///< damped Newton, reweighted step as fallback when the Hessian is singular
};

struct MEstimateOptions {
  SolverMethod method = SolverMethod::Irls;
  double tol = 1e-8;
  std::size_t max_iter = 200;
};

/// Lag regression y_t = X_t, x_t = (X_{t-1}, ..., X_{t-p}) for t = p+1..n.
struct LagDesign {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
};

/// Throws std::invalid_argument unless n > 2p.
LagDesign lag_design(const TimeSeries& series, std::size_t p);
LagDesign lag_design(const std::vector<double>& values, std::size_t p);

EstimationResult ls_fit(const LagDesign& design);
EstimationResult m_fit(const LagDesign& design, const LossFunction& loss,
                       const MEstimateOptions& options = {});

EstimationResult ls_estimate(const TimeSeries& series, std::size_t p);
EstimationResult m_estimate(const TimeSeries& series, std::size_t p, const LossFunction& loss,
                            const MEstimateOptions& options = {});

/// Sum of rho(e_t) and its gradient -sum psi(e_t) (X_{t-1}, ..., X_{t-p}).
std::pair<double, std::vector<double>> objective_and_gradient(const TimeSeries& series,
                                                              std::size_t p,
                                                              const LossFunction& loss,
                                                              const std::vector<double>& beta);

/// e_t = X_t - sum phi_i X_{t-i}, t = p+1..n.
std::vector<double> residuals(const TimeSeries& series, const std::vector<double>& phi_hat);

}  // namespace uar
