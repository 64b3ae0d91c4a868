#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace uar {

/**
 * @brief Convex loss rho with score psi = rho' and psi' (a.e. derivative of psi).
 *
 * lipschitz_k is the Lipschitz constant of psi' when it exists (the quadratic
 * and smoothed Huber losses); it is empty for Huber, whose psi' jumps at +-c.
 */
struct LossFunction {
  std::string name;
  std::function<double(double)> rho;
  std::function<double(double)> psi;
  std::function<double(double)> psi_prime;
  std::optional<double> lipschitz_k;
  bool convex = true;
  bool symmetric = true;
  /// Nonnegative points where psi' is not smooth; used to split quadratures.
  std::vector<double> knots;
  /// sup |psi'|, bounds the rounding error of the score.
  double psi_prime_bound = 1.0;

  /// psi(x) / x, the IRLS weight; psi'(0) at the origin.
  double weight(double x) const;
};

/// rho(x) = x^2/2 for |x| <= c, c|x| - c^2/2 beyond. Throws std::domain_error for c <= 0.
LossFunction huber_loss(double c);

/**
 * Huber loss with psi' ramped linearly from 1 to 0 over [c - delta, c + delta],
 * delta = fraction * c. psi' is then Lipschitz with constant 1 / (2 delta).
 */
LossFunction smoothed_huber_loss(double c, double fraction = 0.01);

/// rho(x) = x^2 / 2; the M-estimate is least squares.
LossFunction quadratic_loss();

/// Parses "huber:5", "smooth-huber:5", "quadratic" (alias "ls").
LossFunction parse_loss(const std::string& text);

}  // namespace uar
