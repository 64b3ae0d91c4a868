#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace uar {

struct ComplexPair {
  double theta = 0.0;  ///< in (0, pi)
  std::size_t multiplicity = 1;
};

/// Unit-root structure (1 - z)^r (1 + z)^s prod (1 - 2 cos(theta_k) z + z^2)^{d_k}.
struct RootSpec {
  std::size_t r = 0;
  std::size_t s = 0;
  std::vector<ComplexPair> pairs;

  std::size_t order() const;
  /// Throws std::invalid_argument for p = 0, theta outside (0, pi), repeated theta
  /// or a zero multiplicity.
  void validate() const;
  std::string describe() const;
};

struct ARModel {
  std::vector<double> phi;  ///< phi_1..phi_p
  std::optional<RootSpec> spec;

  std::size_t order() const { return phi.size(); }
};

/// Multiplies out the unit-root factors; phi_i are the negated tail coefficients.
ARModel expand_polynomial(const RootSpec& spec);

/// Coefficients (1, -phi_1, ..., -phi_p) of the characteristic polynomial in z.
std::vector<double> characteristic_coefficients(const std::vector<double>& phi);

/// Roots of 1 - phi_1 z - ... - phi_p z^p (companion-matrix eigenvalues).
std::vector<std::complex<double>> characteristic_roots(const std::vector<double>& phi);

/// Expected roots of the spec, each repeated by its multiplicity.
std::vector<std::complex<double>> spec_roots(const RootSpec& spec);

/**
 * Checks that the numeric roots of phi reproduce the spec: every root cluster is
 * matched to a spec root within cluster_tol, and the centroid of each cluster
 * lies on the unit circle within tol. Repeated roots are only resolved to about
 * eps^{1/m} individually, so the check is made on cluster centroids.
 */
bool verify_unit_roots(const ARModel& model, double tol = 1e-8, double cluster_tol = 1e-4);

/// Observed sample X_1..X_n with the presample X_{1-p}..X_0 used by the recursion.
struct TimeSeries {
  std::vector<double> values;
  std::vector<double> presample;
  std::optional<std::vector<double>> innovations;
  std::optional<ARModel> model;

  std::size_t size() const { return values.size(); }
  /// X_t for 1 - presample.size() <= t <= n.
  double at(long t) const;
  /// "t,x[,eps]" rows for t = 0..n; X_0 is the last presample value (or 0).
  std::string to_csv() const;
  static TimeSeries from_csv(const std::string& text);
};

/// X_t = sum phi_i X_{t-i} + eps_t, t = 1..n. warm_start holds X_{1-p}..X_0
/// (empty means zeros); any other length is rejected.
TimeSeries simulate_ar(const ARModel& model, const std::vector<double>& innovations,
                       const std::vector<double>& warm_start = {});

/// Sample started at rest: X_1 = ... = X_p = 0 (zero shocks), then the
/// recursion driven by eps, so the series has p + eps.size() values.
TimeSeries simulate_from_rest(const ARModel& model, const std::vector<double>& eps);

/// Applies a lag polynomial c_0 + c_1 B + ... to a series indexed 1..n, with the
/// given presample (oldest first) standing in for negative indices; missing
/// presample values are zero.
std::vector<double> apply_lag_polynomial(const std::vector<double>& coefficients,
                                         const std::vector<double>& series,
                                         const std::vector<double>& presample = {});

/// Coefficients of (1 - z)^r (1 + z)^s prod (...)^{d_k}, lowest degree first.
std::vector<double> root_factor_polynomial(std::size_t r, std::size_t s,
                                           const std::vector<ComplexPair>& pairs);

/// u, v and w(k): each is phi(B) with its own unit-root factor removed, applied to X.
struct Components {
  std::vector<double> u;               ///< empty when r = 0
  std::vector<double> v;               ///< empty when s = 0
  std::vector<std::vector<double>> w;  ///< one per complex pair
};

Components component_filters(const TimeSeries& series, const RootSpec& spec);

enum class RealRoot { Plus, Minus };

/**
 * Iterated sums of a driving sequence for a real unit root: element j - 1 holds
 * (1 - B)^{-j} eps (root +1) or (1 + B)^{-j} eps (root -1), j = 1..multiplicity,
 * with zero initial conditions. The last element is the component itself.
 */
std::vector<std::vector<double>> difference_stack(const std::vector<double>& eps,
                                                  std::size_t multiplicity, RealRoot root);

/// (1 - 2 cos(theta) B + B^2)^{-j} eps for j = 1..d, zero initial conditions.
std::vector<std::vector<double>> complex_stack(const std::vector<double>& eps, std::size_t d,
                                               double theta);

}  // namespace uar
