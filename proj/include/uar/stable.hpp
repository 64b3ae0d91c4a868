#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "uar/random.hpp"

namespace uar {

enum class InnovationFamily {
  /// Symmetric alpha-stable S(alpha, 0, scale, 0), Samorodnitsky-Taqqu parameterization.
  ExactSaS,
  /// |e| Pareto with P(|e| > x) = (x / scale)^{-alpha} for x >= scale, random sign.
  SymmetricPareto,
};

/**
 * @brief Innovation law in the domain of attraction of a symmetric stable law.
 *
 * Only symmetric laws are supported, so p_tail is pinned to 1/2. For
 * ExactSaS with alpha = 2 the law is N(0, 2 scale^2), the usual reduction
 * of the stable characteristic function exp(-scale^alpha |s|^alpha).
 */
struct InnovationSpec {
  double alpha = 2.0;
  InnovationFamily family = InnovationFamily::ExactSaS;
  double scale = 1.0;
  double p_tail = 0.5;

  static InnovationSpec exact(double alpha, double scale = 1.0);
  static InnovationSpec pareto(double alpha, double scale = 1.0);

  /// Throws std::domain_error on alpha outside (0, 2], nonpositive scale,
  /// p_tail != 1/2, or a Pareto law with alpha >= 2.
  void validate() const;
};

std::string to_string(InnovationFamily family);
InnovationFamily parse_family(const std::string& name);

std::vector<double> sample_exact_sas(const InnovationSpec& spec, std::size_t n, RandomStream& rng);
std::vector<double> sample_pareto_tail(const InnovationSpec& spec, std::size_t n, RandomStream& rng);
/// Dispatches on spec.family.
std::vector<double> sample_innovations(const InnovationSpec& spec, std::size_t n, RandomStream& rng);

/// P(|e| > x) for the spec's law, evaluated by numerical integration for ExactSaS.
double abs_tail_probability(const InnovationSpec& spec, double x);
/// Probability density at x.
double density(const InnovationSpec& spec, double x);
/// P(e <= x).
double cdf(const InnovationSpec& spec, double x);

/**
 * @brief Norming sequence a_n = inf{x : P(|e| > x) <= 1/n}.
 *
 * Closed form n^{1/alpha} scale for the Pareto family, tan(pi/2 (1 - 1/n)) scale
 * for the Cauchy case, numerical tail inversion for other stable laws, and
 * sqrt(n E e^2) = sqrt(2 n) scale at alpha = 2 so that a_n^{-1} sum e_k is
 * asymptotically standard normal.
 */
double norming_constant(const InnovationSpec& spec, std::size_t n);

/**
 * Scale constant K of the series sum delta_k Gamma_k^{-1/alpha} Z_k: its
 * characteristic function is exp(-K E|<s, Z>|^alpha). Equals
 * Gamma(1 - alpha) cos(pi alpha / 2) for alpha != 1 and pi/2 at alpha = 1.
 */
double series_dispersion_constant(double alpha);

// ---------------------------------------------------------------------------
// LePage series paths

enum class StableKind { S, S1 };

/// Angles attached to the jumps of the bivariate process T.
enum class AngleMode {
  /// (cos(theta U_k), sin(theta U_k)): the slowly rotating weights of the
  /// bivariate stable process with characteristic exponent K int |<s, e(theta u)>|^alpha du.
  Continuous,
  /// (cos(theta J_k), sin(theta J_k)) with J_k a uniform integer: the limit of
  /// a_n^{-1} sum (cos k theta, sin k theta) e_k, whose jump angles are spread
  /// over the orbit {k theta mod 2 pi}.
  Lattice,
};

struct LePagePath {
  std::vector<double> grid;
  std::vector<double> values;
  double alpha = 2.0;
  std::size_t truncation = 0;
  /// Set when the discarded tail of the series is large relative to the
  /// requested tolerance and no Gaussian correction was applied.
  bool truncation_warning = false;
  std::string diagnostic;
};

/// Arrivals of the truncated series, in emission order.
struct LePageJumps {
  double alpha = 1.0;
  std::vector<double> size;      ///< delta_k Gamma_k^{-1/alpha}
  std::vector<double> location;  ///< U_k
  std::vector<std::uint32_t> lattice_index;  ///< J_k, filled only when requested
  double last_arrival = 0.0;     ///< Gamma_N
  /// Conditional variance of the discarded terms, int_{Gamma_N}^inf x^{-2/alpha} dx.
  double tail_variance = 0.0;
};

/// Draws N = truncation arrivals. The k-th arrival depends only on the stream
/// and k, so a longer truncation extends a shorter one.
LePageJumps draw_lepage_jumps(double alpha, std::size_t truncation, RandomStream stream,
                              bool with_lattice = false);

/// Truncation default and the alpha above which the discarded tail is
/// replaced by a Brownian correction.
inline constexpr std::size_t kDefaultTruncation = 10000;
inline constexpr double kTailCorrectionAlpha = 1.5;

/**
 * @brief Path of the stable process S (or S1) on an increasing grid in [0, 1].
 *
 * alpha < 2: truncated series sum delta_k Gamma_k^{-1/alpha} I(U_k <= t), plus a
 * Brownian term carrying the variance of the discarded tail when
 * alpha >= kTailCorrectionAlpha. alpha = 2: standard Brownian motion.
 * S1 is an independent copy of S (derived from a different sub-stream).
 */
LePagePath lepage_path(double alpha, StableKind kind, std::span<const double> grid,
                       std::size_t truncation, const RandomStream& stream,
                       double tolerance = 1e-2);

/// Bivariate process T = (T1, T2) on the grid; see AngleMode.
std::pair<LePagePath, LePagePath> bivariate_stable_T(double theta, double alpha,
                                                      std::span<const double> grid,
                                                      std::size_t truncation,
                                                      const RandomStream& stream,
                                                      AngleMode mode = AngleMode::Continuous);

/// t_i = i / mesh, i = 0..mesh.
std::vector<double> uniform_grid(std::size_t mesh);

/// Standard Brownian motion on an arbitrary increasing grid (independent increments).
std::vector<double> brownian_path(std::span<const double> grid, RandomStream stream);

/**
 * Standard Brownian motion at i / mesh built by midpoint (Levy) refinement:
 * writing mesh = b 2^L with b odd, the path at mesh 2 * mesh agrees with the
 * path at mesh on the coarse points for the same stream.
 */
std::vector<double> brownian_on_mesh(std::size_t mesh, const RandomStream& stream);

/// S on the uniform mesh i / mesh, using brownian_on_mesh for the Gaussian parts.
std::vector<double> stable_path_on_mesh(double alpha, std::size_t mesh, std::size_t truncation,
                                        const RandomStream& stream);

/// (T1, T2) on the uniform mesh, refinement-consistent at alpha = 2.
std::pair<std::vector<double>, std::vector<double>> bivariate_on_mesh(
    double theta, double alpha, std::size_t mesh, std::size_t truncation,
    const RandomStream& stream, AngleMode mode);

/// Comma-separated "t,value" rows with a header line.
std::string to_csv(const LePagePath& path);

}  // namespace uar
