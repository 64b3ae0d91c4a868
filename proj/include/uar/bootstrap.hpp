#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "uar/ar_model.hpp"
#include "uar/estimation.hpp"
#include "uar/loss.hpp"
#include "uar/random.hpp"
#include "uar/stable.hpp"

namespace uar {

/// Resample size as a function of the original sample size.
struct MRule {
  enum class Kind { NOverLogLog, Power };
  Kind kind = Kind::Power;
  double gamma = 0.95;  ///< exponent for Kind::Power, in (0, 1)

  static MRule n_over_loglog() { return {Kind::NOverLogLog, 0.0}; }
  static MRule power(double gamma);

  /// Rounded to the nearest integer, floored at 2p + 2, capped at n - 1.
  std::size_t resample_size(std::size_t n, std::size_t p) const;
  std::string describe() const;
};

/// "n/loglog", "loglog", "pow:0.9", "n^0.95".
MRule parse_m_rule(const std::string& text);

/// How the bootstrap series of length m is started.
enum class BootstrapStart {
  FromRest,   ///< X*_1..X*_p = 0 then m - p recursions (same as the simulated samples)
  Presample,  ///< zero presample, m recursions
};

struct BootstrapConfig {
  MRule m_rule;
  std::size_t replicates = 500;  ///< B
  double level = 0.95;
  LossFunction loss = huber_loss(5.0);
  MEstimateOptions solver;
  BootstrapStart start = BootstrapStart::FromRest;
  std::size_t jobs = 1;
  double max_drop_fraction = 0.05;

  /// Throws std::invalid_argument unless B >= 100 and level in (0, 1).
  void validate() const;
};

/// Empirical law of e_i - mean(e).
class CenteredResidualEdf {
 public:
  /// Centered residuals within zero_tol of zero count as exact zeros for degenerate().
  explicit CenteredResidualEdf(const std::vector<double>& residuals, double zero_tol = 0.0);

  const std::vector<double>& support() const { return support_; }
  /// True when every centered residual is zero.
  bool degenerate() const { return degenerate_; }
  double draw(RandomStream& rng) const { return support_[rng.index(support_.size())]; }
  std::vector<double> draw(std::size_t n, RandomStream& rng) const;

 private:
  std::vector<double> support_;
  bool degenerate_ = false;
};

struct PercentileInterval {
  double lower = 0.0;
  double upper = 0.0;
  bool contains(double x) const { return lower <= x && x <= upper; }
  double width() const { return upper - lower; }
};

struct BootstrapSummary {
  Eigen::MatrixXd estimates;  ///< kept replicates x p
  std::vector<PercentileInterval> interval;
  std::vector<double> center;  ///< phi_hat of the original fit
  std::size_t m_used = 0;
  std::size_t requested = 0;
  std::size_t dropped = 0;
  double level = 0.95;
  bool flagged = false;  ///< dropped fraction above the configured limit

  /// "coefficient,lower,upper,center,m,B" rows.
  std::string to_csv() const;
};

/// Type-7 percentiles ((1 - level)/2, (1 + level)/2) of each column.
std::vector<PercentileInterval> percentile_intervals(const Eigen::MatrixXd& estimates, double level);

/**
 * m-out-of-n residual bootstrap around phi_hat: draws centered residuals of the
 * fit, rebuilds X* from the fitted recursion and refits with the same loss.
 * Replicate b uses rng.derive(b), so results do not depend on config.jobs.
 * Replicates whose fit fails or does not converge are dropped and counted. A
 * degenerate residual law (all centered residuals zero) returns phi_hat for
 * every replicate.
 */
BootstrapSummary bootstrap_replicates(const TimeSeries& series, const std::vector<double>& phi_hat,
                                      const BootstrapConfig& config, const RandomStream& rng);

/// Draws the innovations of one outer replicate (n - p shocks after the rest start).
using InnovationSource = std::function<std::vector<double>(std::size_t count, RandomStream& rng)>;

InnovationSource innovation_source(const InnovationSpec& spec);

struct CoverageResult {
  double coverage = 0.0;  ///< fraction of kept outer replicates whose interval holds the truth
  std::size_t outer = 0;
  std::size_t kept = 0;
  std::size_t covered = 0;
  std::size_t failed_fits = 0;     ///< outer replicates whose original fit failed
  std::size_t flagged = 0;         ///< outer replicates with too many dropped bootstrap fits
  std::size_t dropped_inner = 0;   ///< total dropped bootstrap replicates
  std::size_t m_used = 0;
  double mean_width = 0.0;
};

/**
 * Simulates outer_reps samples of size n (started at rest), fits each with
 * config.loss, bootstraps, and checks whether the interval for coefficient
 * `coefficient` (0-based) contains the true value. Outer replicate i uses
 * rng.derive(i): the sample from derive(i).derive(0), the bootstrap from
 * derive(i).derive(1). Parallel over outer replicates with config.jobs workers.
 */
CoverageResult coverage_experiment(const ARModel& model, const InnovationSource& innovations,
                                   std::size_t n, const BootstrapConfig& config,
                                   std::size_t outer_reps, const RandomStream& rng,
                                   std::size_t coefficient = 0);

CoverageResult coverage_experiment(const ARModel& model, const InnovationSpec& spec, std::size_t n,
                                   const BootstrapConfig& config, std::size_t outer_reps,
                                   const RandomStream& rng, std::size_t coefficient = 0);

}  // namespace uar
