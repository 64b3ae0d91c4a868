#include "uar/bootstrap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "uar/parallel.hpp"
#include "uar/statistics.hpp"

namespace uar {

MRule MRule::power(double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("m-rule exponent must lie in (0, 1)");
  return {Kind::Power, gamma};
}

std::size_t MRule::resample_size(std::size_t n, std::size_t p) const {
  if (n < 3) throw std::invalid_argument("m-rule needs n >= 3");
  const double x = static_cast<double>(n);
  const double raw = kind == Kind::NOverLogLog ? x / std::log(std::log(x)) : std::pow(x, gamma);
  std::size_t m = static_cast<std::size_t>(std::llround(raw));
  m = std::max(m, 2 * p + 2);
  return std::min(m, n - 1);
}

std::string MRule::describe() const {
  if (kind == Kind::NOverLogLog) return "n/loglog(n)";
  std::ostringstream os;
  os << "n^" << gamma;
  return os.str();
}

MRule parse_m_rule(const std::string& text) {
  if (text == "n/loglog" || text == "loglog" || text == "n/ln(ln(n))" || text == "n/loglog(n)")
    return MRule::n_over_loglog();
  for (const std::string prefix : {"pow:", "n^", "pow"}) {
    if (text.rfind(prefix, 0) == 0) return MRule::power(std::stod(text.substr(prefix.size())));
  }
  throw std::invalid_argument("unknown m-rule '" + text + "'");
}

void BootstrapConfig::validate() const {
  if (replicates < 100) throw std::invalid_argument("bootstrap needs B >= 100 replicates");
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("confidence level must lie in (0, 1)");
  if (m_rule.kind == MRule::Kind::Power && !(m_rule.gamma > 0.0 && m_rule.gamma < 1.0))
    throw std::invalid_argument("m-rule exponent must lie in (0, 1)");
}

CenteredResidualEdf::CenteredResidualEdf(const std::vector<double>& residuals, double zero_tol) {
  if (residuals.empty()) throw std::invalid_argument("residual set is empty");
  const double mean = std::accumulate(residuals.begin(), residuals.end(), 0.0) /
                      static_cast<double>(residuals.size());
  support_.reserve(residuals.size());
  double largest = 0.0;
  for (double e : residuals) {
    support_.push_back(e - mean);
    largest = std::max(largest, std::abs(e - mean));
  }
  degenerate_ = largest <= zero_tol;
}

std::vector<double> CenteredResidualEdf::draw(std::size_t n, RandomStream& rng) const {
  std::vector<double> out(n);
  for (auto& x : out) x = draw(rng);
  return out;
}

std::vector<PercentileInterval> percentile_intervals(const Eigen::MatrixXd& estimates, double level) {
  if (estimates.rows() == 0) throw std::invalid_argument("no bootstrap estimates");
  const double lo = 0.5 * (1.0 - level);
  const double hi = 0.5 * (1.0 + level);
  std::vector<PercentileInterval> out;
  for (Eigen::Index j = 0; j < estimates.cols(); ++j) {
    std::vector<double> col(estimates.col(j).data(), estimates.col(j).data() + estimates.rows());
    std::sort(col.begin(), col.end());
    out.push_back({stats::quantile_sorted(col, lo), stats::quantile_sorted(col, hi)});
  }
  return out;
}

std::string BootstrapSummary::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "coefficient,lower,upper,center,m,B\n";
  for (std::size_t j = 0; j < interval.size(); ++j) {
    os << "phi" << j + 1 << ',' << interval[j].lower << ',' << interval[j].upper << ',' << center[j]
       << ',' << m_used << ',' << estimates.rows() << '\n';
  }
  return os.str();
}

BootstrapSummary bootstrap_replicates(const TimeSeries& series, const std::vector<double>& phi_hat,
                                      const BootstrapConfig& config, const RandomStream& rng) {
  config.validate();
  const std::size_t p = phi_hat.size();
  if (p == 0) throw std::invalid_argument("phi_hat must be non-empty");
  const std::size_t n = series.size();
  const std::size_t m = config.m_rule.resample_size(n, p);
  if (m < 2 * p) throw std::invalid_argument("resample size must be at least 2p");

  const std::vector<double> e = residuals(series, phi_hat);
  double data_scale = 0.0;
  for (double x : series.values) data_scale = std::max(data_scale, std::abs(x));
  double coef_scale = 1.0;
  for (double f : phi_hat) coef_scale += std::abs(f);
  const CenteredResidualEdf edf(e, 64.0 * std::numeric_limits<double>::epsilon() * data_scale * coef_scale);

  ARModel fitted;
  fitted.phi = phi_hat;

  BootstrapSummary out;
  out.center = phi_hat;
  out.m_used = m;
  out.requested = config.replicates;
  out.level = config.level;

  const std::size_t b_total = config.replicates;
  Eigen::MatrixXd all(static_cast<Eigen::Index>(b_total), static_cast<Eigen::Index>(p));
  std::vector<char> kept(b_total, 0);

  if (edf.degenerate()) {
    for (std::size_t b = 0; b < b_total; ++b) {
      for (std::size_t j = 0; j < p; ++j) all(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(j)) = phi_hat[j];
      kept[b] = 1;
    }
  } else {
    parallel_for(b_total, config.jobs, [&](std::size_t b) {
      RandomStream stream = rng.derive(b);
      TimeSeries star;
      if (config.start == BootstrapStart::FromRest) {
        star = simulate_from_rest(fitted, edf.draw(m - p, stream));
      } else {
        star = simulate_ar(fitted, edf.draw(m, stream));
      }
      try {
        const EstimationResult fit = m_estimate(star, p, config.loss, config.solver);
        if (!fit.converged) return;
        for (std::size_t j = 0; j < p; ++j)
          all(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(j)) = fit.phi_hat[j];
        kept[b] = 1;
      } catch (const EstimationError&) {
      }
    });
  }

  const auto n_kept = static_cast<std::size_t>(std::count(kept.begin(), kept.end(), 1));
  out.dropped = b_total - n_kept;
  out.flagged = static_cast<double>(out.dropped) > config.max_drop_fraction * static_cast<double>(b_total);
  if (n_kept == 0) throw EstimationError("every bootstrap replicate failed");
  out.estimates.resize(static_cast<Eigen::Index>(n_kept), static_cast<Eigen::Index>(p));
  Eigen::Index row = 0;
  for (std::size_t b = 0; b < b_total; ++b) {
    if (kept[b]) out.estimates.row(row++) = all.row(static_cast<Eigen::Index>(b));
  }
  out.interval = percentile_intervals(out.estimates, config.level);
  return out;
}

InnovationSource innovation_source(const InnovationSpec& spec) {
  return [spec](std::size_t count, RandomStream& rng) { return sample_innovations(spec, count, rng); };
}

CoverageResult coverage_experiment(const ARModel& model, const InnovationSource& innovations,
                                   std::size_t n, const BootstrapConfig& config,
                                   std::size_t outer_reps, const RandomStream& rng,
                                   std::size_t coefficient) {
  config.validate();
  const std::size_t p = model.order();
  if (coefficient >= p) throw std::invalid_argument("coefficient index out of range");
  if (n < 2 * p + 2) throw std::invalid_argument("sample size must be at least 2p + 2");
  if (outer_reps == 0) throw std::invalid_argument("outer_reps must be positive");

  BootstrapConfig inner = config;
  inner.jobs = 1;
  const double truth = model.phi[coefficient];

  enum Outcome : char { FitFailed, Covered, Missed };
  std::vector<char> outcome(outer_reps, FitFailed);
  std::vector<char> flagged(outer_reps, 0);
  std::vector<std::size_t> dropped(outer_reps, 0);
  std::vector<double> width(outer_reps, 0.0);

  parallel_for(outer_reps, config.jobs, [&](std::size_t i) {
    const RandomStream cell = rng.derive(i);
    RandomStream sample_rng = cell.derive(0);
    const TimeSeries series = simulate_from_rest(model, innovations(n - p, sample_rng));
    EstimationResult fit;
    try {
      fit = m_estimate(series, p, config.loss, config.solver);
    } catch (const EstimationError&) {
      return;
    }
    if (!fit.converged) return;
    BootstrapSummary summary;
    try {
      summary = bootstrap_replicates(series, fit.phi_hat, inner, cell.derive(1));
    } catch (const EstimationError&) {
      return;
    }
    const auto& iv = summary.interval[coefficient];
    // rounding slack so that exact fits (width-0 intervals) count as covering
    const double slack = 16.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(truth));
    outcome[i] = (iv.lower - slack <= truth && truth <= iv.upper + slack) ? Covered : Missed;
    flagged[i] = summary.flagged ? 1 : 0;
    dropped[i] = summary.dropped;
    width[i] = iv.width();
  });

  CoverageResult out;
  out.outer = outer_reps;
  out.m_used = config.m_rule.resample_size(n, p);
  double width_sum = 0.0;
  for (std::size_t i = 0; i < outer_reps; ++i) {
    if (outcome[i] == FitFailed) {
      ++out.failed_fits;
      continue;
    }
    ++out.kept;
    if (outcome[i] == Covered) ++out.covered;
    out.flagged += static_cast<std::size_t>(flagged[i]);
    out.dropped_inner += dropped[i];
    width_sum += width[i];
  }
  if (out.kept > 0) {
    out.coverage = static_cast<double>(out.covered) / static_cast<double>(out.kept);
    out.mean_width = width_sum / static_cast<double>(out.kept);
  }
  return out;
}

CoverageResult coverage_experiment(const ARModel& model, const InnovationSpec& spec, std::size_t n,
                                   const BootstrapConfig& config, std::size_t outer_reps,
                                   const RandomStream& rng, std::size_t coefficient) {
  return coverage_experiment(model, innovation_source(spec), n, config, outer_reps, rng, coefficient);
}

}  // namespace uar
