#include "uar/estimation.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace uar {

namespace {

struct Evaluation {
  Eigen::VectorXd residual;
  double objective = 0.0;
  Eigen::VectorXd gradient;
};

Evaluation evaluate(const LagDesign& d, const LossFunction& loss, const Eigen::VectorXd& beta) {
  Evaluation ev;
  ev.residual = d.y - d.x * beta;
  Eigen::VectorXd score(ev.residual.size());
  for (Eigen::Index t = 0; t < ev.residual.size(); ++t) {
    ev.objective += loss.rho(ev.residual(t));
    score(t) = loss.psi(ev.residual(t));
  }
  ev.gradient = -d.x.transpose() * score;
  return ev;
}

double objective_only(const LagDesign& d, const LossFunction& loss, const Eigen::VectorXd& beta) {
  const Eigen::VectorXd r = d.y - d.x * beta;
  double f = 0.0;
  for (Eigen::Index t = 0; t < r.size(); ++t) f += loss.rho(r(t));
  return f;
}

// Size of the score that rounding in the residuals alone can produce.
double score_noise_floor(const LagDesign& d, const LossFunction& loss, const Eigen::VectorXd& beta) {
  double floor = 0.0;
  for (Eigen::Index t = 0; t < d.x.rows(); ++t) {
    const double scale = std::abs(d.y(t)) + d.x.row(t).cwiseAbs().dot(beta.cwiseAbs());
    floor += scale * d.x.row(t).cwiseAbs().maxCoeff();
  }
  return 16.0 * std::numeric_limits<double>::epsilon() * loss.psi_prime_bound * floor;
}

void check_design(const LagDesign& d) {
  if (d.x.rows() == 0 || d.x.cols() == 0) throw EstimationError("empty design");
  if (d.x.cwiseAbs().maxCoeff() == 0.0) throw EstimationError("degenerate design: all lagged regressors are zero");
  if (!d.x.allFinite() || !d.y.allFinite()) throw EstimationError("design contains non-finite values");
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

bool solve_spd(const Eigen::MatrixXd& h, const Eigen::VectorXd& rhs, Eigen::VectorXd& out) {
  Eigen::LDLT<Eigen::MatrixXd> ldlt(h);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) return false;
  const double top = ldlt.vectorD().cwiseAbs().maxCoeff();
  if (!(top > 0.0) || ldlt.vectorD().minCoeff() <= top * 1e-14) return false;
  out = ldlt.solve(rhs);
  return out.allFinite();
}

}  // namespace

std::string EstimationResult::to_text() const {
  std::ostringstream os;
  os.precision(17);
  for (std::size_t i = 0; i < phi_hat.size(); ++i) os << "phi" << i + 1 << '=' << phi_hat[i] << '\n';
  os << "objective=" << objective << '\n'
     << "gradient_norm=" << gradient_norm << '\n'
     << "iterations=" << iterations << '\n'
     << "converged=" << (converged ? "true" : "false") << '\n'
     << "method=" << method << '\n';
  if (!diagnostic.empty()) os << "diagnostic=" << diagnostic << '\n';
  return os.str();
}

std::string EstimationResult::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "index,estimate\n";
  for (std::size_t i = 0; i < phi_hat.size(); ++i) os << i + 1 << ',' << phi_hat[i] << '\n';
  return os.str();
}

LagDesign lag_design(const std::vector<double>& values, std::size_t p) {
  if (p == 0) throw std::invalid_argument("order p must be at least 1");
  const std::size_t n = values.size();
  if (n <= 2 * p) throw std::invalid_argument("series length must exceed 2p");
  LagDesign d;
  const auto rows = static_cast<Eigen::Index>(n - p);
  d.x.resize(rows, static_cast<Eigen::Index>(p));
  d.y.resize(rows);
  for (std::size_t t = p; t < n; ++t) {
    const auto row = static_cast<Eigen::Index>(t - p);
    d.y(row) = values[t];
    for (std::size_t i = 1; i <= p; ++i) d.x(row, static_cast<Eigen::Index>(i - 1)) = values[t - i];
  }
  return d;
}

LagDesign lag_design(const TimeSeries& series, std::size_t p) { return lag_design(series.values, p); }

EstimationResult ls_fit(const LagDesign& d) {
  check_design(d);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(d.x);
  if (qr.rank() < d.x.cols()) throw EstimationError("rank-deficient lag design");
  const Eigen::VectorXd beta = qr.solve(d.y);
  const auto ev = evaluate(d, quadratic_loss(), beta);
  EstimationResult out;
  out.phi_hat = to_std(beta);
  out.residuals = to_std(ev.residual);
  out.objective = ev.objective;
  out.gradient_norm = ev.gradient.cwiseAbs().maxCoeff();
  out.iterations = 1;
  out.converged = true;
  out.method = "ls-qr";
  return out;
}

EstimationResult m_fit(const LagDesign& d, const LossFunction& loss, const MEstimateOptions& options) {
  check_design(d);
  const EstimationResult start = ls_fit(d);
  Eigen::VectorXd beta = Eigen::Map<const Eigen::VectorXd>(start.phi_hat.data(),
                                                          static_cast<Eigen::Index>(start.phi_hat.size()));
  const double x_scale = d.x.cwiseAbs().maxCoeff();
  const Eigen::Index m = d.x.rows();

  EstimationResult out;
  out.method = options.method == SolverMethod::Irls ? "irls" : "newton";
  Evaluation ev = evaluate(d, loss, beta);
  std::size_t iter = 0;
  for (; iter < options.max_iter; ++iter) {
    const double gtol = options.tol * (1.0 + x_scale) + score_noise_floor(d, loss, beta);
    const double gnorm = ev.gradient.cwiseAbs().maxCoeff();

    // Candidate directions.
    std::vector<Eigen::VectorXd> directions;
    Eigen::VectorXd w(m);
    Eigen::VectorXd hdiag(m);
    for (Eigen::Index t = 0; t < m; ++t) {
      w(t) = loss.weight(ev.residual(t));
      hdiag(t) = loss.psi_prime(ev.residual(t));
    }
    Eigen::VectorXd irls_dir;
    Eigen::VectorXd newton_dir;
    const Eigen::MatrixXd xw = d.x.transpose() * w.asDiagonal();
    Eigen::VectorXd irls_beta;
    const bool have_irls = solve_spd(xw * d.x, xw * d.y, irls_beta);
    if (have_irls) irls_dir = irls_beta - beta;
    const bool have_newton =
        solve_spd(d.x.transpose() * hdiag.asDiagonal() * d.x, -ev.gradient, newton_dir);
    if (options.method == SolverMethod::Irls) {
      if (have_irls) directions.push_back(irls_dir);
      if (have_newton) directions.push_back(newton_dir);
    } else {
      if (have_newton) directions.push_back(newton_dir);
      if (have_irls) directions.push_back(irls_dir);
    }
    if (directions.empty()) {
      out.diagnostic = "no usable search direction";
      break;
    }

    // Backtracking on each candidate; keep the lowest objective.
    double best_f = ev.objective;
    Eigen::VectorXd best_step = Eigen::VectorXd::Zero(beta.size());
    bool improved = false;
    for (const auto& dir : directions) {
      double step = 1.0;
      for (int k = 0; k < 40; ++k, step *= 0.5) {
        const Eigen::VectorXd trial = step * dir;
        const double f = objective_only(d, loss, beta + trial);
        if (f < best_f) {
          improved = true;
          best_f = f;
          best_step = trial;
          break;
        }
      }
    }
    if (!improved) {
      // Near the optimum the objective change falls below its rounding; a full
      // step that leaves it flat but shrinks the score is still progress.
      const double slack = 64.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(ev.objective));
      for (const auto& dir : directions) {
        const Evaluation trial = evaluate(d, loss, beta + dir);
        if (trial.objective <= ev.objective + slack &&
            trial.gradient.cwiseAbs().maxCoeff() < 0.5 * gnorm) {
          improved = true;
          best_f = trial.objective;
          best_step = dir;
          break;
        }
      }
    }
    const double step_norm = best_step.cwiseAbs().maxCoeff();
    const double stol = options.tol * (1.0 + beta.cwiseAbs().maxCoeff());
    const double full_norm = directions.front().cwiseAbs().maxCoeff();

    if (improved) {
      beta += best_step;
      ev = evaluate(d, loss, beta);
    }
    const double new_gnorm = ev.gradient.cwiseAbs().maxCoeff();
    const double new_gtol = options.tol * (1.0 + x_scale) + score_noise_floor(d, loss, beta);
    if (new_gnorm <= new_gtol && std::min(step_norm, full_norm) <= stol) {
      ++iter;
      out.converged = true;
      break;
    }
    if (!improved) {
      // No descent available: stationary up to rounding, or stuck.
      if (gnorm <= gtol || new_gnorm <= new_gtol) {
        ++iter;
        out.converged = true;
      } else {
        out.diagnostic = "line search failed to decrease the objective";
      }
      break;
    }
  }
  if (!out.converged && out.diagnostic.empty()) out.diagnostic = "maximum iterations reached";
  out.phi_hat = to_std(beta);
  out.residuals = to_std(ev.residual);
  out.objective = ev.objective;
  out.gradient_norm = ev.gradient.cwiseAbs().maxCoeff();
  out.iterations = iter;
  return out;
}

EstimationResult ls_estimate(const TimeSeries& series, std::size_t p) { return ls_fit(lag_design(series, p)); }

EstimationResult m_estimate(const TimeSeries& series, std::size_t p, const LossFunction& loss,
                            const MEstimateOptions& options) {
  return m_fit(lag_design(series, p), loss, options);
}

std::pair<double, std::vector<double>> objective_and_gradient(const TimeSeries& series,
                                                              std::size_t p,
                                                              const LossFunction& loss,
                                                              const std::vector<double>& beta) {
  if (beta.size() != p) throw std::invalid_argument("beta must have p entries");
  const LagDesign d = lag_design(series, p);
  const auto ev = evaluate(d, loss, Eigen::Map<const Eigen::VectorXd>(beta.data(), static_cast<Eigen::Index>(p)));
  return {ev.objective, to_std(ev.gradient)};
}

std::vector<double> residuals(const TimeSeries& series, const std::vector<double>& phi_hat) {
  const std::size_t p = phi_hat.size();
  if (p == 0) throw std::invalid_argument("phi_hat must be non-empty");
  if (series.size() <= p) throw std::invalid_argument("series must be longer than p");
  std::vector<double> e(series.size() - p);
  for (std::size_t t = p; t < series.size(); ++t) {
    double r = series.values[t];
    for (std::size_t i = 1; i <= p; ++i) r -= phi_hat[i - 1] * series.values[t - i];
    e[t - p] = r;
  }
  return e;
}

}  // namespace uar
