#include "uar/ar_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <Eigen/Dense>

namespace uar {

namespace {

std::vector<double> multiply(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

std::vector<double> power(const std::vector<double>& base, std::size_t k) {
  std::vector<double> out{1.0};
  for (std::size_t i = 0; i < k; ++i) out = multiply(out, base);
  return out;
}

// Solves factor(B) y = x for a monic-in-B^0 factor with zero initial conditions.
std::vector<double> invert_filter(const std::vector<double>& factor, const std::vector<double>& x) {
  std::vector<double> y(x.size(), 0.0);
  for (std::size_t t = 0; t < x.size(); ++t) {
    double value = x[t];
    for (std::size_t k = 1; k < factor.size() && k <= t; ++k) value -= factor[k] * y[t - k];
    y[t] = value / factor[0];
  }
  return y;
}

}  // namespace

std::size_t RootSpec::order() const {
  std::size_t p = r + s;
  for (const auto& pair : pairs) p += 2 * pair.multiplicity;
  return p;
}

void RootSpec::validate() const {
  if (order() == 0) throw std::invalid_argument("root spec must have order p >= 1");
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const double theta = pairs[i].theta;
    if (!(theta > 0.0 && theta < std::numbers::pi))
      throw std::invalid_argument("complex root angle must lie in (0, pi)");
    if (pairs[i].multiplicity == 0)
      throw std::invalid_argument("complex root multiplicity must be positive");
    for (std::size_t j = 0; j < i; ++j)
      if (std::abs(pairs[j].theta - theta) < 1e-12)
        throw std::invalid_argument("complex root angles must be distinct");
  }
}

std::string RootSpec::describe() const {
  std::ostringstream os;
  os.precision(12);
  os << "r=" << r << " s=" << s;
  for (const auto& pair : pairs) os << " theta=" << pair.theta << "^" << pair.multiplicity;
  return os.str();
}

std::vector<double> root_factor_polynomial(std::size_t r, std::size_t s,
                                           const std::vector<ComplexPair>& pairs) {
  std::vector<double> poly = multiply(power({1.0, -1.0}, r), power({1.0, 1.0}, s));
  for (const auto& pair : pairs)
    poly = multiply(poly, power({1.0, -2.0 * std::cos(pair.theta), 1.0}, pair.multiplicity));
  return poly;
}

ARModel expand_polynomial(const RootSpec& spec) {
  spec.validate();
  const auto poly = root_factor_polynomial(spec.r, spec.s, spec.pairs);
  ARModel model;
  model.phi.resize(poly.size() - 1);
  for (std::size_t i = 1; i < poly.size(); ++i) model.phi[i - 1] = -poly[i];
  model.spec = spec;
  return model;
}

std::vector<double> characteristic_coefficients(const std::vector<double>& phi) {
  std::vector<double> coef(phi.size() + 1);
  coef[0] = 1.0;
  for (std::size_t i = 0; i < phi.size(); ++i) coef[i + 1] = -phi[i];
  return coef;
}

std::vector<std::complex<double>> characteristic_roots(const std::vector<double>& phi) {
  auto coef = characteristic_coefficients(phi);
  while (coef.size() > 1 && coef.back() == 0.0) coef.pop_back();
  const std::size_t degree = coef.size() - 1;
  if (degree == 0) return {};
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(degree),
                                                    static_cast<Eigen::Index>(degree));
  for (std::size_t i = 0; i < degree; ++i)
    companion(0, static_cast<Eigen::Index>(i)) = -coef[degree - 1 - i] / coef[degree];
  for (std::size_t i = 1; i < degree; ++i)
    companion(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i - 1)) = 1.0;
  Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
  std::vector<std::complex<double>> roots(degree);
  for (std::size_t i = 0; i < degree; ++i) roots[i] = solver.eigenvalues()(static_cast<Eigen::Index>(i));
  return roots;
}

std::vector<std::complex<double>> spec_roots(const RootSpec& spec) {
  std::vector<std::complex<double>> roots;
  roots.insert(roots.end(), spec.r, {1.0, 0.0});
  roots.insert(roots.end(), spec.s, {-1.0, 0.0});
  for (const auto& pair : spec.pairs) {
    const auto z = std::polar(1.0, pair.theta);
    for (std::size_t k = 0; k < pair.multiplicity; ++k) {
      roots.push_back(z);
      roots.push_back(std::conj(z));
    }
  }
  return roots;
}

bool verify_unit_roots(const ARModel& model, double tol, double cluster_tol) {
  auto roots = characteristic_roots(model.phi);
  if (roots.size() != model.phi.size()) return false;
  if (!model.spec) {
    // Without a spec, cluster nearby roots and test each centroid.
    std::vector<bool> used(roots.size(), false);
    for (std::size_t i = 0; i < roots.size(); ++i) {
      if (used[i]) continue;
      std::complex<double> sum = 0.0;
      std::size_t count = 0;
      for (std::size_t j = i; j < roots.size(); ++j) {
        if (!used[j] && std::abs(roots[j] - roots[i]) < cluster_tol) {
          used[j] = true;
          sum += roots[j];
          ++count;
        }
      }
      if (std::abs(std::abs(sum / static_cast<double>(count)) - 1.0) > tol) return false;
    }
    return true;
  }
  const auto expected = spec_roots(*model.spec);
  if (expected.size() != roots.size()) return false;
  std::vector<bool> used(roots.size(), false);
  std::vector<bool> done(expected.size(), false);
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (done[i]) continue;
    std::size_t multiplicity = 0;
    for (std::size_t j = i; j < expected.size(); ++j)
      if (expected[j] == expected[i]) {
        done[j] = true;
        ++multiplicity;
      }
    // the multiplicity nearest unused numeric roots
    std::complex<double> sum = 0.0;
    for (std::size_t k = 0; k < multiplicity; ++k) {
      std::size_t best = roots.size();
      double best_dist = HUGE_VAL;
      for (std::size_t j = 0; j < roots.size(); ++j)
        if (!used[j] && std::abs(roots[j] - expected[i]) < best_dist) {
          best = j;
          best_dist = std::abs(roots[j] - expected[i]);
        }
      if (best == roots.size() || best_dist > std::max(cluster_tol, 1e-3)) return false;
      used[best] = true;
      sum += roots[best];
    }
    const auto centroid = sum / static_cast<double>(multiplicity);
    if (std::abs(centroid - expected[i]) > cluster_tol) return false;
    if (std::abs(std::abs(centroid) - 1.0) > tol) return false;
  }
  return true;
}

double TimeSeries::at(long t) const {
  if (t >= 1 && static_cast<std::size_t>(t) <= values.size()) return values[static_cast<std::size_t>(t - 1)];
  const long offset = static_cast<long>(presample.size()) - 1 + t;
  if (t <= 0 && offset >= 0) return presample[static_cast<std::size_t>(offset)];
  if (t == 0) return 0.0;
  throw std::out_of_range("time index outside the stored series");
}

std::string TimeSeries::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  const bool with_eps = innovations.has_value() && innovations->size() == values.size();
  os << (with_eps ? "t,x,eps\n" : "t,x\n");
  os << 0 << ',' << at(0) << (with_eps ? ",\n" : "\n");
  for (std::size_t t = 1; t <= values.size(); ++t) {
    os << t << ',' << values[t - 1];
    if (with_eps) os << ',' << (*innovations)[t - 1];
    os << '\n';
  }
  return os.str();
}

TimeSeries TimeSeries::from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("empty series file");
  const bool with_eps = line.find("eps") != std::string::npos;
  TimeSeries series;
  std::vector<double> eps;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(row, field, ',')) fields.push_back(field);
    if (fields.size() < 2) throw std::invalid_argument("malformed series row: " + line);
    const long t = std::stol(fields[0]);
    const double x = std::stod(fields[1]);
    if (t <= 0) {
      series.presample.push_back(x);
      continue;
    }
    series.values.push_back(x);
    if (with_eps && fields.size() >= 3 && !fields[2].empty()) eps.push_back(std::stod(fields[2]));
  }
  if (with_eps && eps.size() == series.values.size()) series.innovations = std::move(eps);
  return series;
}

TimeSeries simulate_ar(const ARModel& model, const std::vector<double>& innovations,
                       const std::vector<double>& warm_start) {
  const std::size_t p = model.order();
  if (p == 0) throw std::invalid_argument("model must have order p >= 1");
  if (!warm_start.empty() && warm_start.size() != p)
    throw std::invalid_argument("warm start must hold exactly p values");
  TimeSeries series;
  series.presample = warm_start.empty() ? std::vector<double>(p, 0.0) : warm_start;
  series.values.resize(innovations.size());
  // history = presample followed by the generated values
  std::vector<double> history(series.presample);
  history.reserve(p + innovations.size());
  for (std::size_t t = 0; t < innovations.size(); ++t) {
    double x = innovations[t];
    for (std::size_t i = 1; i <= p; ++i) x += model.phi[i - 1] * history[history.size() - i];
    history.push_back(x);
    series.values[t] = x;
  }
  series.innovations = innovations;
  series.model = model;
  return series;
}

TimeSeries simulate_from_rest(const ARModel& model, const std::vector<double>& eps) {
  std::vector<double> shocks(model.order(), 0.0);
  shocks.insert(shocks.end(), eps.begin(), eps.end());
  return simulate_ar(model, shocks);
}

std::vector<double> apply_lag_polynomial(const std::vector<double>& coefficients,
                                         const std::vector<double>& series,
                                         const std::vector<double>& presample) {
  std::vector<double> out(series.size(), 0.0);
  const long pre = static_cast<long>(presample.size());
  for (std::size_t t = 0; t < series.size(); ++t) {
    double acc = 0.0;
    for (std::size_t k = 0; k < coefficients.size(); ++k) {
      const long idx = static_cast<long>(t) - static_cast<long>(k);
      double x = 0.0;
      if (idx >= 0)
        x = series[static_cast<std::size_t>(idx)];
      else if (pre + idx >= 0)
        x = presample[static_cast<std::size_t>(pre + idx)];
      acc += coefficients[k] * x;
    }
    out[t] = acc;
  }
  return out;
}

Components component_filters(const TimeSeries& series, const RootSpec& spec) {
  spec.validate();
  const std::size_t p = spec.order();
  if (series.model && series.model->order() != p)
    throw std::invalid_argument("series model order does not match the root spec");
  if (series.size() <= p) throw std::invalid_argument("series must be longer than the model order");
  Components out;
  if (spec.r > 0)
    out.u = apply_lag_polynomial(root_factor_polynomial(0, spec.s, spec.pairs), series.values,
                                 series.presample);
  if (spec.s > 0)
    out.v = apply_lag_polynomial(root_factor_polynomial(spec.r, 0, spec.pairs), series.values,
                                 series.presample);
  for (std::size_t k = 0; k < spec.pairs.size(); ++k) {
    std::vector<ComplexPair> others;
    for (std::size_t j = 0; j < spec.pairs.size(); ++j)
      if (j != k) others.push_back(spec.pairs[j]);
    out.w.push_back(apply_lag_polynomial(root_factor_polynomial(spec.r, spec.s, others),
                                         series.values, series.presample));
  }
  return out;
}

std::vector<std::vector<double>> difference_stack(const std::vector<double>& eps,
                                                  std::size_t multiplicity, RealRoot root) {
  if (multiplicity == 0) throw std::invalid_argument("multiplicity must be at least 1");
  const std::vector<double> factor = root == RealRoot::Plus ? std::vector<double>{1.0, -1.0}
                                                            : std::vector<double>{1.0, 1.0};
  std::vector<std::vector<double>> stack;
  std::vector<double> current = eps;
  for (std::size_t j = 0; j < multiplicity; ++j) {
    current = invert_filter(factor, current);
    stack.push_back(current);
  }
  return stack;
}

std::vector<std::vector<double>> complex_stack(const std::vector<double>& eps, std::size_t d,
                                               double theta) {
  if (d == 0) throw std::invalid_argument("multiplicity must be at least 1");
  if (!(theta > 0.0 && theta < std::numbers::pi))
    throw std::invalid_argument("theta must lie in (0, pi)");
  const std::vector<double> factor{1.0, -2.0 * std::cos(theta), 1.0};
  std::vector<std::vector<double>> stack;
  std::vector<double> current = eps;
  for (std::size_t j = 0; j < d; ++j) {
    current = invert_filter(factor, current);
    stack.push_back(current);
  }
  return stack;
}

}  // namespace uar
