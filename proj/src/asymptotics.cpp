#include "uar/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace uar {

namespace {

constexpr double kPi = std::numbers::pi;

double binom(std::size_t n, std::size_t k) {
  double out = 1.0;
  for (std::size_t i = 1; i <= k; ++i) out = out * static_cast<double>(n - k + i) / static_cast<double>(i);
  return out;
}

std::vector<double> cumulative_trapezoid(const std::vector<double>& f, double h) {
  std::vector<double> out(f.size(), 0.0);
  for (std::size_t i = 1; i < f.size(); ++i) out[i] = out[i - 1] + 0.5 * h * (f[i - 1] + f[i]);
  return out;
}

double trapezoid_product(const std::vector<double>& a, const std::vector<double>& b, double h) {
  double acc = 0.0;
  for (std::size_t i = 1; i < a.size(); ++i) acc += 0.5 * h * (a[i - 1] * b[i - 1] + a[i] * b[i]);
  return acc;
}

// Left-point sum of a dB.
double ito_sum(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < a.size(); ++i) acc += a[i] * (b[i + 1] - b[i]);
  return acc;
}

double component_at(const std::vector<double>& c, long t) {
  return t >= 1 ? c[static_cast<std::size_t>(t - 1)] : 0.0;
}

void solve_sample(LimitLawSample& s, double max_condition) {
  const double cond = condition_number(s.matrix);
  if (!std::isfinite(cond) || cond > max_condition) {
    s.singular = true;
    std::ostringstream os;
    os << "condition number " << cond << " exceeds " << max_condition;
    s.diagnostic = os.str();
    s.solution = Eigen::VectorXd();
    return;
  }
  s.singular = false;
  s.diagnostic.clear();
  s.solution = s.matrix.fullPivLu().solve(s.vector);
}

void check_moments(const LossMoments& m) {
  if (!(m.e_psi2 >= 0.0) || !std::isfinite(m.e_psi2)) throw std::domain_error("E psi^2 must be finite");
  if (!std::isfinite(m.e_psi_prime)) throw std::domain_error("E psi' must be finite");
  if (!(std::abs(m.corr_eps_psi) <= 1.0)) throw std::domain_error("corr(e, psi) must lie in [-1, 1]");
}

void check_options(const LimitOptions& o) {
  if (o.mesh < 2) throw std::invalid_argument("mesh must be at least 2");
  if (o.truncation < 1) throw std::invalid_argument("truncation must be at least 1");
}

}  // namespace

LossMoments loss_moments(const LossFunction& loss, const InnovationSpec& spec) {
  spec.validate();
  const bool gaussian = spec.family == InnovationFamily::ExactSaS && spec.alpha == 2.0;
  const double sd = gaussian ? std::sqrt(2.0) * spec.scale : HUGE_VAL;
  LossMoments out;
  if (loss.knots.empty()) {
    if (loss.name != "quadratic")
      throw std::invalid_argument("moments need a bounded score with knots or the quadratic loss");
    if (!gaussian) throw std::domain_error("the quadratic score has infinite variance for alpha < 2");
    out.e_psi2 = sd * sd;
    out.e_psi_prime = 1.0;
    out.corr_eps_psi = 1.0;
    return out;
  }
  using boost::math::quadrature::gauss_kronrod;
  std::vector<double> cuts{0.0};
  if (spec.family == InnovationFamily::SymmetricPareto) cuts.push_back(spec.scale);
  for (double k : loss.knots) cuts.push_back(k);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  const double last = cuts.back();

  auto integrate = [&](auto g) {
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
      acc += gauss_kronrod<double, 61>::integrate(
          [&](double x) { return g(x) * density(spec, x); }, cuts[i], cuts[i + 1], 12, 1e-12);
    return 2.0 * acc;  // symmetric integrand
  };
  const double tail = abs_tail_probability(spec, last);
  // psi is constant beyond the last knot
  const double psi_far = loss.psi(2.0 * last + 1.0);
  const double psi_prime_far = loss.psi_prime(2.0 * last + 1.0);
  out.e_psi2 = integrate([&](double x) { const double v = loss.psi(x); return v * v; }) + psi_far * psi_far * tail;
  out.e_psi_prime = integrate([&](double x) { return loss.psi_prime(x); }) + psi_prime_far * tail;
  if (gaussian) {
    // E[|e|; |e| > last] for N(0, sd^2)
    const double abs_tail_mean = 2.0 * sd / std::sqrt(2.0 * kPi) * std::exp(-last * last / (2.0 * sd * sd));
    const double e_eps_psi = integrate([&](double x) { return x * loss.psi(x); }) + psi_far * abs_tail_mean;
    out.corr_eps_psi = out.e_psi2 > 0.0 ? e_eps_psi / (sd * std::sqrt(out.e_psi2)) : 0.0;
    out.corr_eps_psi = std::clamp(out.corr_eps_psi, -1.0, 1.0);
  }
  return out;
}

PartialSumBundle partial_sums(const std::vector<double>& eps, const LossFunction& loss, double a_n,
                              double e_psi_prime, std::size_t grid_size, std::optional<double> theta) {
  if (eps.empty()) throw std::invalid_argument("innovations must be non-empty");
  if (grid_size < 1) throw std::invalid_argument("grid size must be at least 1");
  if (!(a_n > 0.0)) throw std::domain_error("a_n must be positive");
  const std::size_t n = eps.size();
  const double root_n = std::sqrt(static_cast<double>(n));
  PartialSumBundle b;
  b.grid.resize(grid_size + 1);
  const bool with_theta = theta.has_value();
  auto resize = [&](std::vector<double>& v) { v.assign(grid_size + 1, 0.0); };
  resize(b.s);
  resize(b.s1);
  resize(b.w);
  resize(b.v);
  if (with_theta) {
    resize(b.t1);
    resize(b.t2);
    resize(b.r1);
    resize(b.r2);
  }
  double s = 0, s1 = 0, w = 0, v = 0, t1 = 0, t2 = 0, r1 = 0, r2 = 0;
  std::size_t k = 0;  // number of terms accumulated
  for (std::size_t i = 0; i <= grid_size; ++i) {
    b.grid[i] = static_cast<double>(i) / static_cast<double>(grid_size);
    const auto upto = static_cast<std::size_t>(std::floor(static_cast<double>(n) * b.grid[i] + 1e-9));
    for (; k < std::min(upto, n); ++k) {
      const double e = eps[k];
      const double idx = static_cast<double>(k + 1);
      const double psi = loss.psi(e);
      s += e;
      s1 += ((k + 1) % 2 == 0 ? e : -e);
      w += psi;
      v += loss.psi_prime(e) - e_psi_prime;
      if (with_theta) {
        t1 += std::cos(idx * *theta) * e;
        t2 += std::sin(idx * *theta) * e;
        r1 += std::sin((idx - 1.0) * *theta) * psi;
        r2 += std::cos((idx - 1.0) * *theta) * psi;
      }
    }
    b.s[i] = s / a_n;
    b.s1[i] = s1 / a_n;
    b.w[i] = w / root_n;
    b.v[i] = v / root_n;
    if (with_theta) {
      b.t1[i] = t1 / a_n;
      b.t2[i] = t2 / a_n;
      b.r1[i] = r1 / root_n;
      b.r2[i] = r2 / root_n;
    }
  }
  return b;
}

Eigen::MatrixXd binomial_matrix(std::size_t r, bool alternating) {
  if (r == 0) throw std::invalid_argument("size must be at least 1");
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(r));
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j <= i; ++j)
      c(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          (alternating && j % 2 == 1 ? -1.0 : 1.0) * binom(i, j);
  return c;
}

Eigen::MatrixXd complex_basis_matrix(std::size_t d, double theta) {
  if (d == 0) throw std::invalid_argument("multiplicity must be at least 1");
  if (!(theta > 0.0 && theta < kPi)) throw std::domain_error("theta must lie in (0, pi)");
  const auto size = static_cast<Eigen::Index>(2 * d);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(size, size);
  for (std::size_t j = 1; j <= d; ++j) {
    const auto poly = root_factor_polynomial(0, 0, {ComplexPair{theta, d - j}});
    const auto row = static_cast<Eigen::Index>(2 * (j - 1));
    for (std::size_t k = 0; k < poly.size(); ++k) {
      m(row, static_cast<Eigen::Index>(k)) = poly[k];
      m(row + 1, static_cast<Eigen::Index>(k + 1)) = poly[k];
    }
  }
  return m;
}

Eigen::MatrixXd normalizer_J(std::size_t r, std::size_t n, double a_n) {
  Eigen::MatrixXd c = binomial_matrix(r, true);
  const double dn = static_cast<double>(n);
  for (std::size_t i = 0; i < r; ++i)
    c.row(static_cast<Eigen::Index>(i)) /= std::pow(dn, static_cast<double>(r - i) - 0.5) * a_n;
  return c;
}

Eigen::MatrixXd normalizer_K(std::size_t s, std::size_t n, double a_n) {
  Eigen::MatrixXd c = binomial_matrix(s, false);
  const double dn = static_cast<double>(n);
  for (std::size_t i = 0; i < s; ++i)
    c.row(static_cast<Eigen::Index>(i)) /= std::pow(dn, static_cast<double>(s - i) - 0.5) * a_n;
  return c;
}

Eigen::MatrixXd normalizer_L(std::size_t d, double theta, std::size_t n, double a_n) {
  Eigen::MatrixXd m = complex_basis_matrix(d, theta);
  const double dn = static_cast<double>(n);
  for (std::size_t j = 1; j <= d; ++j) {
    const double scale = std::pow(dn, (2.0 * static_cast<double>(j) - 1.0) / 2.0) * a_n;
    m.row(static_cast<Eigen::Index>(2 * j - 2)) /= scale;
    m.row(static_cast<Eigen::Index>(2 * j - 1)) /= scale;
  }
  return m;
}

std::string LimitLawSample::label() const {
  std::ostringstream os;
  switch (kind) {
    case LimitCase::PlusOne: os << "root+1^" << multiplicity; break;
    case LimitCase::MinusOne: os << "root-1^" << multiplicity; break;
    case LimitCase::Complex: os << "complex(" << theta << ")^" << multiplicity; break;
  }
  return os.str();
}

double condition_number(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return HUGE_VAL;
  if (!m.allFinite()) return HUGE_VAL;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& sv = svd.singularValues();
  const double smallest = sv(sv.size() - 1);
  if (!(smallest > 0.0)) return HUGE_VAL;
  return sv(0) / smallest;
}

FiniteNStatistic finite_n_statistic(const TimeSeries& series, const RootSpec& spec,
                                    const LossFunction& loss, double a_n) {
  spec.validate();
  if (!series.innovations || series.innovations->size() != series.size())
    throw std::invalid_argument("finite-n statistic needs the innovation trace");
  const std::size_t p = spec.order();
  const std::size_t n = series.size();
  const Components comp = component_filters(series, spec);
  const auto& eps = *series.innovations;

  struct Block {
    LimitCase kind;
    std::size_t mult;
    double theta;
    const std::vector<double>* component;
    Eigen::MatrixXd normalizer;
    std::size_t offset;
  };
  std::vector<Block> blocks;
  std::size_t offset = 0;
  if (spec.r > 0) {
    blocks.push_back({LimitCase::PlusOne, spec.r, 0.0, &comp.u, normalizer_J(spec.r, n, a_n), offset});
    offset += spec.r;
  }
  if (spec.s > 0) {
    blocks.push_back({LimitCase::MinusOne, spec.s, 0.0, &comp.v, normalizer_K(spec.s, n, a_n), offset});
    offset += spec.s;
  }
  for (std::size_t k = 0; k < spec.pairs.size(); ++k) {
    const auto& pair = spec.pairs[k];
    blocks.push_back({LimitCase::Complex, pair.multiplicity, pair.theta, &comp.w[k],
                      normalizer_L(pair.multiplicity, pair.theta, n, a_n), offset});
    offset += 2 * pair.multiplicity;
  }

  const auto dim = static_cast<Eigen::Index>(p);
  Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::VectorXd score = Eigen::VectorXd::Zero(dim);
  Eigen::VectorXd z(dim);
  for (std::size_t t = p + 1; t <= n; ++t) {
    for (const auto& b : blocks) {
      const auto width = b.normalizer.cols();
      Eigen::VectorXd lags(width);
      for (Eigen::Index i = 0; i < width; ++i)
        lags(i) = component_at(*b.component, static_cast<long>(t) - 1 - static_cast<long>(i));
      z.segment(static_cast<Eigen::Index>(b.offset), width) = b.normalizer * lags;
    }
    const double e = eps[t - 1];
    hess.noalias() += loss.psi_prime(e) * z * z.transpose();
    score += loss.psi(e) * z;
  }

  FiniteNStatistic out;
  out.full_matrix = hess;
  out.full_vector = score;
  const double cond = condition_number(hess);
  if (std::isfinite(cond) && cond < 1e14) out.full_solution = hess.fullPivLu().solve(score);
  for (const auto& b : blocks) {
    const auto o = static_cast<Eigen::Index>(b.offset);
    const auto w = b.normalizer.cols();
    LimitLawSample s;
    s.kind = b.kind;
    s.multiplicity = b.mult;
    s.theta = b.theta;
    s.matrix = hess.block(o, o, w, w);
    s.vector = score.segment(o, w);
    solve_sample(s, 1e14);
    if (s.singular) ++out.singular_blocks;
    out.blocks.push_back(std::move(s));
    for (Eigen::Index i = 0; i < dim; ++i)
      for (Eigen::Index j = o; j < o + w; ++j)
        if (i < o || i >= o + w) out.cross_block_max = std::max(out.cross_block_max, std::abs(hess(i, j)));
  }
  return out;
}

LimitLawSample limit_sample_real_root(std::size_t r, double alpha, const LossMoments& moments,
                                      const RandomStream& stream, RealRoot sign,
                                      const LimitOptions& options) {
  if (r == 0) throw std::invalid_argument("multiplicity must be at least 1");
  if (!(alpha > 0.0 && alpha <= 2.0)) throw std::domain_error("alpha must lie in (0, 2]");
  check_moments(moments);
  check_options(options);
  const std::size_t mesh = options.mesh;
  const double h = 1.0 / static_cast<double>(mesh);
  const double root_psi2 = std::sqrt(moments.e_psi2);
  const double rho = alpha == 2.0 ? moments.corr_eps_psi : 0.0;

  LimitLawSample out;
  out.kind = sign == RealRoot::Plus ? LimitCase::PlusOne : LimitCase::MinusOne;
  out.multiplicity = r;
  for (std::size_t attempt = 0; attempt <= options.max_resamples; ++attempt) {
    const RandomStream draw = attempt == 0 ? stream : stream.derive({0xbadull, attempt});
    // S for root +1, the independent copy S1 for root -1
    const RandomStream path_stream = draw.derive(sign == RealRoot::Plus ? 0 : 1);
    const auto s = stable_path_on_mesh(alpha, mesh, options.truncation, path_stream);
    auto w = brownian_on_mesh(mesh, draw.derive(5));
    if (rho != 0.0) {
      // at alpha = 2 the path is its own Brownian driver
      const double c = std::sqrt(std::max(0.0, 1.0 - rho * rho));
      for (std::size_t i = 0; i <= mesh; ++i) w[i] = rho * s[i] + c * w[i];
    }
    std::vector<std::vector<double>> integrated{s};  // S_1 .. S_r
    for (std::size_t j = 1; j < r; ++j) integrated.push_back(cumulative_trapezoid(integrated.back(), h));

    const auto dim = static_cast<Eigen::Index>(r);
    out.matrix.resize(dim, dim);
    out.vector.resize(dim);
    const double sgn = sign == RealRoot::Plus ? 1.0 : -1.0;
    for (std::size_t i = 0; i < r; ++i) {
      const auto& si = integrated[r - 1 - i];
      for (std::size_t j = 0; j <= i; ++j) {
        const double v = moments.e_psi_prime * trapezoid_product(si, integrated[r - 1 - j], h);
        out.matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
        out.matrix(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
      }
      out.vector(static_cast<Eigen::Index>(i)) = sgn * root_psi2 * ito_sum(si, w);
    }
    out.resamples = attempt;
    solve_sample(out, options.max_condition);
    if (!out.singular) return out;
  }
  return out;
}

LimitLawSample limit_sample_complex(double theta, std::size_t d, double alpha,
                                    const LossMoments& moments, const RandomStream& stream,
                                    const LimitOptions& options) {
  if (d == 0) throw std::invalid_argument("multiplicity must be at least 1");
  if (!(theta > 0.0 && theta < kPi)) throw std::domain_error("theta must lie in (0, pi)");
  if (!(alpha > 0.0 && alpha <= 2.0)) throw std::domain_error("alpha must lie in (0, 2]");
  check_moments(moments);
  check_options(options);
  const std::size_t mesh = options.mesh;
  const double h = 1.0 / static_cast<double>(mesh);
  const double st = std::sin(theta);
  const double ct = std::cos(theta);
  const double cot = ct / st;
  const double root_psi2 = std::sqrt(moments.e_psi2);
  const double rho = alpha == 2.0 ? moments.corr_eps_psi : 0.0;

  LimitLawSample out;
  out.kind = LimitCase::Complex;
  out.multiplicity = d;
  out.theta = theta;
  for (std::size_t attempt = 0; attempt <= options.max_resamples; ++attempt) {
    const RandomStream draw = attempt == 0 ? stream : stream.derive({0xbadull, attempt});
    auto [t1, t2] = bivariate_on_mesh(theta, alpha, mesh, options.truncation, draw.derive(3),
                                      AngleMode::Lattice);
    const auto z1 = brownian_on_mesh(mesh, draw.derive(6));
    const auto z2 = brownian_on_mesh(mesh, draw.derive(7));
    std::vector<double> r1(mesh + 1), r2(mesh + 1);
    const double c = std::sqrt(std::max(0.0, 1.0 - rho * rho));
    for (std::size_t i = 0; i <= mesh; ++i) {
      // independent parts carry variance E psi^2 / 2 per unit time
      r1[i] = root_psi2 * (rho * (ct * t2[i] - st * t1[i]) + c * std::sqrt(0.5) * z1[i]);
      r2[i] = root_psi2 * (rho * (ct * t1[i] + st * t2[i]) + c * std::sqrt(0.5) * z2[i]);
    }

    // iterated processes: P^{(0)} = T, P^{(m)} = int A P^{(m-1)}, A = [[1, -cot], [cot, 1]] / 2
    std::vector<std::pair<std::vector<double>, std::vector<double>>> levels{{t1, t2}};
    for (std::size_t m = 1; m < d; ++m) {
      const auto& [p1, p2] = levels.back();
      std::vector<double> a1(mesh + 1), a2(mesh + 1);
      for (std::size_t i = 0; i <= mesh; ++i) {
        a1[i] = 0.5 * (p1[i] - cot * p2[i]);
        a2[i] = 0.5 * (cot * p1[i] + p2[i]);
      }
      levels.emplace_back(cumulative_trapezoid(a1, h), cumulative_trapezoid(a2, h));
    }

    const auto dim = static_cast<Eigen::Index>(2 * d);
    out.matrix.resize(dim, dim);
    out.vector.resize(dim);
    const double lam = moments.e_psi_prime / (2.0 * st * st);
    for (std::size_t i = 0; i < d; ++i) {
      const auto& [p1, p2] = levels[i];
      const auto a = static_cast<Eigen::Index>(2 * i);
      for (std::size_t j = 0; j < d; ++j) {
        const auto& [q1, q2] = levels[j];
        const auto b = static_cast<Eigen::Index>(2 * j);
        const double dot = trapezoid_product(p1, q1, h) + trapezoid_product(p2, q2, h);
        const double cross = trapezoid_product(p1, q2, h) - trapezoid_product(p2, q1, h);
        out.matrix(a, b) = lam * dot;
        out.matrix(a + 1, b + 1) = lam * dot;
        out.matrix(a, b + 1) = lam * (ct * dot - st * cross);
        out.matrix(a + 1, b) = lam * (ct * dot + st * cross);
      }
      const double i11 = ito_sum(p1, r1);
      const double i22 = ito_sum(p2, r2);
      const double i12 = ito_sum(p1, r2);
      const double i21 = ito_sum(p2, r1);
      out.vector(a) = (ct * (i11 - i22) + st * (i12 + i21)) / st;
      out.vector(a + 1) = (i11 - i22) / st;
    }
    // exact symmetry (quadrature of p.q and q.p agree only to rounding)
    out.matrix = 0.5 * (out.matrix + out.matrix.transpose()).eval();
    out.resamples = attempt;
    solve_sample(out, options.max_condition);
    if (!out.singular) return out;
  }
  return out;
}

std::string to_csv_rows(const LimitLawSample& sample, std::size_t draw) {
  std::ostringstream os;
  os.precision(17);
  const std::string label = sample.label();
  for (Eigen::Index i = 0; i < sample.solution.size(); ++i)
    os << draw << ',' << label << ",solution" << i + 1 << ',' << sample.solution(i) << '\n';
  for (Eigen::Index i = 0; i < sample.vector.size(); ++i)
    os << draw << ',' << label << ",vector" << i + 1 << ',' << sample.vector(i) << '\n';
  for (Eigen::Index i = 0; i < sample.matrix.rows(); ++i)
    for (Eigen::Index j = 0; j < sample.matrix.cols(); ++j)
      os << draw << ',' << label << ",matrix" << i + 1 << j + 1 << ',' << sample.matrix(i, j) << '\n';
  return os.str();
}

}  // namespace uar
