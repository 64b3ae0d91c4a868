#include "uar/stable.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

namespace uar {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kHalfPi = std::numbers::pi / 2.0;

bool is_gaussian(double alpha) { return alpha == 2.0; }

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha <= 2.0)) throw std::domain_error("alpha must lie in (0, 2]");
}

void check_grid(std::span<const double> grid) {
  if (grid.empty()) throw std::invalid_argument("grid must not be empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] >= 0.0 && grid[i] <= 1.0)) throw std::invalid_argument("grid must lie in [0, 1]");
    if (i > 0 && !(grid[i] > grid[i - 1])) throw std::invalid_argument("grid must be increasing");
  }
}

// Zolotarev/Nolan integral representation for the standard symmetric law,
// alpha in (0, 2) \ {1}: with e = alpha / (alpha - 1) and
//   V(th) = (cos th / sin(alpha th))^e cos((alpha - 1) th) / cos th,
// g(th) = x^e V(th) is monotone on (0, pi/2), and
//   alpha > 1:  P(X > x) = (1/pi) int exp(-g)
//   alpha < 1:  P(X > x) = (1/pi) int (1 - exp(-g))
//   f(x) = alpha / (pi |alpha - 1| x) int g exp(-g).
class NolanIntegrand {
 public:
  NolanIntegrand(double alpha, double x)
      : alpha_(alpha), e_(alpha / (alpha - 1.0)), log_x_(std::log(x)) {}

  double g(double th) const {
    const double c = std::cos(th);
    const double s = std::sin(alpha_ * th);
    if (c <= 0.0) return alpha_ > 1.0 ? 0.0 : HUGE_VAL;
    if (s <= 0.0) return alpha_ > 1.0 ? HUGE_VAL : 0.0;
    const double log_v =
        (e_ - 1.0) * std::log(c) - e_ * std::log(s) + std::log(std::cos((alpha_ - 1.0) * th));
    return std::exp(e_ * log_x_ + log_v);
  }

  // The point where g crosses 1 concentrates all the mass of the integrands.
  double split_point() const {
    double lo = 0.0;
    double hi = kHalfPi;
    for (int i = 0; i < 80; ++i) {
      const double mid = 0.5 * (lo + hi);
      const bool above = g(mid) > 1.0;
      // g decreases in th when alpha > 1 and increases when alpha < 1.
      if ((alpha_ > 1.0) == above)
        lo = mid;
      else
        hi = mid;
    }
    return 0.5 * (lo + hi);
  }

 private:
  double alpha_;
  double e_;
  double log_x_;
};

template <class F>
double integrate_split(F f, double split) {
  using boost::math::quadrature::gauss_kronrod;
  double total = 0.0;
  if (split > 0.0) total += gauss_kronrod<double, 31>::integrate(f, 0.0, split, 15, 1e-12);
  if (split < kHalfPi) total += gauss_kronrod<double, 31>::integrate(f, split, kHalfPi, 15, 1e-12);
  return total;
}

// Leading terms of the tail expansion of the standard symmetric law,
// P(X > x) = (1/pi) sum_k (-1)^{k+1} Gamma(alpha k) / k! sin(k pi alpha / 2) x^{-alpha k}.
double upper_tail_series(double alpha, double x) {
  double sum = 0.0;
  double factorial = 1.0;
  for (int k = 1; k <= 4; ++k) {
    factorial *= k;
    const double term = std::tgamma(alpha * k) / factorial * std::sin(k * kPi * alpha / 2.0) *
                        std::pow(x, -alpha * k);
    sum += (k % 2 == 1 ? term : -term);
  }
  return sum / kPi;
}

// P(X > x), x >= 0, standard symmetric stable (scale 1).
double standard_upper_tail(double alpha, double x) {
  if (x <= 0.0) return 0.5;
  if (alpha == 1.0) return 0.5 - std::atan(x) / kPi;
  if (is_gaussian(alpha)) return 0.5 * std::erfc(x / 2.0);  // N(0, 2)
  if (std::pow(x, -alpha) < 1e-7) return upper_tail_series(alpha, x);
  const NolanIntegrand nolan(alpha, x);
  const double split = nolan.split_point();
  double integral = 0.0;
  if (alpha > 1.0)
    integral = integrate_split([&](double th) { return std::exp(-nolan.g(th)); }, split);
  else
    integral = integrate_split([&](double th) { return -std::expm1(-nolan.g(th)); }, split);
  return integral / kPi;
}

double standard_density(double alpha, double x) {
  x = std::abs(x);
  if (alpha == 1.0) return 1.0 / (kPi * (1.0 + x * x));
  if (is_gaussian(alpha)) return std::exp(-x * x / 4.0) / std::sqrt(4.0 * kPi);
  if (x < 1e-8) return std::tgamma(1.0 + 1.0 / alpha) / kPi;
  if (std::pow(x, -alpha) < 1e-7) {
    // derivative of the tail expansion
    double sum = 0.0;
    double factorial = 1.0;
    for (int k = 1; k <= 4; ++k) {
      factorial *= k;
      const double term = std::tgamma(alpha * k + 1.0) / factorial *
                          std::sin(k * kPi * alpha / 2.0) * std::pow(x, -alpha * k - 1.0);
      sum += (k % 2 == 1 ? term : -term);
    }
    return sum / kPi;
  }
  const NolanIntegrand nolan(alpha, x);
  const double integral = integrate_split(
      [&](double th) {
        const double g = nolan.g(th);
        return std::isfinite(g) ? g * std::exp(-g) : 0.0;
      },
      nolan.split_point());
  return alpha / (kPi * std::abs(alpha - 1.0) * x) * integral;
}

template <class BrownianSource>
std::vector<double> stable_values(double alpha, std::span<const double> grid, std::size_t truncation,
                                  const RandomStream& stream, BrownianSource brownian,
                                  double tolerance, bool* warning, std::string* diagnostic) {
  if (is_gaussian(alpha)) return brownian(stream.derive(2));

  const LePageJumps jumps = draw_lepage_jumps(alpha, truncation, stream.derive(0));
  std::vector<double> values(grid.size(), 0.0);
  for (std::size_t k = 0; k < jumps.size.size(); ++k) {
    const auto it = std::lower_bound(grid.begin(), grid.end(), jumps.location[k]);
    if (it != grid.end()) values[static_cast<std::size_t>(it - grid.begin())] += jumps.size[k];
  }
  for (std::size_t i = 1; i < values.size(); ++i) values[i] += values[i - 1];

  const double tail_sd = std::sqrt(jumps.tail_variance);
  if (alpha >= kTailCorrectionAlpha) {
    const auto correction = brownian(stream.derive(1));
    for (std::size_t i = 0; i < values.size(); ++i) values[i] += tail_sd * correction[i];
  } else {
    const double scale = std::pow(series_dispersion_constant(alpha), 1.0 / alpha);
    if (tail_sd > tolerance * scale) {
      if (warning != nullptr) *warning = true;
      if (diagnostic != nullptr) {
        std::ostringstream os;
        os << "truncated tail sd " << tail_sd << " exceeds tolerance " << tolerance
           << " x scale " << scale << "; increase truncation";
        *diagnostic = os.str();
      }
    }
  }
  return values;
}

// Per-jump unit direction for T.
std::pair<double, double> jump_direction(const LePageJumps& jumps, std::size_t k, double theta,
                                         AngleMode mode) {
  const double angle = mode == AngleMode::Continuous
                           ? theta * jumps.location[k]
                           : std::fmod(theta * static_cast<double>(jumps.lattice_index[k]), 2.0 * kPi);
  return {std::cos(angle), std::sin(angle)};
}

template <class BrownianSource>
std::pair<std::vector<double>, std::vector<double>> bivariate_values(
    double theta, double alpha, std::span<const double> grid, std::size_t truncation,
    const RandomStream& stream, AngleMode mode, BrownianSource brownian) {
  std::vector<double> t1(grid.size(), 0.0);
  std::vector<double> t2(grid.size(), 0.0);

  // Gaussian part: either the whole process (alpha = 2) or the tail correction.
  auto add_gaussian = [&](double variance_rate, const RandomStream& s) {
    const double sd = std::sqrt(variance_rate);
    if (mode == AngleMode::Lattice) {
      // isotropic: each coordinate carries half the variance
      const auto b1 = brownian(s.derive(0));
      const auto b2 = brownian(s.derive(1));
      for (std::size_t i = 0; i < grid.size(); ++i) {
        t1[i] += sd * std::sqrt(0.5) * b1[i];
        t2[i] += sd * std::sqrt(0.5) * b2[i];
      }
    } else {
      // int (cos theta u, sin theta u) dB(u), midpoint weights per cell
      const auto b = brownian(s.derive(0));
      double acc1 = 0.0;
      double acc2 = 0.0;
      double prev_t = 0.0;
      double prev_b = 0.0;
      for (std::size_t i = 0; i < grid.size(); ++i) {
        const double mid = 0.5 * (prev_t + grid[i]);
        const double db = b[i] - prev_b;
        acc1 += std::cos(theta * mid) * db;
        acc2 += std::sin(theta * mid) * db;
        t1[i] += sd * acc1;
        t2[i] += sd * acc2;
        prev_t = grid[i];
        prev_b = b[i];
      }
    }
  };

  if (is_gaussian(alpha)) {
    add_gaussian(1.0, stream.derive(2));
    return {t1, t2};
  }

  const LePageJumps jumps =
      draw_lepage_jumps(alpha, truncation, stream.derive(0), mode == AngleMode::Lattice);
  for (std::size_t k = 0; k < jumps.size.size(); ++k) {
    const auto it = std::lower_bound(grid.begin(), grid.end(), jumps.location[k]);
    if (it == grid.end()) continue;
    const auto idx = static_cast<std::size_t>(it - grid.begin());
    const auto [c, s] = jump_direction(jumps, k, theta, mode);
    t1[idx] += c * jumps.size[k];
    t2[idx] += s * jumps.size[k];
  }
  for (std::size_t i = 1; i < grid.size(); ++i) {
    t1[i] += t1[i - 1];
    t2[i] += t2[i - 1];
  }
  if (alpha >= kTailCorrectionAlpha) add_gaussian(jumps.tail_variance, stream.derive(1));
  return {t1, t2};
}

}  // namespace

InnovationSpec InnovationSpec::exact(double alpha, double scale) {
  InnovationSpec spec{alpha, InnovationFamily::ExactSaS, scale, 0.5};
  spec.validate();
  return spec;
}

InnovationSpec InnovationSpec::pareto(double alpha, double scale) {
  InnovationSpec spec{alpha, InnovationFamily::SymmetricPareto, scale, 0.5};
  spec.validate();
  return spec;
}

void InnovationSpec::validate() const {
  check_alpha(alpha);
  if (!(scale > 0.0) || !std::isfinite(scale)) throw std::domain_error("scale must be positive");
  if (p_tail != 0.5)
    throw std::domain_error("only symmetric innovations (p_tail = 1/2) are supported");
  if (family == InnovationFamily::SymmetricPareto && alpha >= 2.0)
    throw std::domain_error("the Pareto family needs alpha < 2");
}

std::string to_string(InnovationFamily family) {
  return family == InnovationFamily::ExactSaS ? "sas" : "pareto";
}

InnovationFamily parse_family(const std::string& name) {
  if (name == "sas" || name == "stable" || name == "exact") return InnovationFamily::ExactSaS;
  if (name == "pareto") return InnovationFamily::SymmetricPareto;
  throw std::invalid_argument("unknown innovation family '" + name + "'");
}

std::vector<double> sample_exact_sas(const InnovationSpec& spec, std::size_t n, RandomStream& rng) {
  spec.validate();
  if (spec.family != InnovationFamily::ExactSaS)
    throw std::invalid_argument("sample_exact_sas needs an ExactSaS spec");
  std::vector<double> out(n);
  const double a = spec.alpha;
  if (is_gaussian(a)) {
    for (auto& x : out) x = std::sqrt(2.0) * spec.scale * rng.normal();
    return out;
  }
  // Chambers-Mallows-Stuck, beta = 0
  for (auto& x : out) {
    const double v = kPi * (rng.uniform_open() - 0.5);
    const double w = rng.exponential();
    double z = 0.0;
    if (a == 1.0) {
      z = std::tan(v);
    } else {
      z = std::sin(a * v) / std::pow(std::cos(v), 1.0 / a) *
          std::pow(std::cos(v - a * v) / w, (1.0 - a) / a);
    }
    x = spec.scale * z;
  }
  return out;
}

std::vector<double> sample_pareto_tail(const InnovationSpec& spec, std::size_t n, RandomStream& rng) {
  spec.validate();
  if (spec.family != InnovationFamily::SymmetricPareto)
    throw std::invalid_argument("sample_pareto_tail needs a SymmetricPareto spec");
  std::vector<double> out(n);
  for (auto& x : out) {
    const double magnitude = std::pow(rng.uniform_open(), -1.0 / spec.alpha);
    x = spec.scale * rng.sign() * magnitude;
  }
  return out;
}

std::vector<double> sample_innovations(const InnovationSpec& spec, std::size_t n, RandomStream& rng) {
  return spec.family == InnovationFamily::ExactSaS ? sample_exact_sas(spec, n, rng)
                                                   : sample_pareto_tail(spec, n, rng);
}

double abs_tail_probability(const InnovationSpec& spec, double x) {
  spec.validate();
  if (x <= 0.0) return 1.0;
  const double z = x / spec.scale;
  if (spec.family == InnovationFamily::SymmetricPareto) return z < 1.0 ? 1.0 : std::pow(z, -spec.alpha);
  return 2.0 * standard_upper_tail(spec.alpha, z);
}

double density(const InnovationSpec& spec, double x) {
  spec.validate();
  const double z = std::abs(x) / spec.scale;
  if (spec.family == InnovationFamily::SymmetricPareto)
    return z < 1.0 ? 0.0 : 0.5 * spec.alpha * std::pow(z, -spec.alpha - 1.0) / spec.scale;
  return standard_density(spec.alpha, z) / spec.scale;
}

double cdf(const InnovationSpec& spec, double x) {
  const double half_tail = 0.5 * abs_tail_probability(spec, std::abs(x));
  return x >= 0.0 ? 1.0 - half_tail : half_tail;
}

double norming_constant(const InnovationSpec& spec, std::size_t n) {
  spec.validate();
  if (n < 1) throw std::domain_error("norming constant needs n >= 1");
  const double dn = static_cast<double>(n);
  if (spec.family == InnovationFamily::SymmetricPareto) return spec.scale * std::pow(dn, 1.0 / spec.alpha);
  if (is_gaussian(spec.alpha)) return std::sqrt(2.0 * dn) * spec.scale;
  if (n < 2) throw std::domain_error("norming constant of a continuous stable law needs n >= 2");
  if (spec.alpha == 1.0) return spec.scale * std::tan(kHalfPi * (1.0 - 1.0 / dn));

  // Solve P(|X| > x) = 1/n in log x, starting from the tail asymptote (n / K)^{1/alpha}.
  const double target = 1.0 / dn;
  auto f = [&](double log_x) { return std::log(2.0 * standard_upper_tail(spec.alpha, std::exp(log_x))) - std::log(target); };
  const double guess =
      std::log(dn / series_dispersion_constant(spec.alpha)) / spec.alpha;
  double lo = guess - 1.0;
  double hi = guess + 1.0;
  while (f(lo) < 0.0) lo -= 2.0;
  while (f(hi) > 0.0) hi += 2.0;
  boost::uintmax_t iterations = 200;
  const auto root = boost::math::tools::toms748_solve(
      f, lo, hi, boost::math::tools::eps_tolerance<double>(50), iterations);
  return spec.scale * std::exp(0.5 * (root.first + root.second));
}

double series_dispersion_constant(double alpha) {
  if (!(alpha > 0.0 && alpha < 2.0))
    throw std::domain_error("series constant is defined for alpha in (0, 2)");
  if (alpha == 1.0) return kHalfPi;
  return std::tgamma(1.0 - alpha) * std::cos(kPi * alpha / 2.0);
}

LePageJumps draw_lepage_jumps(double alpha, std::size_t truncation, RandomStream stream,
                              bool with_lattice) {
  if (!(alpha > 0.0 && alpha < 2.0)) throw std::domain_error("LePage series needs alpha in (0, 2)");
  if (truncation < 1) throw std::invalid_argument("truncation must be at least 1");
  LePageJumps jumps;
  jumps.alpha = alpha;
  jumps.size.resize(truncation);
  jumps.location.resize(truncation);
  if (with_lattice) jumps.lattice_index.resize(truncation);
  const double inv_alpha = -1.0 / alpha;
  double arrival = 0.0;
  for (std::size_t k = 0; k < truncation; ++k) {
    arrival += stream.exponential();
    const int delta = stream.sign();
    jumps.location[k] = stream.uniform();
    // lattice index is drawn from its own word so the arrival sequence is shared
    const std::uint64_t word = stream.bits();
    if (with_lattice) jumps.lattice_index[k] = static_cast<std::uint32_t>(word >> 44);
    jumps.size[k] = delta * std::pow(arrival, inv_alpha);
  }
  jumps.last_arrival = arrival;
  const double exponent = 1.0 - 2.0 / alpha;
  jumps.tail_variance = std::pow(arrival, exponent) / (2.0 / alpha - 1.0);
  return jumps;
}

std::vector<double> uniform_grid(std::size_t mesh) {
  if (mesh < 1) throw std::invalid_argument("mesh must be at least 1");
  std::vector<double> grid(mesh + 1);
  for (std::size_t i = 0; i <= mesh; ++i) grid[i] = static_cast<double>(i) / static_cast<double>(mesh);
  return grid;
}

std::vector<double> brownian_path(std::span<const double> grid, RandomStream stream) {
  check_grid(grid);
  std::vector<double> out(grid.size());
  double prev_t = 0.0;
  double value = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    value += std::sqrt(grid[i] - prev_t) * stream.normal();
    out[i] = value;
    prev_t = grid[i];
  }
  return out;
}

std::vector<double> brownian_on_mesh(std::size_t mesh, const RandomStream& stream) {
  if (mesh < 1) throw std::invalid_argument("mesh must be at least 1");
  std::size_t base = mesh;
  std::size_t levels = 0;
  while (base % 2 == 0) {
    base /= 2;
    ++levels;
  }
  std::vector<double> values(base + 1, 0.0);
  {
    RandomStream coarse = stream.derive(0);
    const double sd = std::sqrt(1.0 / static_cast<double>(base));
    for (std::size_t i = 1; i <= base; ++i) values[i] = values[i - 1] + sd * coarse.normal();
  }
  double h = 1.0 / static_cast<double>(base);
  for (std::size_t level = 1; level <= levels; ++level) {
    RandomStream fine = stream.derive(level);
    std::vector<double> refined(2 * (values.size() - 1) + 1);
    const double sd = std::sqrt(h / 4.0);
    for (std::size_t i = 0; i + 1 < values.size(); ++i) {
      refined[2 * i] = values[i];
      refined[2 * i + 1] = 0.5 * (values[i] + values[i + 1]) + sd * fine.normal();
    }
    refined.back() = values.back();
    values = std::move(refined);
    h /= 2.0;
  }
  return values;
}

LePagePath lepage_path(double alpha, StableKind kind, std::span<const double> grid,
                       std::size_t truncation, const RandomStream& stream, double tolerance) {
  check_alpha(alpha);
  check_grid(grid);
  if (truncation < 1) throw std::invalid_argument("truncation must be at least 1");
  LePagePath path;
  path.grid.assign(grid.begin(), grid.end());
  path.alpha = alpha;
  path.truncation = truncation;
  const RandomStream sub = stream.derive(kind == StableKind::S ? 0 : 1);
  path.values = stable_values(
      alpha, grid, truncation, sub, [&](RandomStream s) { return brownian_path(grid, std::move(s)); },
      tolerance, &path.truncation_warning, &path.diagnostic);
  return path;
}

std::pair<LePagePath, LePagePath> bivariate_stable_T(double theta, double alpha,
                                                      std::span<const double> grid,
                                                      std::size_t truncation,
                                                      const RandomStream& stream, AngleMode mode) {
  check_alpha(alpha);
  check_grid(grid);
  if (!(theta > 0.0 && theta < 2.0 * kPi)) throw std::domain_error("theta must lie in (0, 2 pi)");
  if (truncation < 1) throw std::invalid_argument("truncation must be at least 1");
  auto [v1, v2] = bivariate_values(theta, alpha, grid, truncation, stream.derive(3), mode,
                                   [&](RandomStream s) { return brownian_path(grid, std::move(s)); });
  LePagePath p1{std::vector<double>(grid.begin(), grid.end()), std::move(v1), alpha, truncation, false, {}};
  LePagePath p2{std::vector<double>(grid.begin(), grid.end()), std::move(v2), alpha, truncation, false, {}};
  return {std::move(p1), std::move(p2)};
}

std::vector<double> stable_path_on_mesh(double alpha, std::size_t mesh, std::size_t truncation,
                                        const RandomStream& stream) {
  check_alpha(alpha);
  const auto grid = uniform_grid(mesh);
  return stable_values(
      alpha, grid, truncation, stream, [&](const RandomStream& s) { return brownian_on_mesh(mesh, s); },
      HUGE_VAL, nullptr, nullptr);
}

std::pair<std::vector<double>, std::vector<double>> bivariate_on_mesh(
    double theta, double alpha, std::size_t mesh, std::size_t truncation,
    const RandomStream& stream, AngleMode mode) {
  check_alpha(alpha);
  const auto grid = uniform_grid(mesh);
  return bivariate_values(theta, alpha, grid, truncation, stream, mode,
                          [&](const RandomStream& s) { return brownian_on_mesh(mesh, s); });
}

std::string to_csv(const LePagePath& path) {
  std::ostringstream os;
  os.precision(17);
  os << "t,value\n";
  for (std::size_t i = 0; i < path.grid.size(); ++i) os << path.grid[i] << ',' << path.values[i] << '\n';
  return os.str();
}

}  // namespace uar
