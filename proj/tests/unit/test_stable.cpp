#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "doctest.h"
#include "uar/stable.hpp"
#include "uar/statistics.hpp"

using namespace uar;

namespace {

constexpr double kPi = 3.14159265358979323846;

// Gil-Pelaez inversion of exp(-|s u|^alpha): P(|X| > x) = 1 - (2/pi) int sin(ux)/u phi(u) du.
double gil_pelaez_abs_tail(double alpha, double scale, double x) {
  const double upper = std::pow(45.0, 1.0 / alpha) / scale;
  auto f = [&](double u) {
    if (u == 0.0) return x * 1.0;
    return std::sin(u * x) / u * std::exp(-std::pow(scale * u, alpha));
  };
  double err = 0.0;
  const double integral =
      boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, upper, 25, 1e-13, &err);
  return 1.0 - 2.0 / kPi * integral;
}

std::vector<double> draw(const InnovationSpec& spec, std::size_t n, std::uint64_t seed) {
  RandomStream rng(seed);
  return sample_innovations(spec, n, rng);
}

double fraction_above(const std::vector<double>& x, double level) {
  return static_cast<double>(std::count_if(x.begin(), x.end(), [&](double v) { return std::abs(v) > level; })) /
         static_cast<double>(x.size());
}

}  // namespace

TEST_SUITE("stable") {
  TEST_CASE("alpha = 2 is Gaussian with variance 2 scale^2") {
    const auto x = draw(InnovationSpec::exact(2.0, 1.0 / std::sqrt(2.0)), 100000, 11);
    const double v = stats::variance(x);
    CHECK(std::abs(v - 1.0) < 3.0 * std::sqrt(2.0 / 1e5));
  }

  TEST_CASE("alpha = 1 is standard Cauchy") {
    const auto x = draw(InnovationSpec::exact(1.0), 100000, 12);
    const auto ks = stats::ks_one_sample(x, [](double v) { return 0.5 + std::atan(v) / kPi; });
    CHECK(ks.p_value > 0.01);
  }

  TEST_CASE("alpha = 1.3 tail follows the integrated stable tail") {
    const double alpha = 1.3;
    const auto spec = InnovationSpec::exact(alpha);
    // the library tail against an independent inversion of the characteristic function
    for (double x : {0.5, 2.0, 10.0, 40.0}) {
      CHECK(abs_tail_probability(spec, x) == doctest::Approx(gil_pelaez_abs_tail(alpha, 1.0, x)).epsilon(1e-6));
    }
    // x^alpha P(|e| > x) settles at the Zolotarev constant 2 Gamma(alpha) sin(pi alpha / 2) / pi
    const double c = 2.0 * std::tgamma(alpha) * std::sin(kPi * alpha / 2.0) / kPi;
    CHECK(std::pow(100.0, alpha) * gil_pelaez_abs_tail(alpha, 1.0, 100.0) == doctest::Approx(c).epsilon(0.01));
    const auto e = draw(spec, 100000, 13);
    for (double x : {10.0, 20.0, 50.0, 100.0}) {
      const double p = gil_pelaez_abs_tail(alpha, 1.0, x);
      const double se = std::sqrt(p * (1.0 - p) / 1e5);
      CHECK(std::abs(fraction_above(e, x) - p) < 3.5 * se);
    }
  }

  TEST_CASE("Pareto tail family") {
    const auto spec = InnovationSpec::pareto(1.3);
    const auto x = draw(spec, 100000, 14);
    const double p10 = std::pow(10.0, -1.3);
    CHECK(std::abs(fraction_above(x, 10.0) - p10) < 3.0 * std::sqrt(p10 * (1 - p10) / 1e5));
    for (double level : {2.0, 5.0}) {
      const double p = std::pow(level, -1.3);
      CHECK(std::abs(fraction_above(x, level) - p) < 3.0 * std::sqrt(p * (1 - p) / 1e5));
    }
    std::vector<double> ax(x.size());
    std::transform(x.begin(), x.end(), ax.begin(), [](double v) { return std::abs(v); });
    CHECK(stats::median(ax) == doctest::Approx(std::pow(2.0, 1.0 / 1.3)).epsilon(0.01));

    const auto small = draw(InnovationSpec::pareto(0.5), 10, 15);
    for (double v : small) CHECK(std::abs(v) >= 1.0);

    CHECK_THROWS_AS(InnovationSpec::pareto(2.0).validate(), std::domain_error);
  }

  TEST_CASE("symmetry and determinism") {
    const auto spec = InnovationSpec::exact(1.7);
    const auto a = draw(spec, 100000, 16);
    const auto b = draw(spec, 100000, 16);
    CHECK(a == b);
    double sign_sum = 0.0;
    for (double v : a) sign_sum += v > 0 ? 1.0 : -1.0;
    CHECK(std::abs(sign_sum / 1e5) < 3.0 / std::sqrt(1e5));
    CHECK_THROWS_AS(InnovationSpec::exact(2.5).validate(), std::domain_error);
    CHECK_THROWS_AS(InnovationSpec::exact(1.0, -1.0).validate(), std::domain_error);
  }

  TEST_CASE("norming constants") {
    CHECK(norming_constant(InnovationSpec::pareto(1.3), 100) == doctest::Approx(std::pow(100.0, 1.0 / 1.3)));
    CHECK(norming_constant(InnovationSpec::pareto(1.3), 100) == doctest::Approx(34.55).epsilon(1e-3));
    CHECK(norming_constant(InnovationSpec::pareto(0.5), 4) == doctest::Approx(16.0));

    // bisection on the Cauchy tail 1 - (2/pi) arctan(x) = 1/1000
    double lo = 1.0, hi = 1e6;
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (lo + hi);
      (1.0 - 2.0 / kPi * std::atan(mid) > 1e-3 ? lo : hi) = mid;
    }
    CHECK(norming_constant(InnovationSpec::exact(1.0), 1000) == doctest::Approx(lo).epsilon(1e-3));

    for (const auto& spec : {InnovationSpec::exact(0.7), InnovationSpec::exact(1.3), InnovationSpec::pareto(1.7)}) {
      double prev = 0.0;
      for (std::size_t n : {2u, 3u, 10u, 100u, 1000u, 100000u}) {
        const double a = norming_constant(spec, n);
        CHECK(a >= prev);
        prev = a;
      }
      CHECK(norming_constant(spec, 1000000) > 10.0 * norming_constant(spec, 1000) * 0.1);
    }
    CHECK(norming_constant(InnovationSpec::exact(2.0), 400) == doctest::Approx(std::sqrt(800.0)));
  }

  TEST_CASE("series dispersion constant") {
    CHECK(series_dispersion_constant(1.0) == doctest::Approx(kPi / 2.0));
    CHECK(series_dispersion_constant(0.5) == doctest::Approx(std::cos(kPi / 4) * std::sqrt(kPi)));
    CHECK(series_dispersion_constant(0.5) == doctest::Approx(1.2533).epsilon(1e-4));
    // both sides of alpha = 1, evaluated from the Gamma-function branch directly
    for (double a : {1.0 - 1e-4, 1.0 + 1e-4}) {
      const double direct = boost::math::tgamma(1.0 - a) * std::cos(kPi * a / 2.0);
      CHECK(series_dispersion_constant(a) == doctest::Approx(direct).epsilon(1e-9));
      CHECK(std::abs(direct - kPi / 2.0) < 1e-3);
    }
    CHECK_THROWS_AS(series_dispersion_constant(2.0), std::domain_error);
  }

  TEST_CASE("LePage paths") {
    const auto grid = uniform_grid(999);
    SUBCASE("alpha = 2 is Brownian: Var S(1) = 1") {
      std::vector<double> end;
      for (std::uint64_t k = 0; k < 10000; ++k)
        end.push_back(lepage_path(2.0, StableKind::S, grid, 100, RandomStream(21).derive(k)).values.back());
      CHECK(std::abs(stats::variance(end) - 1.0) < 3.0 * std::sqrt(2.0 / 1e4));
    }
    SUBCASE("starts at zero") {
      for (double a : {0.7, 1.3, 1.7, 2.0}) {
        const auto p = lepage_path(a, StableKind::S, grid, 1000, RandomStream(22));
        CHECK(p.values.front() == 0.0);
        CHECK(p.values.size() == grid.size());
      }
    }
    SUBCASE("prefix-stable truncation") {
      const auto a = draw_lepage_jumps(1.3, 100, RandomStream(23));
      const auto b = draw_lepage_jumps(1.3, 200, RandomStream(23));
      for (std::size_t k = 0; k < 100; ++k) {
        CHECK(a.size[k] == b.size[k]);
        CHECK(a.location[k] == b.location[k]);
      }
    }
    SUBCASE("piecewise constant between jumps for alpha < 2") {
      // five arrivals: the path can move on at most five grid intervals
      const auto p = lepage_path(0.8, StableKind::S, grid, 5, RandomStream(24), HUGE_VAL);
      std::size_t moves = 0;
      for (std::size_t i = 1; i < p.values.size(); ++i) moves += p.values[i] != p.values[i - 1];
      CHECK(moves >= 1);
      CHECK(moves <= 5);
    }
    SUBCASE("short truncation is reported, not fatal") {
      const auto p = lepage_path(1.3, StableKind::S, grid, 3, RandomStream(25));
      CHECK(p.truncation_warning);
      CHECK_FALSE(p.diagnostic.empty());
    }
  }

  TEST_CASE("bivariate process T") {
    const double theta = kPi / 4.0;
    const std::vector<double> g{0.0, 1.0};
    SUBCASE("starts at the origin") {
      const auto [t1, t2] = bivariate_stable_T(theta, 1.3, g, 1000, RandomStream(31));
      CHECK(t1.values.front() == 0.0);
      CHECK(t2.values.front() == 0.0);
    }
    SUBCASE("characteristic function at s = (1, 0)") {
      const double alpha = 1.3;
      const std::size_t reps = 20000;
      double sum = 0.0, sum2 = 0.0;
      for (std::size_t k = 0; k < reps; ++k) {
        const auto [t1, t2] = bivariate_stable_T(theta, alpha, g, 5000, RandomStream(32).derive(k));
        const double c = std::cos(t1.values.back());
        sum += c;
        sum2 += c * c;
      }
      const double mean = sum / reps;
      const double se = std::sqrt((sum2 / reps - mean * mean) / reps);
      auto f = [&](double u) { return std::pow(std::abs(std::cos(theta * u)), alpha); };
      const double integral = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, 0.0, 1.0);
      const double target = std::exp(-series_dispersion_constant(alpha) * integral);
      CHECK(std::abs(mean - target) < 0.02 * target + 3.0 * se);
    }
    SUBCASE("alpha = 2: Var T1(1) = int cos^2") {
      std::vector<double> end;
      for (std::uint64_t k = 0; k < 10000; ++k) {
        const auto [t1, t2] = bivariate_stable_T(theta, 2.0, uniform_grid(200), 10, RandomStream(33).derive(k));
        end.push_back(t1.values.back());
      }
      const double target = 0.5 + std::sin(2.0 * theta) / (4.0 * theta);
      CHECK(std::abs(stats::variance(end) - target) < 3.0 * target * std::sqrt(2.0 / 1e4));
    }
  }
}
