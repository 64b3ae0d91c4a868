#include <cmath>
#include <functional>
#include <vector>

#include "doctest.h"
#include "uar/ar_model.hpp"
#include "uar/estimation.hpp"
#include "uar/loss.hpp"
#include "uar/stable.hpp"

using namespace uar;

namespace {

constexpr double kPi = 3.14159265358979323846;

TimeSeries series_of(std::vector<double> v) {
  TimeSeries s;
  s.values = std::move(v);
  return s;
}

TimeSeries sample(const RootSpec& spec, std::size_t n, std::uint64_t seed, double alpha = 1.3) {
  RandomStream rng(seed);
  return simulate_from_rest(expand_polynomial(spec), sample_innovations(InnovationSpec::exact(alpha), n - spec.order(), rng));
}

double objective(const TimeSeries& s, const LossFunction& loss, const std::vector<double>& beta) {
  return objective_and_gradient(s, beta.size(), loss, beta).first;
}

// golden-section search on a bracket known to contain the minimiser
double golden_min(const std::function<double(double)>& f, double a, double b) {
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - g * (b - a), d = a + g * (b - a);
  for (int i = 0; i < 200 && b - a > 1e-13; ++i) {
    if (f(c) < f(d)) {
      b = d;
    } else {
      a = c;
    }
    c = b - g * (b - a);
    d = a + g * (b - a);
  }
  return 0.5 * (a + b);
}

}  // namespace

TEST_SUITE("estimation") {
  TEST_CASE("Huber loss values") {
    const auto h = huber_loss(2.0);
    CHECK(h.rho(1.0) == doctest::Approx(0.5));
    CHECK(h.rho(3.0) == doctest::Approx(4.0));
    CHECK(h.rho(-3.0) == doctest::Approx(4.0));
    CHECK(h.psi(3.0) == doctest::Approx(2.0));
    CHECK(h.psi(-3.0) == doctest::Approx(-2.0));
    CHECK(h.psi(1.0) == doctest::Approx(1.0));
    CHECK(h.psi_prime(1.0) == 1.0);
    CHECK(h.psi_prime(3.0) == 0.0);
    CHECK(h.weight(0.0) == 1.0);
    CHECK(h.weight(4.0) == doctest::Approx(0.5));
    CHECK_THROWS_AS(huber_loss(0.0), std::domain_error);

    const auto sm = smoothed_huber_loss(2.0, 0.1);
    REQUIRE(sm.lipschitz_k.has_value());
    CHECK(*sm.lipschitz_k == doctest::Approx(1.0 / 0.4));
    CHECK(sm.psi_prime(2.0) == doctest::Approx(0.5));
    // psi is the integral of psi'
    const double step = 1e-4;
    double acc = 0.0;
    for (double x = step / 2; x < 3.0; x += step) acc += sm.psi_prime(x) * step;
    CHECK(acc == doctest::Approx(sm.psi(3.0)).epsilon(1e-6));

    CHECK(parse_loss("huber:5").psi(10.0) == doctest::Approx(5.0));
    CHECK(parse_loss("ls").psi(10.0) == doctest::Approx(10.0));
    CHECK_THROWS(parse_loss("tukey:4"));
  }

  TEST_CASE("AR(1) on (0, 1, 2, 4, 8)") {
    const auto s = series_of({0, 1, 2, 4, 8});
    CHECK(ls_estimate(s, 1).phi_hat[0] == doctest::Approx(2.0).epsilon(1e-12));
    const auto m = m_estimate(s, 1, huber_loss(100.0));
    CHECK(m.converged);
    CHECK(m.phi_hat[0] == doctest::Approx(2.0).epsilon(1e-10));
  }

  TEST_CASE("quadratic loss reproduces least squares") {
    const auto s = sample(RootSpec{0, 0, {{kPi / 4, 1}}}, 200, 51);
    const auto ls = ls_estimate(s, 2);
    for (auto method : {SolverMethod::Irls, SolverMethod::Newton}) {
      const auto m = m_estimate(s, 2, quadratic_loss(), {method, 1e-10, 200});
      CHECK(m.converged);
      for (std::size_t i = 0; i < 2; ++i) CHECK(m.phi_hat[i] == doctest::Approx(ls.phi_hat[i]).epsilon(1e-9));
    }
  }

  TEST_CASE("noise-free series are recovered exactly") {
    const auto model = expand_polynomial(RootSpec{0, 0, {{kPi / 4, 1}}});
    const auto s = simulate_ar(model, std::vector<double>(30, 0.0), {0.3, 1.0});
    const auto ls = ls_estimate(s, 2);
    CHECK(ls.phi_hat[0] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-10));
    CHECK(ls.phi_hat[1] == doctest::Approx(-1.0).epsilon(1e-10));
    const auto m = m_estimate(s, 2, huber_loss(5.0));
    CHECK(m.phi_hat[0] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-10));
  }

  TEST_CASE("objective and gradient") {
    const auto s = sample(RootSpec{1, 0, {{kPi / 3, 1}}}, 150, 52);
    const auto loss = huber_loss(2.0);
    const std::vector<double> beta{1.2, -0.4, 0.3};
    const auto [f, g] = objective_and_gradient(s, 3, loss, beta);
    CHECK(f == doctest::Approx(objective(s, loss, beta)));
    for (std::size_t i = 0; i < 3; ++i) {
      auto up = beta, down = beta;
      const double h = 1e-6;
      up[i] += h;
      down[i] -= h;
      const double fd = (objective(s, loss, up) - objective(s, loss, down)) / (2 * h);
      CHECK(g[i] == doctest::Approx(fd).epsilon(1e-5).scale(1.0));
    }
    // zero-residual series: objective and gradient vanish at the truth
    const auto model = expand_polynomial(RootSpec{1, 0, {}});
    const auto flat = simulate_ar(model, std::vector<double>(10, 0.0), {2.0});
    const auto [f0, g0] = objective_and_gradient(flat, 1, loss, {1.0});
    CHECK(f0 == 0.0);
    CHECK(g0[0] == 0.0);
    CHECK_THROWS_AS(objective_and_gradient(s, 3, loss, {1.0}), std::invalid_argument);
  }

  TEST_CASE("residuals") {
    const auto s = series_of({1, 2, 4, 7});
    CHECK(residuals(s, {1.0}) == std::vector<double>{1, 2, 3});
    CHECK(residuals(s, {2.0, -1.0}) == std::vector<double>{1, 1});
  }

  TEST_CASE("M-estimate solves its estimating equation") {
    const auto loss = huber_loss(5.0);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const auto s = sample(RootSpec{0, 0, {{kPi / 4, 1}}}, 100, 60 + seed, 0.8);
      const auto irls = m_estimate(s, 2, loss);
      const auto newton = m_estimate(s, 2, loss, {SolverMethod::Newton, 1e-8, 200});
      REQUIRE(irls.converged);
      REQUIRE(newton.converged);
      double xmax = 0.0;
      for (double v : s.values) xmax = std::max(xmax, std::abs(v));
      CHECK(irls.gradient_norm <= 1e-6 * (1.0 + xmax) * s.size());
      for (std::size_t i = 0; i < 2; ++i)
        CHECK(irls.phi_hat[i] == doctest::Approx(newton.phi_hat[i]).epsilon(1e-6).scale(1.0));
      // convexity: nearby points never do better
      for (double dx : {-1e-3, 1e-3}) {
        for (std::size_t i = 0; i < 2; ++i) {
          auto b = irls.phi_hat;
          b[i] += dx;
          CHECK(objective(s, loss, b) >= irls.objective * (1.0 - 1e-12));
        }
      }
      const auto direct = residuals(s, irls.phi_hat);
      REQUIRE(direct.size() == irls.residuals.size());
      for (std::size_t t = 0; t < direct.size(); ++t)
        CHECK(irls.residuals[t] == doctest::Approx(direct[t]).epsilon(1e-9).scale(xmax));
    }
  }

  TEST_CASE("AR(1) M-estimate matches golden-section search") {
    const auto loss = huber_loss(1.5);
    const auto s = sample(RootSpec{1, 0, {}}, 120, 70, 1.1);
    const auto m = m_estimate(s, 1, loss);
    const double ls = ls_estimate(s, 1).phi_hat[0];
    const double oracle = golden_min([&](double b) { return objective(s, loss, {b}); }, ls - 1.0, ls + 1.0);
    CHECK(m.phi_hat[0] == doctest::Approx(oracle).epsilon(1e-7));
  }

  TEST_CASE("Huber tends to least squares as c grows") {
    const auto s = sample(RootSpec{0, 0, {{kPi / 4, 1}}}, 200, 71, 1.5);
    const auto ls = ls_estimate(s, 2);
    double maxe = 0.0;
    for (double e : ls.residuals) maxe = std::max(maxe, std::abs(e));
    const auto m = m_estimate(s, 2, huber_loss(2.0 * maxe));
    for (std::size_t i = 0; i < 2; ++i) CHECK(m.phi_hat[i] == doctest::Approx(ls.phi_hat[i]).epsilon(1e-9));
  }

  TEST_CASE("iteration control") {
    const auto s = sample(RootSpec{0, 0, {{kPi / 4, 1}}}, 200, 72, 0.9);
    const auto loss = huber_loss(1.0);
    const auto none = m_estimate(s, 2, loss, {SolverMethod::Irls, 1e-8, 0});
    CHECK_FALSE(none.converged);
    CHECK_FALSE(none.diagnostic.empty());
    // the objective never increases with the iteration budget
    double prev = none.objective;
    for (std::size_t k = 1; k <= 6; ++k) {
      const auto r = m_estimate(s, 2, loss, {SolverMethod::Irls, 1e-8, k});
      CHECK(r.objective <= prev * (1.0 + 1e-14));
      prev = r.objective;
    }
  }

  TEST_CASE("degenerate designs") {
    CHECK_THROWS_AS(ls_estimate(series_of({0, 0, 0, 0, 0}), 1), EstimationError);
    CHECK_THROWS_AS(m_estimate(series_of({0, 0, 0, 0, 0}), 1, huber_loss(1.0)), EstimationError);
    // constant series: the two lag columns coincide
    CHECK_THROWS_AS(ls_estimate(series_of({1, 1, 1, 1, 1, 1}), 2), EstimationError);
    CHECK_THROWS_AS(ls_estimate(series_of({1, 2}), 1), std::invalid_argument);
    CHECK_THROWS_AS(ls_estimate(series_of({1, 2, 3}), 0), std::invalid_argument);
  }

  TEST_CASE("result serialisation") {
    const auto r = ls_estimate(series_of({0, 1, 2, 4, 8}), 1);
    CHECK(r.to_csv().rfind("index,estimate\n1,2", 0) == 0);
    CHECK(r.to_text().find("converged=true") != std::string::npos);
  }
}
