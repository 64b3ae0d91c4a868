#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "uar/asymptotics.hpp"
#include "uar/estimation.hpp"
#include "uar/statistics.hpp"

using namespace uar;

namespace {

constexpr double kPi = 3.14159265358979323846;

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }
double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * kPi); }

TimeSeries traced_sample(const RootSpec& spec, const InnovationSpec& inn, std::size_t n, const RandomStream& rng) {
  RandomStream local = rng;
  return simulate_ar(expand_polynomial(spec), sample_innovations(inn, n, local));
}

}  // namespace

TEST_SUITE("asymptotics") {
  TEST_CASE("binomial matrices") {
    Eigen::MatrixXd alt(3, 3);
    alt << 1, 0, 0, 1, -1, 0, 1, -2, 1;
    CHECK(binomial_matrix(3, true).isApprox(alt));
    Eigen::MatrixXd plain(3, 3);
    plain << 1, 0, 0, 1, 1, 0, 1, 2, 1;
    CHECK(binomial_matrix(3, false).isApprox(plain));
    CHECK_THROWS_AS(binomial_matrix(0, true), std::invalid_argument);
  }

  TEST_CASE("normalizers") {
    const auto j = normalizer_J(2, 100, 2.0);
    CHECK(j(0, 0) == doctest::Approx(1.0 / 2000.0));
    CHECK(j(1, 0) == doctest::Approx(1.0 / 20.0));
    CHECK(j(1, 1) == doctest::Approx(-1.0 / 20.0));
    const auto k = normalizer_K(2, 100, 2.0);
    CHECK(k(1, 1) == doctest::Approx(1.0 / 20.0));

    const double theta = 1.0, c = std::cos(theta);
    Eigen::MatrixXd d(4, 4);
    d << 1, -2 * c, 1, 0, 0, 1, -2 * c, 1, 1, 0, 0, 0, 0, 1, 0, 0;
    CHECK(complex_basis_matrix(2, theta).isApprox(d));
    const auto l = normalizer_L(2, theta, 100, 2.0);
    CHECK(l(0, 1) == doctest::Approx(-2 * c / 20.0));
    CHECK(l(2, 0) == doctest::Approx(1.0 / 2000.0));
    CHECK_THROWS_AS(complex_basis_matrix(1, kPi), std::domain_error);
  }

  TEST_CASE("loss moments against closed forms") {
    SUBCASE("Gaussian innovations") {
      const double c = 1.5;
      const auto m = loss_moments(huber_loss(c), InnovationSpec::exact(2.0, 1.0 / std::sqrt(2.0)));
      const double p_in = 2.0 * normal_cdf(c) - 1.0;
      CHECK(m.e_psi_prime == doctest::Approx(p_in).epsilon(1e-9));
      const double e_min = p_in - 2.0 * c * normal_pdf(c) + 2.0 * c * c * (1.0 - normal_cdf(c));
      CHECK(m.e_psi2 == doctest::Approx(e_min).epsilon(1e-9));
      // E e psi(e) = P(|e| <= c) for a standard normal (Stein)
      CHECK(m.corr_eps_psi == doctest::Approx(p_in / std::sqrt(e_min)).epsilon(1e-9));
      const auto q = loss_moments(quadratic_loss(), InnovationSpec::exact(2.0, 1.0));
      CHECK(q.e_psi2 == doctest::Approx(2.0));
      CHECK(q.corr_eps_psi == 1.0);
    }
    SUBCASE("Pareto innovations") {
      const double a = 1.3, c = 5.0;
      const auto m = loss_moments(huber_loss(c), InnovationSpec::pareto(a));
      CHECK(m.e_psi_prime == doctest::Approx(1.0 - std::pow(c, -a)).epsilon(1e-9));
      const double e2 = a / (2.0 - a) * (std::pow(c, 2.0 - a) - 1.0) + c * c * std::pow(c, -a);
      CHECK(m.e_psi2 == doctest::Approx(e2).epsilon(1e-9));
      CHECK(m.corr_eps_psi == 0.0);
    }
    CHECK_THROWS_AS(loss_moments(quadratic_loss(), InnovationSpec::exact(1.3)), std::domain_error);
  }

  TEST_CASE("partial sums") {
    SUBCASE("a single jump") {
      std::vector<double> eps(100, 0.0);
      eps[49] = 1.0;
      const auto b = partial_sums(eps, huber_loss(5.0), 1.0, 1.0, 10, kPi / 3);
      REQUIRE(b.s.size() == 11);
      for (std::size_t i = 0; i <= 10; ++i) {
        CHECK(b.s[i] == (i >= 5 ? 1.0 : 0.0));
        CHECK(b.s1[i] == (i >= 5 ? 1.0 : 0.0));
        CHECK(b.w[i] == doctest::Approx(i >= 5 ? 0.1 : 0.0));
        CHECK(b.t1[i] == doctest::Approx(i >= 5 ? std::cos(50 * kPi / 3) : 0.0));
        CHECK(b.r2[i] == doctest::Approx(i >= 5 ? 0.1 * std::cos(49 * kPi / 3) : 0.0));
      }
      CHECK(b.grid.back() == 1.0);
    }
    SUBCASE("moments of W and V") {
      const auto spec = InnovationSpec::exact(2.0, 1.0 / std::sqrt(2.0));
      const auto loss = huber_loss(1.0);
      const auto m = loss_moments(loss, spec);
      std::vector<double> w1, v1;
      for (std::uint64_t k = 0; k < 4000; ++k) {
        RandomStream rng = RandomStream(81).derive(k);
        const auto eps = sample_innovations(spec, 200, rng);
        const auto b = partial_sums(eps, loss, norming_constant(spec, 200), m.e_psi_prime, 4);
        w1.push_back(b.w.back());
        v1.push_back(b.v.back());
      }
      const double se = std::sqrt(2.0 / 4000.0);
      CHECK(std::abs(stats::variance(w1) / m.e_psi2 - 1.0) < 4.0 * se);
      double mean_v = 0.0;
      for (double v : v1) mean_v += v / 4000.0;
      CHECK(std::abs(mean_v) < 4.0 * std::sqrt(stats::variance(v1) / 4000.0));
    }
  }

  TEST_CASE("finite-n statistic with quadratic loss is the scaled LS error") {
    const auto inn = InnovationSpec::exact(1.3);
    const std::size_t n = 300;
    const double a_n = norming_constant(inn, n);
    SUBCASE("complex pair") {
      const RootSpec spec{0, 0, {{kPi / 4, 1}}};
      const auto s = traced_sample(spec, inn, n, RandomStream(82));
      const auto fn = finite_n_statistic(s, spec, quadratic_loss(), a_n);
      const auto ls = ls_estimate(s, 2);
      const auto phi = expand_polynomial(spec).phi;
      REQUIRE(fn.blocks.size() == 1);
      REQUIRE_FALSE(fn.blocks[0].singular);
      for (int i = 0; i < 2; ++i)
        CHECK(fn.blocks[0].solution(i) ==
              doctest::Approx(std::sqrt(double(n)) * a_n * (ls.phi_hat[i] - phi[i])).epsilon(1e-7));
    }
    SUBCASE("single unit root: the Dickey-Fuller ratio") {
      const RootSpec spec{1, 0, {}};
      const auto s = traced_sample(spec, inn, n, RandomStream(83));
      const auto fn = finite_n_statistic(s, spec, quadratic_loss(), a_n);
      double sxx = 0.0, sxe = 0.0;
      for (std::size_t t = 2; t <= n; ++t) {
        sxx += s.values[t - 2] * s.values[t - 2];
        sxe += s.values[t - 2] * (*s.innovations)[t - 1];
      }
      CHECK(fn.blocks[0].matrix(0, 0) == doctest::Approx(sxx / (n * a_n * a_n)));
      CHECK(fn.blocks[0].vector(0) == doctest::Approx(sxe / (std::sqrt(double(n)) * a_n)));
      CHECK(fn.blocks[0].solution(0) ==
            doctest::Approx(std::sqrt(double(n)) * a_n * (ls_estimate(s, 1).phi_hat[0] - 1.0)).epsilon(1e-8));
    }
    SUBCASE("needs the innovation trace") {
      TimeSeries bare;
      bare.values.assign(20, 1.0);
      CHECK_THROWS_AS(finite_n_statistic(bare, RootSpec{1, 0, {}}, quadratic_loss(), 1.0), std::invalid_argument);
    }
  }

  TEST_CASE("unit-root limit at alpha = 2 matches the finite-sample law") {
    const auto inn = InnovationSpec::exact(2.0, 1.0 / std::sqrt(2.0));
    const auto loss = quadratic_loss();
    const auto moments = loss_moments(loss, inn);
    const std::size_t n = 500, draws = 800;
    const double a_n = norming_constant(inn, n);
    std::vector<double> finite, limit;
    LimitOptions opt;
    opt.mesh = 500;
    for (std::uint64_t k = 0; k < draws; ++k) {
      const auto s = traced_sample(RootSpec{1, 0, {}}, inn, n, RandomStream(84).derive(k));
      finite.push_back(finite_n_statistic(s, RootSpec{1, 0, {}}, loss, a_n).blocks[0].solution(0));
      limit.push_back(limit_sample_real_root(1, 2.0, moments, RandomStream(85).derive(k), RealRoot::Plus, opt).solution(0));
    }
    CHECK(stats::ks_two_sample(finite, limit).p_value > 1e-3);
    // the Dickey-Fuller law is skewed to the left
    CHECK(stats::median(limit) < 0.0);
  }

  TEST_CASE("real-root limit structure") {
    const auto m = loss_moments(huber_loss(5.0), InnovationSpec::exact(1.3));
    const auto s = limit_sample_real_root(2, 1.3, m, RandomStream(86));
    CHECK(s.matrix.isApprox(s.matrix.transpose()));
    CHECK(s.matrix(0, 0) > 0.0);
    CHECK(s.matrix.determinant() > 0.0);

    LossMoments flat{0.0, 1.0, 0.0};
    const auto z = limit_sample_real_root(2, 1.3, flat, RandomStream(86));
    CHECK(z.vector.isZero());
    CHECK(z.matrix.isApprox(s.matrix / m.e_psi_prime));

    const auto minus = limit_sample_real_root(1, 1.3, m, RandomStream(87), RealRoot::Minus);
    CHECK(minus.kind == LimitCase::MinusOne);
    CHECK(minus.label() == "root-1^1");
    CHECK_THROWS_AS(limit_sample_real_root(0, 1.3, m, RandomStream(1)), std::invalid_argument);
    CHECK_THROWS_AS(limit_sample_real_root(1, 2.5, m, RandomStream(1)), std::domain_error);
  }

  TEST_CASE("complex limit structure") {
    const auto m = loss_moments(huber_loss(5.0), InnovationSpec::exact(1.3));
    for (double theta : {kPi / 4, 1.0, 2.5}) {
      const auto s = limit_sample_complex(theta, 1, 1.3, m, RandomStream(88));
      CHECK(s.matrix(0, 0) == doctest::Approx(s.matrix(1, 1)));
      CHECK(s.matrix(0, 1) / s.matrix(0, 0) == doctest::Approx(std::cos(theta)));
    }
    const auto half = limit_sample_complex(kPi / 2, 1, 1.3, m, RandomStream(89));
    CHECK(std::abs(half.matrix(0, 1)) < 1e-12 * half.matrix(0, 0));
    const auto d2 = limit_sample_complex(kPi / 3, 2, 1.3, m, RandomStream(90));
    CHECK(d2.matrix.rows() == 4);
    CHECK(d2.matrix.isApprox(d2.matrix.transpose()));
    CHECK_FALSE(d2.singular);
  }

  TEST_CASE("mesh refinement changes draws little at alpha = 2") {
    const auto m = loss_moments(huber_loss(1.0), InnovationSpec::exact(2.0, 1.0 / std::sqrt(2.0)));
    std::vector<double> rel;
    for (std::uint64_t k = 0; k < 40; ++k) {
      LimitOptions coarse, fine;
      coarse.mesh = 1000;
      fine.mesh = 2000;
      const auto a = limit_sample_complex(kPi / 4, 1, 2.0, m, RandomStream(91).derive(k), coarse);
      const auto b = limit_sample_complex(kPi / 4, 1, 2.0, m, RandomStream(91).derive(k), fine);
      rel.push_back((a.solution - b.solution).norm() / b.solution.norm());
    }
    CHECK(stats::median(rel) < 0.05);
  }

  TEST_CASE("blocks decouple as n grows") {
    const RootSpec spec{1, 1, {}};
    const auto inn = InnovationSpec::exact(1.5);
    const auto loss = huber_loss(5.0);
    auto cross = [&](std::size_t n) {
      std::vector<double> c;
      for (std::uint64_t k = 0; k < 30; ++k) {
        const auto s = traced_sample(spec, inn, n, RandomStream(92).derive({n, k}));
        const auto fn = finite_n_statistic(s, spec, loss, norming_constant(inn, n));
        c.push_back(fn.cross_block_max / std::sqrt(fn.full_matrix(0, 0) * fn.full_matrix(1, 1)));
      }
      return stats::median(c);
    };
    CHECK(cross(4000) < cross(100));
  }

  TEST_CASE("limit draws serialise") {
    const auto m = loss_moments(huber_loss(5.0), InnovationSpec::exact(1.3));
    const auto s = limit_sample_complex(kPi / 4, 1, 1.3, m, RandomStream(93));
    const auto rows = to_csv_rows(s, 7);
    CHECK(std::count(rows.begin(), rows.end(), '\n') == 2 + 2 + 4);
    CHECK(rows.rfind("7,complex(", 0) == 0);
  }
}
