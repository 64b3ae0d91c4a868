#include <vector>

#include "doctest.h"
#include "uar/statistics.hpp"

using namespace uar;

// reference values from numpy.quantile / scipy.stats
TEST_SUITE("statistics") {
  TEST_CASE("type-7 quantiles") {
    const std::vector<double> a{0.1, 0.5, 0.9, 1.3, 2.2, 3.1, 0.7};
    CHECK(stats::quantile(a, 0.05) == doctest::Approx(0.22).epsilon(1e-12));
    CHECK(stats::quantile(a, 0.25) == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(stats::median(a) == doctest::Approx(0.9));
    CHECK(stats::quantile(a, 0.9) == doctest::Approx(2.56).epsilon(1e-12));
    CHECK(stats::ipr90(std::vector<double>{4.0}) == 0.0);
  }

  TEST_CASE("Kolmogorov survival function") {
    CHECK(stats::kolmogorov_survival(1.0) == doctest::Approx(0.26999967167735456).epsilon(1e-9));
    CHECK(stats::kolmogorov_survival(0.5) == doctest::Approx(0.9639452436648751).epsilon(1e-9));
  }

  TEST_CASE("two-sample KS statistic") {
    const std::vector<double> a{0.1, 0.5, 0.9, 1.3, 2.2, 3.1, 0.7};
    const std::vector<double> b{1.0, 1.4, 2.5, 2.9, 3.3, 4.0, 0.2, 5.1};
    const auto r = stats::ks_two_sample(a, b);
    CHECK(r.statistic == doctest::Approx(0.4821428571428571).epsilon(1e-12));
    CHECK(r.p_value > 0.1);
    CHECK(stats::ks_two_sample(a, a).statistic == 0.0);
  }

  TEST_CASE("Mann-Whitney normal approximation") {
    const std::vector<double> a{0.1, 0.5, 0.9, 1.3, 2.2, 3.1, 0.7};
    const std::vector<double> b{1.0, 1.4, 2.5, 2.9, 3.3, 4.0, 0.2, 5.1};
    CHECK(stats::mann_whitney(a, b).p_value == doctest::Approx(0.0825792741523268).epsilon(1e-6));
  }

  TEST_CASE("one-sample KS against a uniform CDF") {
    std::vector<double> u;
    for (int i = 0; i < 1000; ++i) u.push_back((i + 0.5) / 1000.0);
    const auto r = stats::ks_one_sample(u, [](double x) { return x; });
    CHECK(r.statistic == doctest::Approx(0.0005).epsilon(1e-9));
    CHECK(r.p_value > 0.99);
  }
}
