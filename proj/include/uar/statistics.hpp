#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace uar::stats {

/// Linear-interpolation sample quantile (Hyndman-Fan type 7), q in [0, 1].
double quantile(std::span<const double> data, double q);
/// Same as quantile() on data that is already sorted ascending.
double quantile_sorted(std::span<const double> sorted, double q);
double median(std::span<const double> data);
double mean(std::span<const double> data);
/// Unbiased sample variance.
double variance(std::span<const double> data);

/// 95th minus 5th percentile.
double ipr90(std::span<const double> data);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// Kolmogorov limiting survival function Q(x) = 2 sum (-1)^{k-1} exp(-2 k^2 x^2).
double kolmogorov_survival(double x);

/// One-sample KS test against a continuous CDF.
KsResult ks_one_sample(std::span<const double> data, const std::function<double(double)>& cdf);

/// Two-sample KS test with the asymptotic (Stephens-corrected) p-value.
KsResult ks_two_sample(std::span<const double> a, std::span<const double> b);

/// Two-sided Mann-Whitney rank-sum test, normal approximation with tie correction.
struct RankTestResult {
  double z = 0.0;
  double p_value = 1.0;
};
RankTestResult mann_whitney(std::span<const double> a, std::span<const double> b);

}  // namespace uar::stats
