#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace vigilkit::stats {

double mean(std::span<const double> x);

/// Sample (n-1) standard deviation. Requires at least two values.
double sample_sd(std::span<const double> x);

/// SD / mean, or nullopt when the mean is zero or fewer than two values exist.
std::optional<double> variation_ratio(std::span<const double> x);

struct PearsonResult {
  double r = 0.0;
  double p = 1.0;
  bool defined = false;  // false when either side has zero variance
};

/// Product-moment correlation with a two-tailed p-value from the t distribution
/// on n-2 degrees of freedom.
PearsonResult pearson_r_p(std::span<const double> a, std::span<const double> b);

/// Two-tailed p-value of a correlation coefficient at sample size n.
double correlation_p_value(double r, std::size_t n);

/// Smallest |r| whose two-tailed p-value is below alpha at sample size n.
double critical_correlation(std::size_t n, double alpha);

/// Benjamini-Hochberg step-up. Returns true for rejected hypotheses, in input order.
std::vector<bool> fdr_correct(std::span<const double> pvals, double q = 0.05);

/// 1 - (1-R²)(N-1)/(N-k-1). Requires N > k + 1.
double adjusted_r2(double r2, std::size_t n, std::size_t k);

/// Binomial coefficient C(n, k); exact for the subset sizes used here.
std::uint64_t binomial(unsigned n, unsigned k);

/// "***" for p<0.001, "**" for p<0.01, "*" for p<0.05, "" otherwise.
std::string significance_stars(double p);

}  // namespace vigilkit::stats
