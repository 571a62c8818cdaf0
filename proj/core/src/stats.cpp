#include "vigilkit/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/students_t.hpp>

#include "vigilkit/error.hpp"

namespace vigilkit::stats {

double mean(std::span<const double> x) {
  if (x.empty()) throw ArgumentError("mean of empty sequence");
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double sample_sd(std::span<const double> x) {
  if (x.size() < 2) throw ArgumentError("sample SD needs at least two values");
  const double m = mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

std::optional<double> variation_ratio(std::span<const double> x) {
  if (x.size() < 2) return std::nullopt;
  const double m = mean(x);
  if (m == 0.0) return std::nullopt;
  return sample_sd(x) / m;
}

double correlation_p_value(double r, std::size_t n) {
  if (n < 3) throw ArgumentError("correlation p-value needs n >= 3");
  const double ar = std::fabs(r);
  if (ar >= 1.0) return 0.0;
  if (ar == 0.0) return 1.0;
  const double df = static_cast<double>(n - 2);
  const double t = ar * std::sqrt(df / (1.0 - r * r));
  boost::math::students_t dist(df);
  return std::clamp(2.0 * boost::math::cdf(boost::math::complement(dist, t)), 0.0, 1.0);
}

double critical_correlation(std::size_t n, double alpha) {
  if (n < 3) throw ArgumentError("critical correlation needs n >= 3");
  const double df = static_cast<double>(n - 2);
  boost::math::students_t dist(df);
  const double t = boost::math::quantile(boost::math::complement(dist, alpha / 2.0));
  return t / std::sqrt(t * t + df);
}

PearsonResult pearson_r_p(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ArgumentError("pearson_r_p: length mismatch");
  if (a.size() < 3) throw ArgumentError("pearson_r_p: need at least 3 pairs");
  const double ma = mean(a);
  const double mb = mean(b);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  PearsonResult out;
  if (saa == 0.0 || sbb == 0.0) return out;
  out.r = std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
  out.p = correlation_p_value(out.r, a.size());
  out.defined = true;
  return out;
}

std::vector<bool> fdr_correct(std::span<const double> pvals, double q) {
  const std::size_t m = pvals.size();
  std::vector<bool> reject(m, false);
  if (m == 0) return reject;
  for (double p : pvals) {
    if (!(p >= 0.0 && p <= 1.0)) throw ArgumentError("fdr_correct: p-value outside [0,1]");
  }
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return pvals[i] < pvals[j]; });
  std::size_t largest = 0;  // 1-based rank of the last p(i) <= i q / m
  for (std::size_t rank = 1; rank <= m; ++rank) {
    if (pvals[order[rank - 1]] <= static_cast<double>(rank) * q / static_cast<double>(m)) {
      largest = rank;
    }
  }
  for (std::size_t rank = 1; rank <= largest; ++rank) reject[order[rank - 1]] = true;
  return reject;
}

double adjusted_r2(double r2, std::size_t n, std::size_t k) {
  if (n <= k + 1) throw ArgumentError("adjusted_r2 requires N > k + 1");
  return 1.0 - (1.0 - r2) * static_cast<double>(n - 1) / static_cast<double>(n - k - 1);
}

std::uint64_t binomial(unsigned n, unsigned k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t c = 1;
  for (unsigned i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return c;
}

std::string significance_stars(double p) {
  if (p < 0.001) return "***";
  if (p < 0.01) return "**";
  if (p < 0.05) return "*";
  return "";
}

}  // namespace vigilkit::stats
