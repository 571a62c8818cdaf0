#include "vigilkit/relevance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "vigilkit/error.hpp"
#include "vigilkit/parallel.hpp"
#include "vigilkit/stats.hpp"

namespace vigilkit::relevance {

namespace {

constexpr double kRankThreshold = 1e-10;
constexpr double kLeverageLimit = 1e-9;

std::span<const double> as_span(const Eigen::VectorXd& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

bool ties(double a, double b) { return std::fabs(a - b) <= 1e-12 * std::max(1.0, std::fabs(a)); }

// Deleted-residual LOO predictions for a fixed design; reusable across targets.
class LeverageLoo {
 public:
  explicit LeverageLoo(const Eigen::MatrixXd& x) : n_(x.rows()) {
    const Eigen::Index k = x.cols();
    if (n_ < k + 2) {
      diagnostic_ = "N=" + std::to_string(n_) + " too small for " + std::to_string(k) +
                    " features in leave-one-out folds";
      return;
    }
    Eigen::MatrixXd d(n_, k + 1);
    d.col(0).setOnes();
    if (k > 0) {
      const Scaler s = Scaler::fit(x);
      d.rightCols(k) = s.transform(x);
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(n_, k + 1);
    qr.setThreshold(kRankThreshold);
    qr.compute(d);
    if (qr.rank() < k + 1) {
      diagnostic_ = "design matrix is rank deficient";
      return;
    }
    const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n_, k + 1);
    hat_ = q * q.transpose();
    inv_one_minus_h_.resize(n_);
    for (Eigen::Index i = 0; i < n_; ++i) {
      const double m = 1.0 - hat_(i, i);
      if (m < kLeverageLimit) {
        diagnostic_ = "fold " + std::to_string(i + 1) + " is singular (leverage 1)";
        return;
      }
      inv_one_minus_h_(i) = 1.0 / m;
    }
    feasible_ = true;
  }

  bool feasible() const { return feasible_; }
  const std::string& diagnostic() const { return diagnostic_; }

  Eigen::VectorXd predict(const Eigen::VectorXd& y) const {
    const Eigen::VectorXd resid = y - hat_ * y;
    return y - resid.cwiseProduct(inv_one_minus_h_);
  }

 private:
  Eigen::Index n_;
  bool feasible_ = false;
  std::string diagnostic_;
  Eigen::MatrixXd hat_;
  Eigen::VectorXd inv_one_minus_h_;
};

double comparable_r(const RegressionMetrics& m) {
  return m.r_defined ? m.pearson_r : -std::numeric_limits<double>::infinity();
}

double correlation_only(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double ma = a.mean();
  const double mb = b.mean();
  const Eigen::ArrayXd da = a.array() - ma;
  const Eigen::ArrayXd db = b.array() - mb;
  const double saa = da.square().sum();
  const double sbb = db.square().sum();
  if (saa == 0.0 || sbb == 0.0) return -std::numeric_limits<double>::infinity();
  return (da * db).sum() / std::sqrt(saa * sbb);
}

}  // namespace

// --- Dataset ---------------------------------------------------------------

void Dataset::validate() const {
  if (x.rows() != y.size()) throw ArgumentError("dataset: X and y row counts differ");
  if (!feature_names.empty() && static_cast<Eigen::Index>(feature_names.size()) != x.cols())
    throw ArgumentError("dataset: feature name count differs from column count");
  if (!participant_ids.empty() && static_cast<Eigen::Index>(participant_ids.size()) != x.rows())
    throw ArgumentError("dataset: participant id count differs from row count");
  if (x.rows() < 4) throw ArgumentError("dataset: at least 4 participants required");
  if (!x.allFinite() || !y.allFinite()) throw ArgumentError("dataset: non-finite values");
}

Dataset Dataset::filter_rows(const std::vector<bool>& keep) const {
  if (static_cast<Eigen::Index>(keep.size()) != x.rows()) throw ArgumentError("row mask length mismatch");
  std::vector<Eigen::Index> idx;
  for (std::size_t i = 0; i < keep.size(); ++i)
    if (keep[i]) idx.push_back(static_cast<Eigen::Index>(i));
  Dataset out;
  out.x = x(idx, Eigen::all);
  out.y = y(idx);
  out.feature_names = feature_names;
  for (auto i : idx)
    if (!participant_ids.empty()) out.participant_ids.push_back(participant_ids[static_cast<std::size_t>(i)]);
  return out;
}

Eigen::MatrixXd Dataset::columns(const std::vector<int>& idx) const {
  Eigen::MatrixXd out(x.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t j = 0; j < idx.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = x.col(idx[j]);
  return out;
}

// --- standardisation -------------------------------------------------------

Scaler Scaler::fit(const Eigen::MatrixXd& x) {
  Scaler s;
  s.mean = x.colwise().mean();
  s.sd.resize(x.cols());
  const double denom = std::max<double>(1.0, static_cast<double>(x.rows() - 1));
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double sd = std::sqrt((x.col(j).array() - s.mean(j)).square().sum() / denom);
    s.sd(j) = sd > 0 ? sd : 1.0;
  }
  return s;
}

Eigen::MatrixXd Scaler::transform(const Eigen::MatrixXd& x) const {
  if (x.cols() != mean.size()) throw ArgumentError("scaler: column count mismatch");
  return (x.rowwise() - mean).array().rowwise() / sd.array();
}

GlobalStandardization standardize_global(const Eigen::MatrixXd& x) {
  GlobalStandardization out;
  if (x.rows() < 2) throw ArgumentError("standardize: need at least two rows");
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double m = x.col(j).mean();
    const bool constant = ((x.col(j).array() - m).abs() <= 1e-15 * std::max(1.0, std::fabs(m))).all();
    (constant ? out.dropped : out.kept).push_back(static_cast<int>(j));
  }
  Eigen::MatrixXd kept(x.rows(), static_cast<Eigen::Index>(out.kept.size()));
  for (std::size_t j = 0; j < out.kept.size(); ++j) kept.col(static_cast<Eigen::Index>(j)) = x.col(out.kept[j]);
  out.x = kept.cols() > 0 ? Scaler::fit(kept).transform(kept) : kept;
  return out;
}

// --- metrics and OLS -------------------------------------------------------

RegressionMetrics prediction_metrics(const Eigen::VectorXd& truth, const Eigen::VectorXd& predicted,
                                     std::size_t k) {
  if (truth.size() != predicted.size()) throw ArgumentError("prediction_metrics: length mismatch");
  const auto n = static_cast<std::size_t>(truth.size());
  if (n < 3) throw ArgumentError("prediction_metrics: need at least 3 samples");
  RegressionMetrics m;
  const double ss_res = (truth - predicted).squaredNorm();
  const double ss_tot = (truth.array() - truth.mean()).square().sum();
  m.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 0.0;
  m.adj_r2 = n > k + 1 ? stats::adjusted_r2(m.r2, n, k) : std::numeric_limits<double>::quiet_NaN();
  m.rmse = std::sqrt(ss_res / static_cast<double>(n));
  const auto pr = stats::pearson_r_p(as_span(truth), as_span(predicted));
  m.r_defined = pr.defined;
  m.pearson_r = pr.r;
  m.p_value = pr.p;
  m.r2_corr = pr.r * pr.r;
  return m;
}

double OlsFit::predict(const Eigen::Ref<const Eigen::RowVectorXd>& row) const {
  return intercept + row.dot(coef);
}

OlsFit ols_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const std::vector<std::string>& names) {
  const Eigen::Index n = x.rows();
  const Eigen::Index k = x.cols();
  if (y.size() != n) throw ArgumentError("ols_fit: X and y row counts differ");
  if (n < k + 1)
    throw SingularFitError("ols_fit: " + std::to_string(n) + " samples cannot determine " +
                           std::to_string(k + 1) + " coefficients");
  Eigen::MatrixXd d(n, k + 1);
  d.col(0).setOnes();
  d.rightCols(k) = x;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(n, k + 1);
  qr.setThreshold(kRankThreshold);
  qr.compute(d);
  if (qr.rank() < k + 1) {
    std::string cols;
    const auto& perm = qr.colsPermutation().indices();
    for (Eigen::Index i = qr.rank(); i < k + 1; ++i) {
      const int c = perm(i);
      if (!cols.empty()) cols += ", ";
      if (c == 0) cols += "intercept";
      else if (static_cast<std::size_t>(c - 1) < names.size()) cols += names[static_cast<std::size_t>(c - 1)];
      else cols += "column " + std::to_string(c - 1);
    }
    throw SingularFitError("ols_fit: design matrix is rank deficient; collinear: " + cols);
  }
  const Eigen::VectorXd beta = qr.solve(y);
  OlsFit fit;
  fit.intercept = beta(0);
  fit.coef = beta.tail(k);
  return fit;
}

// --- LOO-CV ----------------------------------------------------------------

LoocvResult loocv_regress(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, Standardization policy,
                          LoocvMethod method) {
  const Eigen::Index n = x.rows();
  const Eigen::Index k = x.cols();
  if (y.size() != n) throw ArgumentError("loocv_regress: X and y row counts differ");
  if (n < 3) throw ArgumentError("loocv_regress: need at least 3 samples");
  LoocvResult res;

  if (method == LoocvMethod::Leverage) {
    LeverageLoo loo(x);
    if (!loo.feasible()) {
      res.diagnostic = loo.diagnostic();
      return res;
    }
    res.predictions = loo.predict(y);
  } else {
    Eigen::MatrixXd design = x;
    if (policy == Standardization::Global && k > 0) design = Scaler::fit(x).transform(x);
    res.predictions.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      std::vector<Eigen::Index> train;
      for (Eigen::Index r = 0; r < n; ++r)
        if (r != i) train.push_back(r);
      Eigen::MatrixXd xt = design(train, Eigen::all);
      Eigen::RowVectorXd xi = design.row(i);
      if (policy == Standardization::PerFold && k > 0) {
        const Scaler s = Scaler::fit(xt);
        xt = s.transform(xt);
        xi = s.transform(xi);
      }
      try {
        const OlsFit fit = ols_fit(xt, y(train));
        res.predictions(i) = fit.predict(xi);
      } catch (const SingularFitError& e) {
        res.diagnostic = "fold " + std::to_string(i + 1) + ": " + e.what();
        res.predictions.resize(0);
        return res;
      }
    }
  }
  res.feasible = true;
  res.metrics = prediction_metrics(y, res.predictions, static_cast<std::size_t>(k));
  return res;
}

ScreenResult screen_features(const Dataset& data, double alpha, Standardization policy, ScreenTail tail) {
  data.validate();
  ScreenResult out;
  out.per_feature.reserve(static_cast<std::size_t>(data.x.cols()));
  for (Eigen::Index j = 0; j < data.x.cols(); ++j) {
    auto r = loocv_regress(data.x.col(j), data.y, policy);
    const bool sign_ok = tail == ScreenTail::TwoTailed || r.metrics.pearson_r > 0.0;
    if (r.feasible && r.metrics.r_defined && sign_ok && r.metrics.p_value < alpha)
      out.selected.push_back(static_cast<int>(j));
    out.per_feature.push_back(std::move(r));
  }
  return out;
}

// --- subsets ---------------------------------------------------------------

SubsetEnumerator::SubsetEnumerator(int n, int cap) : n_(n) {
  if (n < 1) throw ArgumentError("enumerate_subsets: n must be >= 1");
  if (n > cap)
    throw ArgumentError("enumerate_subsets: n = " + std::to_string(n) + " exceeds the subset cap of " +
                        std::to_string(cap) + " (2^n - 1 models); raise the cap explicitly to proceed");
  if (n > 62) throw ArgumentError("enumerate_subsets: n must be <= 62");
}

bool SubsetEnumerator::next(std::vector<int>& subset) {
  if (k_ == 0) {
    k_ = 1;
    current_ = {0};
  } else {
    // advance to the next combination of size k_, or to the first of size k_+1
    int i = k_ - 1;
    while (i >= 0 && current_[static_cast<std::size_t>(i)] == n_ - k_ + i) --i;
    if (i < 0) {
      if (k_ == n_) return false;
      ++k_;
      current_.resize(static_cast<std::size_t>(k_));
      std::iota(current_.begin(), current_.end(), 0);
    } else {
      ++current_[static_cast<std::size_t>(i)];
      for (int j = i + 1; j < k_; ++j)
        current_[static_cast<std::size_t>(j)] = current_[static_cast<std::size_t>(j - 1)] + 1;
    }
  }
  subset = current_;
  return true;
}

std::vector<std::vector<int>> enumerate_subsets(int n, int cap) {
  SubsetEnumerator e(n, cap);
  std::vector<std::vector<int>> out;
  out.reserve(static_cast<std::size_t>(e.total()));
  std::vector<int> s;
  while (e.next(s)) out.push_back(s);
  return out;
}

// --- permutation test ------------------------------------------------------

double permutation_pvalue(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, int permutations,
                          std::uint64_t seed, Standardization /*policy*/) {
  if (permutations < 1) throw ArgumentError("permutation_pvalue: need at least one permutation");
  if (y.size() != x.rows()) throw ArgumentError("permutation_pvalue: X and y row counts differ");
  LeverageLoo loo(x);
  if (!loo.feasible()) throw ArgumentError("permutation_pvalue: infeasible subset (" + loo.diagnostic() + ")");
  const double observed = correlation_only(y, loo.predict(y));
  std::mt19937_64 rng(seed);
  Eigen::VectorXd yp = y;
  int at_least = 0;
  for (int p = 0; p < permutations; ++p) {
    std::shuffle(yp.begin(), yp.end(), rng);
    if (correlation_only(yp, loo.predict(yp)) >= observed) ++at_least;
  }
  return (1.0 + at_least) / (static_cast<double>(permutations) + 1.0);
}

// --- MVPA ------------------------------------------------------------------

std::vector<std::size_t> MvpaReport::ranked() const {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < results.size(); ++i)
    if (results[i].feasible) idx.push_back(i);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return results[a].metrics.adj_r2 > results[b].metrics.adj_r2;
  });
  return idx;
}

std::optional<std::size_t> MvpaReport::best() const {
  const auto r = ranked();
  if (r.empty()) return std::nullopt;
  return r.front();
}

MvpaReport mvpa_search(const Dataset& data, const std::vector<int>& screened, const MvpaOptions& opt) {
  data.validate();
  if (screened.empty()) throw ArgumentError("mvpa_search: no screened features");
  for (int j : screened)
    if (j < 0 || j >= data.x.cols()) throw ArgumentError("mvpa_search: screened index out of range");
  if (opt.permutations < 1) throw ArgumentError("mvpa_search: permutations must be >= 1");

  MvpaReport rep;
  rep.screened = screened;
  const int n = static_cast<int>(screened.size());
  const auto local = enumerate_subsets(n, opt.subset_cap);
  rep.results.resize(local.size());

  parallel_for(local.size(), opt.threads, [&](std::size_t s) {
    SubsetResult& r = rep.results[s];
    for (int i : local[s]) r.features.push_back(screened[static_cast<std::size_t>(i)]);
    if (static_cast<Eigen::Index>(r.features.size()) + 2 > data.n()) return;
    const Eigen::MatrixXd xs = data.columns(r.features);
    LeverageLoo loo(xs);
    if (!loo.feasible()) return;
    r.predictions = loo.predict(data.y);
    r.metrics = prediction_metrics(data.y, r.predictions, r.features.size());
    r.feasible = true;
  });

  for (const auto& r : rep.results) rep.infeasible += r.feasible ? 0 : 1;
  if (rep.infeasible > 0)
    rep.diagnostics.push_back(std::to_string(rep.infeasible) +
                              " subset(s) infeasible (too many features for N or singular folds)");
  if (rep.infeasible == static_cast<int>(rep.results.size())) {
    rep.diagnostics.push_back("no feasible subset");
    return rep;
  }

  // Per cardinality: best adj R², best r, lowest RMSE; ties are all reported.
  for (int k = 1; k <= n; ++k) {
    std::vector<std::size_t> at_k;
    for (std::size_t i = 0; i < rep.results.size(); ++i)
      if (rep.results[i].feasible && static_cast<int>(rep.results[i].features.size()) == k) at_k.push_back(i);
    if (at_k.empty()) continue;
    double best_adj = -std::numeric_limits<double>::infinity();
    double best_r = -std::numeric_limits<double>::infinity();
    double best_rmse = std::numeric_limits<double>::infinity();
    for (auto i : at_k) {
      const auto& m = rep.results[i].metrics;
      best_adj = std::max(best_adj, m.adj_r2);
      best_r = std::max(best_r, comparable_r(m));
      best_rmse = std::min(best_rmse, m.rmse);
    }
    for (auto i : at_k) {
      const auto& m = rep.results[i].metrics;
      unsigned c = 0;
      if (ties(m.adj_r2, best_adj)) c |= kBestAdjR2;
      if (m.r_defined && ties(m.pearson_r, best_r)) c |= kBestR;
      if (ties(m.rmse, best_rmse)) c |= kBestRmse;
      if (c) rep.table.push_back({k, stats::binomial(static_cast<unsigned>(n), static_cast<unsigned>(k)), c, i});
    }
  }

  std::vector<std::size_t> reported;
  for (const auto& row : rep.table) reported.push_back(row.result);
  parallel_for(reported.size(), opt.threads, [&](std::size_t t) {
    SubsetResult& r = rep.results[reported[t]];
    std::uint64_t mask = 0;
    for (int f : r.features) {
      const auto pos = std::find(screened.begin(), screened.end(), f) - screened.begin();
      mask |= std::uint64_t{1} << pos;
    }
    r.permutation_p = permutation_pvalue(data.columns(r.features), data.y, opt.permutations,
                                         derive_seed(opt.seed, mask), opt.policy);
  });
  return rep;
}

// --- behavioural correlations ----------------------------------------------

std::array<std::optional<double>, 6> measure_values(const PerformanceSummary& s) {
  return {s.ce_pct, s.oe_pct, s.cvs_mean, s.cvs_var, s.hrt_mean_ms, s.hrt_var};
}

BehaviorCorrelations behavioral_correlations(const std::vector<PerformanceSummary>& summaries, double q) {
  if (summaries.size() < 4) throw ArgumentError("behavioral_correlations: at least 4 participants required");
  const std::size_t n = summaries.size();
  std::array<Eigen::VectorXd, 6> cols;
  BehaviorCorrelations out;
  for (std::size_t m = 0; m < 6; ++m) {
    cols[m].resize(static_cast<Eigen::Index>(n));
    bool ok = true;
    for (std::size_t i = 0; i < n; ++i) {
      const auto v = measure_values(summaries[i])[m];
      ok = ok && v.has_value();
      cols[m](static_cast<Eigen::Index>(i)) = v.value_or(0.0);
    }
    out.defined[m] = ok && (cols[m].array() != cols[m](0)).any();
  }
  out.r.setConstant(std::numeric_limits<double>::quiet_NaN());
  out.p.setConstant(std::numeric_limits<double>::quiet_NaN());
  std::vector<std::pair<int, int>> pairs;
  std::vector<double> pvals;
  for (int a = 0; a < 6; ++a) {
    if (!out.defined[static_cast<std::size_t>(a)]) continue;
    out.r(a, a) = 1.0;
    out.p(a, a) = 0.0;
    for (int b = a + 1; b < 6; ++b) {
      if (!out.defined[static_cast<std::size_t>(b)]) continue;
      const auto pr = stats::pearson_r_p(as_span(cols[static_cast<std::size_t>(a)]),
                                         as_span(cols[static_cast<std::size_t>(b)]));
      out.r(a, b) = out.r(b, a) = pr.r;
      out.p(a, b) = out.p(b, a) = pr.p;
      pairs.emplace_back(a, b);
      pvals.push_back(pr.p);
    }
  }
  const auto reject = stats::fdr_correct(pvals, q);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto [a, b] = pairs[i];
    out.significant[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = reject[i];
    out.significant[static_cast<std::size_t>(b)][static_cast<std::size_t>(a)] = reject[i];
  }
  return out;
}

}  // namespace vigilkit::relevance
