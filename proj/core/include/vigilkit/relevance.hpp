#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "vigilkit/scoring.hpp"

namespace vigilkit::relevance {

/// N participants x p features and one target measure.
struct Dataset {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  std::vector<std::string> feature_names;
  std::vector<std::string> participant_ids;

  Eigen::Index n() const { return x.rows(); }
  /// Throws ArgumentError on shape mismatch, non-finite values or N < 4.
  void validate() const;
  /// Rows where keep[i] is true.
  Dataset filter_rows(const std::vector<bool>& keep) const;
  Eigen::MatrixXd columns(const std::vector<int>& idx) const;
};

enum class Standardization { PerFold, Global };

/// Column z-scoring with statistics from one sample set.
struct Scaler {
  Eigen::RowVectorXd mean;
  Eigen::RowVectorXd sd;  // sample SD; constant columns keep sd = 1

  static Scaler fit(const Eigen::MatrixXd& x);
  Eigen::MatrixXd transform(const Eigen::MatrixXd& x) const;
};

struct GlobalStandardization {
  Eigen::MatrixXd x;               // retained columns only, z-scored
  std::vector<int> kept;           // original column indices
  std::vector<int> dropped;        // constant columns
};

/// z-scores every column over all rows; constant columns are dropped.
GlobalStandardization standardize_global(const Eigen::MatrixXd& x);

struct RegressionMetrics {
  double r2 = 0.0;          // 1 - SS_res / SS_tot of out-of-fold predictions
  double adj_r2 = 0.0;
  double rmse = 0.0;
  double pearson_r = 0.0;   // truth vs prediction
  double p_value = 1.0;     // two-tailed, t on N-2 df
  double r2_corr = 0.0;     // pearson_r squared
  bool r_defined = false;
};

RegressionMetrics prediction_metrics(const Eigen::VectorXd& truth, const Eigen::VectorXd& predicted,
                                     std::size_t k);

struct OlsFit {
  double intercept = 0.0;
  Eigen::VectorXd coef;

  double predict(const Eigen::Ref<const Eigen::RowVectorXd>& row) const;
};

/// Least squares with intercept. Needs N >= k + 1 and a full-rank design;
/// otherwise throws SingularFitError naming the dependent columns.
OlsFit ols_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
               const std::vector<std::string>& names = {});

enum class LoocvMethod {
  /// One explicit refit per held-out participant.
  Refit,
  /// Single fit; deleted residuals y_i - e_i / (1 - h_ii). Algebraically
  /// identical to Refit for OLS, and invariant to column standardisation.
  Leverage,
};

struct LoocvResult {
  bool feasible = false;
  std::string diagnostic;
  Eigen::VectorXd predictions;
  RegressionMetrics metrics;
};

LoocvResult loocv_regress(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                          Standardization policy = Standardization::PerFold,
                          LoocvMethod method = LoocvMethod::Leverage);

struct ScreenResult {
  std::vector<int> selected;
  std::vector<LoocvResult> per_feature;
};

enum class ScreenTail {
  /// Prediction correlation must be positive with two-tailed p < alpha.
  Positive,
  /// Two-tailed p < alpha regardless of sign.
  TwoTailed,
};

/// Single-feature LOO-CV regressions; keeps features whose prediction
/// correlation passes the tail rule.
ScreenResult screen_features(const Dataset& data, double alpha = 0.1,
                             Standardization policy = Standardization::PerFold,
                             ScreenTail tail = ScreenTail::Positive);

/// Nonempty subsets of {0..n-1}, by increasing size, lexicographic within a size.
class SubsetEnumerator {
 public:
  explicit SubsetEnumerator(int n, int cap = 20);

  /// Writes the next subset; false once all 2^n - 1 have been produced.
  bool next(std::vector<int>& subset);
  std::uint64_t total() const { return (std::uint64_t{1} << n_) - 1; }

 private:
  int n_;
  int k_ = 0;
  std::vector<int> current_;
};

std::vector<std::vector<int>> enumerate_subsets(int n, int cap = 20);

/// (1 + #{perm: r(perm) >= r_obs}) / (P + 1), permuting y.
double permutation_pvalue(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, int permutations,
                          std::uint64_t seed, Standardization policy = Standardization::PerFold);

struct SubsetResult {
  std::vector<int> features;  // dataset column indices
  bool feasible = false;
  RegressionMetrics metrics;
  Eigen::VectorXd predictions;
  std::optional<double> permutation_p;
};

enum Criterion : unsigned { kBestAdjR2 = 1, kBestR = 2, kBestRmse = 4 };

struct TableRow {
  int k = 0;
  std::uint64_t n_subsets = 0;   // C(n, k)
  unsigned criteria = 0;         // Criterion bits
  std::size_t result = 0;        // index into MvpaReport::results
};

struct MvpaOptions {
  int permutations = 500;
  std::uint64_t seed = 1;
  Standardization policy = Standardization::PerFold;
  int subset_cap = 20;
  unsigned threads = 1;
};

struct MvpaReport {
  std::vector<int> screened;
  std::vector<SubsetResult> results;  // enumeration order
  std::vector<TableRow> table;        // per cardinality, ties kept
  std::vector<std::string> diagnostics;
  int infeasible = 0;

  /// Feasible result indices sorted by adj R² (descending), ties by enumeration order.
  std::vector<std::size_t> ranked() const;
  /// Highest adj R² overall; nullopt when nothing was feasible.
  std::optional<std::size_t> best() const;
};

MvpaReport mvpa_search(const Dataset& data, const std::vector<int>& screened, const MvpaOptions& opt = {});

inline const std::array<const char*, 6> kMeasureNames = {"ce_pct",   "oe_pct",      "cvs_mean",
                                                          "cvs_var", "hrt_mean_ms", "hrt_var"};

struct BehaviorCorrelations {
  Eigen::Matrix<double, 6, 6> r;
  Eigen::Matrix<double, 6, 6> p;
  std::array<std::array<bool, 6>, 6> significant{};  // FDR over off-diagonal pairs
  std::array<bool, 6> defined{};
};

/// Pearson matrix over the six summary measures, FDR-corrected at q.
BehaviorCorrelations behavioral_correlations(const std::vector<PerformanceSummary>& summaries,
                                             double q = 0.05);

std::array<std::optional<double>, 6> measure_values(const PerformanceSummary& s);

}  // namespace vigilkit::relevance
