#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "vigilkit/relevance.hpp"

namespace vigilkit::nn {

/// Evenly spaced in log10 between lo and hi inclusive.
std::vector<double> log_grid(double lo, double hi, int count);

struct NnConfig {
  int input_dim = 168;
  std::vector<int> hidden_units{40, 90, 110, 130};
  int max_epochs = 1000;
  int minibatch = 8;
  int patience_epochs = 1;
  std::vector<double> lr_grid = log_grid(1e-5, 1e-1, 15);
  std::vector<double> l2_grid = log_grid(0.01, 10.0, 15);
  int runs = 10;
  std::uint64_t seed = 1;
  relevance::Standardization policy = relevance::Standardization::PerFold;
  unsigned threads = 1;

  void validate() const;
};

/// One hidden ReLU layer and a linear output. All parameters live in one
/// contiguous vector laid out as [W1 (column-major U x D), b1, w2, b2].
class NnParams {
 public:
  NnParams() = default;
  NnParams(int units, int inputs);

  /// W1 ~ N(0, 1/D), w2 ~ N(0, 1/U), biases zero.
  static NnParams initialize(int units, int inputs, std::mt19937_64& rng);

  int units() const { return units_; }
  int inputs() const { return inputs_; }
  Eigen::Index size() const { return theta_.size(); }

  Eigen::VectorXd& theta() { return theta_; }
  const Eigen::VectorXd& theta() const { return theta_; }

  Eigen::Map<Eigen::MatrixXd> w1() { return {theta_.data(), units_, inputs_}; }
  Eigen::Map<const Eigen::MatrixXd> w1() const { return {theta_.data(), units_, inputs_}; }
  Eigen::Map<Eigen::VectorXd> b1() { return {theta_.data() + w1_size(), units_}; }
  Eigen::Map<const Eigen::VectorXd> b1() const { return {theta_.data() + w1_size(), units_}; }
  Eigen::Map<Eigen::VectorXd> w2() { return {theta_.data() + w1_size() + units_, units_}; }
  Eigen::Map<const Eigen::VectorXd> w2() const { return {theta_.data() + w1_size() + units_, units_}; }
  double& b2() { return theta_(theta_.size() - 1); }
  double b2() const { return theta_(theta_.size() - 1); }

 private:
  Eigen::Index w1_size() const { return Eigen::Index{units_} * inputs_; }

  int units_ = 0;
  int inputs_ = 0;
  Eigen::VectorXd theta_;
};

/// w2 . relu(W1 x + b1) + b2. Throws NumericError on non-finite input.
double forward(const NnParams& p, const Eigen::Ref<const Eigen::VectorXd>& x);

/// Row-wise predictions for a samples x inputs matrix.
Eigen::VectorXd predict(const NnParams& p, const Eigen::MatrixXd& x);

struct LossGrad {
  double loss = 0.0;         // MSE + lambda * (|W1|^2 + |w2|^2)
  double data_loss = 0.0;    // MSE alone
  double penalty = 0.0;      // lambda * (|W1|^2 + |w2|^2)
  Eigen::VectorXd grad;      // theta layout
};

LossGrad loss_and_grads(const NnParams& p, const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda);

struct AdamState {
  Eigen::VectorXd m;
  Eigen::VectorXd v;
  long t = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  explicit AdamState(Eigen::Index n = 0) : m(Eigen::VectorXd::Zero(n)), v(Eigen::VectorXd::Zero(n)) {}
};

/// One bias-corrected Adam update of theta in place.
void adam_step(Eigen::VectorXd& theta, const Eigen::VectorXd& grad, AdamState& state, double lr);

struct FoldResult {
  NnParams params;          // parameters from the best-validation epoch
  double val_rmse = 0.0;    // at the best epoch
  int epochs = 0;
  bool diverged = false;
  std::vector<double> train_loss;  // mean minibatch loss per epoch
  std::vector<double> val_loss;    // validation MSE per epoch
};

/// Shuffled minibatch Adam with validation patience.
FoldResult train_fold(const Eigen::MatrixXd& x_train, const Eigen::VectorXd& y_train,
                      const Eigen::MatrixXd& x_val, const Eigen::VectorXd& y_val, int units, double lr,
                      double lambda, std::uint64_t seed, const NnConfig& config);

struct GridResult {
  int units = 0;
  std::vector<double> lr_grid;
  std::vector<double> l2_grid;
  Eigen::MatrixXd err;                    // lr x l2; NaN where infeasible
  Eigen::MatrixXi diverged;               // diverged folds per cell
  std::size_t best_lr = 0;
  std::size_t best_l2 = 0;
  double lr_star = 0.0;
  double l2_star = 0.0;
  double best_err = 0.0;
  std::vector<NnParams> best_fold_params;  // runs x folds at (lr*, l2*), successful folds only
  Eigen::MatrixXd best_predictions;        // runs x N held-out predictions (NaN if diverged)
};

/// Full err_LOOCV surface over the lr x l2 grid for one hidden-unit count;
/// (lr*, l2*) is the argmin, ties toward smaller lr then larger l2.
GridResult grid_search_loocv(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, int units,
                             const NnConfig& config);

struct WeightMap {
  Eigen::VectorXd values;  // BpRoiVector ordering
  int runs = 0;
  int folds = 0;
  int units = 0;
  double lr_star = 0.0;
  double l2_star = 0.0;
  int averaged_over = 0;   // successful folds

  /// values / max|values| (unchanged if all zero).
  Eigen::VectorXd normalized() const;
};

/// Sum of first-layer weights over hidden units, averaged over folds.
WeightMap averaged_weights(const std::vector<NnParams>& folds);
WeightMap averaged_weights(const GridResult& grid, int runs, int folds);

struct Heatmap {
  Eigen::MatrixXd cells;  // rois x bands
  std::vector<std::string> row_labels;
  std::vector<std::string> col_labels;
};

Heatmap weight_heatmap(const Eigen::VectorXd& values, const std::vector<std::string>& roi_labels,
                       const std::vector<std::string>& band_labels);
Eigen::VectorXd flatten(const Heatmap& h);

}  // namespace vigilkit::nn
