#include "vigilkit/nn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "vigilkit/error.hpp"
#include "vigilkit/parallel.hpp"

namespace vigilkit::nn {

std::vector<double> log_grid(double lo, double hi, int count) {
  if (count < 1 || !(lo > 0) || !(hi >= lo)) throw ArgumentError("log_grid: invalid range");
  std::vector<double> g(static_cast<std::size_t>(count));
  const double a = std::log10(lo);
  const double b = std::log10(hi);
  for (int i = 0; i < count; ++i)
    g[static_cast<std::size_t>(i)] = count == 1 ? lo : std::pow(10.0, a + (b - a) * i / (count - 1));
  g.front() = lo;
  g.back() = hi;
  return g;
}

void NnConfig::validate() const {
  auto increasing = [](const std::vector<double>& g) {
    return !g.empty() && std::adjacent_find(g.begin(), g.end(), std::greater_equal<>()) == g.end();
  };
  if (!increasing(lr_grid) || !increasing(l2_grid)) throw ArgumentError("NN grids must be strictly increasing");
  if (hidden_units.empty() || *std::min_element(hidden_units.begin(), hidden_units.end()) < 1)
    throw ArgumentError("hidden unit counts must be >= 1");
  if (minibatch < 1 || max_epochs < 1 || patience_epochs < 1 || runs < 1 || input_dim < 1)
    throw ArgumentError("NN minibatch, epochs, patience, runs and input_dim must be >= 1");
}

// --- parameters ------------------------------------------------------------

NnParams::NnParams(int units, int inputs)
    : units_(units), inputs_(inputs),
      theta_(Eigen::VectorXd::Zero(Eigen::Index{units} * inputs + 2 * Eigen::Index{units} + 1)) {
  if (units < 1 || inputs < 1) throw ArgumentError("NnParams: units and inputs must be >= 1");
}

NnParams NnParams::initialize(int units, int inputs, std::mt19937_64& rng) {
  NnParams p(units, inputs);
  std::normal_distribution<double> in_dist(0.0, 1.0 / std::sqrt(static_cast<double>(inputs)));
  std::normal_distribution<double> out_dist(0.0, 1.0 / std::sqrt(static_cast<double>(units)));
  auto w1 = p.w1();
  for (Eigen::Index j = 0; j < w1.cols(); ++j)
    for (Eigen::Index i = 0; i < w1.rows(); ++i) w1(i, j) = in_dist(rng);
  auto w2 = p.w2();
  for (Eigen::Index i = 0; i < w2.size(); ++i) w2(i) = out_dist(rng);
  return p;
}

double forward(const NnParams& p, const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() != p.inputs()) throw ArgumentError("forward: input has wrong dimension");
  if (!x.allFinite()) throw NumericError("forward: non-finite input");
  const Eigen::VectorXd h = (p.w1() * x + p.b1()).cwiseMax(0.0);
  return p.w2().dot(h) + p.b2();
}

Eigen::VectorXd predict(const NnParams& p, const Eigen::MatrixXd& x) {
  if (x.cols() != p.inputs()) throw ArgumentError("predict: input has wrong dimension");
  if (!x.allFinite()) throw NumericError("predict: non-finite input");
  Eigen::MatrixXd z = p.w1() * x.transpose();
  z.colwise() += p.b1();
  return (z.cwiseMax(0.0).transpose() * p.w2()).array() + p.b2();
}

namespace {

// Scratch buffers for one batch size; avoids allocation inside the epoch loop.
struct Workspace {
  Eigen::MatrixXd z, dz;
  Eigen::VectorXd resid;
};

double loss_grad_into(const NnParams& p, const Eigen::Ref<const Eigen::MatrixXd>& x,
                      const Eigen::Ref<const Eigen::VectorXd>& y, double lambda, Eigen::VectorXd& grad,
                      Workspace& ws, double* data_loss = nullptr, double* penalty = nullptr) {
  const Eigen::Index b = x.rows();
  const int u = p.units();
  ws.z.noalias() = p.w1() * x.transpose();  // U x B
  ws.z.colwise() += p.b1();
  ws.dz = ws.z.cwiseMax(0.0);               // hidden activations for now
  ws.resid.noalias() = ws.dz.transpose() * p.w2();
  ws.resid.array() += p.b2() - y.array();
  const double mse = ws.resid.squaredNorm() / static_cast<double>(b);
  const double reg = lambda * (p.w1().squaredNorm() + p.w2().squaredNorm());

  grad.resize(p.size());
  const Eigen::VectorXd dy = ws.resid * (2.0 / static_cast<double>(b));
  const Eigen::Index w1n = Eigen::Index{u} * p.inputs();
  Eigen::Map<Eigen::MatrixXd> g_w1(grad.data(), u, p.inputs());
  Eigen::Map<Eigen::VectorXd> g_b1(grad.data() + w1n, u);
  Eigen::Map<Eigen::VectorXd> g_w2(grad.data() + w1n + u, u);
  g_w2.noalias() = ws.dz * dy;
  grad(grad.size() - 1) = dy.sum();
  // dZ = (w2 dyᵀ) ∘ 1[z > 0]
  for (Eigen::Index c = 0; c < b; ++c)
    for (Eigen::Index i = 0; i < u; ++i) ws.dz(i, c) = ws.z(i, c) > 0.0 ? p.w2()(i) * dy(c) : 0.0;
  g_w1.noalias() = ws.dz * x;
  g_b1 = ws.dz.rowwise().sum();
  if (lambda != 0.0) {
    g_w1 += (2.0 * lambda) * p.w1();
    g_w2 += (2.0 * lambda) * p.w2();
  }
  if (data_loss) *data_loss = mse;
  if (penalty) *penalty = reg;
  return mse + reg;
}

double mse(const NnParams& p, const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  return (predict(p, x) - y).squaredNorm() / static_cast<double>(y.size());
}

}  // namespace

LossGrad loss_and_grads(const NnParams& p, const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda) {
  if (x.rows() == 0 || x.rows() != y.size()) throw ArgumentError("loss_and_grads: empty or mismatched batch");
  if (x.cols() != p.inputs()) throw ArgumentError("loss_and_grads: input has wrong dimension");
  LossGrad out;
  Workspace ws;
  out.loss = loss_grad_into(p, x, y, lambda, out.grad, ws, &out.data_loss, &out.penalty);
  return out;
}

void adam_step(Eigen::VectorXd& theta, const Eigen::VectorXd& grad, AdamState& s, double lr) {
  if (s.m.size() != theta.size()) {
    s.m = Eigen::VectorXd::Zero(theta.size());
    s.v = Eigen::VectorXd::Zero(theta.size());
  }
  ++s.t;
  s.m = s.beta1 * s.m + (1.0 - s.beta1) * grad;
  s.v = s.beta2 * s.v + (1.0 - s.beta2) * grad.cwiseAbs2();
  const double c1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.t));
  const double c2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.t));
  // lr * (m / c1) / (sqrt(v / c2) + eps), rearranged to one sqrt and one division per element
  const double step = lr * std::sqrt(c2) / c1;
  const double eps = s.eps * std::sqrt(c2);
  theta.array() -= step * s.m.array() / (s.v.array().sqrt() + eps);
}

// --- training --------------------------------------------------------------

FoldResult train_fold(const Eigen::MatrixXd& x_train, const Eigen::VectorXd& y_train,
                      const Eigen::MatrixXd& x_val, const Eigen::VectorXd& y_val, int units, double lr,
                      double lambda, std::uint64_t seed, const NnConfig& config) {
  const Eigen::Index n = x_train.rows();
  if (n == 0 || y_train.size() != n) throw ArgumentError("train_fold: empty or mismatched training set");
  if (x_val.rows() == 0 || y_val.size() != x_val.rows()) throw ArgumentError("train_fold: empty validation set");
  if (x_val.cols() != x_train.cols()) throw ArgumentError("train_fold: train/validation width differ");

  std::mt19937_64 rng(seed);
  FoldResult res;
  NnParams p = NnParams::initialize(units, static_cast<int>(x_train.cols()), rng);
  AdamState adam(p.size());
  const Eigen::Index batch = std::min<Eigen::Index>(config.minibatch, n);

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  Eigen::MatrixXd xb(batch, x_train.cols());
  Eigen::VectorXd yb(batch);
  Eigen::VectorXd grad(p.size());
  Workspace ws;

  double best = std::numeric_limits<double>::infinity();
  res.params = p;
  int stale = 0;
  for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    int batches = 0;
    for (Eigen::Index start = 0; start < n; start += batch) {
      const Eigen::Index b = std::min(batch, n - start);
      for (Eigen::Index r = 0; r < b; ++r) {
        xb.row(r) = x_train.row(order[static_cast<std::size_t>(start + r)]);
        yb(r) = y_train(order[static_cast<std::size_t>(start + r)]);
      }
      epoch_loss += loss_grad_into(p, xb.topRows(b), yb.head(b), lambda, grad, ws);
      ++batches;
      adam_step(p.theta(), grad, adam, lr);
    }
    res.epochs = epoch + 1;
    res.train_loss.push_back(epoch_loss / batches);
    const double val = p.theta().allFinite() ? mse(p, x_val, y_val) : std::numeric_limits<double>::quiet_NaN();
    res.val_loss.push_back(val);
    if (!std::isfinite(val) || !std::isfinite(res.train_loss.back())) {
      res.diverged = true;
      break;
    }
    if (val < best) {
      best = val;
      res.params = p;
      stale = 0;
    } else if (++stale >= config.patience_epochs) {
      break;
    }
  }
  res.val_rmse = std::sqrt(best);
  return res;
}

namespace {

struct PreparedFold {
  Eigen::MatrixXd x_train;
  Eigen::VectorXd y_train;
  Eigen::MatrixXd x_val;
  double y_val = 0.0;
  double y_mean = 0.0;
  double y_sd = 1.0;
};

std::vector<PreparedFold> prepare_folds(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                        relevance::Standardization policy) {
  const Eigen::Index n = x.rows();
  std::vector<PreparedFold> folds(static_cast<std::size_t>(n));
  relevance::Scaler global;
  if (policy == relevance::Standardization::Global) global = relevance::Scaler::fit(x);
  for (Eigen::Index i = 0; i < n; ++i) {
    std::vector<Eigen::Index> train;
    for (Eigen::Index r = 0; r < n; ++r)
      if (r != i) train.push_back(r);
    auto& f = folds[static_cast<std::size_t>(i)];
    const Eigen::MatrixXd xt = x(train, Eigen::all);
    const relevance::Scaler s =
        policy == relevance::Standardization::PerFold ? relevance::Scaler::fit(xt) : global;
    f.x_train = s.transform(xt);
    f.x_val = s.transform(x.row(i));
    const Eigen::VectorXd yt = y(train);
    f.y_mean = yt.mean();
    const double var = (yt.array() - f.y_mean).square().sum() / std::max<double>(1.0, static_cast<double>(yt.size() - 1));
    f.y_sd = var > 0 ? std::sqrt(var) : 1.0;
    f.y_train = (yt.array() - f.y_mean) / f.y_sd;
    f.y_val = (y(i) - f.y_mean) / f.y_sd;
  }
  return folds;
}

struct CellOutcome {
  double sum_sq = 0.0;
  int ok = 0;
  int diverged = 0;
};

}  // namespace

GridResult grid_search_loocv(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, int units, const NnConfig& config) {
  config.validate();
  const Eigen::Index n = x.rows();
  if (n < 3) throw ArgumentError("grid_search_loocv: need at least 3 participants");
  if (y.size() != n) throw ArgumentError("grid_search_loocv: X and y row counts differ");
  if (!x.allFinite() || !y.allFinite()) throw ArgumentError("grid_search_loocv: non-finite data");

  const auto folds = prepare_folds(x, y, config.policy);
  const std::size_t n_lr = config.lr_grid.size();
  const std::size_t n_l2 = config.l2_grid.size();
  const auto n_folds = static_cast<std::size_t>(n);
  const auto runs = static_cast<std::size_t>(config.runs);

  auto run_fold = [&](std::size_t li, std::size_t ji, std::size_t m, std::size_t f) {
    const auto& pf = folds[f];
    Eigen::VectorXd yv(1);
    yv(0) = pf.y_val;
    return train_fold(pf.x_train, pf.y_train, pf.x_val, yv, units, config.lr_grid[li], config.l2_grid[ji],
                      derive_seed(config.seed, li, ji, m, f), config);
  };

  // One task per (cell, run, fold); reduction is a plain sum per cell.
  const std::size_t per_cell = runs * n_folds;
  std::vector<double> sq(n_lr * n_l2 * per_cell, 0.0);
  std::vector<char> bad(sq.size(), 0);
  parallel_for(sq.size(), config.threads, [&](std::size_t task) {
    const std::size_t cell = task / per_cell;
    const std::size_t rest = task % per_cell;
    const std::size_t li = cell / n_l2, ji = cell % n_l2;
    const std::size_t m = rest / n_folds, f = rest % n_folds;
    const auto r = run_fold(li, ji, m, f);
    if (r.diverged) {
      bad[task] = 1;
      return;
    }
    const double pred = predict(r.params, folds[f].x_val)(0) * folds[f].y_sd + folds[f].y_mean;
    const double e = y(static_cast<Eigen::Index>(f)) - pred;
    if (!std::isfinite(e)) bad[task] = 1;
    else sq[task] = e * e;
  });

  GridResult g;
  g.units = units;
  g.lr_grid = config.lr_grid;
  g.l2_grid = config.l2_grid;
  g.err.resize(static_cast<Eigen::Index>(n_lr), static_cast<Eigen::Index>(n_l2));
  g.diverged.resize(static_cast<Eigen::Index>(n_lr), static_cast<Eigen::Index>(n_l2));
  bool any = false;
  for (std::size_t li = 0; li < n_lr; ++li) {
    for (std::size_t ji = 0; ji < n_l2; ++ji) {
      CellOutcome c;
      const std::size_t base = (li * n_l2 + ji) * per_cell;
      for (std::size_t t = 0; t < per_cell; ++t) {
        if (bad[base + t]) ++c.diverged;
        else {
          c.sum_sq += sq[base + t];
          ++c.ok;
        }
      }
      const auto L = static_cast<Eigen::Index>(li), J = static_cast<Eigen::Index>(ji);
      g.diverged(L, J) = c.diverged;
      g.err(L, J) = c.ok > 0 ? c.sum_sq / c.ok : std::numeric_limits<double>::quiet_NaN();
    }
  }
  // argmin; smaller lr first, then larger l2
  for (std::size_t li = 0; li < n_lr; ++li) {
    for (std::size_t jj = n_l2; jj-- > 0;) {
      const double e = g.err(static_cast<Eigen::Index>(li), static_cast<Eigen::Index>(jj));
      if (std::isnan(e)) continue;
      if (!any || e < g.best_err) {
        any = true;
        g.best_err = e;
        g.best_lr = li;
        g.best_l2 = jj;
      }
    }
  }
  if (!any) throw NumericError("grid_search_loocv: every grid cell diverged");
  g.lr_star = config.lr_grid[g.best_lr];
  g.l2_star = config.l2_grid[g.best_l2];

  // Re-run the winning cell; seeds make this reproduce the surface entry exactly.
  g.best_predictions = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(runs), n,
                                                 std::numeric_limits<double>::quiet_NaN());
  std::vector<FoldResult> best(per_cell);
  parallel_for(per_cell, config.threads, [&](std::size_t t) { best[t] = run_fold(g.best_lr, g.best_l2, t / n_folds, t % n_folds); });
  for (std::size_t t = 0; t < per_cell; ++t) {
    if (best[t].diverged) continue;
    const std::size_t f = t % n_folds;
    g.best_predictions(static_cast<Eigen::Index>(t / n_folds), static_cast<Eigen::Index>(f)) =
        predict(best[t].params, folds[f].x_val)(0) * folds[f].y_sd + folds[f].y_mean;
    g.best_fold_params.push_back(std::move(best[t].params));
  }
  return g;
}

// --- weight maps -----------------------------------------------------------

Eigen::VectorXd WeightMap::normalized() const {
  const double m = values.size() ? values.cwiseAbs().maxCoeff() : 0.0;
  return m > 0 ? Eigen::VectorXd(values / m) : values;
}

WeightMap averaged_weights(const std::vector<NnParams>& folds) {
  if (folds.empty()) throw ArgumentError("averaged_weights: no successful folds");
  WeightMap w;
  w.values = Eigen::VectorXd::Zero(folds.front().inputs());
  for (const auto& p : folds) {
    if (p.inputs() != folds.front().inputs()) throw ArgumentError("averaged_weights: mixed input widths");
    w.values += p.w1().colwise().sum().transpose();
  }
  w.values /= static_cast<double>(folds.size());
  w.units = folds.front().units();
  w.averaged_over = static_cast<int>(folds.size());
  return w;
}

WeightMap averaged_weights(const GridResult& grid, int runs, int folds) {
  WeightMap w = averaged_weights(grid.best_fold_params);
  w.runs = runs;
  w.folds = folds;
  w.lr_star = grid.lr_star;
  w.l2_star = grid.l2_star;
  return w;
}

Heatmap weight_heatmap(const Eigen::VectorXd& values, const std::vector<std::string>& roi_labels,
                       const std::vector<std::string>& band_labels) {
  const auto rows = static_cast<Eigen::Index>(roi_labels.size());
  const auto cols = static_cast<Eigen::Index>(band_labels.size());
  if (values.size() != rows * cols) throw ArgumentError("weight_heatmap: value count differs from rois x bands");
  Heatmap h;
  h.row_labels = roi_labels;
  h.col_labels = band_labels;
  h.cells.resize(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) h.cells(r, c) = values(r * cols + c);
  return h;
}

Eigen::VectorXd flatten(const Heatmap& h) {
  Eigen::VectorXd v(h.cells.size());
  for (Eigen::Index r = 0; r < h.cells.rows(); ++r)
    for (Eigen::Index c = 0; c < h.cells.cols(); ++c) v(r * h.cells.cols() + c) = h.cells(r, c);
  return v;
}

}  // namespace vigilkit::nn
