#include "vigilkit/ica.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "vigilkit/error.hpp"

namespace vigilkit::ica {

namespace {

constexpr double kAnnealDegrees = 60.0;
constexpr double kAnnealStep = 0.9;
constexpr double kRestartFactor = 0.9;
constexpr double kMinLrate = 1e-6;
constexpr double kBlowup = 1e8;
constexpr int kMaxRestarts = 10;

double excess_kurtosis(const Eigen::Ref<const Eigen::RowVectorXd>& x) {
  const double m = x.mean();
  const Eigen::ArrayXd d = (x.array() - m).transpose();
  const double m2 = d.square().mean();
  if (m2 == 0.0) return 0.0;
  return d.square().square().mean() / (m2 * m2) - 3.0;
}

}  // namespace

IcaResult infomax(const Eigen::MatrixXd& data, const IcaOptions& opt) {
  const Eigen::Index chans = data.rows();
  const Eigen::Index t_len = data.cols();
  if (chans < 1) throw ArgumentError("infomax: no channels");
  if (t_len < 20 * chans)
    throw ArgumentError("infomax: need at least 20 x channels samples (" + std::to_string(20 * chans) +
                        "), got " + std::to_string(t_len));
  if (!data.allFinite()) throw ArgumentError("infomax: non-finite samples");

  IcaResult res;
  res.channel_mean = data.rowwise().mean();
  const Eigen::MatrixXd centered = data.colwise() - res.channel_mean;
  const Eigen::MatrixXd cov = centered * centered.transpose() / static_cast<double>(t_len - 1);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  const Eigen::VectorXd& evals = es.eigenvalues();  // ascending
  const double emax = evals(chans - 1);
  if (!(emax > 0)) throw PipelineError("infomax: data has zero variance");
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < chans; ++i) rank += evals(i) > 1e-10 * emax ? 1 : 0;
  Eigen::Index comps = rank;
  if (opt.n_components) {
    if (*opt.n_components < 1) throw ArgumentError("infomax: n_components must be >= 1");
    comps = std::min<Eigen::Index>(*opt.n_components, rank);
  }

  // PCA whitening onto the leading components.
  res.sphere.resize(comps, chans);
  for (Eigen::Index k = 0; k < comps; ++k) {
    const Eigen::Index src = chans - 1 - k;
    res.sphere.row(k) = es.eigenvectors().col(src).transpose() / std::sqrt(evals(src));
  }
  const Eigen::MatrixXd z = res.sphere * centered;

  const double base_lrate =
      opt.initial_lrate > 0 ? opt.initial_lrate
                            : 0.00065 / std::log(std::max<double>(2.0, static_cast<double>(comps)));
  const Eigen::Index block =
      opt.block_size > 0
          ? opt.block_size
          : static_cast<Eigen::Index>(std::ceil(std::min(5.0 * std::log(static_cast<double>(t_len)),
                                                         0.3 * static_cast<double>(t_len))));

  std::mt19937_64 rng(opt.seed);
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(t_len));
  std::iota(perm.begin(), perm.end(), Eigen::Index{0});

  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(comps, comps);
  Eigen::MatrixXd w = eye;
  Eigen::VectorXd bias = Eigen::VectorXd::Zero(comps);
  Eigen::MatrixXd old_w = w;
  Eigen::MatrixXd old_delta;
  double old_change = 0.0;
  double lrate = base_lrate;
  int restarts = 0;
  int sweep = 0;

  Eigen::MatrixXd zb(comps, block);
  Eigen::MatrixXd u(comps, block);
  Eigen::MatrixXd y(comps, block);

  while (sweep < opt.max_sweeps) {
    std::shuffle(perm.begin(), perm.end(), rng);
    bool blowup = false;
    for (Eigen::Index t0 = 0; t0 < t_len && !blowup; t0 += block) {
      const Eigen::Index b = std::min(block, t_len - t0);
      zb.resize(comps, b);
      for (Eigen::Index j = 0; j < b; ++j) zb.col(j) = z.col(perm[static_cast<std::size_t>(t0 + j)]);
      u.noalias() = w * zb;
      u.colwise() += bias;
      y = 1.0 - 2.0 / (1.0 + (-u.array()).exp());
      Eigen::MatrixXd grad = static_cast<double>(b) * eye;
      grad.noalias() += y * u.transpose();
      w += lrate * (grad * w);
      bias += lrate * y.rowwise().sum();
      blowup = !w.allFinite() || w.cwiseAbs().maxCoeff() > kBlowup;
    }
    if (blowup) {
      if (++restarts > kMaxRestarts) break;
      lrate *= kRestartFactor;
      w = eye;
      bias.setZero();
      old_w = w;
      old_delta.resize(0, 0);
      sweep = 0;
      continue;
    }
    ++sweep;
    const Eigen::MatrixXd delta = w - old_w;
    const double change = delta.squaredNorm();
    res.final_change = change;
    if (sweep == 1) {
      old_delta = delta;
      old_change = change;
    } else if (sweep > 2 && old_change > 0 && change > 0) {
      const double cosang = std::clamp((delta.array() * old_delta.array()).sum() /
                                           std::sqrt(change * old_change),
                                       -1.0, 1.0);
      const double angle = std::acos(cosang) * 180.0 / std::numbers::pi;
      if (angle > kAnnealDegrees) {
        lrate *= kAnnealStep;
        old_delta = delta;
        old_change = change;
      }
    }
    old_w = w;
    if (sweep > 2 && change < opt.tolerance) {
      res.converged = true;
      break;
    }
    if (lrate < kMinLrate) break;
  }
  res.sweeps = sweep;

  res.weights = w;
  Eigen::MatrixXd unmix = w * res.sphere;
  res.sources = unmix * centered;
  for (Eigen::Index k = 0; k < comps; ++k) {
    const double m = res.sources.row(k).mean();
    const double sd =
        std::sqrt((res.sources.row(k).array() - m).square().sum() / static_cast<double>(t_len - 1));
    if (sd > 0) {
      res.sources.row(k) /= sd;
      unmix.row(k) /= sd;
    }
  }
  res.unmixing = unmix;
  res.mixing = unmix.completeOrthogonalDecomposition().pseudoInverse();

  const double gauss_tol = std::max(0.05, 4.0 * std::sqrt(24.0 / static_cast<double>(t_len)));
  int gaussian_like = 0;
  for (Eigen::Index k = 0; k < comps; ++k)
    gaussian_like += std::fabs(excess_kurtosis(res.sources.row(k))) < gauss_tol ? 1 : 0;
  res.identifiable = gaussian_like <= 1;
  return res;
}

double amari_index(const Eigen::MatrixXd& p) {
  const Eigen::Index n = p.rows();
  if (n != p.cols() || n < 2) throw ArgumentError("amari_index needs a square matrix of size >= 2");
  const Eigen::MatrixXd a = p.cwiseAbs();
  double rows = 0.0, cols = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    rows += a.row(i).sum() / a.row(i).maxCoeff() - 1.0;
    cols += a.col(i).sum() / a.col(i).maxCoeff() - 1.0;
  }
  return (rows + cols) / (2.0 * static_cast<double>(n) * static_cast<double>(n - 1));
}

std::vector<bool> reject_artifact_ics(const Eigen::MatrixXd& sources, const RejectionThresholds& th) {
  std::vector<bool> keep(static_cast<std::size_t>(sources.rows()), false);
  const auto n = static_cast<double>(sources.cols());
  if (sources.cols() < 2) return keep;
  for (Eigen::Index k = 0; k < sources.rows(); ++k) {
    const auto row = sources.row(k).array();
    const double m = row.mean();
    const double sd = std::sqrt((row - m).square().sum() / (n - 1.0));
    if (!(sd > 0) || !std::isfinite(sd)) continue;
    const double max_z = ((row - m) / sd).abs().maxCoeff();
    const double kurt = excess_kurtosis(sources.row(k));
    keep[static_cast<std::size_t>(k)] = !(max_z > th.max_abs_z || kurt > th.excess_kurtosis);
  }
  return keep;
}

Eigen::MatrixXd reconstruct(const Eigen::MatrixXd& sources, const std::vector<bool>& keep,
                            const Eigen::MatrixXd& mixing, const Eigen::VectorXd& channel_offset) {
  if (mixing.cols() != sources.rows() || keep.size() != static_cast<std::size_t>(sources.rows()))
    throw ArgumentError("reconstruct: dimension mismatch between mixing, sources and mask");
  if (channel_offset.size() != 0 && channel_offset.size() != mixing.rows())
    throw ArgumentError("reconstruct: offset length differs from channel count");
  if (std::none_of(keep.begin(), keep.end(), [](bool k) { return k; }))
    throw ArgumentError("reconstruct: mask keeps no component");
  Eigen::MatrixXd kept = sources;
  for (std::size_t k = 0; k < keep.size(); ++k) {
    if (!keep[k]) kept.row(static_cast<Eigen::Index>(k)).setZero();
  }
  Eigen::MatrixXd out = mixing * kept;
  if (channel_offset.size() != 0) out.colwise() += channel_offset;
  return out;
}

}  // namespace vigilkit::ica
