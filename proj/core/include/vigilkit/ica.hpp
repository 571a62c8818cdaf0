#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace vigilkit::ica {

struct IcaOptions {
  std::uint64_t seed = 1;
  int max_sweeps = 512;
  /// Stop when the squared Frobenius norm of the per-sweep weight change drops below this.
  double tolerance = 1e-6;
  /// Number of principal components kept before unmixing; empty keeps the numerical rank.
  std::optional<int> n_components;
  /// 0 selects 0.00065 / log(components).
  double initial_lrate = 0.0;
  /// 0 selects ceil(min(5 log T, 0.3 T)).
  int block_size = 0;
};

struct IcaResult {
  Eigen::VectorXd channel_mean;  // removed before whitening
  Eigen::MatrixXd sphere;        // components x channels whitening
  Eigen::MatrixXd weights;       // components x components, acts on whitened data
  Eigen::MatrixXd unmixing;      // components x channels, yields unit-variance ICs
  Eigen::MatrixXd mixing;        // channels x components
  Eigen::MatrixXd sources;       // components x samples
  bool converged = false;
  /// False when more than one component is indistinguishable from Gaussian,
  /// in which case the rotation among those components is arbitrary.
  bool identifiable = true;
  int sweeps = 0;
  double final_change = 0.0;
};

/// Logistic Infomax with natural-gradient block updates and annealed learning rate.
/// Requires samples >= 20 x channels.
IcaResult infomax(const Eigen::MatrixXd& data, const IcaOptions& opt = {});

/// Permutation- and scale-invariant separation error of P = W A; 0 is perfect.
double amari_index(const Eigen::MatrixXd& p);

struct RejectionThresholds {
  double max_abs_z = 5.0;
  double excess_kurtosis = 8.0;
};

/// Keep mask over IC rows: false when the z-scored time course exceeds either
/// threshold or has zero variance.
std::vector<bool> reject_artifact_ics(const Eigen::MatrixXd& sources,
                                      const RejectionThresholds& th = {});

/// mixing x (sources with rejected rows zeroed) + offset.
Eigen::MatrixXd reconstruct(const Eigen::MatrixXd& sources, const std::vector<bool>& keep,
                            const Eigen::MatrixXd& mixing,
                            const Eigen::VectorXd& channel_offset = Eigen::VectorXd());

}  // namespace vigilkit::ica
