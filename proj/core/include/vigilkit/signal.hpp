#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "vigilkit/ica.hpp"

namespace vigilkit::eeg {

enum class EyeState { EyesOpen, EyesClosed };

/// Multichannel recording; `data` is channels x samples in microvolts.
struct Recording {
  double fs_hz = 0.0;
  Eigen::MatrixXd data;
  std::vector<std::string> channel_names;
  std::vector<std::string> eog_channels;
  EyeState state = EyeState::EyesOpen;

  Eigen::Index channels() const { return data.rows(); }
  Eigen::Index samples() const { return data.cols(); }
  double duration_s() const { return static_cast<double>(samples()) / fs_hz; }

  /// -1 when absent.
  int index_of(const std::string& name) const;
  std::vector<int> eog_indices() const;
  std::vector<int> scalp_indices() const;

  /// Throws ArgumentError on shape mismatch, unknown EOG names, or non-finite samples.
  void validate() const;
};

struct Band {
  double lo_hz;
  double hi_hz;
  std::string name;
};

inline constexpr std::size_t kBandCount = 12;
inline constexpr std::size_t kRoiCount = 14;
inline constexpr std::size_t kFeatureCount = kBandCount * kRoiCount;

/// Twelve sorted, contiguous, half-open [lo, hi) bands.
class BandSet {
 public:
  explicit BandSet(std::vector<Band> bands);
  static BandSet defaults();

  const std::vector<Band>& bands() const { return bands_; }
  const Band& operator[](std::size_t i) const { return bands_[i]; }
  std::size_t size() const { return bands_.size(); }

 private:
  std::vector<Band> bands_;
};

struct Roi {
  std::string label;
  std::vector<std::string> channels;
};

/// Fourteen disjoint, non-empty channel groups in rendering order.
class RoiMap {
 public:
  explicit RoiMap(std::vector<Roi> rois);
  /// Grouping of the 64-channel 10-20 (BioSemi) montage.
  static RoiMap biosemi64();

  const std::vector<Roi>& rois() const { return rois_; }
  const Roi& operator[](std::size_t i) const { return rois_[i]; }
  std::size_t size() const { return rois_.size(); }

 private:
  std::vector<Roi> rois_;
};

inline const std::array<const char*, kRoiCount> kRoiLabels = {
    "LPF", "MPF", "RPF", "LF", "MF", "RF", "LC", "MC", "RC", "LP", "MP", "RP", "LT", "RT"};

/// ROI-major then band; entry [r * 12 + b].
using BpRoiVector = std::array<double, kFeatureCount>;

/// "LPF_delta", ... in BpRoiVector order.
std::vector<std::string> feature_names(const BandSet& bands, const RoiMap& rois);

// --- filtering -------------------------------------------------------------

/// Zero-phase 4th-order Butterworth band-pass on every channel.
Recording bandpass(const Recording& rec, double lo_hz = 1.0, double hi_hz = 70.0);

/// Zero-phase second-order notch.
Recording notch(const Recording& rec, double f0_hz = 50.0, double q = 30.0);

/// Zero-phase anti-alias low-pass then integer downsampling.
/// Throws if fs / target is not an integer or target < min_fs_hz.
Recording decimate(const Recording& rec, double target_fs_hz = 256.0, double min_fs_hz = 140.0);

// --- ocular regression -----------------------------------------------------

struct EogRegression {
  Recording cleaned;                 // scalp channels only
  Eigen::MatrixXd coefficients;      // scalp x used ocular regressors
  std::vector<std::string> used_regressors;
  std::vector<std::string> warnings;
};

/// Removes the least-squares projection of each scalp channel onto the
/// (mean-removed) ocular channels. Degenerate ocular channels are skipped.
EogRegression regress_out_eog(const Recording& rec);

// --- spectra ---------------------------------------------------------------

enum class RoiAggregation { AverageThenNormalize, NormalizeThenAverage };

struct SpectrumOptions {
  RoiAggregation aggregation = RoiAggregation::AverageThenNormalize;
  /// 0 uses a single FFT of the whole recording; otherwise Hann-windowed
  /// segments of this length with 50% overlap are averaged.
  double welch_segment_s = 0.0;
  double min_duration_s = 10.0;
};

struct RoiSpectrum {
  Eigen::MatrixXd band_power;   // rois x bands
  Eigen::VectorXd total_power;  // rois; all one-sided bins
};

/// channels x bands powers: sum of |X_k|^2 over bins with frequency in [lo, hi).
Eigen::MatrixXd channel_band_powers(const Recording& rec, const BandSet& bands,
                                    const SpectrumOptions& opt = {});

/// ROI band powers before normalisation (mean over member channels).
RoiSpectrum roi_band_powers(const Recording& rec, const BandSet& bands, const RoiMap& rois,
                            const SpectrumOptions& opt = {});

BpRoiVector band_power_ratios(const Recording& rec, const BandSet& bands, const RoiMap& rois,
                              const SpectrumOptions& opt = {});

// --- full pipeline ---------------------------------------------------------

struct FeatureConfig {
  double bandpass_lo_hz = 1.0;
  double bandpass_hi_hz = 70.0;
  double notch_hz = 50.0;
  double notch_q = 30.0;
  double target_fs_hz = 256.0;
  ica::IcaOptions ica{};
  ica::RejectionThresholds rejection{};
  SpectrumOptions spectrum{};
  BandSet bands = BandSet::defaults();
  RoiMap rois = RoiMap::biosemi64();
};

struct Provenance {
  int n_components = 0;
  int rejected_ics = 0;
  bool ica_converged = false;
  int ica_sweeps = 0;
  std::vector<std::string> warnings;
};

struct FeatureExtraction {
  BpRoiVector features{};
  Provenance provenance;
};

/// bandpass -> notch -> decimate -> EOG regression -> ICA -> IC rejection ->
/// back-projection -> band-power ratios.
FeatureExtraction extract_features(const Recording& raw, const FeatureConfig& config = {});

}  // namespace vigilkit::eeg
