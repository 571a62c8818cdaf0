#include "vigilkit/signal.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <numbers>
#include <set>

#include <fftw3.h>

#include "vigilkit/error.hpp"
#include "vigilkit/filter.hpp"

namespace vigilkit::eeg {

// --- Recording -------------------------------------------------------------

int Recording::index_of(const std::string& name) const {
  auto it = std::find(channel_names.begin(), channel_names.end(), name);
  return it == channel_names.end() ? -1 : static_cast<int>(it - channel_names.begin());
}

std::vector<int> Recording::eog_indices() const {
  std::vector<int> idx;
  for (const auto& n : eog_channels) {
    const int i = index_of(n);
    if (i < 0) throw ArgumentError("ocular channel '" + n + "' not in recording");
    idx.push_back(i);
  }
  return idx;
}

std::vector<int> Recording::scalp_indices() const {
  const auto eog = eog_indices();
  std::vector<int> idx;
  for (int i = 0; i < static_cast<int>(channel_names.size()); ++i) {
    if (std::find(eog.begin(), eog.end(), i) == eog.end()) idx.push_back(i);
  }
  return idx;
}

void Recording::validate() const {
  if (!(fs_hz > 0)) throw ArgumentError("recording sampling rate must be positive");
  if (static_cast<std::size_t>(data.rows()) != channel_names.size())
    throw ArgumentError("recording has " + std::to_string(data.rows()) + " data rows but " +
                        std::to_string(channel_names.size()) + " channel names");
  std::set<std::string> unique(channel_names.begin(), channel_names.end());
  if (unique.size() != channel_names.size()) throw ArgumentError("duplicate channel names");
  (void)eog_indices();
  if (!data.allFinite()) throw ArgumentError("recording contains NaN or Inf samples");
}

// --- bands and ROIs --------------------------------------------------------

BandSet::BandSet(std::vector<Band> bands) : bands_(std::move(bands)) {
  if (bands_.size() != kBandCount)
    throw ArgumentError("band set must have exactly 12 bands, got " + std::to_string(bands_.size()));
  for (std::size_t i = 0; i < bands_.size(); ++i) {
    if (!(bands_[i].lo_hz >= 0 && bands_[i].lo_hz < bands_[i].hi_hz))
      throw ArgumentError("band '" + bands_[i].name + "' has lo >= hi");
    if (i > 0 && bands_[i].lo_hz != bands_[i - 1].hi_hz)
      throw ArgumentError("bands must be sorted and contiguous ('" + bands_[i - 1].name + "' -> '" +
                          bands_[i].name + "')");
  }
}

BandSet BandSet::defaults() {
  return BandSet({{1, 4, "delta"},
                  {4, 8, "theta"},
                  {8, 10, "alpha1"},
                  {10, 12, "alpha2"},
                  {12, 16, "beta1"},
                  {16, 20, "beta2"},
                  {20, 24, "beta3"},
                  {24, 28, "beta4"},
                  {28, 32, "gamma1"},
                  {32, 36, "gamma2"},
                  {36, 42, "gamma3"},
                  {42, 48, "gamma4"}});
}

RoiMap::RoiMap(std::vector<Roi> rois) : rois_(std::move(rois)) {
  if (rois_.size() != kRoiCount)
    throw ArgumentError("ROI map must have exactly 14 regions, got " + std::to_string(rois_.size()));
  std::set<std::string> seen;
  for (const auto& r : rois_) {
    if (r.channels.empty()) throw ArgumentError("ROI '" + r.label + "' is empty");
    for (const auto& c : r.channels) {
      if (!seen.insert(c).second)
        throw ArgumentError("channel '" + c + "' appears in more than one ROI");
    }
  }
}

RoiMap RoiMap::biosemi64() {
  return RoiMap({
      {"LPF", {"Fp1", "AF7", "AF3"}},
      {"MPF", {"Fpz", "AFz"}},
      {"RPF", {"Fp2", "AF8", "AF4"}},
      {"LF", {"F7", "F5", "F3", "F1"}},
      {"MF", {"Fz"}},
      {"RF", {"F2", "F4", "F6", "F8"}},
      {"LC", {"FC5", "FC3", "FC1", "C5", "C3", "C1"}},
      {"MC", {"FCz", "Cz", "CPz"}},
      {"RC", {"FC2", "FC4", "FC6", "C2", "C4", "C6"}},
      {"LP", {"CP5", "CP3", "CP1", "P7", "P5", "P3", "P1", "PO7", "PO3", "O1"}},
      {"MP", {"Pz", "POz", "Oz", "Iz"}},
      {"RP", {"CP6", "CP4", "CP2", "P8", "P6", "P4", "P2", "PO8", "PO4", "O2"}},
      {"LT", {"FT7", "T7", "TP7", "P9"}},
      {"RT", {"FT8", "T8", "TP8", "P10"}},
  });
}

std::vector<std::string> feature_names(const BandSet& bands, const RoiMap& rois) {
  std::vector<std::string> names;
  names.reserve(kFeatureCount);
  for (const auto& r : rois.rois())
    for (const auto& b : bands.bands()) names.push_back(r.label + "_" + b.name);
  return names;
}

// --- filtering -------------------------------------------------------------

namespace {

void filter_rows(Eigen::MatrixXd& data, const dsp::SosFilter& f, std::size_t padlen) {
  std::vector<double> row(static_cast<std::size_t>(data.cols()));
  for (Eigen::Index c = 0; c < data.rows(); ++c) {
    Eigen::Map<Eigen::RowVectorXd>(row.data(), data.cols()) = data.row(c);
    f.filtfilt(row, padlen);
    data.row(c) = Eigen::Map<const Eigen::RowVectorXd>(row.data(), data.cols());
  }
}

}  // namespace

Recording bandpass(const Recording& rec, double lo_hz, double hi_hz) {
  if (!(hi_hz < rec.fs_hz / 2.0))
    throw ArgumentError("band-pass high edge must be below Nyquist");
  const auto f = dsp::butterworth_bandpass(4, lo_hz, hi_hz, rec.fs_hz);
  Recording out = rec;
  const auto pad = static_cast<std::size_t>(std::ceil(3.0 * rec.fs_hz / lo_hz));
  filter_rows(out.data, f, pad);
  return out;
}

Recording notch(const Recording& rec, double f0_hz, double q) {
  if (!(f0_hz < rec.fs_hz / 2.0)) throw ArgumentError("notch frequency must be below Nyquist");
  const auto f = dsp::iir_notch(f0_hz, q, rec.fs_hz);
  Recording out = rec;
  const auto pad = static_cast<std::size_t>(std::ceil(3.0 * q * rec.fs_hz / f0_hz));
  filter_rows(out.data, f, pad);
  return out;
}

Recording decimate(const Recording& rec, double target_fs_hz, double min_fs_hz) {
  if (target_fs_hz < min_fs_hz)
    throw ArgumentError("decimation target " + std::to_string(target_fs_hz) +
                        " Hz is below the required minimum of " + std::to_string(min_fs_hz) + " Hz");
  const double ratio = rec.fs_hz / target_fs_hz;
  const double rounded = std::round(ratio);
  if (rounded < 1 || std::fabs(ratio - rounded) > 1e-9)
    throw ArgumentError("sampling rate " + std::to_string(rec.fs_hz) +
                        " Hz is not an integer multiple of " + std::to_string(target_fs_hz) + " Hz");
  const auto q = static_cast<Eigen::Index>(rounded);
  if (q == 1) return rec;
  Recording filtered = rec;
  const auto lp = dsp::butterworth_lowpass(8, 0.8 * target_fs_hz / 2.0, rec.fs_hz);
  filter_rows(filtered.data, lp, static_cast<std::size_t>(10 * q * 8));
  const Eigen::Index n_out = (rec.samples() + q - 1) / q;
  Recording out = rec;
  out.fs_hz = target_fs_hz;
  out.data.resize(rec.channels(), n_out);
  for (Eigen::Index j = 0; j < n_out; ++j) out.data.col(j) = filtered.data.col(j * q);
  return out;
}

// --- ocular regression -----------------------------------------------------

EogRegression regress_out_eog(const Recording& rec) {
  rec.validate();
  EogRegression res;
  const auto eog_idx = rec.eog_indices();
  const auto scalp_idx = rec.scalp_indices();

  Eigen::MatrixXd scalp(static_cast<Eigen::Index>(scalp_idx.size()), rec.samples());
  for (std::size_t i = 0; i < scalp_idx.size(); ++i)
    scalp.row(static_cast<Eigen::Index>(i)) = rec.data.row(scalp_idx[i]);

  std::vector<int> used;
  for (std::size_t i = 0; i < eog_idx.size(); ++i) {
    const auto row = rec.data.row(eog_idx[i]).array();
    const double var = (row - row.mean()).square().sum();
    const double scale = row.square().sum();
    if (var > 1e-20 * std::max(1.0, scale)) {
      used.push_back(eog_idx[i]);
      res.used_regressors.push_back(rec.eog_channels[i]);
    } else {
      res.warnings.push_back("ocular channel '" + rec.eog_channels[i] +
                             "' has zero variance; dropped from regression");
    }
  }

  res.cleaned.fs_hz = rec.fs_hz;
  res.cleaned.state = rec.state;
  for (int i : scalp_idx) res.cleaned.channel_names.push_back(rec.channel_names[static_cast<std::size_t>(i)]);

  if (used.empty()) {
    if (eog_idx.empty()) res.warnings.push_back("no ocular channels; regression skipped");
    else res.warnings.push_back("all ocular channels degenerate; regression skipped");
    res.coefficients = Eigen::MatrixXd::Zero(scalp.rows(), 0);
    res.cleaned.data = std::move(scalp);
    return res;
  }

  Eigen::MatrixXd eog(static_cast<Eigen::Index>(used.size()), rec.samples());
  for (std::size_t i = 0; i < used.size(); ++i) eog.row(static_cast<Eigen::Index>(i)) = rec.data.row(used[i]);
  const Eigen::MatrixXd eog_c = eog.colwise() - eog.rowwise().mean();
  const Eigen::MatrixXd scalp_c = scalp.colwise() - scalp.rowwise().mean();

  // scalp_c ≈ B eog_c  =>  B = (eog_c eog_cᵀ)⁻¹ eog_c scalp_cᵀ, transposed.
  const Eigen::MatrixXd gram = eog_c * eog_c.transpose();
  const Eigen::MatrixXd cross = eog_c * scalp_c.transpose();
  const Eigen::MatrixXd bt = gram.completeOrthogonalDecomposition().solve(cross);
  res.coefficients = bt.transpose();
  res.cleaned.data = scalp - res.coefficients * eog_c;
  return res;
}

// --- spectra ---------------------------------------------------------------

namespace {

std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

// One-sided periodogram |X_k|^2, k = 0..n/2, for every row.
class Periodogram {
 public:
  explicit Periodogram(int n) : n_(n), in_(static_cast<std::size_t>(n)), out_(static_cast<std::size_t>(n / 2 + 1)) {
    std::lock_guard lock(fftw_planner_mutex());
    plan_ = fftw_plan_dft_r2c_1d(n, in_.data(), reinterpret_cast<fftw_complex*>(out_.data()),
                                 FFTW_ESTIMATE);
  }
  ~Periodogram() {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(plan_);
  }
  Periodogram(const Periodogram&) = delete;
  Periodogram& operator=(const Periodogram&) = delete;

  std::vector<double>& input() { return in_; }

  void accumulate(std::vector<double>& power) {
    fftw_execute(plan_);
    for (std::size_t k = 0; k < out_.size(); ++k) power[k] += std::norm(out_[k]);
  }
  int bins() const { return n_ / 2 + 1; }

 private:
  int n_;
  std::vector<double> in_;
  std::vector<std::complex<double>> out_;
  fftw_plan plan_{};
};

}  // namespace

namespace {

// channels x bins power spectrum and the bin spacing in Hz.
std::pair<Eigen::MatrixXd, double> channel_spectra(const Recording& rec, const std::vector<int>& rows,
                                                   const SpectrumOptions& opt) {
  const auto n = static_cast<int>(rec.samples());
  if (rec.duration_s() < opt.min_duration_s)
    throw ArgumentError("recording lasts " + std::to_string(rec.duration_s()) + " s; at least " +
                        std::to_string(opt.min_duration_s) + " s required");
  int seg = n;
  if (opt.welch_segment_s > 0) seg = std::min(n, static_cast<int>(std::lround(opt.welch_segment_s * rec.fs_hz)));
  if (seg < 2) throw ArgumentError("spectral segment shorter than two samples");
  const int hop = opt.welch_segment_s > 0 ? std::max(1, seg / 2) : seg;

  std::vector<double> window(static_cast<std::size_t>(seg), 1.0);
  if (opt.welch_segment_s > 0) {
    for (int i = 0; i < seg; ++i)
      window[static_cast<std::size_t>(i)] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / seg);
  }

  Periodogram fft(seg);
  Eigen::MatrixXd spectra(static_cast<Eigen::Index>(rows.size()), fft.bins());
  std::vector<double> power(static_cast<std::size_t>(fft.bins()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    std::fill(power.begin(), power.end(), 0.0);
    int segments = 0;
    for (int start = 0; start + seg <= n; start += hop) {
      auto& in = fft.input();
      for (int i = 0; i < seg; ++i)
        in[static_cast<std::size_t>(i)] = rec.data(rows[r], start + i) * window[static_cast<std::size_t>(i)];
      fft.accumulate(power);
      ++segments;
    }
    for (int k = 0; k < fft.bins(); ++k)
      spectra(static_cast<Eigen::Index>(r), k) = power[static_cast<std::size_t>(k)] / segments;
  }
  return {spectra, rec.fs_hz / seg};
}

Eigen::MatrixXd bin_bands(const Eigen::MatrixXd& spectra, double df, const BandSet& bands, double fs) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(spectra.rows(), static_cast<Eigen::Index>(bands.size()));
  for (std::size_t b = 0; b < bands.size(); ++b) {
    if (bands[b].hi_hz > fs / 2.0)
      throw ArgumentError("band '" + bands[b].name + "' extends beyond Nyquist");
    for (Eigen::Index k = 0; k < spectra.cols(); ++k) {
      const double f = static_cast<double>(k) * df;
      if (f >= bands[b].lo_hz && f < bands[b].hi_hz) out.col(static_cast<Eigen::Index>(b)) += spectra.col(k);
    }
  }
  return out;
}

std::vector<std::vector<int>> roi_rows(const Recording& rec, const RoiMap& rois) {
  const auto eog = rec.eog_indices();
  std::vector<std::vector<int>> rows;
  for (const auto& r : rois.rois()) {
    std::vector<int> idx;
    for (const auto& c : r.channels) {
      const int i = rec.index_of(c);
      if (i < 0) throw ArgumentError("ROI '" + r.label + "' channel '" + c + "' not in recording");
      if (std::find(eog.begin(), eog.end(), i) != eog.end())
        throw ArgumentError("ROI '" + r.label + "' references ocular channel '" + c + "'");
      idx.push_back(i);
    }
    rows.push_back(std::move(idx));
  }
  return rows;
}

}  // namespace

Eigen::MatrixXd channel_band_powers(const Recording& rec, const BandSet& bands, const SpectrumOptions& opt) {
  std::vector<int> all(static_cast<std::size_t>(rec.channels()));
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
  auto [spectra, df] = channel_spectra(rec, all, opt);
  return bin_bands(spectra, df, bands, rec.fs_hz);
}

RoiSpectrum roi_band_powers(const Recording& rec, const BandSet& bands, const RoiMap& rois,
                            const SpectrumOptions& opt) {
  const auto groups = roi_rows(rec, rois);
  std::vector<int> all;
  for (const auto& g : groups) all.insert(all.end(), g.begin(), g.end());
  auto [spectra, df] = channel_spectra(rec, all, opt);
  const Eigen::MatrixXd powers = bin_bands(spectra, df, bands, rec.fs_hz);
  const Eigen::VectorXd totals = spectra.rowwise().sum();

  RoiSpectrum out;
  out.band_power.resize(static_cast<Eigen::Index>(rois.size()), static_cast<Eigen::Index>(bands.size()));
  out.total_power.resize(static_cast<Eigen::Index>(rois.size()));
  Eigen::Index row = 0;
  for (std::size_t r = 0; r < groups.size(); ++r) {
    const auto n = static_cast<Eigen::Index>(groups[r].size());
    out.band_power.row(static_cast<Eigen::Index>(r)) = powers.middleRows(row, n).colwise().mean();
    out.total_power(static_cast<Eigen::Index>(r)) = totals.segment(row, n).mean();
    row += n;
  }
  return out;
}

BpRoiVector band_power_ratios(const Recording& rec, const BandSet& bands, const RoiMap& rois,
                              const SpectrumOptions& opt) {
  BpRoiVector out{};
  Eigen::MatrixXd ratios(static_cast<Eigen::Index>(rois.size()), static_cast<Eigen::Index>(bands.size()));
  if (opt.aggregation == RoiAggregation::AverageThenNormalize) {
    const auto spec = roi_band_powers(rec, bands, rois, opt);
    for (Eigen::Index r = 0; r < ratios.rows(); ++r) {
      const double total = spec.band_power.row(r).sum();
      if (!(total > 0))
        throw PipelineError("ROI '" + rois[static_cast<std::size_t>(r)].label + "' has zero band power");
      ratios.row(r) = spec.band_power.row(r) / total;
    }
  } else {
    const auto groups = roi_rows(rec, rois);
    std::vector<int> all;
    for (const auto& g : groups) all.insert(all.end(), g.begin(), g.end());
    auto [spectra, df] = channel_spectra(rec, all, opt);
    Eigen::MatrixXd powers = bin_bands(spectra, df, bands, rec.fs_hz);
    Eigen::Index row = 0;
    for (std::size_t r = 0; r < groups.size(); ++r) {
      const auto n = static_cast<Eigen::Index>(groups[r].size());
      Eigen::MatrixXd block = powers.middleRows(row, n);
      for (Eigen::Index c = 0; c < n; ++c) {
        const double total = block.row(c).sum();
        if (!(total > 0))
          throw PipelineError("ROI '" + rois[r].label + "' has a channel with zero band power");
        block.row(c) /= total;
      }
      ratios.row(static_cast<Eigen::Index>(r)) = block.colwise().mean();
      row += n;
    }
  }
  for (Eigen::Index r = 0; r < ratios.rows(); ++r)
    for (Eigen::Index b = 0; b < ratios.cols(); ++b)
      out[static_cast<std::size_t>(r * ratios.cols() + b)] = ratios(r, b);
  return out;
}

// --- pipeline --------------------------------------------------------------

FeatureExtraction extract_features(const Recording& raw, const FeatureConfig& config) {
  raw.validate();
  FeatureExtraction res;
  Recording r = bandpass(raw, config.bandpass_lo_hz, config.bandpass_hi_hz);
  r = notch(r, config.notch_hz, config.notch_q);
  if (config.target_fs_hz > 0 && config.target_fs_hz != r.fs_hz)
    r = decimate(r, config.target_fs_hz, 2.0 * config.bandpass_hi_hz);

  auto eog = regress_out_eog(r);
  res.provenance.warnings = eog.warnings;
  Recording& scalp = eog.cleaned;

  if (scalp.data.cwiseAbs().maxCoeff() == 0.0) {
    res.provenance.warnings.push_back("flat recording; ICA skipped");
    res.features = band_power_ratios(scalp, config.bands, config.rois, config.spectrum);
    return res;
  }

  const auto ica = ica::infomax(scalp.data, config.ica);
  res.provenance.n_components = static_cast<int>(ica.sources.rows());
  res.provenance.ica_converged = ica.converged;
  res.provenance.ica_sweeps = ica.sweeps;
  if (!ica.converged) res.provenance.warnings.push_back("ICA did not converge; best iterate used");

  const auto keep = ica::reject_artifact_ics(ica.sources, config.rejection);
  res.provenance.rejected_ics =
      static_cast<int>(std::count(keep.begin(), keep.end(), false));
  if (res.provenance.rejected_ics == res.provenance.n_components)
    throw PipelineError("every independent component was rejected; recording unusable");

  scalp.data = ica::reconstruct(ica.sources, keep, ica.mixing, ica.channel_mean);
  res.features = band_power_ratios(scalp, config.bands, config.rois, config.spectrum);
  return res;
}

}  // namespace vigilkit::eeg
