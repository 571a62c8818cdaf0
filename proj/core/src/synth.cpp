#include "vigilkit/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include <nlohmann/json.hpp>

#include "vigilkit/error.hpp"
#include "vigilkit/parallel.hpp"

namespace vigilkit::synth {

namespace {

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

double schedule_target(const VigilanceSchedule& s, double t) {
  switch (s.process) {
    case VigilanceProcess::Constant:
      return s.start_level;
    case VigilanceProcess::LinearDecline:
      return s.start_level + (s.low_level - s.start_level) * t;
    case VigilanceProcess::DeclineRecover: {
      const double d = t < 0.5 ? 2.0 * t : 2.0 * (1.0 - t);
      return s.start_level + (s.low_level - s.start_level) * d;
    }
    case VigilanceProcess::EarlySleep:
      return t >= s.dip_start && t < s.dip_end ? s.low_level : s.start_level;
  }
  return s.start_level;
}

}  // namespace

std::string to_string(VigilanceProcess p) {
  switch (p) {
    case VigilanceProcess::Constant: return "constant";
    case VigilanceProcess::LinearDecline: return "linear-decline";
    case VigilanceProcess::DeclineRecover: return "decline-recover";
    case VigilanceProcess::EarlySleep: return "early-sleep";
  }
  return "constant";
}

VigilanceProcess parse_vigilance_process(const std::string& name) {
  for (auto p : {VigilanceProcess::Constant, VigilanceProcess::LinearDecline, VigilanceProcess::DeclineRecover,
                 VigilanceProcess::EarlySleep})
    if (to_string(p) == name) return p;
  throw ArgumentError("unknown vigilance process '" + name + "'");
}

void BehaviorProfile::validate() const {
  if (!(base_rt_ms > 0)) throw ArgumentError("base_rt_ms must be positive");
  if (!(rt_noise_sd_ms >= 0) || !(slowing_ms >= 0)) throw ArgumentError("rt noise and slowing must be >= 0");
  for (double p : {impulsive_rate, multi_click_rate, ce_floor, oe_floor, ce_floor + ce_gain, oe_floor + oe_gain,
                   vigilance.start_level, vigilance.low_level, vigilance.reversion})
    if (!is_probability(p)) throw ArgumentError("profile probabilities and levels must lie in [0, 1]");
  if (ce_gain < 0 || oe_gain < 0 || vigilance.walk_sd < 0) throw ArgumentError("gains must be >= 0");
  if (!(vigilance.dip_start <= vigilance.dip_end)) throw ArgumentError("dip_start must not exceed dip_end");
}

BehaviorProfile BehaviorProfile::named(const std::string& name, std::uint64_t seed) {
  BehaviorProfile p;
  p.seed = seed;
  if (name == "steady") {
    p.vigilance.start_level = 0.9;
  } else if (name == "declining") {
    p.vigilance.process = VigilanceProcess::LinearDecline;
    p.vigilance.low_level = 0.35;
  } else if (name == "recovering") {
    p.vigilance.process = VigilanceProcess::DeclineRecover;
    p.vigilance.low_level = 0.4;
  } else if (name == "early-sleep") {
    p.vigilance.process = VigilanceProcess::EarlySleep;
    p.vigilance.low_level = 0.05;
    p.vigilance.reversion = 0.2;
  } else if (name == "perfect") {
    p.vigilance.start_level = 1.0;
    p.vigilance.walk_sd = 0.0;
    p.rt_noise_sd_ms = 30.0;
    p.impulsive_rate = 0.0;
    p.multi_click_rate = 0.0;
    p.ce_floor = p.ce_gain = p.oe_floor = p.oe_gain = 0.0;
  } else {
    throw ArgumentError("unknown behaviour profile '" + name + "'");
  }
  return p;
}

SyntheticSession gen_session(const BehaviorProfile& profile, const ParadigmSpec& spec,
                             const std::string& participant) {
  profile.validate();
  spec.validate();
  std::mt19937_64 rng(derive_seed(profile.seed, 0x5e55));
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  SyntheticSession out;
  out.log.participant = participant;
  out.log.paradigm = spec;
  const int per_block = spec.trials_per_block();
  const int n = per_block * spec.blocks;
  out.log.trials.reserve(static_cast<std::size_t>(n));
  out.vigilance.reserve(static_cast<std::size_t>(n));

  const auto& vs = profile.vigilance;
  double v = vs.start_level;
  double onset = 1000.0;
  for (int i = 0; i < n; ++i) {
    const double t = n > 1 ? static_cast<double>(i) / (n - 1) : 0.0;
    v = clamp01(v + vs.reversion * (schedule_target(vs, t) - v) + vs.walk_sd * gauss(rng));
    out.vigilance.push_back(v);

    TrialEvent ev;
    ev.trial_index = i + 1;
    ev.block = i / per_block + 1;
    ev.digit = spec.digits[static_cast<std::size_t>(i % static_cast<int>(spec.digits.size()))];
    ev.onset_ms = onset;
    ev.isi_ms = std::round(spec.isi_min_ms + (spec.isi_max_ms - spec.isi_min_ms) * unif(rng));
    const double window = spec.digit_display_ms + spec.response_interval_ms + ev.isi_ms;

    const bool target = spec.is_target(ev.digit);
    const double p_click = target ? profile.ce_floor + profile.ce_gain * (1.0 - v)
                                  : 1.0 - (profile.oe_floor + profile.oe_gain * (1.0 - v));
    const double u_click = unif(rng);
    const double u_imp = unif(rng);
    const double u_multi = unif(rng);
    const double z = gauss(rng);
    const double u_gap = unif(rng);
    if (u_click < p_click) {
      double rt = u_imp < profile.impulsive_rate
                      ? 150.0 + 99.0 * unif(rng)
                      : profile.base_rt_ms + profile.slowing_ms * (1.0 - v) + profile.rt_noise_sd_ms * z;
      rt = std::clamp(std::round(rt), 100.0, window - 2.0);
      ev.clicks_ms.push_back(onset + rt);
      if (u_multi < profile.multi_click_rate) {
        const double second = std::min(rt + std::round(80.0 + 220.0 * u_gap), window - 1.0);
        ev.clicks_ms.push_back(onset + second);
      }
    }
    out.log.trials.push_back(std::move(ev));
    onset += window;
  }
  return out;
}

// --- cohorts ---------------------------------------------------------------

void PlantSpec::validate(const eeg::BandSet& bands) const {
  if (std::find(relevance::kMeasureNames.begin(), relevance::kMeasureNames.end(), target_measure) ==
      relevance::kMeasureNames.end())
    throw ArgumentError("unknown target measure '" + target_measure + "'");
  if (n_participants < 6) throw ArgumentError("gen_cohort needs at least 6 participants");
  if (!(noise_sd >= 0) || !std::isfinite(noise_sd)) throw ArgumentError("noise_sd must be finite and >= 0");
  if (!(concentration > 0) || !std::isfinite(concentration))
    throw ArgumentError("infeasible composition: concentration must be positive");
  std::vector<std::string> seen;
  for (const auto& f : planted) {
    const bool roi_ok = std::find_if(eeg::kRoiLabels.begin(), eeg::kRoiLabels.end(),
                                     [&](const char* l) { return f.roi == l; }) != eeg::kRoiLabels.end();
    const bool band_ok = std::any_of(bands.bands().begin(), bands.bands().end(),
                                     [&](const eeg::Band& b) { return b.name == f.band; });
    if (!roi_ok || !band_ok) throw ArgumentError("planted feature " + f.roi + "_" + f.band + " is not a valid ROI/band");
    if (!std::isfinite(f.coefficient)) throw ArgumentError("planted coefficient must be finite");
    const std::string key = f.roi + "_" + f.band;
    if (std::find(seen.begin(), seen.end(), key) != seen.end()) throw ArgumentError("feature planted twice: " + key);
    seen.push_back(key);
  }
}

Cohort gen_cohort(const PlantSpec& plant, std::uint64_t seed, const eeg::BandSet& bands) {
  plant.validate(bands);
  const Eigen::Index n = plant.n_participants;
  const auto nb = static_cast<Eigen::Index>(bands.size());
  const auto nr = static_cast<Eigen::Index>(eeg::kRoiCount);

  // Decaying base profile so low bands dominate, as in resting EEG.
  Eigen::VectorXd alpha(nb);
  for (Eigen::Index b = 0; b < nb; ++b) alpha(b) = 1.0 / (1.0 + 0.35 * static_cast<double>(b));
  alpha *= plant.concentration / alpha.sum();

  Cohort c;
  c.target_measure = plant.target_measure;
  auto& d = c.data;
  d.x.resize(n, nr * nb);
  for (Eigen::Index i = 0; i < n; ++i) {
    d.participant_ids.push_back("P" + std::string(i + 1 < 10 ? "0" : "") + std::to_string(i + 1));
    for (Eigen::Index r = 0; r < nr; ++r) {
      std::mt19937_64 rng(derive_seed(seed, 0xc0, i, r));
      double sum = 0.0;
      for (Eigen::Index b = 0; b < nb; ++b) {
        std::gamma_distribution<double> g(alpha(b), 1.0);
        const double w = g(rng);
        d.x(i, r * nb + b) = w;
        sum += w;
      }
      if (!(sum > 0) || !std::isfinite(sum)) throw NumericError("infeasible composition draw");
      d.x.row(i).segment(r * nb, nb) /= sum;
    }
  }
  std::vector<std::string> labels;
  for (const char* l : eeg::kRoiLabels)
    for (const auto& b : bands.bands()) labels.push_back(std::string(l) + "_" + b.name);
  d.feature_names = labels;

  c.coefficients = Eigen::VectorXd::Zero(nr * nb);
  c.raw_coefficients = Eigen::VectorXd::Zero(nr * nb);
  d.y = Eigen::VectorXd::Zero(n);
  for (const auto& f : plant.planted) {
    const auto j = static_cast<int>(std::find(labels.begin(), labels.end(), f.roi + "_" + f.band) - labels.begin());
    const Eigen::VectorXd col = d.x.col(j);
    const double mu = col.mean();
    const double sd = std::sqrt((col.array() - mu).square().sum() / static_cast<double>(n - 1));
    if (!(sd > 0)) throw NumericError("planted feature has zero variance");
    d.y += f.coefficient * ((col.array() - mu) / sd).matrix();
    c.coefficients(j) = f.coefficient;
    c.raw_coefficients(j) = f.coefficient / sd;
    c.raw_intercept -= f.coefficient * mu / sd;
    c.planted_indices.push_back(j);
  }
  std::sort(c.planted_indices.begin(), c.planted_indices.end());
  std::mt19937_64 noise_rng(derive_seed(seed, 0x401));
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (Eigen::Index i = 0; i < n; ++i) d.y(i) += plant.noise_sd * gauss(noise_rng);
  return c;
}

PlantSpec read_plant_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot open plant file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(0, path + ": " + e.what());
  }
  PlantSpec p;
  try {
    p.target_measure = j.value("target_measure", p.target_measure);
    p.noise_sd = j.value("noise_sd", p.noise_sd);
    p.n_participants = j.value("n_participants", p.n_participants);
    p.concentration = j.value("concentration", p.concentration);
    for (const auto& f : j.value("planted_features", nlohmann::json::array()))
      p.planted.push_back({f.at("roi").get<std::string>(), f.at("band").get<std::string>(),
                           f.at("coefficient").get<double>()});
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(0, path + ": " + e.what());
  }
  p.validate();
  return p;
}

// --- recordings ------------------------------------------------------------

SyntheticRecording gen_recording(const RecordingPlant& plant, double duration_s, double fs_hz,
                                 std::uint64_t seed, const eeg::RoiMap& rois) {
  if (!(duration_s >= 10.0)) throw ArgumentError("gen_recording needs at least 10 s");
  if (!(fs_hz > 0)) throw ArgumentError("sampling rate must be positive");
  const auto t_len = static_cast<Eigen::Index>(std::llround(duration_s * fs_hz));

  SyntheticRecording out;
  auto& rec = out.recording;
  rec.fs_hz = fs_hz;
  std::vector<std::string> roi_of;
  for (const auto& r : rois.rois())
    for (const auto& ch : r.channels) {
      rec.channel_names.push_back(ch);
      roi_of.push_back(r.label);
    }
  const auto scalp = static_cast<Eigen::Index>(rec.channel_names.size());
  rec.channel_names.push_back("VEOG");
  rec.channel_names.push_back("HEOG");
  rec.eog_channels = {"VEOG", "HEOG"};
  rec.data = Eigen::MatrixXd::Zero(scalp + 2, t_len);

  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double two_pi = 2.0 * std::numbers::pi;

  {
    std::mt19937_64 rng(derive_seed(seed, 0xb9));
    for (Eigen::Index c = 0; c < rec.data.rows(); ++c)
      for (Eigen::Index t = 0; t < t_len; ++t) rec.data(c, t) = plant.background_sd_uv * gauss(rng);
  }
  for (std::size_t k = 0; k < plant.rhythms.size(); ++k) {
    const auto& rh = plant.rhythms[k];
    std::mt19937_64 rng(derive_seed(seed, 0x7a, k));
    const double phase = two_pi * unif(rng);
    for (Eigen::Index c = 0; c < scalp; ++c) {
      if (!rh.rois.empty() && std::find(rh.rois.begin(), rh.rois.end(), roi_of[static_cast<std::size_t>(c)]) == rh.rois.end())
        continue;
      for (Eigen::Index t = 0; t < t_len; ++t)
        rec.data(c, t) += rh.amplitude_uv * std::sin(two_pi * rh.freq_hz * static_cast<double>(t) / fs_hz + phase);
    }
  }
  if (plant.line_noise_uv > 0) {
    for (Eigen::Index c = 0; c < scalp; ++c)
      for (Eigen::Index t = 0; t < t_len; ++t)
        rec.data(c, t) += plant.line_noise_uv * std::sin(two_pi * plant.line_freq_hz * static_cast<double>(t) / fs_hz);
  }
  if (plant.ocular_uv > 0) {
    std::mt19937_64 rng(derive_seed(seed, 0xe0));
    // Slow drift plus blink pulses of ~300 ms.
    Eigen::VectorXd s = Eigen::VectorXd::Zero(t_len);
    double drift = 0.0;
    const double a = std::exp(-1.0 / (0.5 * fs_hz));
    for (Eigen::Index t = 0; t < t_len; ++t) {
      drift = a * drift + std::sqrt(1.0 - a * a) * gauss(rng);
      s(t) = 0.5 * drift;
    }
    const double width = 0.3 * fs_hz;
    for (double onset = fs_hz * (0.5 + 3.0 * unif(rng)); onset < static_cast<double>(t_len);
         onset += fs_hz * (1.5 + 3.0 * unif(rng))) {
      for (Eigen::Index t = static_cast<Eigen::Index>(onset); t < std::min(t_len, static_cast<Eigen::Index>(onset + width)); ++t)
        s(t) += std::sin(std::numbers::pi * (static_cast<double>(t) - onset) / width);
    }
    s *= plant.ocular_uv;
    out.ocular_source = s;
    out.ocular_mixing.resize(scalp);
    for (Eigen::Index c = 0; c < scalp; ++c) {
      // Gain falls from frontal to occipital following ROI order.
      const auto r = std::find_if(eeg::kRoiLabels.begin(), eeg::kRoiLabels.end(),
                                  [&](const char* l) { return roi_of[static_cast<std::size_t>(c)] == l; }) -
                     eeg::kRoiLabels.begin();
      out.ocular_mixing(c) = (1.0 - 0.05 * static_cast<double>(r)) * (0.8 + 0.4 * unif(rng));
      rec.data.row(c) += out.ocular_mixing(c) * s.transpose();
    }
    rec.data.row(scalp) += 2.0 * s.transpose();
    rec.data.row(scalp + 1) += 0.6 * s.transpose();
  }
  if (plant.spikes > 0) {
    std::mt19937_64 rng(derive_seed(seed, 0x5b));
    Eigen::VectorXd s = Eigen::VectorXd::Zero(t_len);
    for (int k = 0; k < plant.spikes; ++k) {
      const auto at = static_cast<Eigen::Index>(unif(rng) * static_cast<double>(t_len - 8));
      for (Eigen::Index d = 0; d < 8; ++d) s(at + d) += plant.spike_uv * std::exp(-static_cast<double>(d) / 2.0);
    }
    out.spike_mixing.resize(scalp);
    for (Eigen::Index c = 0; c < scalp; ++c) out.spike_mixing(c) = gauss(rng);
    rec.data.topRows(scalp) += out.spike_mixing * s.transpose();
  }
  return out;
}

Mixture laplacian_mixture(int channels, int sources, Eigen::Index samples, double noise_sd, std::uint64_t seed) {
  if (channels < 1 || sources < 1 || sources > channels || samples < 2)
    throw ArgumentError("laplacian_mixture: need 1 <= sources <= channels and >= 2 samples");
  std::mt19937_64 rng(derive_seed(seed, 0x1ca));
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::exponential_distribution<double> expo(std::numbers::sqrt2);  // Laplace(b) with variance 1
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Mixture m;
  m.mixing.resize(channels, sources);
  for (Eigen::Index j = 0; j < m.mixing.cols(); ++j)
    for (Eigen::Index i = 0; i < m.mixing.rows(); ++i) m.mixing(i, j) = gauss(rng);
  m.sources.resize(sources, samples);
  for (Eigen::Index t = 0; t < samples; ++t)
    for (Eigen::Index k = 0; k < sources; ++k) m.sources(k, t) = (unif(rng) < 0.5 ? -1.0 : 1.0) * expo(rng);
  m.data = m.mixing * m.sources;
  if (noise_sd > 0)
    for (Eigen::Index t = 0; t < samples; ++t)
      for (Eigen::Index i = 0; i < channels; ++i) m.data(i, t) += noise_sd * gauss(rng);
  return m;
}

}  // namespace vigilkit::synth
