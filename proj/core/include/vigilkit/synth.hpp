#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "vigilkit/relevance.hpp"
#include "vigilkit/session.hpp"
#include "vigilkit/signal.hpp"

namespace vigilkit::synth {

// --- behaviour -------------------------------------------------------------

enum class VigilanceProcess { Constant, LinearDecline, DeclineRecover, EarlySleep };

std::string to_string(VigilanceProcess p);
VigilanceProcess parse_vigilance_process(const std::string& name);

/// Latent vigilance v in [0, 1] follows v += reversion * (target(t) - v) + walk_sd * N(0, 1),
/// clamped, where target(t) is the profile schedule over session fraction t.
struct VigilanceSchedule {
  VigilanceProcess process = VigilanceProcess::Constant;
  double start_level = 0.9;
  double low_level = 0.3;
  double dip_start = 0.15;  // EarlySleep: fraction of the session where the low epoch begins
  double dip_end = 0.35;
  double reversion = 0.05;
  double walk_sd = 0.02;
};

struct BehaviorProfile {
  double base_rt_ms = 420.0;
  double rt_noise_sd_ms = 50.0;
  double slowing_ms = 250.0;        // added rt at v = 0
  double impulsive_rate = 0.02;     // probability of a sub-250 ms response on a clicked trial
  double multi_click_rate = 0.01;
  double ce_floor = 0.05;           // P(CE | target) = ce_floor + ce_gain * (1 - v)
  double ce_gain = 0.6;
  double oe_floor = 0.0;            // P(OE | non-target) = oe_floor + oe_gain * (1 - v)
  double oe_gain = 0.2;
  VigilanceSchedule vigilance{};
  std::uint64_t seed = 1;

  /// Throws ArgumentError when a probability leaves [0, 1] or base_rt <= 0.
  void validate() const;

  /// Archetypes: "steady", "declining", "recovering", "early-sleep", "perfect".
  static BehaviorProfile named(const std::string& name, std::uint64_t seed = 1);
};

struct SyntheticSession {
  EventLog log;
  std::vector<double> vigilance;  // latent level per trial
};

/// Full fixed-order session; onsets and clicks on a 1 ms grid.
SyntheticSession gen_session(const BehaviorProfile& profile, const ParadigmSpec& spec = {},
                             const std::string& participant = "SYN01");

// --- feature cohorts -------------------------------------------------------

struct PlantedFeature {
  std::string roi;
  std::string band;
  double coefficient = 0.0;  // per unit of the cohort-standardised feature
};

struct PlantSpec {
  std::string target_measure = "cvs_mean";
  std::vector<PlantedFeature> planted;
  double noise_sd = 0.05;
  int n_participants = 10;
  /// Dirichlet concentration of each ROI composition.
  double concentration = 60.0;

  void validate(const eeg::BandSet& bands = eeg::BandSet::defaults()) const;
};

struct Cohort {
  relevance::Dataset data;               // N x 168 ratios and the target
  Eigen::VectorXd coefficients;          // 168, standardised scale, zero off-plant
  Eigen::VectorXd raw_coefficients;      // 168, per unit of the raw ratio
  double raw_intercept = 0.0;
  std::vector<int> planted_indices;      // ascending feature columns
  std::string target_measure;
};

/// y = sum_j c_j z_j + noise_sd * N(0, 1), with z_j the planted columns
/// z-scored over the cohort. Each ROI row is a Dirichlet draw around a
/// decaying spectral profile.
Cohort gen_cohort(const PlantSpec& plant, std::uint64_t seed,
                  const eeg::BandSet& bands = eeg::BandSet::defaults());

PlantSpec read_plant_spec(const std::string& path);

// --- recordings ------------------------------------------------------------

struct PlantedRhythm {
  std::vector<std::string> rois;  // empty means every scalp channel
  double freq_hz = 10.0;
  double amplitude_uv = 10.0;
};

struct RecordingPlant {
  std::vector<PlantedRhythm> rhythms;
  double background_sd_uv = 1.0;   // white sensor noise
  double line_noise_uv = 0.0;      // 50 Hz amplitude on every scalp channel
  double line_freq_hz = 50.0;
  double ocular_uv = 0.0;          // ocular source scale; 0 disables
  int spikes = 0;                  // spike artifact events in one extra source
  double spike_uv = 150.0;
};

struct SyntheticRecording {
  eeg::Recording recording;        // 64 scalp channels then VEOG, HEOG
  Eigen::VectorXd ocular_mixing;   // scalp gains of the ocular source
  Eigen::VectorXd ocular_source;
  Eigen::VectorXd spike_mixing;    // empty when spikes == 0
};

/// Requires duration >= 10 s.
SyntheticRecording gen_recording(const RecordingPlant& plant, double duration_s, double fs_hz,
                                 std::uint64_t seed, const eeg::RoiMap& rois = eeg::RoiMap::biosemi64());

/// Sources mixed into channels: data = A S + noise, with S Laplacian (unit variance).
struct Mixture {
  Eigen::MatrixXd mixing;   // channels x sources
  Eigen::MatrixXd sources;  // sources x samples
  Eigen::MatrixXd data;     // channels x samples
};

Mixture laplacian_mixture(int channels, int sources, Eigen::Index samples, double noise_sd,
                          std::uint64_t seed);

}  // namespace vigilkit::synth
