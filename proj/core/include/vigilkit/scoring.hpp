#pragma once

#include <optional>
#include <span>
#include <vector>

#include "vigilkit/session.hpp"

namespace vigilkit {

struct Thresholds {
  double rt_lower_ms = 250.0;
  double rt_upper_ms = 0.0;
};

/// Level assigned to each trial category. The defaults form the standard
/// five-level table; a different table may be supplied for sensitivity runs.
struct TvsTable {
  int error = 0;          // commission or omission error
  int multi_click = 1;    // two or more clicks on a correct trial
  int slow_correct = 2;   // hit with rt above the upper threshold
  int impulsive = 3;      // hit with rt below the lower threshold
  int in_band = 4;        // hit inside [lower, upper] or correct inhibition
  int max_level = 4;
};

struct VigilanceSeries {
  std::vector<int> tvs;
  std::vector<double> cvs;
  int window_trials = 36;
  /// Trials [0, warmup) used an expanding window shorter than window_trials.
  int warmup = 0;
};

struct PerformanceSummary {
  double ce_pct = 0.0;
  double oe_pct = 0.0;
  std::optional<double> hrt_mean_ms;  // empty when there are no hits
  std::optional<double> hrt_var;      // SD / mean of hit rts
  double cvs_mean = 0.0;
  std::optional<double> cvs_var;      // SD / mean of the cvs series
  int n_trials = 0;
  int n_targets = 0;
  int n_hits = 0;
};

struct ScoringOptions {
  int calib_trials = 27;
  double rt_lower_ms = 250.0;
  int window = 36;
  TvsTable table{};
};

/// Upper threshold = mean + 2 sample-SD of first-click rts among the first
/// `calib_trials` trials (any clicked trial). Throws CalibrationError when
/// fewer than two such rts exist or the result does not exceed rt_lower.
Thresholds adaptive_thresholds(std::span<const LabeledTrial> trials, int calib_trials = 27,
                               double rt_lower_ms = 250.0);

int tvs(const LabeledTrial& trial, const Thresholds& th, const TvsTable& table = {});

/// cvs[i] = mean of tvs over the last min(i+1, window) trials, divided by max_level.
std::vector<double> cvs_series(std::span<const int> tvs, int window = 36, int max_level = 4);

VigilanceSeries score_vigilance(std::span<const LabeledTrial> trials, const Thresholds& th,
                                int window = 36, const TvsTable& table = {});

/// Six summary measures. Requires the trial count to be a whole number of blocks.
PerformanceSummary performance_summary(std::span<const LabeledTrial> labeled,
                                       const VigilanceSeries& vs, const ParadigmSpec& spec);

struct SessionScore {
  Thresholds thresholds;
  VigilanceSeries series;
  PerformanceSummary summary;
};

/// label -> calibrate -> tvs/cvs -> summary for one parsed log.
SessionScore score_session(const EventLog& log, const ScoringOptions& opt = {});

/// Include mask: false for values above mean + 2 SD of all values.
std::vector<bool> exclude_outliers(std::span<const double> values);

}  // namespace vigilkit
