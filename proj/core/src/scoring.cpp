#include "vigilkit/scoring.hpp"

#include <algorithm>
#include <cmath>

#include "vigilkit/error.hpp"
#include "vigilkit/stats.hpp"

namespace vigilkit {

Thresholds adaptive_thresholds(std::span<const LabeledTrial> trials, int calib_trials,
                               double rt_lower_ms) {
  if (calib_trials < 2) throw ArgumentError("calibration needs at least two trials");
  std::vector<double> rts;
  const auto n = std::min<std::size_t>(trials.size(), static_cast<std::size_t>(calib_trials));
  for (std::size_t i = 0; i < n; ++i) {
    if (trials[i].rt_ms) rts.push_back(*trials[i].rt_ms);
  }
  if (rts.size() < 2)
    throw CalibrationError("only " + std::to_string(rts.size()) +
                           " response time(s) among the calibration trials; need 2");
  Thresholds th;
  th.rt_lower_ms = rt_lower_ms;
  th.rt_upper_ms = stats::mean(rts) + 2.0 * stats::sample_sd(rts);
  if (!(std::isfinite(th.rt_upper_ms) && th.rt_upper_ms > th.rt_lower_ms))
    throw CalibrationError("calibrated upper threshold " + std::to_string(th.rt_upper_ms) +
                           " ms does not exceed the lower threshold");
  return th;
}

int tvs(const LabeledTrial& trial, const Thresholds& th, const TvsTable& table) {
  switch (trial.outcome) {
    case Outcome::CommissionError:
    case Outcome::OmissionError:
      return table.error;
    case Outcome::CorrectInhibition:
      return table.in_band;
    case Outcome::Hit:
      break;
  }
  if (trial.multi_click) return table.multi_click;
  const double rt = *trial.rt_ms;
  if (rt > th.rt_upper_ms) return table.slow_correct;
  if (rt < th.rt_lower_ms) return table.impulsive;
  return table.in_band;
}

std::vector<double> cvs_series(std::span<const int> levels, int window, int max_level) {
  if (levels.empty()) throw ArgumentError("cvs_series: empty TVS sequence");
  if (window < 1) throw ArgumentError("cvs_series: window must be >= 1");
  if (max_level < 1) throw ArgumentError("cvs_series: max level must be >= 1");
  std::vector<double> cvs(levels.size());
  // Integer running sum keeps the rolling mean exact.
  long long sum = 0;
  const auto w = static_cast<std::size_t>(window);
  for (std::size_t i = 0; i < levels.size(); ++i) {
    sum += levels[i];
    if (i >= w) sum -= levels[i - w];
    const auto count = std::min(i + 1, w);
    cvs[i] = static_cast<double>(sum) / static_cast<double>(count) / static_cast<double>(max_level);
  }
  return cvs;
}

VigilanceSeries score_vigilance(std::span<const LabeledTrial> trials, const Thresholds& th,
                                int window, const TvsTable& table) {
  VigilanceSeries vs;
  vs.window_trials = window;
  vs.tvs.reserve(trials.size());
  for (const auto& t : trials) vs.tvs.push_back(tvs(t, th, table));
  vs.cvs = cvs_series(vs.tvs, window, table.max_level);
  vs.warmup = std::min<int>(window - 1, static_cast<int>(trials.size()));
  return vs;
}

PerformanceSummary performance_summary(std::span<const LabeledTrial> labeled,
                                       const VigilanceSeries& vs, const ParadigmSpec& spec) {
  const int per_block = spec.trials_per_block();
  if (labeled.empty() || labeled.size() % static_cast<std::size_t>(per_block) != 0)
    throw ArgumentError("performance_summary: " + std::to_string(labeled.size()) +
                        " trials is not a whole number of " + std::to_string(per_block) +
                        "-trial blocks");
  if (vs.cvs.size() != labeled.size())
    throw ArgumentError("performance_summary: CVS series length differs from trial count");

  PerformanceSummary s;
  s.n_trials = static_cast<int>(labeled.size());
  int ce = 0, oe = 0, targets = 0;
  std::vector<double> hits;
  for (const auto& t : labeled) {
    const bool target = spec.is_target(t.event.digit);
    targets += target ? 1 : 0;
    switch (t.outcome) {
      case Outcome::CommissionError: ++ce; break;
      case Outcome::OmissionError: ++oe; break;
      case Outcome::Hit: hits.push_back(*t.rt_ms); break;
      case Outcome::CorrectInhibition: break;
    }
  }
  const int nontargets = s.n_trials - targets;
  s.n_targets = targets;
  s.n_hits = static_cast<int>(hits.size());
  s.ce_pct = targets > 0 ? 100.0 * ce / targets : 0.0;
  s.oe_pct = nontargets > 0 ? 100.0 * oe / nontargets : 0.0;
  if (!hits.empty()) {
    s.hrt_mean_ms = stats::mean(hits);
    s.hrt_var = stats::variation_ratio(hits);
  }
  s.cvs_mean = stats::mean(vs.cvs);
  s.cvs_var = stats::variation_ratio(vs.cvs);
  return s;
}

SessionScore score_session(const EventLog& log, const ScoringOptions& opt) {
  const auto labeled = label_trials(log.trials, log.paradigm);
  SessionScore out;
  out.thresholds = adaptive_thresholds(labeled, opt.calib_trials, opt.rt_lower_ms);
  out.series = score_vigilance(labeled, out.thresholds, opt.window, opt.table);
  out.summary = performance_summary(labeled, out.series, log.paradigm);
  return out;
}

std::vector<bool> exclude_outliers(std::span<const double> values) {
  if (values.size() < 3) throw ArgumentError("exclude_outliers needs at least 3 participants");
  const double m = stats::mean(values);
  const double sd = stats::sample_sd(values);
  std::vector<bool> include(values.size(), true);
  if (sd == 0.0) return include;
  const double cut = m + 2.0 * sd;
  for (std::size_t i = 0; i < values.size(); ++i) include[i] = !(values[i] > cut);
  return include;
}

}  // namespace vigilkit
