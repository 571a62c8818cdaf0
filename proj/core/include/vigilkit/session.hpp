#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace vigilkit {

/// Timing and structure of a fixed-order SART session.
struct ParadigmSpec {
  double digit_display_ms = 250.0;
  double response_interval_ms = 300.0;
  double isi_min_ms = 400.0;
  double isi_max_ms = 1000.0;
  int sequences_per_block = 25;
  int blocks = 12;
  std::vector<int> digits{1, 2, 3, 4, 5, 6, 7, 8, 9};
  int target_digit = 3;

  /// Throws ArgumentError if any invariant is violated.
  void validate() const;
  int trials_per_block() const { return sequences_per_block * static_cast<int>(digits.size()); }
  bool is_target(int digit) const { return digit == target_digit; }

  friend bool operator==(const ParadigmSpec&, const ParadigmSpec&) = default;
};

struct TrialEvent {
  int trial_index = 0;  // 1-based
  int block = 0;        // 1-based
  int digit = 0;
  double onset_ms = 0.0;
  double isi_ms = 0.0;
  std::vector<double> clicks_ms;  // absolute, ascending

  friend bool operator==(const TrialEvent&, const TrialEvent&) = default;
};

enum class Outcome { Hit, CommissionError, OmissionError, CorrectInhibition };

std::string to_string(Outcome o);

struct LabeledTrial {
  TrialEvent event;
  Outcome outcome = Outcome::OmissionError;
  std::optional<double> rt_ms;  // first-click latency
  bool multi_click = false;
};

struct EventLog {
  std::string participant;
  ParadigmSpec paradigm;
  std::vector<TrialEvent> trials;
};

inline constexpr const char* kEventLogSchema = "vigilkit-events/1";

/// Reads a vigilkit-events/1 JSON Lines stream.
///
/// Trials are re-sorted by index and every click (wherever it was listed) is
/// reassigned to the trial with the greatest onset not after it. A click that
/// lands exactly on an onset belongs to the new trial. The final trial's window
/// ends at onset + display + response + ISI.
EventLog parse_event_log(std::istream& in);
EventLog parse_event_log_file(const std::string& path);

/// Inverse of parse_event_log: header line followed by one line per trial.
std::string serialize_event_log(const EventLog& log);

/// Assigns each trial one of the four outcomes from digit type and clicks.
std::vector<LabeledTrial> label_trials(const std::vector<TrialEvent>& trials,
                                       const ParadigmSpec& spec);

}  // namespace vigilkit
