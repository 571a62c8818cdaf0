#pragma once

// One-block (225-trial) session with a rule-based click schedule. Expected
// values come from derive_fixture.py (exact rational arithmetic).

#include <vector>

#include "vigilkit/session.hpp"

namespace fixture {

inline vigilkit::EventLog one_block_log() {
  vigilkit::EventLog log;
  log.participant = "FIX225";
  log.paradigm.blocks = 1;
  int j = 0, t = 0;
  for (int i = 1; i <= 225; ++i) {
    vigilkit::TrialEvent e;
    e.trial_index = i;
    e.block = 1;
    e.digit = (i - 1) % 9 + 1;
    e.onset_ms = 1000.0 + (i - 1) * 1500.0;
    e.isi_ms = 950.0;
    std::vector<double> rel;
    if (e.digit == 3) {
      ++t;
      if (t % 5 == 0) rel = t == 10 ? std::vector<double>{380, 640} : std::vector<double>{380};
    } else {
      ++j;
      if (i <= 27) rel = {j % 2 ? 400.0 : 500.0};
      else if (j % 25 == 0) rel = {};
      else if (j % 17 == 0) rel = {620};
      else if (j % 19 == 0) rel = {230};
      else if (j % 23 == 0) rel = {430, 700};
      else rel = {450.0 + (j % 7) * 10.0};
    }
    for (double r : rel) e.clicks_ms.push_back(e.onset_ms + r);
    log.trials.push_back(e);
  }
  return log;
}

inline constexpr double kRtUpper = 552.1507836910498;
inline constexpr double kCePct = 20.0;
inline constexpr double kOePct = 4.0;
inline constexpr double kHrtMean = 469.8958333333333;
inline constexpr double kHrtVar = 0.1456775854262564;
inline constexpr double kCvsMean = 0.8990504088928972;
inline constexpr double kCvsVar = 0.05184014517176121;
inline constexpr const char* kLevels =
    "444444444444444444444444444044444444420444344444444144404244444344444444444421444440034444444442444444414434"
    "444404244444444444430144424444440444444443442414444444444444043240444444144444444424344404444444441444244344440444440";

}  // namespace fixture
