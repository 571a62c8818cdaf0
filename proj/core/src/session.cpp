#include "vigilkit/session.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "vigilkit/error.hpp"

namespace vigilkit {

using nlohmann::json;
using nlohmann::ordered_json;

void ParadigmSpec::validate() const {
  if (!(digit_display_ms > 0 && response_interval_ms > 0 && isi_min_ms > 0 && isi_max_ms > 0))
    throw ArgumentError("paradigm durations must be positive");
  if (isi_min_ms > isi_max_ms) throw ArgumentError("paradigm ISI range is inverted");
  if (sequences_per_block < 1 || blocks < 1) throw ArgumentError("paradigm counts must be >= 1");
  if (digits.empty()) throw ArgumentError("paradigm has no digits");
  for (int d : digits) {
    if (d < 1 || d > 9) throw ArgumentError("paradigm digit outside 1..9");
  }
  if (std::find(digits.begin(), digits.end(), target_digit) == digits.end())
    throw ArgumentError("target digit is not among the paradigm digits");
}

std::string to_string(Outcome o) {
  switch (o) {
    case Outcome::Hit: return "hit";
    case Outcome::CommissionError: return "commission_error";
    case Outcome::OmissionError: return "omission_error";
    case Outcome::CorrectInhibition: return "correct_inhibition";
  }
  return "unknown";
}

namespace {

double finite_number(const json& j, const char* key, std::size_t line) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_number())
    throw ParseError(line, std::string("missing or non-numeric '") + key + "'");
  const double v = it->get<double>();
  if (!std::isfinite(v)) throw ParseError(line, std::string("non-finite '") + key + "'");
  return v;
}

int integer(const json& j, const char* key, std::size_t line) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_number_integer())
    throw ParseError(line, std::string("missing or non-integer '") + key + "'");
  return it->get<int>();
}

ParadigmSpec parse_paradigm(const json& p, std::size_t line) {
  ParadigmSpec spec;
  if (!p.is_object()) throw ParseError(line, "'paradigm' must be an object");
  if (p.contains("digit_display_ms")) spec.digit_display_ms = finite_number(p, "digit_display_ms", line);
  if (p.contains("response_interval_ms"))
    spec.response_interval_ms = finite_number(p, "response_interval_ms", line);
  if (p.contains("isi_range_ms")) {
    const auto& r = p["isi_range_ms"];
    if (!r.is_array() || r.size() != 2 || !r[0].is_number() || !r[1].is_number())
      throw ParseError(line, "'isi_range_ms' must be a [lo, hi] pair");
    spec.isi_min_ms = r[0].get<double>();
    spec.isi_max_ms = r[1].get<double>();
  }
  if (p.contains("sequences_per_block")) spec.sequences_per_block = integer(p, "sequences_per_block", line);
  if (p.contains("blocks")) spec.blocks = integer(p, "blocks", line);
  if (p.contains("digits")) {
    const auto& d = p["digits"];
    if (!d.is_array()) throw ParseError(line, "'digits' must be an array");
    spec.digits.clear();
    for (const auto& v : d) {
      if (!v.is_number_integer()) throw ParseError(line, "'digits' entries must be integers");
      spec.digits.push_back(v.get<int>());
    }
  }
  if (p.contains("target_digit")) spec.target_digit = integer(p, "target_digit", line);
  try {
    spec.validate();
  } catch (const ArgumentError& e) {
    throw ParseError(line, e.what());
  }
  return spec;
}

json parse_json_line(const std::string& text, std::size_t line) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(line, std::string("invalid JSON: ") + e.what());
  }
}

TrialEvent parse_trial(const json& j, const ParadigmSpec& spec, std::size_t line) {
  if (!j.is_object()) throw ParseError(line, "trial record must be an object");
  TrialEvent t;
  t.trial_index = integer(j, "trial", line);
  t.block = integer(j, "block", line);
  t.digit = integer(j, "digit", line);
  t.onset_ms = finite_number(j, "onset_ms", line);
  t.isi_ms = finite_number(j, "isi_ms", line);
  if (t.trial_index < 1) throw ParseError(line, "trial index must be >= 1");
  if (t.block < 1 || t.block > spec.blocks) throw ParseError(line, "block outside 1..blocks");
  if (t.digit < 1 || t.digit > 9) throw ParseError(line, "digit outside 1..9");
  if (std::find(spec.digits.begin(), spec.digits.end(), t.digit) == spec.digits.end())
    throw ParseError(line, "digit not part of the paradigm");
  if (t.isi_ms < 0) throw ParseError(line, "negative isi_ms");
  auto it = j.find("clicks_ms");
  if (it == j.end() || !it->is_array()) throw ParseError(line, "missing 'clicks_ms' array");
  for (const auto& c : *it) {
    if (!c.is_number()) throw ParseError(line, "non-numeric click time");
    const double v = c.get<double>();
    if (!std::isfinite(v)) throw ParseError(line, "non-finite click time");
    t.clicks_ms.push_back(v);
  }
  return t;
}

}  // namespace

EventLog parse_event_log(std::istream& in) {
  EventLog log;
  std::string text;
  std::size_t line = 0;
  bool have_header = false;
  std::vector<TrialEvent> trials;
  while (std::getline(in, text)) {
    ++line;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (text.find_first_not_of(" \t") == std::string::npos) continue;
    json j = parse_json_line(text, line);
    if (!have_header) {
      if (!j.is_object() || j.value("schema", "") != kEventLogSchema)
        throw ParseError(line, std::string("first record must be a '") + kEventLogSchema + "' header");
      if (!j.contains("participant") || !j["participant"].is_string())
        throw ParseError(line, "header is missing 'participant'");
      log.participant = j["participant"].get<std::string>();
      log.paradigm = j.contains("paradigm") ? parse_paradigm(j["paradigm"], line) : ParadigmSpec{};
      have_header = true;
      continue;
    }
    trials.push_back(parse_trial(j, log.paradigm, line));
  }
  if (!have_header) throw ParseError(line + 1, "empty event log");

  std::sort(trials.begin(), trials.end(),
            [](const TrialEvent& a, const TrialEvent& b) { return a.trial_index < b.trial_index; });
  for (std::size_t i = 0; i < trials.size(); ++i) {
    if (trials[i].trial_index != static_cast<int>(i + 1))
      throw StructuralError("trial indices are not contiguous from 1 (expected " +
                            std::to_string(i + 1) + ", found " +
                            std::to_string(trials[i].trial_index) + ")");
    if (i > 0 && !(trials[i].onset_ms > trials[i - 1].onset_ms))
      throw StructuralError("onsets are not strictly increasing at trial " +
                            std::to_string(trials[i].trial_index));
  }

  std::vector<double> clicks;
  for (auto& t : trials) {
    clicks.insert(clicks.end(), t.clicks_ms.begin(), t.clicks_ms.end());
    t.clicks_ms.clear();
  }
  std::sort(clicks.begin(), clicks.end());
  if (!clicks.empty()) {
    if (trials.empty()) throw StructuralError("clicks present without any trial");
    const auto& last = trials.back();
    const double session_end = last.onset_ms + log.paradigm.digit_display_ms +
                               log.paradigm.response_interval_ms + last.isi_ms;
    for (double c : clicks) {
      if (c < trials.front().onset_ms)
        throw StructuralError("click at " + std::to_string(c) + " ms precedes the first onset");
      if (c >= session_end)
        throw StructuralError("click at " + std::to_string(c) + " ms falls after the last trial window");
      // greatest onset <= c
      auto it = std::upper_bound(trials.begin(), trials.end(), c,
                                 [](double v, const TrialEvent& t) { return v < t.onset_ms; });
      std::prev(it)->clicks_ms.push_back(c);
    }
  }
  log.trials = std::move(trials);
  return log;
}

EventLog parse_event_log_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open event log '" + path + "'");
  return parse_event_log(in);
}

std::string serialize_event_log(const EventLog& log) {
  const auto& p = log.paradigm;
  ordered_json paradigm;
  paradigm["digit_display_ms"] = p.digit_display_ms;
  paradigm["response_interval_ms"] = p.response_interval_ms;
  paradigm["isi_range_ms"] = {p.isi_min_ms, p.isi_max_ms};
  paradigm["sequences_per_block"] = p.sequences_per_block;
  paradigm["blocks"] = p.blocks;
  paradigm["digits"] = p.digits;
  paradigm["target_digit"] = p.target_digit;
  ordered_json header;
  header["schema"] = kEventLogSchema;
  header["participant"] = log.participant;
  header["paradigm"] = std::move(paradigm);

  std::ostringstream out;
  out << header.dump() << '\n';
  for (const auto& t : log.trials) {
    ordered_json j;
    j["trial"] = t.trial_index;
    j["block"] = t.block;
    j["digit"] = t.digit;
    j["onset_ms"] = t.onset_ms;
    j["isi_ms"] = t.isi_ms;
    j["clicks_ms"] = t.clicks_ms;
    out << j.dump() << '\n';
  }
  return out.str();
}

std::vector<LabeledTrial> label_trials(const std::vector<TrialEvent>& trials,
                                       const ParadigmSpec& spec) {
  std::vector<LabeledTrial> out;
  out.reserve(trials.size());
  for (const auto& t : trials) {
    LabeledTrial l;
    l.event = t;
    const bool clicked = !t.clicks_ms.empty();
    if (clicked) l.rt_ms = t.clicks_ms.front() - t.onset_ms;
    l.multi_click = t.clicks_ms.size() >= 2;
    if (spec.is_target(t.digit)) {
      l.outcome = clicked ? Outcome::CommissionError : Outcome::CorrectInhibition;
    } else {
      l.outcome = clicked ? Outcome::Hit : Outcome::OmissionError;
    }
    out.push_back(std::move(l));
  }
  return out;
}

}  // namespace vigilkit
