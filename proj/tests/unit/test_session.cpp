#include <doctest.h>

#include <sstream>
#include <string>

#include "fixture.hpp"
#include "vigilkit/error.hpp"
#include "vigilkit/scoring.hpp"
#include "vigilkit/session.hpp"
#include "vigilkit/synth.hpp"

using namespace vigilkit;

namespace {

EventLog parse(const std::string& text) {
  std::istringstream in(text);
  return parse_event_log(in);
}

const char* kHeader = R"({"schema":"vigilkit-events/1","participant":"P","paradigm":{"blocks":1}})";

std::string trial(int i, double onset, const std::string& clicks, int digit = 1) {
  return R"({"trial":)" + std::to_string(i) + R"(,"block":1,"digit":)" + std::to_string(digit) +
         R"(,"onset_ms":)" + std::to_string(onset) + R"(,"isi_ms":500,"clicks_ms":[)" + clicks + "]}";
}

}  // namespace

TEST_SUITE("session") {
  TEST_CASE("round trip through the serialised form") {
    const EventLog log = fixture::one_block_log();
    const EventLog back = parse(serialize_event_log(log));
    CHECK(back.participant == log.participant);
    CHECK(back.paradigm == log.paradigm);
    CHECK(back.trials == log.trials);
  }

  TEST_CASE("synthetic sessions round trip") {
    const auto s = synth::gen_session(synth::BehaviorProfile::named("declining", 7));
    const EventLog back = parse(serialize_event_log(s.log));
    CHECK(back.trials == s.log.trials);
    CHECK(back.trials.size() == 2700);
  }

  TEST_CASE("clicks are reassigned to the trial whose window contains them") {
    const std::string text = std::string(kHeader) + "\n" + trial(1, 1000, "2700") + "\n" +
                             trial(2, 2500, "1300") + "\n";
    const EventLog log = parse(text);
    REQUIRE(log.trials.size() == 2);
    CHECK(log.trials[0].clicks_ms == std::vector<double>{1300});
    CHECK(log.trials[1].clicks_ms == std::vector<double>{2700});
  }

  TEST_CASE("a click exactly on an onset belongs to the new trial") {
    const std::string text = std::string(kHeader) + "\n" + trial(1, 1000, "2500") + "\n" + trial(2, 2500, "") + "\n";
    const EventLog log = parse(text);
    CHECK(log.trials[0].clicks_ms.empty());
    CHECK(log.trials[1].clicks_ms == std::vector<double>{2500});
  }

  TEST_CASE("final trial window boundary") {
    // window end = 2500 + 250 + 300 + 500 = 3550
    const std::string inside = std::string(kHeader) + "\n" + trial(1, 1000, "") + "\n" + trial(2, 2500, "3549.5") + "\n";
    CHECK(parse(inside).trials[1].clicks_ms.size() == 1);
    const std::string outside = std::string(kHeader) + "\n" + trial(1, 1000, "") + "\n" + trial(2, 2500, "3550") + "\n";
    CHECK_THROWS_AS(parse(outside), StructuralError);
  }

  TEST_CASE("click before the first onset") {
    const std::string text = std::string(kHeader) + "\n" + trial(1, 1000, "999") + "\n";
    CHECK_THROWS_AS(parse(text), StructuralError);
  }

  TEST_CASE("trials out of order in the file are sorted") {
    const std::string text = std::string(kHeader) + "\n" + trial(2, 2500, "") + "\n" + trial(1, 1000, "") + "\n";
    const EventLog log = parse(text);
    CHECK(log.trials[0].trial_index == 1);
    CHECK(log.trials[1].onset_ms == 2500);
  }

  TEST_CASE("structural errors") {
    SUBCASE("gap in indices") {
      CHECK_THROWS_AS(parse(std::string(kHeader) + "\n" + trial(1, 1000, "") + "\n" + trial(3, 2500, "") + "\n"),
                      StructuralError);
    }
    SUBCASE("non-increasing onsets") {
      CHECK_THROWS_AS(parse(std::string(kHeader) + "\n" + trial(1, 1000, "") + "\n" + trial(2, 1000, "") + "\n"),
                      StructuralError);
    }
  }

  TEST_CASE("parse errors carry the line number") {
    SUBCASE("missing header") {
      try {
        parse(trial(1, 1000, "") + "\n");
        FAIL("expected a ParseError");
      } catch (const ParseError& e) {
        CHECK(e.line() == 1);
      }
    }
    SUBCASE("bad JSON on line 3") {
      try {
        parse(std::string(kHeader) + "\n" + trial(1, 1000, "") + "\n{oops\n");
        FAIL("expected a ParseError");
      } catch (const ParseError& e) {
        CHECK(e.line() == 3);
      }
    }
    SUBCASE("missing field") {
      CHECK_THROWS_AS(parse(std::string(kHeader) + "\n" + R"({"trial":1,"block":1,"digit":1,"isi_ms":1,"clicks_ms":[]})" + "\n"),
                      ParseError);
    }
    SUBCASE("digit out of range") {
      CHECK_THROWS_AS(parse(std::string(kHeader) + "\n" + trial(1, 1000, "", 0) + "\n"), ParseError);
    }
    SUBCASE("empty stream") { CHECK_THROWS_AS(parse(""), ParseError); }
  }

  TEST_CASE("scores are invariant to a constant time shift") {
    EventLog log = fixture::one_block_log();
    const auto base = score_session(log);
    for (auto& t : log.trials) {
      t.onset_ms += 123456.0;
      for (auto& c : t.clicks_ms) c += 123456.0;
    }
    const auto shifted = score_session(log);
    CHECK(shifted.series.tvs == base.series.tvs);
    CHECK(shifted.summary.cvs_mean == doctest::Approx(base.summary.cvs_mean).epsilon(1e-12));
    CHECK(*shifted.summary.hrt_mean_ms == doctest::Approx(*base.summary.hrt_mean_ms).epsilon(1e-9));
  }

  TEST_CASE("labelling") {
    ParadigmSpec spec;
    std::vector<TrialEvent> trials(4);
    for (int i = 0; i < 4; ++i) {
      trials[static_cast<std::size_t>(i)].trial_index = i + 1;
      trials[static_cast<std::size_t>(i)].onset_ms = 1000.0 * (i + 1);
    }
    trials[0].digit = 3;
    trials[1].digit = 3;
    trials[1].clicks_ms = {2300};
    trials[2].digit = 5;
    trials[3].digit = 5;
    trials[3].clicks_ms = {4400, 4500};
    const auto l = label_trials(trials, spec);
    CHECK(l[0].outcome == Outcome::CorrectInhibition);
    CHECK(l[1].outcome == Outcome::CommissionError);
    CHECK(l[2].outcome == Outcome::OmissionError);
    CHECK(l[3].outcome == Outcome::Hit);
    CHECK(*l[3].rt_ms == doctest::Approx(400));
    CHECK(l[3].multi_click);
  }

  TEST_CASE("paradigm validation") {
    ParadigmSpec spec;
    CHECK_NOTHROW(spec.validate());
    spec.target_digit = 0;
    CHECK_THROWS_AS(spec.validate(), ArgumentError);
    spec = {};
    spec.isi_min_ms = 2000;
    CHECK_THROWS_AS(spec.validate(), ArgumentError);
  }
}
