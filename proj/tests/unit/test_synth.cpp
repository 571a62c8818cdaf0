#include <doctest.h>

#include <cmath>

#include "tempdir.hpp"
#include "vigilkit/error.hpp"
#include "vigilkit/scoring.hpp"
#include "vigilkit/synth.hpp"

using namespace vigilkit;
using namespace vigilkit::synth;

TEST_SUITE("synth") {
  TEST_CASE("sessions are deterministic and well formed") {
    const auto p = BehaviorProfile::named("steady", 3);
    const auto a = gen_session(p);
    const auto b = gen_session(p);
    CHECK(a.log.trials == b.log.trials);
    REQUIRE(a.log.trials.size() == 2700);
    CHECK(a.log.trials.back().block == 12);
    for (std::size_t i = 1; i < a.log.trials.size(); ++i) {
      const auto& prev = a.log.trials[i - 1];
      const auto& t = a.log.trials[i];
      CHECK(t.onset_ms == prev.onset_ms + 550.0 + prev.isi_ms);
      for (double c : t.clicks_ms) CHECK(c >= t.onset_ms);
      for (double c : prev.clicks_ms) CHECK(c < t.onset_ms);
    }
    const auto c = gen_session(BehaviorProfile::named("steady", 4));
    CHECK_FALSE(c.log.trials == a.log.trials);
  }

  TEST_CASE("the perfect profile makes no errors") {
    const auto s = gen_session(BehaviorProfile::named("perfect"));
    const auto score = score_session(s.log);
    CHECK(score.summary.ce_pct == 0.0);
    CHECK(score.summary.oe_pct == 0.0);
    CHECK(score.summary.cvs_mean > 0.97);
  }

  TEST_CASE("declining vigilance lowers late CVS") {
    const auto s = gen_session(BehaviorProfile::named("declining", 2));
    const auto score = score_session(s.log);
    const auto& cvs = score.series.cvs;
    double early = 0, late = 0;
    for (std::size_t i = 0; i < 300; ++i) {
      early += cvs[i + 100];
      late += cvs[cvs.size() - 300 + i];
    }
    CHECK(early > late);
    CHECK(s.vigilance.front() > s.vigilance.back());
  }

  TEST_CASE("profile names and validation") {
    for (const char* n : {"steady", "declining", "recovering", "early-sleep", "perfect"})
      CHECK_NOTHROW(BehaviorProfile::named(n).validate());
    CHECK_THROWS_AS(BehaviorProfile::named("sleepy"), ArgumentError);
    auto p = BehaviorProfile::named("steady");
    p.ce_floor = 1.5;
    CHECK_THROWS_AS(p.validate(), ArgumentError);
    CHECK(parse_vigilance_process(to_string(VigilanceProcess::EarlySleep)) == VigilanceProcess::EarlySleep);
    CHECK_THROWS_AS(parse_vigilance_process("nope"), ArgumentError);
  }

  TEST_CASE("cohort composition and planted target") {
    PlantSpec plant;
    plant.planted = {{"LP", "alpha1", 1.0}, {"LT", "gamma2", -0.7}};
    plant.noise_sd = 0.0;
    plant.n_participants = 12;
    const auto c = gen_cohort(plant, 5);
    CHECK(c.data.x.rows() == 12);
    CHECK(c.data.x.cols() == 168);
    CHECK(c.data.participant_ids.front() == "P01");
    CHECK(c.data.participant_ids.back() == "P12");
    for (Eigen::Index i = 0; i < 12; ++i)
      for (Eigen::Index r = 0; r < 14; ++r) CHECK(c.data.x.row(i).segment(r * 12, 12).sum() == doctest::Approx(1.0));
    CHECK(c.planted_indices == std::vector<int>{9 * 12 + 2, 12 * 12 + 9});
    const Eigen::VectorXd fitted = (c.data.x * c.raw_coefficients).array() + c.raw_intercept;
    CHECK((fitted - c.data.y).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(c.data.y.mean() == doctest::Approx(0.0).scale(1.0));
  }

  TEST_CASE("cohort is deterministic in the seed") {
    PlantSpec plant;
    plant.planted = {{"MF", "theta", 1.0}};
    CHECK(gen_cohort(plant, 9).data.x == gen_cohort(plant, 9).data.x);
    CHECK(gen_cohort(plant, 9).data.y == gen_cohort(plant, 9).data.y);
    CHECK_FALSE(gen_cohort(plant, 9).data.x == gen_cohort(plant, 10).data.x);
  }

  TEST_CASE("plant validation") {
    PlantSpec plant;
    plant.planted = {{"XX", "alpha1", 1.0}};
    CHECK_THROWS_AS(plant.validate(), ArgumentError);
    plant.planted = {{"LP", "alpha1", 1.0}, {"LP", "alpha1", 2.0}};
    CHECK_THROWS_AS(plant.validate(), ArgumentError);
    plant.planted = {};
    plant.n_participants = 5;
    CHECK_THROWS_AS(plant.validate(), ArgumentError);
    plant.n_participants = 10;
    plant.target_measure = "speed";
    CHECK_THROWS_AS(plant.validate(), ArgumentError);
    plant.target_measure = "cvs_mean";
    plant.concentration = 0;
    CHECK_THROWS_AS(plant.validate(), ArgumentError);
  }

  TEST_CASE("plant spec file") {
    testing::TempDir dir;
    testing::spit(dir / "plant.json",
                  R"({"target_measure":"hrt_var","noise_sd":0.2,"n_participants":14,
                      "planted_features":[{"roi":"RC","band":"beta2","coefficient":0.5}]})");
    const auto p = read_plant_spec(dir / "plant.json");
    CHECK(p.target_measure == "hrt_var");
    CHECK(p.n_participants == 14);
    REQUIRE(p.planted.size() == 1);
    CHECK(p.planted[0].band == "beta2");
    testing::spit(dir / "bad.json", "{");
    CHECK_THROWS_AS(read_plant_spec(dir / "bad.json"), ParseError);
    CHECK_THROWS_AS(read_plant_spec(dir / "missing.json"), ArgumentError);
  }

  TEST_CASE("recording layout") {
    RecordingPlant plant;
    plant.ocular_uv = 30;
    plant.spikes = 3;
    const auto s = gen_recording(plant, 10, 128, 1);
    CHECK(s.recording.channels() == 66);
    CHECK(s.recording.samples() == 1280);
    CHECK(s.recording.eog_channels == std::vector<std::string>{"VEOG", "HEOG"});
    CHECK(s.recording.channel_names[64] == "VEOG");
    CHECK(s.ocular_mixing.size() == 64);
    CHECK(s.spike_mixing.size() == 64);
    CHECK_NOTHROW(s.recording.validate());
    CHECK_THROWS_AS(gen_recording(plant, 9.5, 128, 1), ArgumentError);
  }

  TEST_CASE("Laplacian mixture") {
    const auto m = laplacian_mixture(8, 3, 50000, 0.0, 2);
    CHECK(m.mixing.rows() == 8);
    CHECK((m.data - m.mixing * m.sources).cwiseAbs().maxCoeff() < 1e-12);
    for (Eigen::Index k = 0; k < 3; ++k) {
      const auto row = m.sources.row(k).array();
      const double var = (row - row.mean()).square().mean();
      CHECK(var == doctest::Approx(1.0).epsilon(0.05));
      const double kurt = (row - row.mean()).pow(4).mean() / (var * var) - 3.0;
      CHECK(kurt == doctest::Approx(3.0).epsilon(0.2));
    }
    CHECK_THROWS_AS(laplacian_mixture(2, 3, 100, 0.0, 1), ArgumentError);
  }
}
