#include <doctest.h>

#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "tempdir.hpp"
#include "vigilkit/table_io.hpp"

namespace fs = std::filesystem;
using testing::TempDir;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "vigilkit");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = vigilkit::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> files_in(const fs::path& dir) {
  std::vector<std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) out.push_back(e.path().string());
  std::sort(out.begin(), out.end());
  return out;
}

const char* kPlant =
    R"({"target_measure":"cvs_mean","noise_sd":0.05,"n_participants":12,
        "planted_features":[{"roi":"LP","band":"alpha1","coefficient":1.0}]})";

}  // namespace

TEST_CASE("synth then score produces summaries and a correlation table") {
  TempDir dir;
  const auto s = run({"--seed", "3", "--out", dir / "syn", "synth", "--participants", "6"});
  REQUIRE_MESSAGE(s.code == 0, s.err);
  const auto logs = files_in(dir.path() / "syn" / "events");
  REQUIRE(logs.size() == 6);
  CHECK(fs::exists(dir.path() / "syn" / "ground_truth.json"));
  CHECK(fs::exists(dir.path() / "syn" / "manifest.json"));

  std::vector<std::string> args{"--out", dir / "scored", "score"};
  args.insert(args.end(), logs.begin(), logs.end());
  const auto r = run(args);
  REQUIRE_MESSAGE(r.code == 0, r.err);
  const auto summary = vigilkit::io::read_csv(dir / "scored/summary.csv");
  CHECK(summary.rows.size() == 6);
  CHECK(summary.column("cvs_mean") >= 0);
  CHECK(summary.column("rt_upper_ms") >= 0);
  CHECK(fs::exists(dir.path() / "scored" / "cvs.csv"));
  const auto t1 = vigilkit::io::read_csv(dir / "scored/table1.csv");
  CHECK(t1.rows.size() == 5);

  const auto manifest = nlohmann::json::parse(testing::slurp(dir / "scored/manifest.json"));
  CHECK(manifest["subcommand"] == "score");
  CHECK(manifest["inputs"].size() == 6);
  CHECK(manifest.contains("config"));
  CHECK(manifest["config"]["window"] == "36");
  CHECK(manifest["config"].contains("seed"));
  CHECK_FALSE(manifest["config"].contains("perms"));

  const auto rep = run({"--out", dir / "rep", "report", "--summary", dir / "scored/summary.csv"});
  REQUIRE_MESSAGE(rep.code == 0, rep.err);
  CHECK(testing::slurp(dir / "rep/table1.csv") == testing::slurp(dir / "scored/table1.csv"));
}

TEST_CASE("same seed gives byte-identical outputs") {
  TempDir dir;
  REQUIRE(run({"--seed", "9", "--out", dir / "a", "synth", "--participants", "2"}).code == 0);
  REQUIRE(run({"--seed", "9", "--out", dir / "b", "synth", "--participants", "2"}).code == 0);
  REQUIRE(run({"--seed", "10", "--out", dir / "c", "synth", "--participants", "2"}).code == 0);
  CHECK(testing::slurp(dir / "a/events/SYN02.jsonl") == testing::slurp(dir / "b/events/SYN02.jsonl"));
  CHECK(testing::slurp(dir / "a/events/SYN02.jsonl") != testing::slurp(dir / "c/events/SYN02.jsonl"));
}

TEST_CASE("missing inputs fail without writing anything") {
  TempDir dir;
  const auto r = run({"--out", dir / "o", "score", dir / "nope.jsonl"});
  CHECK(r.code == 1);
  CHECK(r.err.find("nope.jsonl") != std::string::npos);
  CHECK_FALSE(fs::exists(dir.path() / "o"));
}

TEST_CASE("a malformed log fails the whole run") {
  TempDir dir;
  testing::spit(dir / "bad.jsonl", "{\"schema\":\"vigilkit-events/1\",\"participant\":\"x\"}\n{oops\n");
  const auto r = run({"--out", dir / "o", "score", dir / "bad.jsonl"});
  CHECK(r.code == 1);
  CHECK(r.err.find("line 2") != std::string::npos);
  CHECK_FALSE(fs::exists(dir.path() / "o" / "summary.csv"));
}

TEST_CASE("usage errors exit with code 2") {
  CHECK(run({"score", "--no-such-flag", "x"}).code == 2);
  CHECK(run({"mvpa"}).code == 2);
  CHECK(run({"--threads", "abc", "synth"}).code == 2);
}

TEST_CASE("cohort through mvpa, screen and nn-train") {
  TempDir dir;
  testing::spit(dir / "plant.json", kPlant);
  const auto s = run({"--seed", "4", "--out", dir / "syn", "synth", "--participants", "1", "--plant", dir / "plant.json"});
  REQUIRE_MESSAGE(s.code == 0, s.err);
  const std::string cohort = dir / "syn/cohort.csv";
  const auto table = vigilkit::io::read_csv(cohort);
  CHECK(table.rows.size() == 12);
  CHECK(table.header.size() == 170);

  const auto sc = run({"--out", dir / "screen", "screen", "--features", cohort, "--target", "cvs_mean"});
  REQUIRE_MESSAGE(sc.code == 0, sc.err);
  const auto screened = vigilkit::io::read_csv(dir / "screen/screen.csv");
  CHECK(screened.rows.size() == 168);

  const auto mv = run({"--out", dir / "mvpa", "mvpa", "--features", cohort, "--target", "cvs_mean", "--perms", "20"});
  REQUIRE_MESSAGE(mv.code == 0, mv.err);
  const auto t2 = vigilkit::io::read_csv(dir / "mvpa/table2.csv");
  REQUIRE_FALSE(t2.rows.empty());
  CHECK(testing::slurp(dir / "mvpa/table2.csv").find("LP_alpha1") != std::string::npos);
  CHECK(fs::exists(dir.path() / "mvpa" / "scatter.svg"));
  CHECK(fs::exists(dir.path() / "mvpa" / "predictions.csv"));

  const auto nn = run({"--out", dir / "nn", "nn-train", "--features", cohort, "--target", "cvs_mean", "--units", "4",
                       "--runs", "1", "--grid-size", "2", "--max-epochs", "15"});
  REQUIRE_MESSAGE(nn.code == 0, nn.err);
  const auto surface = vigilkit::io::read_csv(dir / "nn/err_surface.csv");
  CHECK(surface.rows.size() == 4);
  const auto weights = vigilkit::io::read_csv(dir / "nn/weights.csv");
  CHECK(weights.rows.size() == 168);
  CHECK(fs::exists(dir.path() / "nn" / "heatmap.svg"));
  const auto summary = nlohmann::json::parse(testing::slurp(dir / "nn/nn_summary.json"));
  CHECK(summary.is_object());

  const auto rep = run({"--out", dir / "rep", "report", "--weights", dir / "nn/weights.csv", "--predictions",
                        dir / "mvpa/predictions.csv"});
  REQUIRE_MESSAGE(rep.code == 0, rep.err);
  CHECK(fs::exists(dir.path() / "rep" / "heatmap.svg"));
  CHECK(fs::exists(dir.path() / "rep" / "scatter.svg"));
}

TEST_CASE("targets joined from a second file") {
  TempDir dir;
  testing::spit(dir / "plant.json", kPlant);
  REQUIRE(run({"--out", dir / "syn", "synth", "--participants", "1", "--plant", dir / "plant.json"}).code == 0);
  auto t = vigilkit::io::read_csv(dir / "syn/cohort.csv");
  const int target = t.column("cvs_mean");
  vigilkit::io::Table features, targets;
  features.header.assign(t.header.begin(), t.header.begin() + target);
  targets.header = {"participant", "cvs_mean"};
  for (auto row : t.rows) {
    targets.rows.push_back({row[0], row[static_cast<std::size_t>(target)]});
    row.resize(static_cast<std::size_t>(target));
    features.rows.push_back(row);
  }
  targets.rows[3][1] = "NA";
  vigilkit::io::write_csv(features, dir / "features.csv");
  vigilkit::io::write_csv(targets, dir / "targets.csv");
  const auto r = run({"--out", dir / "o", "screen", "--features", dir / "features.csv", "--targets", dir / "targets.csv",
                      "--target", "cvs_mean"});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(r.err.find("participant P04 has no cvs_mean value; dropped") != std::string::npos);
  const auto screened = vigilkit::io::read_csv(dir / "o/screen.csv");
  CHECK(screened.rows.size() == 168);
}

TEST_CASE("recordings through extract") {
  TempDir dir;
  const auto s = run({"--seed", "2", "--out", dir / "syn", "synth", "--participants", "2", "--recording-s", "10"});
  REQUIRE_MESSAGE(s.code == 0, s.err);
  const auto r = run({"--out", dir / "fx", "extract", dir / "syn/recordings/SYN01.json", dir / "syn/recordings/SYN02.json",
                      "--ica-components", "6", "--state", "ec"});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  const auto f = vigilkit::io::read_csv(dir / "fx/features.csv");
  REQUIRE(f.rows.size() == 2);
  CHECK(f.header.size() == 170);
  CHECK(f.rows[0][1] == "ec");
  CHECK(fs::exists(dir.path() / "fx" / "provenance.csv"));
}

TEST_CASE("score with fewer than four participants skips the correlation table") {
  TempDir dir;
  REQUIRE(run({"--out", dir / "syn", "synth", "--participants", "3"}).code == 0);
  const auto logs = files_in(dir.path() / "syn" / "events");
  std::vector<std::string> args{"--out", dir / "o", "score"};
  args.insert(args.end(), logs.begin(), logs.end());
  const auto r = run(args);
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(fs::exists(dir.path() / "o" / "summary.csv"));
  CHECK_FALSE(fs::exists(dir.path() / "o" / "table1.csv"));
  CHECK(r.err.find("at least 4 participants") != std::string::npos);
}
