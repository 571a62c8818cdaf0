#include "cli.hpp"

#include <charconv>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "vigilkit/error.hpp"
#include "vigilkit/nn.hpp"
#include "vigilkit/parallel.hpp"
#include "vigilkit/recording_io.hpp"
#include "vigilkit/relevance.hpp"
#include "vigilkit/report.hpp"
#include "vigilkit/scoring.hpp"
#include "vigilkit/session.hpp"
#include "vigilkit/signal.hpp"
#include "vigilkit/stats.hpp"
#include "vigilkit/synth.hpp"
#include "vigilkit/table_io.hpp"

#ifndef VIGILKIT_VERSION
#define VIGILKIT_VERSION "unknown"
#endif

namespace vigilkit::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

struct Global {
  std::uint64_t seed = 1;
  std::string out = ".";
  bool paper_compat = false;
  unsigned threads = 1;
};

/// Output files are staged in memory and written only after every stage succeeded.
class Artifacts {
 public:
  void text(const std::string& name, std::string content) {
    writers_.push_back({name, [c = std::move(content)](const fs::path& p) { report::write_text(c, p.string()); }});
  }
  void table(const std::string& name, const io::Table& t) { text(name, io::to_csv(t)); }
  void custom(const std::string& name, std::function<void(const fs::path&)> w) {
    writers_.push_back({name, std::move(w)});
  }

  std::vector<std::string> commit(const fs::path& dir) const {
    std::vector<std::string> names;
    for (const auto& [name, write] : writers_) {
      const fs::path target = dir / name;
      fs::create_directories(target.parent_path());
      write(target);
      names.push_back(name);
    }
    return names;
  }

 private:
  std::vector<std::pair<std::string, std::function<void(const fs::path&)>>> writers_;
};

void require_inputs(const std::vector<std::string>& paths) {
  for (const auto& p : paths)
    if (!p.empty() && !fs::is_regular_file(p)) throw Error("input file not found: " + p);
}

std::string na_or(const std::optional<double>& v) { return v ? io::format_number(*v) : "NA"; }

relevance::Standardization policy_of(const Global& g) {
  return g.paper_compat ? relevance::Standardization::Global : relevance::Standardization::PerFold;
}

relevance::ScreenTail tail_of(bool two_tailed) {
  return two_tailed ? relevance::ScreenTail::TwoTailed : relevance::ScreenTail::Positive;
}

bool is_missing(const std::string& cell) { return cell.empty() || cell == "NA" || cell == "nan"; }

double parse_number(const std::string& cell, const std::string& what) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size())
    throw ArgumentError(what + ": non-numeric value '" + cell + "'");
  return v;
}

// --- dataset loading -------------------------------------------------------

struct DatasetInput {
  std::string features;
  std::string targets;
  std::string target;
};

relevance::Dataset load_dataset(const DatasetInput& in, std::ostream& err) {
  const io::Table ft = io::read_csv(in.features);
  const int pid = ft.column("participant");
  std::vector<std::string> ids;
  for (std::size_t r = 0; r < ft.rows.size(); ++r)
    ids.push_back(pid >= 0 ? ft.rows[r][static_cast<std::size_t>(pid)] : std::to_string(r + 1));

  std::vector<std::string> target_cells;
  if (!in.targets.empty()) {
    const io::Table tt = io::read_csv(in.targets);
    const int tp = tt.column("participant");
    const int tc = tt.column(in.target);
    if (tp < 0 || tc < 0) throw ArgumentError(in.targets + ": needs 'participant' and '" + in.target + "' columns");
    std::map<std::string, std::string> by_id;
    for (const auto& row : tt.rows) by_id[row[static_cast<std::size_t>(tp)]] = row[static_cast<std::size_t>(tc)];
    for (const auto& id : ids) {
      auto it = by_id.find(id);
      target_cells.push_back(it == by_id.end() ? std::string("NA") : it->second);
    }
  } else {
    const int tc = ft.column(in.target);
    if (tc < 0) throw ArgumentError(in.features + ": no target column '" + in.target + "'");
    for (const auto& row : ft.rows) target_cells.push_back(row[static_cast<std::size_t>(tc)]);
  }

  std::vector<int> cols;
  for (std::size_t c = 0; c < ft.header.size(); ++c) {
    const auto& h = ft.header[c];
    const bool measure = std::find(relevance::kMeasureNames.begin(), relevance::kMeasureNames.end(), h) !=
                         relevance::kMeasureNames.end();
    if (h == "participant" || h == "state" || h == in.target || measure) continue;
    cols.push_back(static_cast<int>(c));
  }
  if (cols.empty()) throw ArgumentError(in.features + ": no feature columns");

  std::vector<bool> keep(ft.rows.size(), true);
  for (std::size_t r = 0; r < ft.rows.size(); ++r) {
    if (is_missing(target_cells[r])) {
      keep[r] = false;
      err << "note: participant " << ids[r] << " has no " << in.target << " value; dropped\n";
    }
  }
  relevance::Dataset d;
  const auto n = static_cast<Eigen::Index>(std::count(keep.begin(), keep.end(), true));
  d.x.resize(n, static_cast<Eigen::Index>(cols.size()));
  d.y.resize(n);
  for (int c : cols) d.feature_names.push_back(ft.header[static_cast<std::size_t>(c)]);
  std::vector<std::vector<double>> values;
  for (int c : cols) values.push_back(ft.numeric_column(c));
  Eigen::Index row = 0;
  for (std::size_t r = 0; r < ft.rows.size(); ++r) {
    if (!keep[r]) continue;
    for (std::size_t j = 0; j < cols.size(); ++j) d.x(row, static_cast<Eigen::Index>(j)) = values[j][r];
    d.y(row) = parse_number(target_cells[r], in.target);
    d.participant_ids.push_back(ids[r]);
    ++row;
  }
  d.validate();
  return d;
}

void add_dataset_options(CLI::App* sub, DatasetInput& in) {
  sub->add_option("--features", in.features, "Features CSV, one row per participant")->required();
  sub->add_option("--target", in.target, "Target column name")->required();
  sub->add_option("--targets", in.targets, "Optional CSV holding the target column, joined on 'participant'");
}

io::Table screen_table(const relevance::Dataset& d, const relevance::ScreenResult& s) {
  io::Table t;
  t.header = {"feature", "pearson_r", "p_value", "r2", "rmse", "selected"};
  for (std::size_t j = 0; j < s.per_feature.size(); ++j) {
    const auto& m = s.per_feature[j].metrics;
    const bool sel = std::find(s.selected.begin(), s.selected.end(), static_cast<int>(j)) != s.selected.end();
    t.rows.push_back({d.feature_names[j], m.r_defined ? io::format_number(m.pearson_r) : "NA",
                      io::format_number(m.p_value), io::format_number(m.r2), io::format_number(m.rmse),
                      sel ? "1" : "0"});
  }
  return t;
}

io::Table predictions_table(const relevance::Dataset& d, const Eigen::VectorXd& pred) {
  io::Table t;
  t.header = {"participant", "true", "predicted"};
  for (Eigen::Index i = 0; i < d.n(); ++i)
    t.rows.push_back({d.participant_ids[static_cast<std::size_t>(i)], io::format_number(d.y(i)),
                      io::format_number(pred(i))});
  return t;
}

// --- subcommands -----------------------------------------------------------

struct ScoreArgs {
  std::vector<std::string> inputs;
  int window = 36;
  int calib_trials = 27;
  double rt_lower_ms = 250.0;
};

void run_score(const ScoreArgs& a, const Global&, Artifacts& art, ordered_json& info, std::ostream& out,
               std::ostream& err) {
  require_inputs(a.inputs);
  ScoringOptions opt;
  opt.window = a.window;
  opt.calib_trials = a.calib_trials;
  opt.rt_lower_ms = a.rt_lower_ms;

  io::Table summary;
  summary.header = {"participant", "ce_pct", "oe_pct", "cvs_mean", "cvs_var", "hrt_mean_ms", "hrt_var",
                    "rt_upper_ms", "n_trials", "n_targets", "n_hits"};
  io::Table series;
  series.header = {"participant", "trial", "block", "outcome", "rt_ms", "multi_click", "tvs", "cvs"};
  std::vector<PerformanceSummary> all;
  for (const auto& path : a.inputs) {
    const EventLog log = parse_event_log_file(path);
    const SessionScore s = score_session(log, opt);
    const auto& m = s.summary;
    summary.rows.push_back({log.participant, io::format_number(m.ce_pct), io::format_number(m.oe_pct),
                            io::format_number(m.cvs_mean), na_or(m.cvs_var), na_or(m.hrt_mean_ms), na_or(m.hrt_var),
                            io::format_number(s.thresholds.rt_upper_ms), std::to_string(m.n_trials),
                            std::to_string(m.n_targets), std::to_string(m.n_hits)});
    const auto labeled = label_trials(log.trials, log.paradigm);
    for (std::size_t i = 0; i < labeled.size(); ++i) {
      const auto& t = labeled[i];
      series.rows.push_back({log.participant, std::to_string(t.event.trial_index), std::to_string(t.event.block),
                             to_string(t.outcome), t.rt_ms ? io::format_number(*t.rt_ms) : "NA",
                             t.multi_click ? "1" : "0", std::to_string(s.series.tvs[i]),
                             io::format_number(s.series.cvs[i])});
    }
    all.push_back(m);
    out << log.participant << ": CE% " << io::format_number(m.ce_pct) << ", OE% " << io::format_number(m.oe_pct)
        << ", CVSmean " << io::format_number(m.cvs_mean) << "\n";
  }
  art.table("summary.csv", summary);
  art.table("cvs.csv", series);
  if (all.size() >= 4)
    art.table("table1.csv", report::correlation_table(relevance::behavioral_correlations(all)));
  else
    err << "note: table1.csv needs at least 4 participants; skipped\n";
  info["participants"] = all.size();
}

struct ExtractArgs {
  std::vector<std::string> inputs;
  std::string bands;
  std::string roi_map;
  std::string state;
  double csv_fs = 0.0;
  std::vector<std::string> csv_eog;
  int ica_components = 0;
  double welch_s = 0.0;
  double target_fs = 256.0;
};

void run_extract(const ExtractArgs& a, const Global& g, Artifacts& art, ordered_json& info, std::ostream& out) {
  require_inputs(a.inputs);
  require_inputs({a.bands, a.roi_map});
  eeg::FeatureConfig cfg;
  if (!a.bands.empty()) cfg.bands = io::read_band_set(a.bands);
  if (!a.roi_map.empty()) cfg.rois = io::read_roi_map(a.roi_map);
  if (a.ica_components > 0) cfg.ica.n_components = a.ica_components;
  cfg.spectrum.welch_segment_s = a.welch_s;
  cfg.target_fs_hz = a.target_fs;

  const std::size_t n = a.inputs.size();
  std::vector<eeg::FeatureExtraction> results(n);
  std::vector<std::string> states(n);
  parallel_for(n, g.threads, [&](std::size_t i) {
    const auto& path = a.inputs[i];
    eeg::Recording rec;
    if (fs::path(path).extension() == ".csv") {
      if (!(a.csv_fs > 0)) throw ArgumentError("CSV recordings need --fs");
      rec = io::read_recording_csv(path, a.csv_fs, a.csv_eog);
    } else {
      rec = io::read_recording(path);
    }
    if (!a.state.empty()) rec.state = a.state == "ec" ? eeg::EyeState::EyesClosed : eeg::EyeState::EyesOpen;
    states[i] = rec.state == eeg::EyeState::EyesClosed ? "ec" : "eo";
    eeg::FeatureConfig local = cfg;
    local.ica.seed = derive_seed(g.seed, i);
    results[i] = eeg::extract_features(rec, local);
  });

  io::Table features;
  features.header = {"participant", "state"};
  for (const auto& name : eeg::feature_names(cfg.bands, cfg.rois)) features.header.push_back(name);
  io::Table prov;
  prov.header = {"participant", "n_components", "rejected_ics", "ica_converged", "ica_sweeps", "warnings"};
  for (std::size_t i = 0; i < n; ++i) {
    const std::string id = fs::path(a.inputs[i]).stem().string();
    std::vector<std::string> row{id, states[i]};
    for (double v : results[i].features) row.push_back(io::format_number(v));
    features.rows.push_back(std::move(row));
    const auto& p = results[i].provenance;
    std::string warnings;
    for (const auto& w : p.warnings) warnings += (warnings.empty() ? "" : "; ") + w;
    prov.rows.push_back({id, std::to_string(p.n_components), std::to_string(p.rejected_ics),
                         p.ica_converged ? "1" : "0", std::to_string(p.ica_sweeps), warnings});
    out << id << ": " << p.rejected_ics << " of " << p.n_components << " components rejected\n";
  }
  art.table("features.csv", features);
  art.table("provenance.csv", prov);
  info["recordings"] = n;
}

struct ScreenArgs {
  DatasetInput data;
  double alpha = 0.1;
  bool two_tailed = false;
};

void run_screen(const ScreenArgs& a, const Global& g, Artifacts& art, ordered_json& info, std::ostream& out,
                std::ostream& err) {
  require_inputs({a.data.features, a.data.targets});
  const auto d = load_dataset(a.data, err);
  const auto s = relevance::screen_features(d, a.alpha, policy_of(g), tail_of(a.two_tailed));
  art.table("screen.csv", screen_table(d, s));
  out << s.selected.size() << " of " << d.x.cols() << " features selected at alpha " << a.alpha << "\n";
  for (int j : s.selected) out << "  " << d.feature_names[static_cast<std::size_t>(j)] << "\n";
  info["n_participants"] = d.n();
  info["n_selected"] = s.selected.size();
}

struct MvpaArgs {
  DatasetInput data;
  double alpha = 0.1;
  bool two_tailed = false;
  int perms = 500;
  int subset_cap = 20;
};

void run_mvpa(const MvpaArgs& a, const Global& g, Artifacts& art, ordered_json& info, std::ostream& out,
              std::ostream& err) {
  require_inputs({a.data.features, a.data.targets});
  const auto d = load_dataset(a.data, err);
  const auto s = relevance::screen_features(d, a.alpha, policy_of(g), tail_of(a.two_tailed));
  art.table("screen.csv", screen_table(d, s));

  relevance::MvpaOptions opt;
  opt.permutations = a.perms;
  opt.seed = g.seed;
  opt.policy = policy_of(g);
  opt.subset_cap = a.subset_cap;
  opt.threads = g.threads;
  const auto rep = relevance::mvpa_search(d, s.selected, opt);
  art.table("table2.csv", report::subset_table(rep, d.feature_names));
  art.table("ranked.csv", report::ranked_table(rep, d.feature_names));
  for (const auto& msg : rep.diagnostics) err << "note: " << msg << "\n";

  info["n_participants"] = d.n();
  info["screened"] = s.selected.size();
  info["infeasible_subsets"] = rep.infeasible;
  if (const auto best = rep.best()) {
    const auto& r = rep.results[*best];
    art.table("predictions.csv", predictions_table(d, r.predictions));
    art.text("scatter.svg", report::render_scatter_svg(d.y, r.predictions, r.metrics, a.data.target));
    std::string names;
    for (int j : r.features) names += (names.empty() ? "" : ", ") + d.feature_names[static_cast<std::size_t>(j)];
    out << "best subset: " << names << " (adj R2 " << io::format_number(r.metrics.adj_r2) << ")\n";
    info["best_features"] = names;
  } else {
    out << "no feasible subset\n";
  }
}

struct NnArgs {
  DatasetInput data;
  std::vector<int> units{40, 90, 110, 130};
  int runs = 10;
  bool exclude_outliers = false;
  int grid_size = 15;
  int max_epochs = 1000;
  int minibatch = 8;
};

void run_nn(const NnArgs& a, const Global& g, Artifacts& art, ordered_json& info, std::ostream& out,
            std::ostream& err) {
  require_inputs({a.data.features, a.data.targets});
  auto d = load_dataset(a.data, err);
  if (a.exclude_outliers) {
    const std::vector<double> y(d.y.data(), d.y.data() + d.y.size());
    const auto keep = exclude_outliers(y);
    const auto dropped = std::count(keep.begin(), keep.end(), false);
    d = d.filter_rows(keep);
    info["outliers_excluded"] = dropped;
  }
  nn::NnConfig cfg;
  cfg.input_dim = static_cast<int>(d.x.cols());
  cfg.hidden_units = a.units;
  cfg.runs = a.runs;
  cfg.max_epochs = a.max_epochs;
  cfg.minibatch = a.minibatch;
  cfg.lr_grid = nn::log_grid(1e-5, 1e-1, a.grid_size);
  cfg.l2_grid = nn::log_grid(0.01, 10.0, a.grid_size);
  cfg.seed = g.seed;
  cfg.policy = policy_of(g);
  cfg.threads = g.threads;
  cfg.validate();

  io::Table surface;
  std::optional<nn::GridResult> best;
  ordered_json per_units = ordered_json::array();
  for (int u : a.units) {
    auto grid = nn::grid_search_loocv(d.x, d.y, u, cfg);
    const auto t = report::error_surface_table(grid);
    if (surface.header.empty()) surface.header = t.header;
    surface.rows.insert(surface.rows.end(), t.rows.begin(), t.rows.end());
    per_units.push_back({{"units", u}, {"lr_star", grid.lr_star}, {"l2_star", grid.l2_star}, {"err", grid.best_err}});
    out << "units " << u << ": err " << io::format_number(grid.best_err) << " at lr " << io::format_number(grid.lr_star)
        << ", l2 " << io::format_number(grid.l2_star) << "\n";
    if (!best || grid.best_err < best->best_err) best = std::move(grid);
  }
  art.table("err_surface.csv", surface);

  const auto w = nn::averaged_weights(*best, a.runs, static_cast<int>(d.n()));
  art.table("weights.csv", report::weight_table(w, d.feature_names));
  const Eigen::VectorXd mean_pred = best->best_predictions.colwise().mean().transpose();
  if (mean_pred.allFinite()) art.table("predictions.csv", predictions_table(d, mean_pred));
  if (d.x.cols() == static_cast<Eigen::Index>(eeg::kFeatureCount)) {
    const auto bands = eeg::BandSet::defaults();
    std::vector<std::string> rl(eeg::kRoiLabels.begin(), eeg::kRoiLabels.end());
    std::vector<std::string> bl;
    for (const auto& b : bands.bands()) bl.push_back(b.name);
    art.text("heatmap.svg", report::render_heatmap_svg(nn::weight_heatmap(w.normalized(), rl, bl), a.data.target));
  } else {
    err << "note: " << d.x.cols() << " features is not a 14 x 12 layout; heat map skipped\n";
  }
  ordered_json summary{{"target", a.data.target},
                       {"n_participants", d.n()},
                       {"best_units", best->units},
                       {"lr_star", best->lr_star},
                       {"l2_star", best->l2_star},
                       {"err", best->best_err},
                       {"runs", a.runs},
                       {"averaged_folds", w.averaged_over},
                       {"validation", "held-out participant per fold (single-sample patience)"},
                       {"per_units", per_units}};
  art.text("nn_summary.json", summary.dump(2) + "\n");
  info["best_units"] = best->units;
}

struct SynthArgs {
  std::vector<std::string> profiles{"steady", "declining", "recovering", "early-sleep"};
  int participants = 0;
  std::string plant;
  double recording_s = 0.0;
  double fs = 256.0;
};

void run_synth(const SynthArgs& a, const Global& g, Artifacts& art, ordered_json& info, std::ostream& out) {
  require_inputs({a.plant});
  const int n = a.participants > 0 ? a.participants : static_cast<int>(a.profiles.size());
  ordered_json truth;
  truth["seed"] = g.seed;
  ordered_json sessions = ordered_json::array();
  for (int i = 0; i < n; ++i) {
    const auto& name = a.profiles[static_cast<std::size_t>(i) % a.profiles.size()];
    const std::string id = "SYN" + std::string(i + 1 < 10 ? "0" : "") + std::to_string(i + 1);
    const auto profile = synth::BehaviorProfile::named(name, derive_seed(g.seed, 0x5e, i));
    const auto s = synth::gen_session(profile, {}, id);
    art.text("events/" + id + ".jsonl", serialize_event_log(s.log));
    sessions.push_back({{"participant", id},
                        {"profile", name},
                        {"process", synth::to_string(profile.vigilance.process)},
                        {"seed", profile.seed}});
  }
  truth["sessions"] = sessions;

  if (!a.plant.empty()) {
    const auto plant = synth::read_plant_spec(a.plant);
    const auto cohort = synth::gen_cohort(plant, derive_seed(g.seed, 0xc0));
    io::Table t;
    t.header = {"participant"};
    t.header.insert(t.header.end(), cohort.data.feature_names.begin(), cohort.data.feature_names.end());
    t.header.push_back(plant.target_measure);
    for (Eigen::Index i = 0; i < cohort.data.n(); ++i) {
      std::vector<std::string> row{cohort.data.participant_ids[static_cast<std::size_t>(i)]};
      for (Eigen::Index j = 0; j < cohort.data.x.cols(); ++j) row.push_back(io::format_number(cohort.data.x(i, j)));
      row.push_back(io::format_number(cohort.data.y(i)));
      t.rows.push_back(std::move(row));
    }
    art.table("cohort.csv", t);
    ordered_json planted = ordered_json::array();
    for (int j : cohort.planted_indices)
      planted.push_back({{"feature", cohort.data.feature_names[static_cast<std::size_t>(j)]},
                         {"coefficient", cohort.coefficients(j)},
                         {"raw_coefficient", cohort.raw_coefficients(j)}});
    truth["cohort"] = {{"target_measure", plant.target_measure},
                       {"noise_sd", plant.noise_sd},
                       {"n_participants", plant.n_participants},
                       {"raw_intercept", cohort.raw_intercept},
                       {"planted", planted}};
  }

  if (a.recording_s > 0) {
    synth::RecordingPlant rp;
    rp.rhythms.push_back({{"LP", "MP", "RP"}, 10.0, 10.0});
    rp.line_noise_uv = 5.0;
    rp.ocular_uv = 40.0;
    ordered_json recs = ordered_json::array();
    for (int i = 0; i < n; ++i) {
      const std::string id = "SYN" + std::string(i + 1 < 10 ? "0" : "") + std::to_string(i + 1);
      auto r = std::make_shared<synth::SyntheticRecording>(
          synth::gen_recording(rp, a.recording_s, a.fs, derive_seed(g.seed, 0xee, i)));
      art.custom("recordings/" + id + ".json", [r](const fs::path& p) {
        io::write_recording(r->recording, (p.parent_path() / p.stem()).string());
      });
      recs.push_back({{"participant", id}, {"alpha_hz", 10.0}, {"alpha_rois", {"LP", "MP", "RP"}},
                      {"line_noise_uv", rp.line_noise_uv}, {"ocular_uv", rp.ocular_uv}});
    }
    truth["recordings"] = recs;
  }
  art.text("ground_truth.json", truth.dump(2) + "\n");
  info["participants"] = n;
  out << "generated " << n << " sessions\n";
}

struct ReportArgs {
  std::string summary;
  std::string weights;
  std::string predictions;
  double q = 0.05;
};

void run_report(const ReportArgs& a, const Global&, Artifacts& art, ordered_json&, std::ostream& out) {
  if (a.summary.empty() && a.weights.empty() && a.predictions.empty())
    throw ArgumentError("report needs at least one of --summary, --weights, --predictions");
  require_inputs({a.summary, a.weights, a.predictions});
  if (!a.summary.empty()) {
    const auto t = io::read_csv(a.summary);
    std::vector<PerformanceSummary> all(t.rows.size());
    auto col = [&](const char* name) {
      const int c = t.column(name);
      if (c < 0) throw ArgumentError(a.summary + ": missing column " + name);
      return static_cast<std::size_t>(c);
    };
    auto opt = [](const std::string& cell) -> std::optional<double> {
      if (is_missing(cell)) return std::nullopt;
      return parse_number(cell, "summary");
    };
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      const auto& row = t.rows[r];
      all[r].ce_pct = opt(row[col("ce_pct")]).value_or(0.0);
      all[r].oe_pct = opt(row[col("oe_pct")]).value_or(0.0);
      all[r].cvs_mean = opt(row[col("cvs_mean")]).value_or(0.0);
      all[r].cvs_var = opt(row[col("cvs_var")]);
      all[r].hrt_mean_ms = opt(row[col("hrt_mean_ms")]);
      all[r].hrt_var = opt(row[col("hrt_var")]);
    }
    art.table("table1.csv", report::correlation_table(relevance::behavioral_correlations(all, a.q)));
    out << "table1.csv: " << all.size() << " participants\n";
  }
  if (!a.weights.empty()) {
    const auto t = io::read_csv(a.weights);
    const int c = t.column("weight");
    if (c < 0) throw ArgumentError(a.weights + ": missing column weight");
    const auto v = t.numeric_column(c);
    nn::WeightMap w;
    w.values = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
    std::vector<std::string> rl(eeg::kRoiLabels.begin(), eeg::kRoiLabels.end());
    std::vector<std::string> bl;
    for (const auto& b : eeg::BandSet::defaults().bands()) bl.push_back(b.name);
    art.text("heatmap.svg", report::render_heatmap_svg(nn::weight_heatmap(w.normalized(), rl, bl)));
  }
  if (!a.predictions.empty()) {
    const auto t = io::read_csv(a.predictions);
    const int ct = t.column("true");
    const int cp = t.column("predicted");
    if (ct < 0 || cp < 0) throw ArgumentError(a.predictions + ": needs 'true' and 'predicted' columns");
    const auto yt = t.numeric_column(ct);
    const auto yp = t.numeric_column(cp);
    const Eigen::VectorXd truth = Eigen::Map<const Eigen::VectorXd>(yt.data(), static_cast<Eigen::Index>(yt.size()));
    const Eigen::VectorXd pred = Eigen::Map<const Eigen::VectorXd>(yp.data(), static_cast<Eigen::Index>(yp.size()));
    const auto m = relevance::prediction_metrics(truth, pred, 0);
    art.text("scatter.svg", report::render_scatter_svg(truth, pred, m));
  }
}

/// Global keys plus those of the subcommand that ran.
/// Global keys plus the active subcommand's keys from CLI11's key=value dump.
ordered_json active_config(const std::string& ini, const std::string& sub) {
  std::istringstream in(ini);
  std::string line;
  ordered_json kept = ordered_json::object();
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    if (key.find('.') != std::string::npos) {
      if (key.rfind(sub + ".", 0) != 0) continue;
      key.erase(0, sub.size() + 1);
    }
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    kept[key] = value;
  }
  return kept;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  const auto started = std::chrono::steady_clock::now();
  CLI::App app{"vigilkit: vigilance scoring and resting-EEG relevance analysis", "vigilkit"};
  app.set_config("--config", "", "key=value file; explicit flags take precedence");
  app.require_subcommand(1);
  Global g;
  app.add_option("--seed", g.seed, "Master seed")->capture_default_str();
  app.add_option("--out", g.out, "Output directory")->capture_default_str();
  app.add_flag("--paper-compat", g.paper_compat, "Global instead of per-fold standardisation");
  app.add_option("--threads", g.threads, "Worker threads (0 = all cores)")->capture_default_str();

  ScoreArgs score;
  auto* sc = app.add_subcommand("score", "Score SART event logs");
  sc->add_option("logs", score.inputs, "Event log files")->required();
  sc->add_option("--window", score.window, "CVS window in trials")->capture_default_str()->check(CLI::PositiveNumber);
  sc->add_option("--calib-trials", score.calib_trials, "Calibration trials")->capture_default_str()->check(CLI::PositiveNumber);
  sc->add_option("--rt-lower-ms", score.rt_lower_ms, "Impulsive response bound")->capture_default_str();

  ExtractArgs ex;
  auto* ec = app.add_subcommand("extract", "Resting-state EEG to 168 BP-ROI ratios");
  ec->add_option("recordings", ex.inputs, "Recording sidecars (.json) or small CSV files")->required();
  ec->add_option("--bands", ex.bands, "Band set JSON");
  ec->add_option("--roi-map", ex.roi_map, "ROI map JSON");
  ec->add_option("--state", ex.state, "Eye state label")->check(CLI::IsMember({"eo", "ec"}));
  ec->add_option("--fs", ex.csv_fs, "Sampling rate for CSV inputs");
  ec->add_option("--eog", ex.csv_eog, "Ocular channel names for CSV inputs");
  ec->add_option("--ica-components", ex.ica_components, "PCA components kept before ICA (0 = rank)");
  ec->add_option("--welch-s", ex.welch_s, "Welch segment length in seconds (0 = whole record)");
  ec->add_option("--target-fs", ex.target_fs, "Rate after decimation")->capture_default_str();

  ScreenArgs scr;
  auto* sr = app.add_subcommand("screen", "Univariate LOO-CV feature screening");
  add_dataset_options(sr, scr.data);
  sr->add_option("--alpha", scr.alpha, "Screening p threshold")->capture_default_str();
  sr->add_flag("--two-tailed", scr.two_tailed, "Also keep negatively correlated predictions");

  MvpaArgs mv;
  auto* mc = app.add_subcommand("mvpa", "Screening plus exhaustive-subset regression");
  add_dataset_options(mc, mv.data);
  mc->add_option("--alpha", mv.alpha, "Screening p threshold")->capture_default_str();
  mc->add_flag("--two-tailed", mv.two_tailed, "Also keep negatively correlated predictions");
  mc->add_option("--perms", mv.perms, "Permutations per reported subset")->capture_default_str()->check(CLI::NonNegativeNumber);
  mc->add_option("--subset-cap", mv.subset_cap, "Largest screened set enumerated")->capture_default_str();

  NnArgs nna;
  auto* nc = app.add_subcommand("nn-train", "Single-hidden-layer network grid search");
  add_dataset_options(nc, nna.data);
  nc->add_option("--units", nna.units, "Hidden unit counts")->capture_default_str();
  nc->add_option("--runs", nna.runs, "Runs per grid cell")->capture_default_str()->check(CLI::PositiveNumber);
  nc->add_flag("--exclude-outliers", nna.exclude_outliers, "Drop targets above mean + 2 SD");
  nc->add_option("--grid-size", nna.grid_size, "Points per hyper-parameter axis")->capture_default_str()->check(CLI::PositiveNumber);
  nc->add_option("--max-epochs", nna.max_epochs, "Epoch limit")->capture_default_str()->check(CLI::PositiveNumber);
  nc->add_option("--minibatch", nna.minibatch, "Minibatch size")->capture_default_str()->check(CLI::PositiveNumber);

  SynthArgs sy;
  auto* syc = app.add_subcommand("synth", "Synthetic sessions, cohorts and recordings");
  syc->add_option("--profile", sy.profiles, "Behaviour profiles (cycled over participants)")->capture_default_str();
  syc->add_option("--participants", sy.participants, "Session count (default: one per profile)");
  syc->add_option("--plant", sy.plant, "PlantSpec JSON for a feature cohort");
  syc->add_option("--recording-s", sy.recording_s, "Also write recordings of this length");
  syc->add_option("--fs", sy.fs, "Recording sampling rate")->capture_default_str();

  ReportArgs rp;
  auto* rc = app.add_subcommand("report", "Figures and tables from earlier outputs");
  rc->add_option("--summary", rp.summary, "summary.csv from score");
  rc->add_option("--weights", rp.weights, "weights.csv from nn-train");
  rc->add_option("--predictions", rp.predictions, "predictions.csv from mvpa or nn-train");
  rc->add_option("--fdr-q", rp.q, "FDR level for the correlation table")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, err, err);
    return kExitUsage;
  }

  CLI::App* sub = app.get_subcommands().front();
  ordered_json info = ordered_json::object();
  Artifacts art;
  try {
    const std::string name = sub->get_name();
    if (name == "score") run_score(score, g, art, info, out, err);
    else if (name == "extract") run_extract(ex, g, art, info, out);
    else if (name == "screen") run_screen(scr, g, art, info, out, err);
    else if (name == "mvpa") run_mvpa(mv, g, art, info, out, err);
    else if (name == "nn-train") run_nn(nna, g, art, info, out, err);
    else if (name == "synth") run_synth(sy, g, art, info, out);
    else run_report(rp, g, art, info, out);

    const fs::path dir(g.out);
    fs::create_directories(dir);
    const auto written = art.commit(dir);

    ordered_json manifest;
    manifest["tool"] = "vigilkit";
    manifest["version"] = VIGILKIT_VERSION;
    manifest["subcommand"] = name;
    std::vector<std::string> args(argv + 1, argv + argc);
    manifest["argv"] = args;
    manifest["config"] = active_config(app.config_to_str(true, false), name);
    manifest["seed"] = g.seed;
    manifest["threads"] = g.threads;
    manifest["paper_compat"] = g.paper_compat;
    manifest["standardization"] = g.paper_compat ? "global" : "per-fold";
    std::vector<std::string> inputs;
    for (const auto* opt : sub->get_options()) {
      if (opt->get_name() == "--help" || opt->count() == 0) continue;
      for (const auto& v : opt->results())
        if (fs::is_regular_file(v)) inputs.push_back(v);
    }
    manifest["inputs"] = inputs;
    manifest["outputs"] = written;
    manifest["details"] = info;
    manifest["wall_time_s"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    report::write_text(manifest.dump(2) + "\n", (dir / "manifest.json").string());
    return kExitOk;
  } catch (const std::exception& e) {
    err << "vigilkit " << sub->get_name() << ": " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace vigilkit::cli
