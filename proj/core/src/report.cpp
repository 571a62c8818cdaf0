#include "vigilkit/report.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "vigilkit/error.hpp"
#include "vigilkit/stats.hpp"

namespace vigilkit::report {

namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  std::string s(buf);
  if (s == "-0" || s.find_first_not_of("-0.") == std::string::npos) {
    if (s.front() == '-') s.erase(0, 1);
  }
  return s;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string join(const std::vector<int>& idx, const std::vector<std::string>& names) {
  std::string s;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (i) s += ';';
    const auto j = static_cast<std::size_t>(idx[i]);
    s += j < names.size() ? names[j] : std::to_string(idx[i]);
  }
  return s;
}

using Rgb = std::array<double, 3>;

}  // namespace

std::string diverging_color(double v) {
  constexpr Rgb dark{8, 48, 107};
  constexpr Rgb mid{140, 140, 170};
  constexpr Rgb light{255, 245, 176};
  v = std::clamp(v, -1.0, 1.0);
  const Rgb& from = mid;
  const Rgb& to = v < 0 ? dark : light;
  const double t = std::abs(v);
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", static_cast<int>(std::lround(from[0] + (to[0] - from[0]) * t)),
                static_cast<int>(std::lround(from[1] + (to[1] - from[1]) * t)),
                static_cast<int>(std::lround(from[2] + (to[2] - from[2]) * t)));
  return buf;
}

std::string render_heatmap_svg(const nn::Heatmap& map, const std::string& title) {
  const auto rows = map.cells.rows();
  const auto cols = map.cells.cols();
  if (!map.cells.allFinite()) throw ArgumentError("heatmap has non-finite cells");
  if (static_cast<Eigen::Index>(map.row_labels.size()) != rows ||
      static_cast<Eigen::Index>(map.col_labels.size()) != cols)
    throw ArgumentError("heatmap label count does not match the matrix");
  const double scale = map.cells.size() ? map.cells.cwiseAbs().maxCoeff() : 0.0;
  constexpr int cell = 28, left = 60, top = 40, bottom = 70;
  const auto width = left + cell * cols + 90;
  const auto height = top + cell * rows + bottom;

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
    << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  if (!title.empty()) o << "<text x=\"" << left << "\" y=\"20\" font-size=\"13\">" << escape(title) << "</text>\n";
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      const double v = scale > 0 ? map.cells(r, c) / scale : 0.0;
      o << "<rect x=\"" << left + cell * c << "\" y=\"" << top + cell * r << "\" width=\"" << cell
        << "\" height=\"" << cell << "\" fill=\"" << diverging_color(v) << "\"><title>"
        << escape(map.row_labels[static_cast<std::size_t>(r)]) << " "
        << escape(map.col_labels[static_cast<std::size_t>(c)]) << " " << fixed(map.cells(r, c), 6)
        << "</title></rect>\n";
    }
    o << "<text x=\"" << left - 6 << "\" y=\"" << top + cell * r + cell / 2 + 4 << "\" text-anchor=\"end\">"
      << escape(map.row_labels[static_cast<std::size_t>(r)]) << "</text>\n";
  }
  for (Eigen::Index c = 0; c < cols; ++c) {
    const auto x = left + cell * c + cell / 2;
    const auto y = top + cell * rows + 8;
    o << "<text x=\"" << x << "\" y=\"" << y << "\" transform=\"rotate(60 " << x << " " << y << ")\">"
      << escape(map.col_labels[static_cast<std::size_t>(c)]) << "</text>\n";
  }
  // Legend: -max, 0, +max.
  const auto lx = left + cell * cols + 20;
  for (int i = 0; i <= 20; ++i) {
    const double v = 1.0 - i / 10.0;
    o << "<rect x=\"" << lx << "\" y=\"" << top + i * 6 << "\" width=\"14\" height=\"6\" fill=\""
      << diverging_color(v) << "\"/>\n";
  }
  o << "<text x=\"" << lx + 18 << "\" y=\"" << top + 8 << "\">" << fixed(scale, 3) << "</text>\n";
  o << "<text x=\"" << lx + 18 << "\" y=\"" << top + 64 << "\">0</text>\n";
  o << "<text x=\"" << lx + 18 << "\" y=\"" << top + 126 << "\">" << fixed(-scale, 3) << "</text>\n";
  o << "</svg>\n";
  return o.str();
}

std::string render_scatter_svg(const Eigen::VectorXd& truth, const Eigen::VectorXd& predicted,
                               const relevance::RegressionMetrics& metrics, const std::string& title) {
  if (truth.size() != predicted.size()) throw ArgumentError("scatter: true and predicted lengths differ");
  if (truth.size() == 0) throw ArgumentError("scatter: no points");
  if (!truth.allFinite() || !predicted.allFinite()) throw ArgumentError("scatter: non-finite values");
  double lo = std::min(truth.minCoeff(), predicted.minCoeff());
  double hi = std::max(truth.maxCoeff(), predicted.maxCoeff());
  if (hi - lo <= 0) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double pad = 0.05 * (hi - lo);
  lo -= pad;
  hi += pad;
  constexpr int size = 300, margin = 50;
  auto px = [&](double v) { return margin + (v - lo) / (hi - lo) * size; };
  auto py = [&](double v) { return margin + size - (v - lo) / (hi - lo) * size; };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size + 2 * margin << "\" height=\""
    << size + 2 * margin << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  if (!title.empty()) o << "<text x=\"" << margin << "\" y=\"20\" font-size=\"13\">" << escape(title) << "</text>\n";
  o << "<rect x=\"" << margin << "\" y=\"" << margin << "\" width=\"" << size << "\" height=\"" << size
    << "\" fill=\"none\" stroke=\"#000\"/>\n";
  o << "<line x1=\"" << fixed(px(lo), 2) << "\" y1=\"" << fixed(py(lo), 2) << "\" x2=\"" << fixed(px(hi), 2)
    << "\" y2=\"" << fixed(py(hi), 2) << "\" stroke=\"#888\" stroke-dasharray=\"4 3\"/>\n";
  for (Eigen::Index i = 0; i < truth.size(); ++i)
    o << "<circle cx=\"" << fixed(px(truth(i)), 2) << "\" cy=\"" << fixed(py(predicted(i)), 2)
      << "\" r=\"4\" fill=\"#08306b\"/>\n";
  o << "<text x=\"" << margin + size / 2 << "\" y=\"" << size + margin + 32 << "\" text-anchor=\"middle\">true</text>\n";
  o << "<text x=\"16\" y=\"" << margin + size / 2 << "\" transform=\"rotate(-90 16 " << margin + size / 2
    << ")\" text-anchor=\"middle\">predicted</text>\n";
  o << "<text x=\"" << fixed(px(lo), 0) << "\" y=\"" << size + margin + 14 << "\">" << fixed(lo, 3) << "</text>\n";
  o << "<text x=\"" << fixed(px(hi), 0) << "\" y=\"" << size + margin + 14 << "\" text-anchor=\"end\">"
    << fixed(hi, 3) << "</text>\n";
  const std::string r = metrics.r_defined ? fixed(metrics.pearson_r, 3) + stats::significance_stars(metrics.p_value)
                                          : std::string("undefined");
  o << "<text x=\"" << margin + 8 << "\" y=\"" << margin + 16 << "\">r = " << r << "</text>\n";
  o << "</svg>\n";
  return o.str();
}

void write_text(const std::string& text, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << text;
  if (!out) throw Error("write failed: " + path);
}

io::Table correlation_table(const relevance::BehaviorCorrelations& c) {
  static const std::array<const char*, 6> display = {"CE%", "OE%", "CVSmean", "CVSvar", "HRTmean", "HRTvar"};
  io::Table t;
  t.header.push_back("");
  for (int j = 0; j < 5; ++j) t.header.push_back(display[static_cast<std::size_t>(j)]);
  for (int i = 1; i < 6; ++i) {
    std::vector<std::string> row{display[static_cast<std::size_t>(i)]};
    for (int j = 0; j < 5; ++j) {
      if (j >= i) {
        row.emplace_back();
      } else if (!std::isfinite(c.r(i, j))) {
        row.emplace_back("NA");
      } else {
        row.push_back(fixed(c.r(i, j), 2) + (c.significant[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] ? "*" : ""));
      }
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

std::string criteria_label(unsigned bits) {
  std::string s;
  auto add = [&](const char* n) {
    if (!s.empty()) s += '|';
    s += n;
  };
  if (bits & relevance::kBestAdjR2) add("adj_r2");
  if (bits & relevance::kBestR) add("r");
  if (bits & relevance::kBestRmse) add("rmse");
  return s;
}

io::Table subset_table(const relevance::MvpaReport& report, const std::vector<std::string>& names) {
  io::Table t;
  t.header = {"k", "n_subsets", "r2", "adj_r2", "rmse", "pearson_r", "p_value", "stars", "permutation_p",
              "criteria", "features"};
  for (const auto& row : report.table) {
    const auto& res = report.results[row.result];
    const auto& m = res.metrics;
    t.rows.push_back({std::to_string(row.k), std::to_string(row.n_subsets), io::format_number(m.r2),
                      io::format_number(m.adj_r2), io::format_number(m.rmse),
                      m.r_defined ? io::format_number(m.pearson_r) : "NA", io::format_number(m.p_value),
                      stats::significance_stars(m.p_value),
                      res.permutation_p ? io::format_number(*res.permutation_p) : "NA", criteria_label(row.criteria),
                      join(res.features, names)});
  }
  return t;
}

io::Table ranked_table(const relevance::MvpaReport& report, const std::vector<std::string>& names) {
  io::Table t;
  t.header = {"rank", "k", "features", "r2", "adj_r2", "rmse", "pearson_r", "p_value"};
  int rank = 0;
  for (std::size_t i : report.ranked()) {
    const auto& res = report.results[i];
    const auto& m = res.metrics;
    t.rows.push_back({std::to_string(++rank), std::to_string(res.features.size()), join(res.features, names),
                      io::format_number(m.r2), io::format_number(m.adj_r2), io::format_number(m.rmse),
                      m.r_defined ? io::format_number(m.pearson_r) : "NA", io::format_number(m.p_value)});
  }
  return t;
}

io::Table error_surface_table(const nn::GridResult& grid) {
  io::Table t;
  t.header = {"units", "lr", "l2", "err", "diverged_folds"};
  for (Eigen::Index i = 0; i < grid.err.rows(); ++i)
    for (Eigen::Index j = 0; j < grid.err.cols(); ++j)
      t.rows.push_back({std::to_string(grid.units), io::format_number(grid.lr_grid[static_cast<std::size_t>(i)]),
                        io::format_number(grid.l2_grid[static_cast<std::size_t>(j)]),
                        std::isnan(grid.err(i, j)) ? "NA" : io::format_number(grid.err(i, j)),
                        std::to_string(grid.diverged(i, j))});
  return t;
}

io::Table weight_table(const nn::WeightMap& w, const std::vector<std::string>& names) {
  if (static_cast<Eigen::Index>(names.size()) != w.values.size())
    throw ArgumentError("weight_table: name count differs from weight count");
  const Eigen::VectorXd norm = w.normalized();
  io::Table t;
  t.header = {"feature", "weight", "normalized"};
  for (Eigen::Index i = 0; i < w.values.size(); ++i)
    t.rows.push_back({names[static_cast<std::size_t>(i)], io::format_number(w.values(i)), io::format_number(norm(i))});
  return t;
}

}  // namespace vigilkit::report
