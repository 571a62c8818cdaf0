#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "vigilkit/nn.hpp"
#include "vigilkit/relevance.hpp"
#include "vigilkit/table_io.hpp"

namespace vigilkit::report {

/// Diverging palette: dark at -1, mid at 0, light at +1. Input is clamped.
std::string diverging_color(double v);

/// Rows x columns cell grid, scaled by max |cell|; throws ArgumentError on
/// non-finite cells or label count mismatch.
std::string render_heatmap_svg(const nn::Heatmap& map, const std::string& title = "");

/// Predicted against true with the identity line and "r = 0.920***".
std::string render_scatter_svg(const Eigen::VectorXd& truth, const Eigen::VectorXd& predicted,
                               const relevance::RegressionMetrics& metrics, const std::string& title = "");

void write_text(const std::string& text, const std::string& path);

/// Lower-triangle correlation table; cells "0.80*" when FDR-significant.
io::Table correlation_table(const relevance::BehaviorCorrelations& c);

/// Columns: k, n_subsets, r2, adj_r2, rmse, pearson_r, p_value, stars,
/// permutation_p, criteria, features.
io::Table subset_table(const relevance::MvpaReport& report, const std::vector<std::string>& names);

/// Every feasible subset by descending adj R²: rank, k, features, r2, adj_r2, rmse, pearson_r, p_value.
io::Table ranked_table(const relevance::MvpaReport& report, const std::vector<std::string>& names);

/// "adj_r2|r|rmse" style label for Criterion bits.
std::string criteria_label(unsigned bits);

/// lr, l2, err, diverged_folds; one row per grid cell, lr-major.
io::Table error_surface_table(const nn::GridResult& grid);

/// feature, weight, normalized.
io::Table weight_table(const nn::WeightMap& w, const std::vector<std::string>& names);

}  // namespace vigilkit::report
