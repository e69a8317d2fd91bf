#pragma once

#include <string>
#include <utility>
#include <vector>

#include "lizard/dataset.hpp"
#include "lizard/types.hpp"

namespace lizard {

// 1-based average ranks; tied values share the mean of the positions they
// span, so the ranks always sum to n(n+1)/2.
Vec rank_average_ties(Eigen::Ref<const Vec> x);

// Spearman's rho: Pearson correlation of the two average-rank vectors.
// Throws NumericError if either input is constant (the correlation is
// undefined, never silently zero).
double spearman_pair(Eigen::Ref<const Vec> x, Eigen::Ref<const Vec> y);

struct CorrelationReport {
  // Features in canonical order followed by the target column.
  std::vector<std::string> columns;
  Mat matrix;  // symmetric, unit diagonal, entries in [-1, 1]
  // Features sorted by signed correlation with the target, descending;
  // ties keep canonical column order.
  std::vector<std::pair<std::string, double>> target_ranking;
};

CorrelationReport correlation_matrix(const Dataset& d);

// Matrix as CSV with row/column headers, then the target ranking with
// values at six decimal places.
std::string to_text(const CorrelationReport& report);

// Samples with |y| below this are excluded from MAPE (a zero target makes
// the relative error undefined).
inline constexpr double kMapeEpsilon = 1e-8;

double mse(Eigen::Ref<const Vec> y, Eigen::Ref<const Vec> predicted);
double rmse(Eigen::Ref<const Vec> y, Eigen::Ref<const Vec> predicted);
double mae(Eigen::Ref<const Vec> y, Eigen::Ref<const Vec> predicted);
// Percent; n_used, when non-null, receives the number of included samples.
double mape_percent(Eigen::Ref<const Vec> y, Eigen::Ref<const Vec> predicted,
                    Index* n_used = nullptr);
// 1 - SSres/SStot; negative when the model underperforms the mean predictor.
double r2(Eigen::Ref<const Vec> y, Eigen::Ref<const Vec> predicted);

struct MetricsReport {
  double mse = 0.0;
  double rmse = 0.0;
  double mae = 0.0;
  double mape_percent = 0.0;
  double r2 = 0.0;
  Index n_used_for_mape = 0;
};

MetricsReport evaluate_all(Eigen::Ref<const Vec> y,
                           Eigen::Ref<const Vec> predicted);

}  // namespace lizard
