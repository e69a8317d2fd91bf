#pragma once

#include <string>

#include "lizard/analysis.hpp"
#include "lizard/types.hpp"

namespace lizard::svg {

// Correlation heatmap: one labeled cell per matrix entry, colored on a
// symmetric [-1, 1] blue-white-red ramp.
std::string heatmap(const CorrelationReport& report);

// Horizontal bars for the target ranking, one per feature, signed.
std::string ranking_bars(const CorrelationReport& report);

// Heatmap and ranking bars stacked in one document.
std::string correlation_charts(const CorrelationReport& report);

// Actual and predicted series over sample index as two polylines with
// axes and a legend. Data polylines carry class="data".
std::string prediction_lines(Eigen::Ref<const Vec> actual,
                             Eigen::Ref<const Vec> predicted);

}  // namespace lizard::svg
