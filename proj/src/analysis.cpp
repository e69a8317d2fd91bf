#include "lizard/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "lizard/error.hpp"
#include "lizard/textio.hpp"

namespace lizard {

Vec rank_average_ties(Eigen::Ref<const Vec> x) {
  const Index n = x.size();
  if (n < 1) throw ArgumentError("rank: empty input");
  for (Index i = 0; i < n; ++i)
    if (std::isnan(x[i])) throw ArgumentError("rank: NaN in input");

  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::sort(order.begin(), order.end(),
            [&](Index a, Index b) { return x[a] < x[b]; });

  Vec ranks(n);
  Index i = 0;
  while (i < n) {
    Index j = i;
    while (j + 1 < n && x[order[static_cast<std::size_t>(j + 1)]] ==
                            x[order[static_cast<std::size_t>(i)]])
      ++j;
    // positions i..j (0-based) share the mean 1-based rank
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (Index k = i; k <= j; ++k)
      ranks[order[static_cast<std::size_t>(k)]] = rank;
    i = j + 1;
  }
  return ranks;
}

namespace {

bool is_constant(Eigen::Ref<const Vec> x) {
  for (Index i = 1; i < x.size(); ++i)
    if (x[i] != x[0]) return false;
  return true;
}

double pearson_of(Eigen::Ref<const Vec> a, Eigen::Ref<const Vec> b) {
  const double mean_a = a.mean();
  const double mean_b = b.mean();
  const Vec da = a.array() - mean_a;
  const Vec db = b.array() - mean_b;
  return da.dot(db) / std::sqrt(da.squaredNorm() * db.squaredNorm());
}

}  // namespace

double spearman_pair(Eigen::Ref<const Vec> x, Eigen::Ref<const Vec> y) {
  if (x.size() != y.size())
    throw ArgumentError("spearman: length mismatch");
  if (x.size() < 2) throw ArgumentError("spearman: need at least 2 samples");
  if (is_constant(x))
    throw NumericError("spearman: undefined for constant x");
  if (is_constant(y))
    throw NumericError("spearman: undefined for constant y");
  return pearson_of(rank_average_ties(x), rank_average_ties(y));
}

CorrelationReport correlation_matrix(const Dataset& d) {
  if (d.rows() < 2)
    throw ArgumentError("correlation: need at least 2 samples");

  CorrelationReport report;
  report.columns = d.feature_names();
  report.columns.push_back(kTargetName);
  const Index m = static_cast<Index>(report.columns.size());

  std::vector<Vec> ranks(static_cast<std::size_t>(m));
  for (Index c = 0; c < m; ++c) {
    const Vec col = c + 1 == m ? d.target() : Vec(d.features().col(c));
    if (is_constant(col))
      throw DataError("correlation: column '" +
                      report.columns[static_cast<std::size_t>(c)] +
                      "' is constant");
    ranks[static_cast<std::size_t>(c)] = rank_average_ties(col);
  }

  report.matrix = Mat::Identity(m, m);
  for (Index a = 0; a < m; ++a)
    for (Index b = a + 1; b < m; ++b) {
      const double rho = pearson_of(ranks[static_cast<std::size_t>(a)],
                                    ranks[static_cast<std::size_t>(b)]);
      report.matrix(a, b) = rho;
      report.matrix(b, a) = rho;
    }

  for (Index c = 0; c + 1 < m; ++c)
    report.target_ranking.emplace_back(
        report.columns[static_cast<std::size_t>(c)], report.matrix(c, m - 1));
  std::stable_sort(report.target_ranking.begin(), report.target_ranking.end(),
                   [](const auto& a, const auto& b) {
                     return a.second > b.second;
                   });
  return report;
}

std::string to_text(const CorrelationReport& report) {
  std::ostringstream out;
  out << "# spearman correlation matrix\n";
  for (const auto& c : report.columns) out << ',' << c;
  out << '\n';
  for (Index i = 0; i < report.matrix.rows(); ++i) {
    out << report.columns[static_cast<std::size_t>(i)];
    for (Index j = 0; j < report.matrix.cols(); ++j)
      out << ',' << format_fixed(report.matrix(i, j), 6);
    out << '\n';
  }
  out << "# features ranked by spearman correlation with " << kTargetName
      << "\n";
  int pos = 1;
  for (const auto& [name, rho] : report.target_ranking)
    out << pos++ << ',' << name << ',' << format_fixed(rho, 6) << '\n';
  return out.str();
}

namespace {

void check_pair(Eigen::Ref<const Vec> y, Eigen::Ref<const Vec> predicted) {
  if (y.size() != predicted.size())
    throw ArgumentError("metrics: length mismatch");
  if (y.size() < 1) throw ArgumentError("metrics: empty input");
}

}  // namespace

double mse(Eigen::Ref<const Vec> y, Eigen::Ref<const Vec> predicted) {
  check_pair(y, predicted);
  return (y - predicted).squaredNorm() / static_cast<double>(y.size());
}

double rmse(Eigen::Ref<const Vec> y, Eigen::Ref<const Vec> predicted) {
  return std::sqrt(mse(y, predicted));
}

double mae(Eigen::Ref<const Vec> y, Eigen::Ref<const Vec> predicted) {
  check_pair(y, predicted);
  return (y - predicted).cwiseAbs().sum() / static_cast<double>(y.size());
}

double mape_percent(Eigen::Ref<const Vec> y, Eigen::Ref<const Vec> predicted,
                    Index* n_used) {
  check_pair(y, predicted);
  double sum = 0.0;
  Index m = 0;
  for (Index i = 0; i < y.size(); ++i) {
    if (std::abs(y[i]) < kMapeEpsilon) continue;
    sum += std::abs((y[i] - predicted[i]) / y[i]);
    ++m;
  }
  if (n_used) *n_used = m;
  if (m == 0)
    throw NumericError("mape: every target is within " +
                       format_full(kMapeEpsilon) + " of zero");
  return 100.0 * sum / static_cast<double>(m);
}

double r2(Eigen::Ref<const Vec> y, Eigen::Ref<const Vec> predicted) {
  check_pair(y, predicted);
  if (y.size() < 2) throw ArgumentError("r2: need at least 2 samples");
  const double ss_res = (y - predicted).squaredNorm();
  const double ss_tot = (y.array() - y.mean()).matrix().squaredNorm();
  if (ss_tot <= 0.0)
    throw NumericError("r2: target variance is zero");
  return 1.0 - ss_res / ss_tot;
}

MetricsReport evaluate_all(Eigen::Ref<const Vec> y,
                           Eigen::Ref<const Vec> predicted) {
  MetricsReport report;
  report.mse = mse(y, predicted);
  report.rmse = std::sqrt(report.mse);
  report.mae = mae(y, predicted);
  report.mape_percent = mape_percent(y, predicted, &report.n_used_for_mape);
  report.r2 = r2(y, predicted);
  return report;
}

}  // namespace lizard
