#include "lizard/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "lizard/error.hpp"
#include "lizard/rng.hpp"
#include "lizard/textio.hpp"

namespace lizard {

std::vector<std::string> canonical_feature_names(bool with_instructions) {
  std::vector<std::string> names = {"cpu_usage", "memory_usage",
                                    "network_traffic", "power_consumption"};
  if (with_instructions) names.push_back("instructions_executed");
  names.push_back("execution_time");
  return names;
}

Dataset::Dataset(Mat features, Vec target,
                 std::vector<std::string> feature_names, bool has_instructions)
    : features_(std::move(features)),
      target_(std::move(target)),
      feature_names_(std::move(feature_names)),
      has_instructions_(has_instructions) {
  if (features_.rows() != target_.size())
    throw ArgumentError("dataset: feature rows and target length differ");
  if (static_cast<Index>(feature_names_.size()) != features_.cols())
    throw ArgumentError("dataset: feature name count and column count differ");
  if (!features_.allFinite())
    throw DataError("dataset: non-finite feature value");
  for (Index i = 0; i < target_.size(); ++i) {
    if (!std::isfinite(target_[i]))
      throw DataError("dataset: non-finite target value at row " +
                      std::to_string(i + 1));
    if (target_[i] < 0.0 || target_[i] > 1.0)
      throw DataError("dataset: energy_efficiency " + format_full(target_[i]) +
                      " outside [0,1] at row " + std::to_string(i + 1));
  }
}

namespace {

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArgumentError("cannot open file: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

}  // namespace

Dataset load_csv(const std::string& path) {
  const auto lines = read_lines(path);
  if (lines.empty()) throw DataError(path + ": empty file, header expected");

  auto header = split_on(lines[0], ',');
  for (auto& h : header) h = std::string(trim(h));

  const bool has_instructions =
      std::find(header.begin(), header.end(), "instructions_executed") !=
      header.end();
  auto expected = canonical_feature_names(has_instructions);
  expected.push_back(kTargetName);

  for (const auto& name : header)
    if (std::find(expected.begin(), expected.end(), name) == expected.end())
      throw DataError(path + ": unknown column '" + name + "'");
  for (const auto& name : expected)
    if (std::find(header.begin(), header.end(), name) == header.end())
      throw DataError(path + ": missing column '" + name + "'");
  if (header.size() != expected.size())
    throw DataError(path + ": duplicate column in header");

  // Column k of the file feeds canonical slot col_map[k].
  std::vector<std::size_t> col_map(header.size());
  for (std::size_t k = 0; k < header.size(); ++k)
    col_map[k] = static_cast<std::size_t>(
        std::find(expected.begin(), expected.end(), header[k]) -
        expected.begin());

  const Index n = static_cast<Index>(lines.size()) - 1;
  if (n < 1) throw DataError(path + ": no samples");

  const Index p = static_cast<Index>(expected.size()) - 1;
  Mat features(n, p);
  Vec target(n);
  for (Index i = 0; i < n; ++i) {
    const auto cells = split_on(lines[static_cast<std::size_t>(i) + 1], ',');
    if (cells.size() != header.size())
      throw DataError(path + ": row " + std::to_string(i + 1) + " has " +
                      std::to_string(cells.size()) + " cells, expected " +
                      std::to_string(header.size()));
    for (std::size_t k = 0; k < cells.size(); ++k) {
      const auto v = parse_double(cells[k]);
      if (!v || !std::isfinite(*v))
        throw DataError(path + ": row " + std::to_string(i + 1) + ", column '" +
                        header[k] + "': cannot parse '" +
                        std::string(trim(cells[k])) + "' as a finite number");
      if (col_map[k] == static_cast<std::size_t>(p))
        target[i] = *v;
      else
        features(i, static_cast<Index>(col_map[k])) = *v;
    }
    if (target[i] < 0.0 || target[i] > 1.0)
      throw DataError(path + ": row " + std::to_string(i + 1) +
                      ": energy_efficiency " + format_full(target[i]) +
                      " outside [0,1]");
  }

  expected.pop_back();
  return Dataset(std::move(features), std::move(target), std::move(expected),
                 has_instructions);
}

void write_csv(const Dataset& d, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ArgumentError("cannot open file for writing: " + path);
  for (const auto& name : d.feature_names()) out << name << ',';
  out << kTargetName << '\n';
  for (Index i = 0; i < d.rows(); ++i) {
    for (Index j = 0; j < d.n_features(); ++j)
      out << format_full(d.features()(i, j)) << ',';
    out << format_full(d.target()[i]) << '\n';
  }
  if (!out) throw DataError("write failed: " + path);
}

Dataset synthesize(Index n, std::uint64_t seed, bool include_instructions) {
  if (n < 1) throw ArgumentError("synthesize: n must be >= 1");

  auto names = canonical_feature_names(include_instructions);
  const Index p = static_cast<Index>(names.size());
  Mat features(n, p);
  Vec target(n);

  Rng rng(seed);
  for (Index i = 0; i < n; ++i) {
    const double cpu = rng.uniform(0.0, 100.0);
    const double mem = rng.uniform(0.0, 100.0);
    const double net = rng.uniform(0.0, 1000.0);
    const double power = rng.uniform(50.0, 500.0);
    double instr = 0.0;
    if (include_instructions) instr = rng.uniform(1e3, 1e6);
    const double exec = rng.uniform(0.0, 100.0);
    const double noise = 0.05 * rng.normal();

    Index j = 0;
    features(i, j++) = cpu;
    features(i, j++) = mem;
    features(i, j++) = net;
    features(i, j++) = power;
    if (include_instructions) features(i, j++) = instr;
    features(i, j++) = exec;

    const double power_01 = (power - 50.0) / 450.0;
    const double cpu_01 = cpu / 100.0;
    const double exec_01 = exec / 100.0;
    const double eff =
        0.15 + 0.55 * power_01 - 0.45 * cpu_01 + 0.10 * exec_01 + noise;
    target[i] = std::clamp(eff, 0.0, 1.0);
  }
  return Dataset(std::move(features), std::move(target), std::move(names),
                 include_instructions);
}

std::pair<Dataset, Dataset> split(const Dataset& d, double test_fraction,
                                  std::uint64_t seed) {
  if (d.rows() < 2) throw ArgumentError("split: need at least 2 samples");
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw ArgumentError("split: test_fraction must lie in (0,1)");

  const Index n = d.rows();
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  Rng rng(seed);
  for (Index i = n - 1; i > 0; --i) {
    const auto j = static_cast<Index>(
        rng.below(static_cast<std::uint64_t>(i) + 1));
    std::swap(order[static_cast<std::size_t>(i)],
              order[static_cast<std::size_t>(j)]);
  }

  Index n_test = static_cast<Index>(
      std::llround(test_fraction * static_cast<double>(n)));
  n_test = std::clamp<Index>(n_test, 1, n - 1);

  auto take = [&](Index begin, Index count) {
    Mat f(count, d.n_features());
    Vec t(count);
    for (Index i = 0; i < count; ++i) {
      const Index src = order[static_cast<std::size_t>(begin + i)];
      f.row(i) = d.features().row(src);
      t[i] = d.target()[src];
    }
    return Dataset(std::move(f), std::move(t), d.feature_names(),
                   d.has_instructions());
  };
  Dataset test = take(0, n_test);
  Dataset train = take(n_test, n - n_test);
  return {std::move(train), std::move(test)};
}

Scaler::Scaler(Vec min, Vec max, std::vector<std::string> feature_names)
    : min_(std::move(min)),
      max_(std::move(max)),
      feature_names_(std::move(feature_names)) {
  if (min_.size() != max_.size() ||
      static_cast<Index>(feature_names_.size()) != min_.size())
    throw ArgumentError("scaler: mismatched min/max/name sizes");
  for (Index j = 0; j < min_.size(); ++j)
    if (!(min_[j] <= max_[j]))
      throw ArgumentError("scaler: min > max for feature " + feature_names_[
          static_cast<std::size_t>(j)]);
}

Vec Scaler::transform_row(Eigen::Ref<const Vec> x) const {
  if (x.size() != min_.size())
    throw ArgumentError("scaler: feature count mismatch");
  Vec out(x.size());
  for (Index j = 0; j < x.size(); ++j) {
    const double range = max_[j] - min_[j];
    out[j] = range > 0.0 ? (x[j] - min_[j]) / range : 0.0;
  }
  return out;
}

Mat Scaler::transform(const Mat& features) const {
  if (features.cols() != min_.size())
    throw ArgumentError("scaler: feature count mismatch");
  Mat out(features.rows(), features.cols());
  for (Index j = 0; j < features.cols(); ++j) {
    const double range = max_[j] - min_[j];
    if (range > 0.0)
      out.col(j) = (features.col(j).array() - min_[j]) / range;
    else
      out.col(j).setZero();
  }
  return out;
}

Scaler fit_scaler(const Dataset& train) {
  if (train.rows() < 1) throw ArgumentError("fit_scaler: empty dataset");
  Vec min = train.features().colwise().minCoeff();
  Vec max = train.features().colwise().maxCoeff();
  return Scaler(std::move(min), std::move(max), train.feature_names());
}

Dataset apply_scaler(const Scaler& s, const Dataset& d) {
  if (d.rows() < 1) throw ArgumentError("apply_scaler: empty dataset");
  if (s.feature_names() != d.feature_names())
    throw ArgumentError("apply_scaler: feature names do not match scaler");
  return Dataset(s.transform(d.features()), d.target(), d.feature_names(),
                 d.has_instructions());
}

}  // namespace lizard
