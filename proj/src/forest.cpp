#include "lizard/forest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "lizard/error.hpp"
#include "lizard/rng.hpp"
#include "lizard/textio.hpp"

namespace lizard {

double Tree::predict(Eigen::Ref<const Vec> x) const {
  int idx = 0;
  while (!nodes[static_cast<std::size_t>(idx)].is_leaf()) {
    const TreeNode& node = nodes[static_cast<std::size_t>(idx)];
    idx = x[node.feature] <= node.threshold ? node.left : node.right;
  }
  return nodes[static_cast<std::size_t>(idx)].value;
}

std::optional<SplitResult> best_split(const Mat& features, const Vec& target,
                                      std::span<const Index> rows,
                                      std::span<const int> candidate_features,
                                      int min_samples_leaf) {
  const Index m = static_cast<Index>(rows.size());
  if (m < 2 * static_cast<Index>(min_samples_leaf)) return std::nullopt;

  // A constant target can show a spurious positive reduction through
  // prefix-sum rounding; no split can help, so bail out exactly.
  bool constant_target = true;
  for (const Index r : rows)
    constant_target = constant_target && target[r] == target[rows.front()];
  if (constant_target) return std::nullopt;

  double parent_sum = 0.0, parent_sumsq = 0.0;
  for (const Index r : rows) {
    parent_sum += target[r];
    parent_sumsq += target[r] * target[r];
  }
  const double parent_sse =
      parent_sumsq - parent_sum * parent_sum / static_cast<double>(m);

  bool found = false;
  SplitResult best;
  double best_children_sse = 0.0;

  std::vector<std::pair<double, double>> cells(static_cast<std::size_t>(m));
  for (const int f : candidate_features) {
    for (Index i = 0; i < m; ++i) {
      const Index r = rows[static_cast<std::size_t>(i)];
      cells[static_cast<std::size_t>(i)] = {features(r, f), target[r]};
    }
    std::sort(cells.begin(), cells.end());

    double left_sum = 0.0, left_sumsq = 0.0;
    for (Index s = 1; s < m; ++s) {
      const auto& prev = cells[static_cast<std::size_t>(s - 1)];
      left_sum += prev.second;
      left_sumsq += prev.second * prev.second;
      if (prev.first == cells[static_cast<std::size_t>(s)].first) continue;
      if (s < min_samples_leaf || m - s < min_samples_leaf) continue;

      const double right_sum = parent_sum - left_sum;
      const double right_sumsq = parent_sumsq - left_sumsq;
      const double children_sse =
          (left_sumsq - left_sum * left_sum / static_cast<double>(s)) +
          (right_sumsq - right_sum * right_sum / static_cast<double>(m - s));
      const double threshold =
          0.5 * (prev.first + cells[static_cast<std::size_t>(s)].first);

      const bool better =
          !found || children_sse < best_children_sse ||
          (children_sse == best_children_sse &&
           (f < best.feature ||
            (f == best.feature && threshold < best.threshold)));
      if (better) {
        found = true;
        best_children_sse = children_sse;
        best.feature = f;
        best.threshold = threshold;
      }
    }
  }

  if (!found) return std::nullopt;
  best.sse_reduction = parent_sse - best_children_sse;
  if (!(best.sse_reduction > 0.0)) return std::nullopt;
  return best;
}

ForestModel::ForestModel(std::vector<Tree> trees, ForestConfig config,
                         std::vector<std::string> feature_names)
    : trees_(std::move(trees)),
      config_(config),
      feature_names_(std::move(feature_names)) {}

double ForestModel::predict(Eigen::Ref<const Vec> x) const {
  return predict_per_tree(x).mean();
}

Vec ForestModel::predict_per_tree(Eigen::Ref<const Vec> x) const {
  if (x.size() != static_cast<Index>(feature_names_.size()))
    throw ArgumentError("forest: feature count mismatch (got " +
                        std::to_string(x.size()) + ", trained on " +
                        std::to_string(feature_names_.size()) + ")");
  Vec out(static_cast<Index>(trees_.size()));
  for (std::size_t t = 0; t < trees_.size(); ++t)
    out[static_cast<Index>(t)] = trees_[t].predict(x);
  return out;
}

Vec ForestModel::predict(const Dataset& d) const {
  Vec out(d.rows());
  for (Index i = 0; i < d.rows(); ++i) out[i] = predict(d.features().row(i));
  return out;
}

namespace {

struct TreeBuilder {
  const Mat& features;
  const Vec& target;
  const ForestConfig& config;
  Rng& rng;
  std::vector<TreeNode> nodes;
  std::vector<int> feature_pool;

  int build(std::vector<Index>& rows, int depth) {
    const Index m = static_cast<Index>(rows.size());
    double sum = 0.0;
    for (const Index r : rows) sum += target[r];
    const double mean = sum / static_cast<double>(m);

    const bool depth_capped = config.max_depth >= 0 && depth >= config.max_depth;
    const bool too_small = m < 2 * static_cast<Index>(config.min_samples_leaf);
    bool constant = true;
    for (const Index r : rows)
      if (target[r] != target[rows.front()]) {
        constant = false;
        break;
      }

    std::optional<SplitResult> split;
    if (!depth_capped && !too_small && !constant) {
      // Candidate features are drawn before the split search; draw order is
      // part of the deterministic stream layout.
      const int p = static_cast<int>(features.cols());
      std::iota(feature_pool.begin(), feature_pool.end(), 0);
      for (int i = 0; i < config.mtry; ++i) {
        const int j =
            i + static_cast<int>(rng.below(static_cast<std::uint64_t>(p - i)));
        std::swap(feature_pool[static_cast<std::size_t>(i)],
                  feature_pool[static_cast<std::size_t>(j)]);
      }
      split = best_split(
          features, target, rows,
          std::span<const int>(feature_pool.data(),
                               static_cast<std::size_t>(config.mtry)),
          config.min_samples_leaf);
    }

    const int idx = static_cast<int>(nodes.size());
    nodes.emplace_back();
    if (!split) {
      nodes[static_cast<std::size_t>(idx)].value = mean;
      return idx;
    }

    std::vector<Index> left_rows, right_rows;
    left_rows.reserve(rows.size());
    right_rows.reserve(rows.size());
    for (const Index r : rows)
      (features(r, split->feature) <= split->threshold ? left_rows
                                                       : right_rows)
          .push_back(r);
    rows.clear();
    rows.shrink_to_fit();

    nodes[static_cast<std::size_t>(idx)].feature = split->feature;
    nodes[static_cast<std::size_t>(idx)].threshold = split->threshold;
    const int left = build(left_rows, depth + 1);
    nodes[static_cast<std::size_t>(idx)].left = left;
    const int right = build(right_rows, depth + 1);
    nodes[static_cast<std::size_t>(idx)].right = right;
    return idx;
  }
};

}  // namespace

ForestModel fit_forest(const Dataset& train, const ForestConfig& config) {
  if (train.rows() < 1) throw ArgumentError("fit_forest: empty dataset");
  const int p = static_cast<int>(train.n_features());

  ForestConfig resolved = config;
  if (resolved.mtry == 0)
    resolved.mtry = (p + 2) / 3;  // ceil(p/3), the regression convention
  if (resolved.n_trees < 1)
    throw ArgumentError("fit_forest: n_trees must be >= 1");
  if (resolved.min_samples_leaf < 1)
    throw ArgumentError("fit_forest: min_samples_leaf must be >= 1");
  if (resolved.mtry < 1 || resolved.mtry > p)
    throw ArgumentError("fit_forest: mtry must lie in [1, " +
                        std::to_string(p) + "]");
  if (resolved.max_depth < -1)
    throw ArgumentError("fit_forest: max_depth must be >= -1");

  const Index n = train.rows();
  std::vector<Tree> trees(static_cast<std::size_t>(resolved.n_trees));
  for (int t = 0; t < resolved.n_trees; ++t) {
    Rng rng(derive_stream(resolved.seed, static_cast<std::uint64_t>(t)));
    std::vector<Index> rows(static_cast<std::size_t>(n));
    if (resolved.bootstrap) {
      for (Index i = 0; i < n; ++i)
        rows[static_cast<std::size_t>(i)] =
            static_cast<Index>(rng.below(static_cast<std::uint64_t>(n)));
    } else {
      std::iota(rows.begin(), rows.end(), Index{0});
    }
    TreeBuilder builder{train.features(), train.target(), resolved, rng,
                        {},               std::vector<int>(
                                              static_cast<std::size_t>(p))};
    builder.build(rows, 0);
    trees[static_cast<std::size_t>(t)].nodes = std::move(builder.nodes);
  }
  return ForestModel(std::move(trees), resolved, train.feature_names());
}

namespace {

constexpr const char* kForestTag = "lizard-forest v1";

void write_node(std::ostream& out, const Tree& tree, int idx, int depth) {
  const TreeNode& node = tree.nodes[static_cast<std::size_t>(idx)];
  for (int i = 0; i < depth; ++i) out << "  ";
  if (node.is_leaf()) {
    out << "leaf " << format_full(node.value) << '\n';
    return;
  }
  out << "split " << node.feature << ' ' << format_full(node.threshold)
      << '\n';
  write_node(out, tree, node.left, depth + 1);
  write_node(out, tree, node.right, depth + 1);
}

int read_node(const std::vector<std::string>& lines, std::size_t& pos,
              Tree& tree, int n_features) {
  if (pos >= lines.size())
    throw DataError("forest model: truncated tree");
  const auto cells = split_on(std::string(trim(lines[pos++])), ' ');
  const int idx = static_cast<int>(tree.nodes.size());
  tree.nodes.emplace_back();
  if (cells.size() == 2 && cells[0] == "leaf") {
    const auto v = parse_double(cells[1]);
    if (!v) throw DataError("forest model: bad leaf value");
    tree.nodes[static_cast<std::size_t>(idx)].value = *v;
    return idx;
  }
  if (cells.size() == 3 && cells[0] == "split") {
    const auto f = parse_int(cells[1]);
    const auto thr = parse_double(cells[2]);
    if (!f || *f < 0 || *f >= n_features || !thr)
      throw DataError("forest model: bad split record");
    tree.nodes[static_cast<std::size_t>(idx)].feature = static_cast<int>(*f);
    tree.nodes[static_cast<std::size_t>(idx)].threshold = *thr;
    const int left = read_node(lines, pos, tree, n_features);
    tree.nodes[static_cast<std::size_t>(idx)].left = left;
    const int right = read_node(lines, pos, tree, n_features);
    tree.nodes[static_cast<std::size_t>(idx)].right = right;
    return idx;
  }
  throw DataError("forest model: unrecognized node record '" + lines[pos - 1] +
                  "'");
}

}  // namespace

void save_forest(const ForestModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ArgumentError("cannot open file for writing: " + path);
  const ForestConfig& c = model.config();
  out << kForestTag << '\n';
  out << "feature_names";
  for (const auto& name : model.feature_names()) out << ' ' << name;
  out << '\n';
  out << "n_trees " << c.n_trees << '\n';
  out << "max_depth " << c.max_depth << '\n';
  out << "min_samples_leaf " << c.min_samples_leaf << '\n';
  out << "mtry " << c.mtry << '\n';
  out << "bootstrap " << (c.bootstrap ? 1 : 0) << '\n';
  out << "seed " << c.seed << '\n';
  for (std::size_t t = 0; t < model.trees().size(); ++t) {
    out << "tree " << t << '\n';
    write_node(out, model.trees()[t], 0, 1);
  }
  if (!out) throw DataError("write failed: " + path);
}

ForestModel load_forest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArgumentError("cannot open file: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  if (lines.empty() || lines[0] != kForestTag)
    throw DataError(path + ": not a forest model file");

  std::size_t pos = 1;
  auto next_field = [&](const std::string& key) {
    if (pos >= lines.size())
      throw DataError(path + ": missing field '" + key + "'");
    const auto cells = split_on(lines[pos++], ' ');
    if (cells.empty() || cells[0] != key)
      throw DataError(path + ": expected field '" + key + "'");
    return std::vector<std::string>(cells.begin() + 1, cells.end());
  };

  const auto names = next_field("feature_names");
  if (names.empty()) throw DataError(path + ": no feature names");
  ForestConfig config;
  auto int_field = [&](const std::string& key) {
    const auto v = next_field(key);
    const auto parsed = v.size() == 1 ? parse_int(v[0]) : std::nullopt;
    if (!parsed) throw DataError(path + ": bad field '" + key + "'");
    return *parsed;
  };
  config.n_trees = static_cast<int>(int_field("n_trees"));
  config.max_depth = static_cast<int>(int_field("max_depth"));
  config.min_samples_leaf = static_cast<int>(int_field("min_samples_leaf"));
  config.mtry = static_cast<int>(int_field("mtry"));
  config.bootstrap = int_field("bootstrap") != 0;
  {
    const auto v = next_field("seed");
    const auto seed = v.size() == 1 ? parse_uint(v[0]) : std::nullopt;
    if (!seed) throw DataError(path + ": bad field 'seed'");
    config.seed = static_cast<std::uint64_t>(*seed);
  }

  std::vector<Tree> trees;
  for (int t = 0; t < config.n_trees; ++t) {
    const auto header = next_field("tree");
    if (header.size() != 1 || parse_int(header[0]) != t)
      throw DataError(path + ": bad tree header");
    Tree tree;
    read_node(lines, pos, tree, static_cast<int>(names.size()));
    trees.push_back(std::move(tree));
  }
  return ForestModel(std::move(trees), config, names);
}

}  // namespace lizard
