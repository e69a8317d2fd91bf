#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lizard/dataset.hpp"
#include "lizard/types.hpp"

namespace lizard {

struct ForestConfig {
  int n_trees = 100;
  int max_depth = 12;  // root has depth 0; -1 means unlimited
  int min_samples_leaf = 2;
  int mtry = 0;  // candidate features per split; 0 resolves to ceil(p/3)
  bool bootstrap = true;
  std::uint64_t seed = 0;
};

// Flat node storage; feature < 0 marks a leaf. Rows with
// feature value <= threshold route left.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  double value = 0.0;
  int left = -1;
  int right = -1;
  bool is_leaf() const { return feature < 0; }
};

struct Tree {
  std::vector<TreeNode> nodes;  // root at index 0
  double predict(Eigen::Ref<const Vec> x) const;
};

struct SplitResult {
  int feature = -1;
  double threshold = 0.0;
  double sse_reduction = 0.0;
};

// Exhaustive search over midpoints between consecutive distinct sorted
// values of each candidate feature, minimizing total children SSE. Ties
// break toward the lower feature index, then the lower threshold. Returns
// nullopt when no split reduces SSE while keeping min_samples_leaf rows on
// both sides.
std::optional<SplitResult> best_split(const Mat& features, const Vec& target,
                                      std::span<const Index> rows,
                                      std::span<const int> candidate_features,
                                      int min_samples_leaf);

class ForestModel {
 public:
  ForestModel() = default;
  ForestModel(std::vector<Tree> trees, ForestConfig config,
              std::vector<std::string> feature_names);

  const std::vector<Tree>& trees() const { return trees_; }
  const ForestConfig& config() const { return config_; }
  const std::vector<std::string>& feature_names() const {
    return feature_names_;
  }

  // Arithmetic mean of the per-tree predictions.
  double predict(Eigen::Ref<const Vec> x) const;
  Vec predict_per_tree(Eigen::Ref<const Vec> x) const;
  Vec predict(const Dataset& d) const;

 private:
  std::vector<Tree> trees_;
  ForestConfig config_;  // mtry stored resolved
  std::vector<std::string> feature_names_;
};

// Bagged CART regression trees, SSE-reduction splits, per-split random
// feature subsets. Per-tree RNG streams are derived from (seed, tree index)
// so results do not depend on construction order.
ForestModel fit_forest(const Dataset& train, const ForestConfig& config);

void save_forest(const ForestModel& model, const std::string& path);
ForestModel load_forest(const std::string& path);

}  // namespace lizard
