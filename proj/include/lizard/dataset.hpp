#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "lizard/types.hpp"

namespace lizard {

// Canonical column order. The instructions column is optional end-to-end;
// when present it sits between power_consumption and execution_time.
inline constexpr const char* kTargetName = "energy_efficiency";
std::vector<std::string> canonical_feature_names(bool with_instructions);

// Telemetry samples as rows of a dense feature matrix plus a target vector.
// Construction validates the invariants (all values finite, target in
// [0, 1]); instances are immutable afterwards.
class Dataset {
 public:
  Dataset() = default;
  Dataset(Mat features, Vec target, std::vector<std::string> feature_names,
          bool has_instructions);

  Index rows() const { return features_.rows(); }
  Index n_features() const { return features_.cols(); }
  const Mat& features() const { return features_; }
  const Vec& target() const { return target_; }
  const std::vector<std::string>& feature_names() const {
    return feature_names_;
  }
  bool has_instructions() const { return has_instructions_; }

 private:
  Mat features_;
  Vec target_;
  std::vector<std::string> feature_names_;
  bool has_instructions_ = false;
};

// CSV: comma separated, '.' decimal point, mandatory header, no quoting.
// Columns may appear in any order in the file; load reorders them to the
// canonical order. write_csv emits shortest-roundtrip floats, so
// load_csv(write_csv(d)) reproduces d exactly.
Dataset load_csv(const std::string& path);
void write_csv(const Dataset& d, const std::string& path);

// Deterministic synthetic telemetry. Features are uniform draws
// (cpu, mem in [0,100]; net in [0,1000]; power in [50,500]; exec in
// [0,100]; instr in [1e3,1e6]); the target is
//   clip01(0.15 + 0.55*p~ - 0.45*c~ + 0.10*e~ + eta)
// where p~, c~, e~ are the power/cpu/exec draws rescaled to [0,1] by their
// draw ranges and eta is Normal(0, sigma=0.05). Coefficients are chosen so
// power correlates most positively and cpu most negatively with the target.
Dataset synthesize(Index n, std::uint64_t seed, bool include_instructions);

// Seeded shuffle then partition; |test| = round(fraction * n), clamped so
// both sides keep at least one sample. Returns (train, test).
std::pair<Dataset, Dataset> split(const Dataset& d, double test_fraction,
                                  std::uint64_t seed);

// Per-feature min/max learned from a training split. transform is linear
// and unclamped: (x - min) / (max - min), or 0.0 for a constant feature.
class Scaler {
 public:
  Scaler() = default;
  Scaler(Vec min, Vec max, std::vector<std::string> feature_names);

  Vec transform_row(Eigen::Ref<const Vec> x) const;
  Mat transform(const Mat& features) const;
  const Vec& feature_min() const { return min_; }
  const Vec& feature_max() const { return max_; }
  const std::vector<std::string>& feature_names() const {
    return feature_names_;
  }

 private:
  Vec min_, max_;
  std::vector<std::string> feature_names_;
};

Scaler fit_scaler(const Dataset& train);
Dataset apply_scaler(const Scaler& s, const Dataset& d);

}  // namespace lizard
