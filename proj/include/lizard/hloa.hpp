#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "lizard/rng.hpp"
#include "lizard/types.hpp"

namespace lizard {

struct SearchSpace {
  Vec lower, upper;

  Index dim() const { return lower.size(); }
  void validate() const;
  static SearchSpace cube(Index dim, double lo, double hi);
};

struct HloaConfig {
  int population = 20;  // N, at least 4
  std::int64_t max_evaluations = 10000;
  // Per-candidate strategy probabilities; must sum to 1.
  double p_crypsis = 0.4;
  double p_blood_squirt = 0.3;
  double p_escape = 0.3;
  // Fraction of the population redrawn uniformly each generation.
  double restart_fraction = 0.1;
  // Blood-squirt jump scale in units of per-dimension range, decaying
  // linearly with evaluation progress.
  double sigma_start = 0.2;
  double sigma_end = 0.01;
  // Escape step weight, same linear schedule.
  double escape_w_start = 1.0;
  double escape_w_end = 0.1;
  std::uint64_t seed = 0;

  void validate() const;
};

using Objective = std::function<double(Eigen::Ref<const Vec>)>;

struct GenerationRecord {
  int generation = 0;
  std::int64_t evaluations_used = 0;
  double best_fitness = 0.0;
};

// Population of bounded candidates with cached fitness. The best-so-far
// record is monotone non-increasing across steps; every candidate stays
// inside the bounds; evaluations_used never exceeds the budget.
class OptimizerState {
 public:
  OptimizerState(SearchSpace space, HloaConfig config, Mat population,
                 Vec fitness, std::int64_t evaluations_used,
                 std::int64_t nan_evaluations);

  const SearchSpace& space() const { return space_; }
  const HloaConfig& config() const { return config_; }
  const Mat& population() const { return population_; }
  const Vec& fitness() const { return fitness_; }
  const Vec& best_x() const { return best_x_; }
  double best_fitness() const { return best_f_; }
  int generation() const { return generation_; }
  std::int64_t evaluations_used() const { return evaluations_used_; }
  std::int64_t nan_evaluations() const { return nan_evaluations_; }
  // Index of the candidate currently holding the best fitness.
  int best_index() const;
  // Evaluation progress in [0, 1]; drives the decay schedules.
  double progress() const;

 private:
  friend void step(OptimizerState& state, const Objective& objective);

  SearchSpace space_;
  HloaConfig config_;
  Mat population_;  // N x d
  Vec fitness_;     // NaN evaluations are stored as +inf
  Vec best_x_;
  double best_f_;
  int generation_ = 0;
  std::int64_t evaluations_used_ = 0;
  std::int64_t nan_evaluations_ = 0;
};

// N uniform candidates, all evaluated; requires N >= 4 (the strategies
// reference two distinct peers plus the best).
OptimizerState init_population(const SearchSpace& space,
                               const HloaConfig& config,
                               const Objective& objective);

// Pure move kernels; the random draws come in as arguments.
//   crypsis:      best + u . (xa - xb), u_j in (-1, 1)
//   blood squirt: x + r (best - x) + sigma_t . g,   g ~ N(0, I)
//   escape:       x + w_t . range . (r - 0.5),      r_j in [0, 1)
Vec crypsis_move(Eigen::Ref<const Vec> best, Eigen::Ref<const Vec> xa,
                 Eigen::Ref<const Vec> xb, Eigen::Ref<const Vec> u);
Vec blood_squirt_move(Eigen::Ref<const Vec> x, Eigen::Ref<const Vec> best,
                      double r, Eigen::Ref<const Vec> sigma,
                      Eigen::Ref<const Vec> g);
Vec escape_move(Eigen::Ref<const Vec> x, Eigen::Ref<const Vec> range,
                double w, Eigen::Ref<const Vec> r);

// Linear schedules over evaluation progress, in units of range.
double blood_squirt_sigma(const HloaConfig& config, double progress);
double escape_weight(const HloaConfig& config, double progress);

Vec clamp_to_bounds(Vec x, const SearchSpace& space);

// Proposal for candidate i, drawing from the supplied stream; always
// clamped to the bounds.
Vec strategy_crypsis(const OptimizerState& state, int i, Rng& rng);
Vec strategy_blood_squirt(const OptimizerState& state, int i, Rng& rng);
Vec strategy_escape(const OptimizerState& state, int i, Rng& rng);

// One generation: every candidate proposes via a strategy drawn with
// probabilities (crypsis, blood squirt, escape), proposals are evaluated
// and accepted only on strict improvement, then the worst ceil(q*N)
// candidates other than the best are redrawn uniformly. Per-candidate
// streams derive from (seed, generation, index). Uses at most
// N + ceil(q*N) evaluations and never exceeds the budget.
void step(OptimizerState& state, const Objective& objective);

struct OptResult {
  Vec best_x;
  double best_fitness = 0.0;
  std::vector<GenerationRecord> history;  // one record per generation
  std::int64_t evaluations_used = 0;
  std::int64_t nan_evaluations = 0;
};

OptResult optimize(const SearchSpace& space, const Objective& objective,
                   const HloaConfig& config);

// generation,evaluations_used,best_fitness rows for convergence plots.
void write_history_csv(const std::vector<GenerationRecord>& history,
                       const std::string& path);

// Benchmark objectives for validating the optimizer.
template <typename Derived>
double sphere(const Eigen::MatrixBase<Derived>& x) {
  return x.squaredNorm();
}

template <typename Derived>
double rastrigin(const Eigen::MatrixBase<Derived>& x) {
  constexpr double two_pi = 6.283185307179586476925286766559;
  double acc = 10.0 * static_cast<double>(x.size());
  for (Index i = 0; i < x.size(); ++i)
    acc += x[i] * x[i] - 10.0 * std::cos(two_pi * x[i]);
  return acc;
}

}  // namespace lizard
