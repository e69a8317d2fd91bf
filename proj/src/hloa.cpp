#include "lizard/hloa.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "lizard/error.hpp"
#include "lizard/textio.hpp"

namespace lizard {

void SearchSpace::validate() const {
  if (lower.size() != upper.size() || lower.size() < 1)
    throw ArgumentError("search space: bad bound dimensions");
  for (Index j = 0; j < lower.size(); ++j)
    if (!(lower[j] < upper[j]))
      throw ArgumentError("search space: lower >= upper at dimension " +
                          std::to_string(j));
}

SearchSpace SearchSpace::cube(Index dim, double lo, double hi) {
  SearchSpace space{Vec::Constant(dim, lo), Vec::Constant(dim, hi)};
  space.validate();
  return space;
}

void HloaConfig::validate() const {
  if (population < 4)
    throw ArgumentError("hloa: population must be >= 4");
  if (max_evaluations < population)
    throw ArgumentError("hloa: budget below the initial population size");
  const double p_sum = p_crypsis + p_blood_squirt + p_escape;
  if (p_crypsis < 0 || p_blood_squirt < 0 || p_escape < 0 ||
      std::abs(p_sum - 1.0) > 1e-9)
    throw ArgumentError("hloa: strategy probabilities must sum to 1");
  if (restart_fraction < 0.0 || restart_fraction > 1.0)
    throw ArgumentError("hloa: restart fraction must lie in [0, 1]");
  if (sigma_start < 0.0 || sigma_end < 0.0)
    throw ArgumentError("hloa: sigma schedule must be nonnegative");
}

OptimizerState::OptimizerState(SearchSpace space, HloaConfig config,
                               Mat population, Vec fitness,
                               std::int64_t evaluations_used,
                               std::int64_t nan_evaluations)
    : space_(std::move(space)),
      config_(config),
      population_(std::move(population)),
      fitness_(std::move(fitness)),
      evaluations_used_(evaluations_used),
      nan_evaluations_(nan_evaluations) {
  Index best = 0;
  fitness_.minCoeff(&best);
  best_x_ = population_.row(best).transpose();
  best_f_ = fitness_[best];
}

int OptimizerState::best_index() const {
  Index best = 0;
  fitness_.minCoeff(&best);
  return static_cast<int>(best);
}

double OptimizerState::progress() const {
  return static_cast<double>(evaluations_used_) /
         static_cast<double>(config_.max_evaluations);
}

OptimizerState init_population(const SearchSpace& space,
                               const HloaConfig& config,
                               const Objective& objective) {
  space.validate();
  config.validate();

  const int n = config.population;
  const Index d = space.dim();
  Mat population(n, d);
  Vec fitness(n);
  std::int64_t nan_count = 0;
  for (int i = 0; i < n; ++i) {
    Rng rng(derive_stream(config.seed, 0, static_cast<std::uint64_t>(i)));
    for (Index j = 0; j < d; ++j)
      population(i, j) = rng.uniform(space.lower[j], space.upper[j]);
    const double f = objective(population.row(i).transpose());
    if (std::isnan(f)) {
      fitness[i] = std::numeric_limits<double>::infinity();
      ++nan_count;
    } else {
      fitness[i] = f;
    }
  }
  if (nan_count == n)
    throw NumericError("hloa: objective returned NaN for the whole "
                       "initial population");
  return OptimizerState(space, config, std::move(population),
                        std::move(fitness), n, nan_count);
}

Vec crypsis_move(Eigen::Ref<const Vec> best, Eigen::Ref<const Vec> xa,
                 Eigen::Ref<const Vec> xb, Eigen::Ref<const Vec> u) {
  return best + (u.array() * (xa - xb).array()).matrix();
}

Vec blood_squirt_move(Eigen::Ref<const Vec> x, Eigen::Ref<const Vec> best,
                      double r, Eigen::Ref<const Vec> sigma,
                      Eigen::Ref<const Vec> g) {
  return x + r * (best - x) + (sigma.array() * g.array()).matrix();
}

Vec escape_move(Eigen::Ref<const Vec> x, Eigen::Ref<const Vec> range,
                double w, Eigen::Ref<const Vec> r) {
  return x + (w * range.array() * (r.array() - 0.5)).matrix();
}

double blood_squirt_sigma(const HloaConfig& config, double progress) {
  return config.sigma_start * (1.0 - progress) + config.sigma_end * progress;
}

double escape_weight(const HloaConfig& config, double progress) {
  return config.escape_w_start * (1.0 - progress) +
         config.escape_w_end * progress;
}

Vec clamp_to_bounds(Vec x, const SearchSpace& space) {
  for (Index j = 0; j < x.size(); ++j)
    x[j] = std::clamp(x[j], space.lower[j], space.upper[j]);
  return x;
}

namespace {

Vec uniform_draws(Rng& rng, Index d, double lo, double hi) {
  Vec v(d);
  for (Index j = 0; j < d; ++j) v[j] = rng.uniform(lo, hi);
  return v;
}

Vec normal_draws(Rng& rng, Index d) {
  Vec v(d);
  for (Index j = 0; j < d; ++j) v[j] = rng.normal();
  return v;
}

}  // namespace

Vec strategy_crypsis(const OptimizerState& state, int i, Rng& rng) {
  const int n = state.config().population;
  int a = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
  while (a == i) a = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
  int b = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
  while (b == i || b == a)
    b = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
  const Vec u = uniform_draws(rng, state.space().dim(), -1.0, 1.0);
  return clamp_to_bounds(
      crypsis_move(state.best_x(), state.population().row(a).transpose(),
                   state.population().row(b).transpose(), u),
      state.space());
}

Vec strategy_blood_squirt(const OptimizerState& state, int i, Rng& rng) {
  const double r = rng.uniform();
  const Vec g = normal_draws(rng, state.space().dim());
  const Vec range = state.space().upper - state.space().lower;
  const Vec sigma =
      blood_squirt_sigma(state.config(), state.progress()) * range;
  return clamp_to_bounds(
      blood_squirt_move(state.population().row(i).transpose(), state.best_x(),
                        r, sigma, g),
      state.space());
}

Vec strategy_escape(const OptimizerState& state, int i, Rng& rng) {
  const Vec r = uniform_draws(rng, state.space().dim(), 0.0, 1.0);
  const Vec range = state.space().upper - state.space().lower;
  const double w = escape_weight(state.config(), state.progress());
  return clamp_to_bounds(
      escape_move(state.population().row(i).transpose(), range, w, r),
      state.space());
}

void step(OptimizerState& state, const Objective& objective) {
  const HloaConfig& config = state.config_;
  if (state.evaluations_used_ >= config.max_evaluations)
    throw ArgumentError("hloa: evaluation budget already exhausted");

  const int n = config.population;
  const int generation = ++state.generation_;

  // Proposals are generated against a snapshot of the population so
  // per-candidate work is order-independent.
  const OptimizerState snapshot = state;
  std::int64_t attempted = 0;
  std::int64_t nan_this_step = 0;

  for (int i = 0; i < n; ++i) {
    if (state.evaluations_used_ >= config.max_evaluations) break;
    Rng rng(derive_stream(config.seed, static_cast<std::uint64_t>(generation),
                          static_cast<std::uint64_t>(i)));
    const double pick = rng.uniform();
    Vec proposal;
    if (pick < config.p_crypsis)
      proposal = strategy_crypsis(snapshot, i, rng);
    else if (pick < config.p_crypsis + config.p_blood_squirt)
      proposal = strategy_blood_squirt(snapshot, i, rng);
    else
      proposal = strategy_escape(snapshot, i, rng);

    const double f = objective(proposal);
    ++state.evaluations_used_;
    ++attempted;
    if (std::isnan(f)) {
      ++state.nan_evaluations_;
      ++nan_this_step;
      continue;
    }
    if (f < state.fitness_[i]) {
      state.population_.row(i) = proposal.transpose();
      state.fitness_[i] = f;
    }
    if (f < state.best_f_) {
      state.best_f_ = f;
      state.best_x_ = proposal;
    }
  }

  // Alpha-MSH restart: the worst ceil(q*N) candidates, never the one
  // holding the global best, are replaced by fresh uniform draws.
  const int n_restart = static_cast<int>(
      std::ceil(config.restart_fraction * static_cast<double>(n)));
  if (n_restart > 0) {
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return state.fitness_[a] > state.fitness_[b];
    });
    const int keep = state.best_index();
    int restarted = 0;
    for (const int idx : order) {
      if (restarted == n_restart) break;
      if (idx == keep) continue;
      if (state.evaluations_used_ >= config.max_evaluations) break;
      Rng rng(derive_stream(config.seed,
                            static_cast<std::uint64_t>(generation),
                            static_cast<std::uint64_t>(n + idx)));
      Vec fresh(state.space_.dim());
      for (Index j = 0; j < fresh.size(); ++j)
        fresh[j] = rng.uniform(state.space_.lower[j], state.space_.upper[j]);
      const double f = objective(fresh);
      ++state.evaluations_used_;
      ++attempted;
      ++restarted;
      if (std::isnan(f)) {
        ++state.nan_evaluations_;
        ++nan_this_step;
        continue;
      }
      state.population_.row(idx) = fresh.transpose();
      state.fitness_[idx] = f;
      if (f < state.best_f_) {
        state.best_f_ = f;
        state.best_x_ = fresh;
      }
    }
  }

  if (attempted > 0 && nan_this_step == attempted)
    throw NumericError("hloa: objective returned NaN for every evaluation "
                       "in generation " +
                       std::to_string(generation));
}

OptResult optimize(const SearchSpace& space, const Objective& objective,
                   const HloaConfig& config) {
  OptimizerState state = init_population(space, config, objective);
  OptResult result;
  result.history.push_back(
      {0, state.evaluations_used(), state.best_fitness()});
  while (state.evaluations_used() < config.max_evaluations) {
    step(state, objective);
    result.history.push_back(
        {state.generation(), state.evaluations_used(), state.best_fitness()});
  }
  result.best_x = state.best_x();
  result.best_fitness = state.best_fitness();
  result.evaluations_used = state.evaluations_used();
  result.nan_evaluations = state.nan_evaluations();
  return result;
}

void write_history_csv(const std::vector<GenerationRecord>& history,
                       const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ArgumentError("cannot open file for writing: " + path);
  out << "generation,evaluations_used,best_fitness\n";
  for (const auto& rec : history)
    out << rec.generation << ',' << rec.evaluations_used << ','
        << format_full(rec.best_fitness) << '\n';
  if (!out) throw DataError("write failed: " + path);
}

}  // namespace lizard
