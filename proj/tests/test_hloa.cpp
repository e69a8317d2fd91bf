#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "lizard/error.hpp"
#include "lizard/hloa.hpp"
#include "oracles.hpp"

using namespace lizard;

namespace {

const Objective kSphere = [](Eigen::Ref<const Vec> x) { return sphere(x); };

HloaConfig small_config(std::uint64_t seed) {
  HloaConfig config;
  config.population = 8;
  config.max_evaluations = 400;
  config.seed = seed;
  return config;
}

}  // namespace

TEST_CASE("benchmark objectives") {
  CHECK(sphere(Vec::Zero(4)) == 0.0);
  Vec x(2);
  x << 1, 2;
  CHECK(sphere(x) == 5.0);
  CHECK(rastrigin(Vec::Zero(6)) == 0.0);
  Vec half = Vec::Constant(1, 0.5);
  CHECK(rastrigin(half) == doctest::Approx(10.0 + 0.25 + 10.0));
}

TEST_CASE("move kernels match their formulas") {
  Vec best = Vec::Zero(1), xa = Vec::Constant(1, 1.0),
      xb = Vec::Constant(1, -1.0), u = Vec::Constant(1, 0.5);
  CHECK(crypsis_move(best, xa, xb, u)[0] == 1.0);

  Vec x = Vec::Constant(1, 3.0);
  CHECK(blood_squirt_move(x, x, 0.7, Vec::Zero(1), Vec::Constant(1, 9.0))[0] ==
        3.0);
  Vec g = Vec::Constant(1, 2.0), sigma = Vec::Constant(1, 0.5);
  CHECK(blood_squirt_move(x, best, 1.0, sigma, g)[0] == 1.0);  // 0 + 0.5*2

  Vec range = Vec::Constant(1, 10.0), r = Vec::Constant(1, 0.75);
  CHECK(escape_move(x, range, 0.4, r)[0] == doctest::Approx(4.0));
}

TEST_CASE("decay schedules are linear in progress") {
  HloaConfig config;
  CHECK(blood_squirt_sigma(config, 0.0) == 0.2);
  CHECK(blood_squirt_sigma(config, 1.0) == 0.01);
  CHECK(blood_squirt_sigma(config, 0.5) == doctest::Approx(0.105));
  CHECK(escape_weight(config, 0.0) == 1.0);
  CHECK(escape_weight(config, 1.0) == doctest::Approx(0.1));
  CHECK(escape_weight(config, 0.5) == doctest::Approx(0.55));
}

TEST_CASE("init population is bounded, evaluated, deterministic") {
  const SearchSpace space = SearchSpace::cube(3, -2.0, 5.0);
  const HloaConfig config = small_config(6);
  const OptimizerState state = init_population(space, config, kSphere);

  CHECK(state.population().rows() == 8);
  CHECK(state.evaluations_used() == 8);
  CHECK((state.population().array() >= -2.0).all());
  CHECK((state.population().array() <= 5.0).all());
  CHECK(state.best_fitness() == state.fitness().minCoeff());

  const OptimizerState again = init_population(space, config, kSphere);
  CHECK(again.population() == state.population());

  const Objective constant = [](Eigen::Ref<const Vec>) { return 4.2; };
  CHECK(init_population(space, config, constant).best_fitness() == 4.2);

  HloaConfig too_small = config;
  too_small.population = 3;
  CHECK_THROWS_AS(init_population(space, too_small, kSphere), ArgumentError);
}

TEST_CASE("strategy proposals stay inside the bounds") {
  const SearchSpace space = SearchSpace::cube(4, -1.0, 2.0);
  const OptimizerState state =
      init_population(space, small_config(9), kSphere);
  for (int i = 0; i < state.config().population; ++i) {
    Rng rng(derive_stream(1234, static_cast<std::uint64_t>(i)));
    for (const Vec& proposal :
         {strategy_crypsis(state, i, rng), strategy_blood_squirt(state, i, rng),
          strategy_escape(state, i, rng)}) {
      CHECK((proposal.array() >= -1.0).all());
      CHECK((proposal.array() <= 2.0).all());
    }
  }
}

TEST_CASE("crypsis of a fully converged population is the best point") {
  const SearchSpace space = SearchSpace::cube(2, -1.0, 1.0);
  HloaConfig config = small_config(3);
  Mat population = Mat::Zero(config.population, 2);
  population.array() += 0.25;
  const Vec fitness = Vec::Constant(config.population, 0.125);
  const OptimizerState state(space, config, population, fitness,
                             config.population, 0);
  Rng rng(5);
  CHECK(strategy_crypsis(state, 0, rng) == state.best_x());
}

TEST_CASE("step improves monotonically and respects the budget") {
  const SearchSpace space = SearchSpace::cube(4, -5.0, 5.0);
  HloaConfig config;
  config.population = 10;
  config.max_evaluations = 1000;
  config.seed = 42;

  std::int64_t calls = 0;
  const Objective counting = [&](Eigen::Ref<const Vec> x) {
    ++calls;
    return sphere(x);
  };
  OptimizerState state = init_population(space, config, counting);
  double last_best = state.best_fitness();
  while (state.evaluations_used() < config.max_evaluations) {
    const std::int64_t before = state.evaluations_used();
    step(state, counting);
    CHECK(state.best_fitness() <= last_best);
    last_best = state.best_fitness();
    CHECK(state.evaluations_used() - before <= 10 + 1);  // N + ceil(qN)
    CHECK((state.population().array().abs() <= 5.0).all());
    CHECK(state.evaluations_used() <= config.max_evaluations);
  }
  CHECK(calls == state.evaluations_used());
  CHECK_THROWS_AS(step(state, counting), ArgumentError);
}

TEST_CASE("a candidate at the optimum survives every step") {
  const SearchSpace space = SearchSpace::cube(3, -4.0, 4.0);
  HloaConfig config = small_config(11);
  config.max_evaluations = 500;

  Mat population(config.population, 3);
  Rng rng(2);
  for (Index i = 0; i < population.rows(); ++i)
    for (Index j = 0; j < 3; ++j) population(i, j) = rng.uniform(-4.0, 4.0);
  population.row(5).setZero();  // the sphere optimum
  Vec fitness(config.population);
  for (Index i = 0; i < population.rows(); ++i)
    fitness[i] = sphere(population.row(i).transpose());

  OptimizerState state(space, config, population, fitness, config.population,
                       0);
  for (int g = 0; g < 20; ++g) {
    step(state, kSphere);
    CHECK(state.best_fitness() == 0.0);
    bool still_there = false;
    for (Index i = 0; i < state.population().rows(); ++i)
      still_there = still_there || state.population().row(i).isZero(0.0);
    CHECK(still_there);
  }
}

TEST_CASE("nan objectives are discarded; all-nan fails loudly") {
  const SearchSpace space = SearchSpace::cube(2, -1.0, 1.0);
  const HloaConfig config = small_config(7);

  const Objective always_nan = [](Eigen::Ref<const Vec>) {
    return std::numeric_limits<double>::quiet_NaN();
  };
  CHECK_THROWS_AS(init_population(space, config, always_nan), NumericError);

  // NaN away from the center: those proposals are discarded but counted
  const Objective partial_nan = [](Eigen::Ref<const Vec> x) {
    const double v = sphere(x);
    return v > 1.0 ? std::numeric_limits<double>::quiet_NaN() : v;
  };
  OptimizerState state = init_population(space, config, partial_nan);
  for (int g = 0; g < 5 && state.evaluations_used() < 200; ++g)
    step(state, partial_nan);
  CHECK(state.nan_evaluations() > 0);
  CHECK(state.fitness().minCoeff() <= 1.0);

  OptimizerState poisoned = init_population(space, config, kSphere);
  CHECK_THROWS_AS(step(poisoned, always_nan), NumericError);
}

TEST_CASE("optimize converges on the 2d sphere and beats random search") {
  const SearchSpace space = SearchSpace::cube(2, -5.0, 5.0);
  HloaConfig config;
  config.population = 20;
  config.max_evaluations = 3000;
  config.seed = 2024;

  const OptResult result = optimize(space, kSphere, config);
  CHECK(result.best_fitness < 1e-4);
  CHECK(result.evaluations_used == 3000);

  const double rs_best = oracle::random_search_best(
      space.lower, space.upper, [](const Vec& x) { return sphere(x); }, 3000,
      2024);
  CHECK(result.best_fitness <= rs_best);
}

TEST_CASE("optimize history is monotone and budget-complete") {
  const SearchSpace space = SearchSpace::cube(5, -5.0, 5.0);
  HloaConfig config;
  config.population = 12;
  config.max_evaluations = 600;
  config.seed = 5;

  const OptResult result = optimize(space, kSphere, config);
  REQUIRE(!result.history.empty());
  CHECK(result.history.front().generation == 0);
  CHECK(result.history.back().evaluations_used == 600);
  for (std::size_t i = 1; i < result.history.size(); ++i) {
    CHECK(result.history[i].best_fitness <=
          result.history[i - 1].best_fitness);
    CHECK(result.history[i].evaluations_used >
          result.history[i - 1].evaluations_used);
  }

  const OptResult again = optimize(space, kSphere, config);
  CHECK(again.best_x == result.best_x);
  CHECK(again.best_fitness == result.best_fitness);
  CHECK(again.history.size() == result.history.size());
}

TEST_CASE("budget equal to population returns the best initial candidate") {
  const SearchSpace space = SearchSpace::cube(3, -2.0, 2.0);
  HloaConfig config = small_config(31);
  config.max_evaluations = config.population;

  const OptResult result = optimize(space, kSphere, config);
  CHECK(result.history.size() == 1);

  const OptimizerState init = init_population(space, config, kSphere);
  CHECK(result.best_fitness == init.best_fitness());
  CHECK(result.best_x == init.best_x());

  const Objective flat = [](Eigen::Ref<const Vec>) { return 1.0; };
  HloaConfig flat_config = small_config(1);
  flat_config.max_evaluations = 100;
  const OptResult flat_result = optimize(space, flat, flat_config);
  for (const auto& rec : flat_result.history)
    CHECK(rec.best_fitness == 1.0);
}

TEST_CASE("config validation") {
  HloaConfig config;
  config.population = 2;
  CHECK_THROWS_AS(config.validate(), ArgumentError);
  config.population = 10;
  config.max_evaluations = 5;
  CHECK_THROWS_AS(config.validate(), ArgumentError);
  config.max_evaluations = 100;
  config.p_crypsis = 0.9;
  CHECK_THROWS_AS(config.validate(), ArgumentError);
  config.p_crypsis = 0.4;
  config.restart_fraction = 1.5;
  CHECK_THROWS_AS(config.validate(), ArgumentError);

  SearchSpace bad{Vec::Constant(2, 1.0), Vec::Constant(2, 1.0)};
  CHECK_THROWS_AS(bad.validate(), ArgumentError);
}

TEST_CASE("history csv writes one row per generation") {
  const auto dir = oracle::test_dir("hloa_history");
  const std::vector<GenerationRecord> history = {
      {0, 8, 1.5}, {1, 18, 0.7}, {2, 28, 0.2}};
  write_history_csv(history, (dir / "h.csv").string());
  const std::string text = oracle::slurp(dir / "h.csv");
  CHECK(text.find("generation,evaluations_used,best_fitness\n") == 0);
  CHECK(text.find("2,28,0.2\n") != std::string::npos);
}
