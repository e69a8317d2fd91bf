// Acceptance suite: one criterion per entry, one PASS/FAIL line each.
// Returns the number of failed criteria.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "lizard/analysis.hpp"
#include "lizard/cli.hpp"
#include "lizard/dataset.hpp"
#include "lizard/forest.hpp"
#include "lizard/hloa.hpp"
#include "lizard/neural.hpp"
#include "lizard/rng.hpp"
#include "lizard/textio.hpp"
#include "oracles.hpp"

using namespace lizard;

namespace {

struct Failure {
  std::string detail;
};

void require(bool condition, const std::string& detail) {
  if (!condition) throw Failure{detail};
}

double median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2]
                    : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

// --- 1: spearman equals pearson-on-ranks and the no-ties closed form ----

void criterion_spearman_oracle() {
  Rng rng(2001);
  int tied_checked = 0, no_ties_checked = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const Index n = 30;
    Vec x(n), y(n);
    for (Index i = 0; i < n; ++i) {
      // coarse grid on some entries injects ties
      x[i] = (i % 3 == 0) ? static_cast<double>(rng.below(6))
                          : rng.uniform(0.0, 6.0);
      y[i] = (i % 4 == 0) ? static_cast<double>(rng.below(5))
                          : rng.uniform(0.0, 5.0);
    }
    const double expected = oracle::pearson(oracle::rank_by_counting(x),
                                            oracle::rank_by_counting(y));
    const double got = spearman_pair(x, y);
    require(std::abs(got - expected) < 1e-12,
            "pearson-on-ranks mismatch " + format_full(got - expected) +
                " at trial " + std::to_string(trial));
    ++tied_checked;

    Vec u(n), v(n);
    for (Index i = 0; i < n; ++i) {
      u[i] = rng.uniform(0.0, 1.0);
      v[i] = rng.uniform(0.0, 1.0);
    }
    if (oracle::has_ties(u) || oracle::has_ties(v)) continue;
    require(std::abs(spearman_pair(u, v) - oracle::spearman_no_ties(u, v)) <
                1e-12,
            "no-ties closed form mismatch at trial " + std::to_string(trial));
    ++no_ties_checked;
  }
  require(tied_checked == 1000 && no_ties_checked > 900,
          "insufficient coverage");
}

// --- 2: power most positive, cpu most negative, on the generator --------

void criterion_target_ranking() {
  int hits = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Dataset d = synthesize(1000, seed, false);
    const CorrelationReport report = correlation_matrix(d);
    if (report.target_ranking.front().first == "power_consumption" &&
        report.target_ranking.back().first == "cpu_usage")
      ++hits;
  }
  require(hits >= 19, "ranking extremes held in only " +
                          std::to_string(hits) + "/20 seeds");
}

// --- 3: metric identities and the worked example ------------------------

void criterion_metric_identities() {
  Rng rng(33);
  for (int trial = 0; trial < 200; ++trial) {
    const Index n = 2 + static_cast<Index>(rng.below(60));
    Vec y(n), p(n);
    for (Index i = 0; i < n; ++i) {
      y[i] = rng.uniform(0.05, 1.0);
      p[i] = rng.uniform(0.0, 1.0);
    }
    const double m = mse(y, p);
    const double r = rmse(y, p);
    require(std::abs(r * r - m) <= 1e-12 * m, "rmse^2 != mse");
    require(mae(y, p) <= r + 1e-15, "mae > rmse");
    require(std::abs(r2(y, Vec::Constant(n, y.mean()))) <= 1e-12,
            "mean predictor r2 not 0");
  }

  Vec y(3), p(3);
  y << 1, 2, 4;
  p << 1, 3, 3;
  const MetricsReport report = evaluate_all(y, p);
  require(std::abs(report.mse - 2.0 / 3.0) < 1e-5, "worked example mse");
  require(std::abs(report.rmse - 0.81650) < 1e-5, "worked example rmse");
  require(std::abs(report.mae - 2.0 / 3.0) < 1e-5, "worked example mae");
  require(std::abs(report.mape_percent - 25.0) < 1e-5, "worked example mape");
  require(std::abs(report.r2 - 0.571429) < 1e-5, "worked example r2");
}

// --- 4: random forest quality, memorization, mean aggregation -----------

void criterion_random_forest() {
  const Dataset d = synthesize(500, 5, false);
  const auto [train, test] = split(d, 0.2, 41);

  ForestConfig config;
  config.seed = 7;
  const ForestModel forest = fit_forest(train, config);
  const double test_r2 = r2(test.target(), forest.predict(test));
  require(test_r2 > 0.5, "test r2 " + format_full(test_r2) + " <= 0.5");

  ForestConfig single;
  single.n_trees = 1;
  single.bootstrap = false;
  single.min_samples_leaf = 1;
  single.max_depth = -1;
  single.mtry = static_cast<int>(train.n_features());
  const ForestModel memorizer = fit_forest(train, single);
  require(memorizer.predict(train) == train.target(),
          "unrestricted tree failed to memorize training data");

  for (Index i = 0; i < 25; ++i) {
    const Vec x = test.features().row(i).transpose();
    require(forest.predict(x) == forest.predict_per_tree(x).mean(),
            "forest prediction is not the mean of tree predictions");
  }
}

// --- 5: optimizer beats random search and converges on sphere -----------

void criterion_hloa_benchmarks() {
  const SearchSpace space = SearchSpace::cube(5, -5.0, 5.0);
  const auto sphere_obj = [](Eigen::Ref<const Vec> x) { return sphere(x); };
  const auto rastrigin_obj = [](Eigen::Ref<const Vec> x) {
    return rastrigin(x);
  };

  std::vector<double> hloa_sphere, hloa_rastrigin, rs_sphere, rs_rastrigin;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    HloaConfig config;
    config.population = 20;
    config.max_evaluations = 10000;
    config.seed = seed;

    const OptResult on_sphere = optimize(space, sphere_obj, config);
    hloa_sphere.push_back(on_sphere.best_fitness);
    for (std::size_t i = 1; i < on_sphere.history.size(); ++i)
      require(on_sphere.history[i].best_fitness <=
                  on_sphere.history[i - 1].best_fitness,
              "best-fitness history not monotone (sphere, seed " +
                  std::to_string(seed) + ")");
    require(on_sphere.evaluations_used <= config.max_evaluations,
            "budget exceeded");

    const OptResult on_rastrigin = optimize(space, rastrigin_obj, config);
    hloa_rastrigin.push_back(on_rastrigin.best_fitness);
    for (std::size_t i = 1; i < on_rastrigin.history.size(); ++i)
      require(on_rastrigin.history[i].best_fitness <=
                  on_rastrigin.history[i - 1].best_fitness,
              "best-fitness history not monotone (rastrigin, seed " +
                  std::to_string(seed) + ")");

    rs_sphere.push_back(oracle::random_search_best(
        space.lower, space.upper, [](const Vec& x) { return sphere(x); },
        10000, seed));
    rs_rastrigin.push_back(oracle::random_search_best(
        space.lower, space.upper, [](const Vec& x) { return rastrigin(x); },
        10000, seed));
  }

  const double hloa_median = median(hloa_sphere);
  require(hloa_median < 1e-2, "median sphere best " +
                                  format_full(hloa_median) + " >= 1e-2");
  require(hloa_median <= median(rs_sphere),
          "random search beat the optimizer on sphere");
  require(median(hloa_rastrigin) <= median(rs_rastrigin),
          "random search beat the optimizer on rastrigin");
}

// --- 6: end-to-end pipeline beats the mean predictor --------------------

void criterion_end_to_end() {
  int positive = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Dataset full = synthesize(300, seed, false);
    const auto [train, test] = split(full, 0.2, derive_stream(seed, 1));

    NetSpec spec;
    spec.input_dim = static_cast<int>(train.n_features());
    require(spec.param_count() == 213,
            "default spec is not 213 parameters");

    const Scaler scaler = fit_scaler(train);
    const Dataset scaled_train = apply_scaler(scaler, train);
    HloaConfig config;
    config.population = 30;
    config.max_evaluations = 6000;
    config.seed = derive_stream(seed, 2);
    const SearchSpace space = SearchSpace::cube(spec.param_count(), -2.0, 2.0);
    const OptResult result = optimize(
        space,
        [&](Eigen::Ref<const Vec> w) { return fitness(spec, w, scaled_train); },
        config);

    const NetParams params = unflatten(spec, result.best_x);
    const Vec predicted =
        predict_batch(spec, params, scaler.transform(test.features()));
    if (r2(test.target(), predicted) > 0.0) ++positive;
  }
  require(positive >= 18, "test r2 > 0 in only " + std::to_string(positive) +
                              "/20 seeds");

  // the CLI comparison surface: two models, Table-layout report
  const auto dir = oracle::test_dir("acceptance_e2e");
  std::ostringstream out, err;
  auto cli = [&](const std::vector<std::string>& args) {
    return run_cli(args, out, err);
  };
  const std::string data = (dir / "d.csv").string();
  require(cli({"synth", "--rows", "300", "--seed", "1", "--out", data}) == 0,
          "synth failed");
  oracle::spit(dir / "rf.conf", "model = rf\n");
  require(cli({"train", "--data", data, "--config",
               (dir / "rf.conf").string(), "--seed", "1", "--out",
               (dir / "rf.model").string(), "--dump-test",
               (dir / "test.csv").string()}) == 0,
          "rf training failed");
  oracle::spit(dir / "net.conf",
               "model = hloa\nhloa_population = 10\nhloa_budget = 500\n");
  require(cli({"train", "--data", data, "--config",
               (dir / "net.conf").string(), "--seed", "1", "--out",
               (dir / "net.model").string()}) == 0,
          "hloa training failed");
  require(cli({"evaluate", "--model", (dir / "net.model").string(), "--data",
               (dir / "test.csv").string(), "--out",
               (dir / "cmp.csv").string(), "--compare",
               (dir / "rf.model").string()}) == 0,
          "evaluate --compare failed");

  std::istringstream report(oracle::slurp(dir / "cmp.csv"));
  std::string line;
  std::getline(report, line);
  require(line == "model,mse,rmse,mae,mape_percent,r2,n_used_for_mape",
          "missing report header");
  int rows = 0;
  for (const char* name : {"hloa_cnn_bigru", "random_forest"}) {
    require(static_cast<bool>(std::getline(report, line)),
            "report row missing");
    const auto cells = split_on(line, ',');
    require(cells.size() == 7, "report row has wrong arity");
    require(cells[0] == name, "unexpected model name " + cells[0]);
    for (int c = 1; c <= 5; ++c)
      require(parse_double(cells[static_cast<std::size_t>(c)]).has_value(),
              "non-numeric metric cell");
    ++rows;
  }
  require(rows == 2, "expected a two-model report");
}

// --- 7: byte-identical CLI reruns ----------------------------------------

void criterion_cli_determinism() {
  std::ostringstream out, err;
  auto cli = [&](const std::vector<std::string>& args) {
    return run_cli(args, out, err);
  };

  auto run_everything = [&](const std::filesystem::path& dir) {
    const std::string data = (dir / "d.csv").string();
    require(cli({"synth", "--rows", "150", "--seed", "11", "--out", data}) ==
                0,
            "synth failed");
    require(cli({"analyze", "--data", data, "--out",
                 (dir / "report.txt").string(), "--svg",
                 (dir / "corr.svg").string()}) == 0,
            "analyze failed");
    require(cli({"train", "--model", "rf", "--data", data, "--seed", "3",
                 "--out", (dir / "rf.model").string(), "--dump-test",
                 (dir / "test.csv").string()}) == 0,
            "rf train failed");
    oracle::spit(dir / "net.conf",
                 "model = hloa\nhloa_population = 8\nhloa_budget = 240\n");
    require(cli({"train", "--data", data, "--config",
                 (dir / "net.conf").string(), "--seed", "3", "--out",
                 (dir / "net.model").string()}) == 0,
            "hloa train failed");
    require(cli({"evaluate", "--model", (dir / "net.model").string(),
                 "--data", (dir / "test.csv").string(), "--out",
                 (dir / "metrics.csv").string(), "--compare",
                 (dir / "rf.model").string()}) == 0,
            "evaluate failed");
    require(cli({"predict", "--model", (dir / "rf.model").string(), "--data",
                 (dir / "test.csv").string(), "--out",
                 (dir / "pred.csv").string(), "--svg",
                 (dir / "pred.svg").string()}) == 0,
            "predict failed");
  };

  const std::vector<const char*> outputs = {
      "d.csv",     "report.txt",         "corr.svg",
      "rf.model",  "rf.model.manifest",  "test.csv",
      "net.model", "net.model.manifest", "net.model.history.csv",
      "metrics.csv", "pred.csv",         "pred.svg"};

  const auto dir = oracle::test_dir("acceptance_det");
  run_everything(dir);
  std::vector<std::string> first;
  for (const char* name : outputs) {
    first.push_back(oracle::slurp(dir / name));
    require(!first.back().empty(), std::string(name) + " is empty");
  }
  run_everything(dir);  // same flags, same paths
  for (std::size_t i = 0; i < outputs.size(); ++i)
    require(oracle::slurp(dir / outputs[i]) == first[i],
            std::string(outputs[i]) + " differs between identical runs");
}

// --- 8: neural invariants -------------------------------------------------

void criterion_neural_invariants() {
  Rng rng(88);
  for (const NetSpec spec :
       {NetSpec{}, NetSpec{.input_dim = 5, .filters = 2, .kernel = 4,
                           .hidden = 3},
        NetSpec{.input_dim = 6, .filters = 4, .kernel = 3, .hidden = 2,
                .padding = Padding::kValid}}) {
    for (int trial = 0; trial < 20; ++trial) {
      Vec flat(spec.param_count());
      for (Index i = 0; i < flat.size(); ++i) flat[i] = rng.uniform(-3, 3);
      require(flatten(spec, unflatten(spec, flat)) == flat,
              "flatten/unflatten roundtrip failed");
    }
  }

  NetSpec spec;
  const Vec zero = Vec::Zero(spec.param_count());
  Rng probe_rng(99);
  for (int trial = 0; trial < 50; ++trial) {
    Vec x(spec.input_dim);
    for (Index i = 0; i < x.size(); ++i) x[i] = probe_rng.uniform(0.0, 1.0);
    require(predict(spec, zero, x) == 0.5,
            "zero-parameter model does not predict exactly 0.5");
  }

  for (int trial = 0; trial < 30; ++trial) {
    Vec flat(spec.param_count());
    for (Index i = 0; i < flat.size(); ++i) flat[i] = probe_rng.uniform(-2, 2);
    const NetParams params = unflatten(spec, flat);
    Mat seq(spec.seq_len(), spec.filters);
    for (Index t = 0; t < seq.rows(); ++t)
      for (Index c = 0; c < seq.cols(); ++c)
        seq(t, c) = probe_rng.uniform(-1.0, 1.0);

    const Vec out = bigru_forward(spec, params.fwd, params.bwd, seq);
    Vec h_bwd = Vec::Zero(spec.hidden);
    for (Index t = seq.rows() - 1; t >= 0; --t)
      h_bwd = gru_cell_step(params.bwd, seq.row(t).transpose(), h_bwd);
    require((out.tail(spec.hidden) - h_bwd).cwiseAbs().maxCoeff() <= 1e-12,
            "bigru direction symmetry violated");
  }
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<void()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "spearman-oracle-equivalence", criterion_spearman_oracle},
      {2, "target-ranking-extremes", criterion_target_ranking},
      {3, "metric-identities", criterion_metric_identities},
      {4, "random-forest-quality", criterion_random_forest},
      {5, "hloa-benchmark-dominance", criterion_hloa_benchmarks},
      {6, "end-to-end-pipeline", criterion_end_to_end},
      {7, "cli-determinism", criterion_cli_determinism},
      {8, "neural-invariants", criterion_neural_invariants},
  };

  int failed = 0;
  for (const Criterion& criterion : criteria) {
    const auto start = std::chrono::steady_clock::now();
    std::string detail;
    try {
      criterion.run();
    } catch (const Failure& f) {
      detail = f.detail;
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    if (detail.empty()) {
      std::printf("PASS  %d %-28s (%.2f s)\n", criterion.id, criterion.name,
                  seconds);
    } else {
      ++failed;
      std::printf("FAIL  %d %-28s (%.2f s): %s\n", criterion.id,
                  criterion.name, seconds, detail.c_str());
    }
  }
  std::printf("%zu criteria, %d failed\n", criteria.size(), failed);
  return failed;
}
