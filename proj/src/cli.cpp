#include "lizard/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include "lizard/analysis.hpp"
#include "lizard/dataset.hpp"
#include "lizard/error.hpp"
#include "lizard/neural.hpp"
#include "lizard/rng.hpp"
#include "lizard/svg.hpp"
#include "lizard/textio.hpp"

namespace lizard {

namespace {

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ArgumentError("cannot open file for writing: " + path);
  out << content;
  if (!out) throw DataError("write failed: " + path);
}

std::string first_line_of(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArgumentError("cannot open file: " + path);
  std::string line;
  std::getline(in, line);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

// Either model kind behind one predict surface; dispatch on the file tag.
struct AnyModel {
  std::optional<ForestModel> forest;
  std::optional<NeuralModel> neural;
  std::string display_name;
};

AnyModel load_any_model(const std::string& path) {
  const std::string tag = first_line_of(path);
  AnyModel model;
  if (tag.rfind("lizard-forest", 0) == 0) {
    model.forest = load_forest(path);
    model.display_name = "random_forest";
  } else if (tag.rfind("lizard-hloa-cnn-bigru", 0) == 0) {
    model.neural = load_neural(path);
    model.display_name = "hloa_cnn_bigru";
  } else {
    throw DataError(path + ": not a lizard model file");
  }
  return model;
}

Vec model_predict(const AnyModel& model, const Dataset& d) {
  if (model.forest) return model.forest->predict(d);
  const NeuralModel& net = *model.neural;
  if (net.scaler.feature_names() != d.feature_names())
    throw ArgumentError(
        "model was trained on different feature columns than the data");
  const Mat scaled = net.scaler.transform(d.features());
  return predict_batch(net.spec, unflatten(net.spec, net.params), scaled);
}

}  // namespace

RunConfig parse_config(const std::string& path, RunConfig base) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArgumentError("cannot open config file: " + path);

  RunConfig config = base;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto stripped = trim(line);
    if (stripped.empty() || stripped.front() == '#') continue;
    const auto eq = stripped.find('=');
    if (eq == std::string_view::npos)
      throw DataError(path + ":" + std::to_string(line_no) +
                      ": expected 'key = value'");
    const std::string key{trim(stripped.substr(0, eq))};
    const std::string value{trim(stripped.substr(eq + 1))};

    auto as_int = [&]() {
      const auto v = parse_int(value);
      if (!v)
        throw DataError(path + ":" + std::to_string(line_no) +
                        ": bad integer for '" + key + "'");
      return *v;
    };
    auto as_double = [&]() {
      const auto v = parse_double(value);
      if (!v)
        throw DataError(path + ":" + std::to_string(line_no) +
                        ": bad number for '" + key + "'");
      return *v;
    };
    auto as_seed = [&]() {
      const auto v = parse_uint(value);
      if (!v)
        throw DataError(path + ":" + std::to_string(line_no) +
                        ": bad seed for '" + key + "'");
      return static_cast<std::uint64_t>(*v);
    };

    if (key == "model")
      config.model = value;
    else if (key == "test_fraction")
      config.test_fraction = as_double();
    else if (key == "split_seed")
      config.split_seed = as_seed();
    else if (key == "rf_trees")
      config.forest.n_trees = static_cast<int>(as_int());
    else if (key == "rf_max_depth")
      config.forest.max_depth = static_cast<int>(as_int());
    else if (key == "rf_min_samples_leaf")
      config.forest.min_samples_leaf = static_cast<int>(as_int());
    else if (key == "rf_mtry")
      config.forest.mtry = static_cast<int>(as_int());
    else if (key == "rf_bootstrap")
      config.forest.bootstrap = as_int() != 0;
    else if (key == "rf_seed")
      config.forest.seed = as_seed();
    else if (key == "net_filters")
      config.net_filters = static_cast<int>(as_int());
    else if (key == "net_kernel")
      config.net_kernel = static_cast<int>(as_int());
    else if (key == "net_hidden")
      config.net_hidden = static_cast<int>(as_int());
    else if (key == "net_padding")
      config.net_padding = value;
    else if (key == "weight_bound")
      config.weight_bound = as_double();
    else if (key == "hloa_population")
      config.hloa.population = static_cast<int>(as_int());
    else if (key == "hloa_budget")
      config.hloa.max_evaluations = as_int();
    else if (key == "hloa_crypsis")
      config.hloa.p_crypsis = as_double();
    else if (key == "hloa_blood_squirt")
      config.hloa.p_blood_squirt = as_double();
    else if (key == "hloa_escape")
      config.hloa.p_escape = as_double();
    else if (key == "hloa_restart_fraction")
      config.hloa.restart_fraction = as_double();
    else if (key == "hloa_sigma_start")
      config.hloa.sigma_start = as_double();
    else if (key == "hloa_sigma_end")
      config.hloa.sigma_end = as_double();
    else if (key == "hloa_escape_w_start")
      config.hloa.escape_w_start = as_double();
    else if (key == "hloa_escape_w_end")
      config.hloa.escape_w_end = as_double();
    else if (key == "hloa_seed")
      config.hloa.seed = as_seed();
    else
      throw DataError(path + ":" + std::to_string(line_no) +
                      ": unknown config key '" + key + "'");
  }
  return config;
}

std::string config_echo(const RunConfig& c) {
  std::ostringstream out;
  out << "model = " << c.model << '\n';
  out << "test_fraction = " << format_full(c.test_fraction) << '\n';
  out << "split_seed = " << c.split_seed << '\n';
  out << "rf_trees = " << c.forest.n_trees << '\n';
  out << "rf_max_depth = " << c.forest.max_depth << '\n';
  out << "rf_min_samples_leaf = " << c.forest.min_samples_leaf << '\n';
  out << "rf_mtry = " << c.forest.mtry << '\n';
  out << "rf_bootstrap = " << (c.forest.bootstrap ? 1 : 0) << '\n';
  out << "rf_seed = " << c.forest.seed << '\n';
  out << "net_filters = " << c.net_filters << '\n';
  out << "net_kernel = " << c.net_kernel << '\n';
  out << "net_hidden = " << c.net_hidden << '\n';
  out << "net_padding = " << c.net_padding << '\n';
  out << "weight_bound = " << format_full(c.weight_bound) << '\n';
  out << "hloa_population = " << c.hloa.population << '\n';
  out << "hloa_budget = " << c.hloa.max_evaluations << '\n';
  out << "hloa_crypsis = " << format_full(c.hloa.p_crypsis) << '\n';
  out << "hloa_blood_squirt = " << format_full(c.hloa.p_blood_squirt) << '\n';
  out << "hloa_escape = " << format_full(c.hloa.p_escape) << '\n';
  out << "hloa_restart_fraction = " << format_full(c.hloa.restart_fraction)
      << '\n';
  out << "hloa_sigma_start = " << format_full(c.hloa.sigma_start) << '\n';
  out << "hloa_sigma_end = " << format_full(c.hloa.sigma_end) << '\n';
  out << "hloa_escape_w_start = " << format_full(c.hloa.escape_w_start)
      << '\n';
  out << "hloa_escape_w_end = " << format_full(c.hloa.escape_w_end) << '\n';
  out << "hloa_seed = " << c.hloa.seed << '\n';
  return out.str();
}

namespace {

struct SynthArgs {
  std::int64_t rows = 0;
  std::uint64_t seed = 1;
  bool instructions = false;
  std::string out_path;
};

int cmd_synth(const SynthArgs& args, std::ostream& err) {
  const Dataset d = synthesize(args.rows, args.seed, args.instructions);
  write_csv(d, args.out_path);
  err << "wrote " << args.out_path << " (" << d.rows() << " rows)\n";
  return 0;
}

struct AnalyzeArgs {
  std::string data_path;
  std::string out_path;
  std::string svg_path;
};

int cmd_analyze(const AnalyzeArgs& args, std::ostream& err) {
  const Dataset d = load_csv(args.data_path);
  const CorrelationReport report = correlation_matrix(d);
  write_text_file(args.out_path, to_text(report));
  if (!args.svg_path.empty())
    write_text_file(args.svg_path, svg::correlation_charts(report));
  err << "wrote " << args.out_path << '\n';
  return 0;
}

struct TrainArgs {
  std::string model;
  std::string data_path;
  std::string config_path;
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::string out_path;
  std::string dump_train, dump_test;
};

int cmd_train(const TrainArgs& args, std::ostream& err) {
  RunConfig config;
  if (!args.config_path.empty()) config = parse_config(args.config_path);
  if (!args.model.empty()) config.model = args.model;
  if (args.seed_given) {
    config.split_seed = derive_stream(args.seed, 1);
    config.forest.seed = derive_stream(args.seed, 2);
    config.hloa.seed = derive_stream(args.seed, 3);
  }
  if (config.model != "rf" && config.model != "hloa")
    throw ArgumentError("train: model must be 'rf' or 'hloa', got '" +
                        config.model + "'");

  const Dataset full = load_csv(args.data_path);
  auto [train_set, test_set] = split(full, config.test_fraction,
                                     config.split_seed);
  if (!args.dump_train.empty()) write_csv(train_set, args.dump_train);
  if (!args.dump_test.empty()) write_csv(test_set, args.dump_test);

  std::ostringstream manifest;
  manifest << "# lizard train manifest\n";
  manifest << "# data = " << args.data_path << '\n';
  manifest << "# train_rows = " << train_set.rows() << '\n';
  manifest << "# test_rows = " << test_set.rows() << '\n';

  double training_fitness = 0.0;
  if (config.model == "rf") {
    const ForestModel model = fit_forest(train_set, config.forest);
    save_forest(model, args.out_path);
    config.forest.mtry = model.config().mtry;  // echo the resolved value
    training_fitness =
        mse(train_set.target(), model.predict(train_set));
  } else {
    NetSpec spec;
    spec.input_dim = static_cast<int>(train_set.n_features());
    spec.filters = config.net_filters;
    spec.kernel = config.net_kernel;
    spec.hidden = config.net_hidden;
    if (config.net_padding == "same")
      spec.padding = Padding::kSame;
    else if (config.net_padding == "valid")
      spec.padding = Padding::kValid;
    else
      throw ArgumentError("train: net_padding must be 'same' or 'valid'");
    spec.validate();
    if (!(config.weight_bound > 0.0))
      throw ArgumentError("train: weight_bound must be positive");

    const Scaler scaler = fit_scaler(train_set);
    const Dataset scaled = apply_scaler(scaler, train_set);
    const SearchSpace space = SearchSpace::cube(
        spec.param_count(), -config.weight_bound, config.weight_bound);
    const Objective objective = [&](Eigen::Ref<const Vec> w) {
      return fitness(spec, w, scaled);
    };
    const OptResult result = optimize(space, objective, config.hloa);

    save_neural(NeuralModel{spec, scaler, result.best_x}, args.out_path);
    const std::string history_path = args.out_path + ".history.csv";
    write_history_csv(result.history, history_path);
    manifest << "# history = " << history_path << '\n';
    training_fitness = result.best_fitness;
  }

  manifest << "# final_training_fitness = " << format_full(training_fitness)
           << '\n';
  manifest << config_echo(config);
  write_text_file(args.out_path + ".manifest", manifest.str());
  err << "wrote " << args.out_path << " (training mse "
      << format_fixed(training_fitness, 6) << ")\n";
  return 0;
}

struct EvaluateArgs {
  std::string model_path;
  std::string data_path;
  std::string out_path;
  std::string compare_path;
};

// Table-layout comparison: one row per model, five metrics each.
int cmd_evaluate(const EvaluateArgs& args, std::ostream& err) {
  const Dataset d = load_csv(args.data_path);
  std::vector<std::string> model_paths = {args.model_path};
  if (!args.compare_path.empty()) model_paths.push_back(args.compare_path);

  std::ostringstream report;
  report << "model,mse,rmse,mae,mape_percent,r2,n_used_for_mape\n";
  for (const auto& path : model_paths) {
    const AnyModel model = load_any_model(path);
    const Vec predicted = model_predict(model, d);
    const MetricsReport metrics = evaluate_all(d.target(), predicted);
    report << model.display_name << ',' << format_fixed(metrics.mse, 6) << ','
           << format_fixed(metrics.rmse, 6) << ','
           << format_fixed(metrics.mae, 6) << ','
           << format_fixed(metrics.mape_percent, 6) << ','
           << format_fixed(metrics.r2, 6) << ',' << metrics.n_used_for_mape
           << '\n';
  }
  write_text_file(args.out_path, report.str());
  err << "wrote " << args.out_path << '\n';
  return 0;
}

struct PredictArgs {
  std::string model_path;
  std::string data_path;
  std::string out_path;
  std::string svg_path;
};

int cmd_predict(const PredictArgs& args, std::ostream& err) {
  const Dataset d = load_csv(args.data_path);
  const AnyModel model = load_any_model(args.model_path);
  const Vec predicted = model_predict(model, d);

  std::ostringstream csv;
  csv << "index,actual,predicted\n";
  for (Index i = 0; i < d.rows(); ++i)
    csv << i << ',' << format_full(d.target()[i]) << ','
        << format_full(predicted[i]) << '\n';
  write_text_file(args.out_path, csv.str());
  if (!args.svg_path.empty())
    write_text_file(args.svg_path,
                    svg::prediction_lines(d.target(), predicted));
  err << "wrote " << args.out_path << " (" << d.rows() << " rows)\n";
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"telemetry energy-efficiency regression toolkit"};
  app.require_subcommand(1);

  SynthArgs synth_args;
  auto* synth = app.add_subcommand("synth",
                                   "generate a synthetic telemetry CSV");
  synth->add_option("--rows", synth_args.rows, "number of samples")
      ->required();
  synth->add_option("--seed", synth_args.seed, "generator seed");
  synth->add_flag("--instructions", synth_args.instructions,
                  "include the instructions_executed column");
  synth->add_option("--out", synth_args.out_path, "output CSV path")
      ->required();

  AnalyzeArgs analyze_args;
  auto* analyze = app.add_subcommand(
      "analyze", "spearman correlation matrix and target ranking");
  analyze->add_option("--data", analyze_args.data_path, "input CSV")
      ->required();
  analyze->add_option("--out", analyze_args.out_path, "report path")
      ->required();
  analyze->add_option("--svg", analyze_args.svg_path,
                      "also write heatmap + ranking charts");

  TrainArgs train_args;
  auto* train = app.add_subcommand("train", "split, fit, and save a model");
  train->add_option("--model", train_args.model, "rf | hloa");
  train->add_option("--data", train_args.data_path, "input CSV")->required();
  train->add_option("--config", train_args.config_path,
                    "config file (a train manifest also works)");
  auto* seed_opt =
      train->add_option("--seed", train_args.seed,
                        "master seed; derives split and model seeds");
  train->add_option("--out", train_args.out_path, "model output path")
      ->required();
  train->add_option("--dump-train", train_args.dump_train,
                    "write the training split as CSV");
  train->add_option("--dump-test", train_args.dump_test,
                    "write the held-out split as CSV");

  EvaluateArgs evaluate_args;
  auto* evaluate = app.add_subcommand(
      "evaluate", "metrics report for a model on a dataset");
  evaluate->add_option("--model", evaluate_args.model_path, "model file")
      ->required();
  evaluate->add_option("--data", evaluate_args.data_path, "input CSV")
      ->required();
  evaluate->add_option("--out", evaluate_args.out_path, "report path")
      ->required();
  evaluate->add_option("--compare", evaluate_args.compare_path,
                       "second model for a comparison row");

  PredictArgs predict_args;
  auto* predict = app.add_subcommand(
      "predict", "per-sample actual vs predicted values");
  predict->add_option("--model", predict_args.model_path, "model file")
      ->required();
  predict->add_option("--data", predict_args.data_path, "input CSV")
      ->required();
  predict->add_option("--out", predict_args.out_path, "output CSV")
      ->required();
  predict->add_option("--svg", predict_args.svg_path,
                      "also write a line chart");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    train_args.seed_given = seed_opt->count() > 0;
    if (synth->parsed()) return cmd_synth(synth_args, err);
    if (analyze->parsed()) return cmd_analyze(analyze_args, err);
    if (train->parsed()) return cmd_train(train_args, err);
    if (evaluate->parsed()) return cmd_evaluate(evaluate_args, err);
    if (predict->parsed()) return cmd_predict(predict_args, err);
  } catch (const ArgumentError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return 3;
  } catch (const NumericError& e) {
    err << "error: " << e.what() << '\n';
    return 4;
  }
  return 2;
}

}  // namespace lizard
