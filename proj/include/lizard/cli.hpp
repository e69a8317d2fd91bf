#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "lizard/forest.hpp"
#include "lizard/hloa.hpp"

namespace lizard {

// Every run parameter with its default materialized; what the train
// manifest echoes and what a --config file overrides. All randomness in a
// run flows from the seeds recorded here.
struct RunConfig {
  std::string model = "rf";  // rf | hloa
  double test_fraction = 0.2;
  std::uint64_t split_seed = 1;

  ForestConfig forest;

  int net_filters = 3;
  int net_kernel = 3;
  int net_hidden = 4;
  std::string net_padding = "same";
  // Box bounds for the flattened weight vector searched by the optimizer.
  double weight_bound = 2.0;

  HloaConfig hloa = {.population = 30, .max_evaluations = 6000};
};

// key = value lines, '#' comments; unknown keys are data errors. A train
// manifest parses as a config file, so a run can be repeated from it.
RunConfig parse_config(const std::string& path, RunConfig base = {});
std::string config_echo(const RunConfig& config);

// Exit codes: 0 success, 2 usage/argument error, 3 data error,
// 4 numerical failure. Messages go to err; out stays quiet except for
// --help text.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

}  // namespace lizard
