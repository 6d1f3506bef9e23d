// Copyright 2026 The mmbo Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// =============================================================================
// Command-line front end: mmbo run|sweep|ablate|compare <config>.

#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mmbo/harness.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Multimodal Bayesian optimization experiments"};
  app.require_subcommand(1);

  std::string config;
  std::string param;
  std::vector<double> values;
  std::uint64_t seed = 0;
  std::string out;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("config", config, "experiment config file")->required();
    sub->add_option("--seed", seed, "override the config seed");
    sub->add_option("--out", out, "override the output directory");
  };
  CLI::App* run = app.add_subcommand("run", "single optimization run");
  CLI::App* sweep = app.add_subcommand("sweep", "one run per parameter value");
  CLI::App* ablate = app.add_subcommand("ablate", "joint vs posterior-only vs derivative-only");
  CLI::App* compare = app.add_subcommand("compare", "joint and vanilla PI/EI side by side");
  for (CLI::App* sub : {run, sweep, ablate, compare}) add_common(sub);
  sweep->add_option("--param", param, "alpha, length_scale, threshold or min_distance")->required();
  sweep->add_option("--values", values, "comma-separated values")->required()->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  mmbo::CliOverrides overrides;
  for (CLI::App* sub : {run, sweep, ablate, compare}) {
    if (sub->parsed()) {
      if (sub->count("--seed")) overrides.seed = seed;
      if (sub->count("--out")) overrides.output_dir = out;
    }
  }
  if (run->parsed()) return mmbo::cmd_run(config, overrides);
  if (sweep->parsed()) return mmbo::cmd_sweep(config, param, values, overrides);
  if (ablate->parsed()) return mmbo::cmd_ablate(config, overrides);
  return mmbo::cmd_compare(config, overrides);
}
