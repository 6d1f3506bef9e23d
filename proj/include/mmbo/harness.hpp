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
#ifndef MMBO_HARNESS_HPP
#define MMBO_HARNESS_HPP

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mmbo/metrics.hpp"
#include "mmbo/objectives.hpp"
#include "mmbo/optimizer.hpp"

namespace mmbo {

/// Everything one experiment needs. Built from a flat `key = value` file; see
/// README for the key list.
struct ExperimentConfig {
  std::string benchmark;  // griewank | shubert | synthetic1d | tabulated
  std::filesystem::path tabulated_path;
  std::vector<Bump> bumps;  // synthetic1d; default_bumps() when empty
  OptimizerConfig optimizer;
  std::filesystem::path output_dir = "out";
  bool emit_plot_data = false;
  std::vector<std::size_t> checkpoints{30, 60, 90};
  double hit_radius = 0.1;
  std::size_t repeats = 1;         // compare: seeds seed .. seed+repeats-1
  bool vanilla_incumbent = true;   // compare: vanilla rows use the best value so far as xi
};

using ConfigEntries = std::vector<std::pair<std::string, std::string>>;

/// Throws ConfigError naming the offending key or line. Relative paths are
/// resolved against base_dir.
ExperimentConfig parse_config(std::istream& in, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

/// Applies one key. Used by the parser, sweeps and command-line overrides.
void set_option(ExperimentConfig& cfg, const std::string& key, const std::string& value);

/// Canonical key/value list; parse_config over it yields the same config.
ConfigEntries config_entries(const ExperimentConfig& cfg);

/// Full validation, including benchmark/bounds consistency. Throws ConfigError.
void validate(const ExperimentConfig& cfg);

BenchmarkSpec make_benchmark(const ExperimentConfig& cfg);

/// trace.csv: `#` config echo and run metadata, then
/// step,kind,x1..xn,value,acquisition,flagged,distance.
void write_trace(const RunTrace& trace, std::ostream& out);
RunTrace parse_trace(std::istream& in);
RunTrace load_trace(const std::filesystem::path& path);

struct RunResult {
  std::string label;
  ExperimentConfig config;
  RunTrace trace;
  double seconds = 0.0;
};

/// Runs one experiment; trace.config_echo holds config_entries(cfg).
RunResult execute(const ExperimentConfig& cfg, std::string label = "run");

/// Writes trace.csv, summary.json and (optionally) plot data into dir.
void write_run_outputs(const RunResult& result, const BenchmarkSpec& spec,
                       const std::filesystem::path& dir);

/// Sweepable parameters: alpha, length_scale, threshold, min_distance.
std::vector<RunResult> run_sweep(const ExperimentConfig& cfg, const std::string& parameter,
                                 const std::vector<double>& values);

/// Variants joint, posterior_only, derivative_only with shared seed and priors.
std::vector<RunResult> run_ablation(const ExperimentConfig& cfg);

/// joint_pi, joint_ei, vanilla_pi, vanilla_ei for each of cfg.repeats seeds.
std::vector<RunResult> run_compare(const ExperimentConfig& cfg);

/// report.csv bodies. Each is a pure function of the traces (and the config
/// echoed inside them), so reports regenerate from trace files alone.
std::string sweep_report(const std::string& parameter, const std::vector<RunResult>& runs);
std::string ablation_report(const std::vector<RunResult>& runs);
std::string compare_report(const std::vector<RunResult>& runs);

/// Rebuilds a RunResult from a trace written by write_trace.
RunResult result_from_trace(const RunTrace& trace, std::string label);

struct CliOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> output_dir;
};

/// Command entry points. Exit codes: 0 success, 1 config error, 2 runtime error.
int cmd_run(const std::filesystem::path& config, const CliOverrides& overrides);
int cmd_sweep(const std::filesystem::path& config, const std::string& parameter,
              const std::vector<double>& values, const CliOverrides& overrides);
int cmd_ablate(const std::filesystem::path& config, const CliOverrides& overrides);
int cmd_compare(const std::filesystem::path& config, const CliOverrides& overrides);

}  // namespace mmbo

#endif  // MMBO_HARNESS_HPP
