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
// Acceptance run over the bundled configs. Prints one PASS/FAIL line per
// criterion and exits non-zero if any criterion fails.
//
// usage: mmbo_acceptance <source dir> <unit test binary> [output dir]

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "mmbo/harness.hpp"

using namespace mmbo;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void verdict(int id, bool ok, const std::string& what, const std::string& detail) {
  std::cout << "criterion " << id << ": " << (ok ? "PASS" : "FAIL") << " | " << what << " | " << detail
            << std::endl;
  if (!ok) ++failures;
}

std::string fmt(double v, int prec = 4) {
  std::ostringstream s;
  s.precision(prec);
  s << v;
  return s.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void save(const RunResult& r, const fs::path& dir) {
  write_run_outputs(r, make_benchmark(r.config), dir);
}

std::string list(const std::vector<std::size_t>& v) {
  std::string s = "{";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s + "}";
}

// Located maxima: distinct ground truths with a flagged step within radius.
void flagged_optima(int id, const fs::path& config, const fs::path& out, std::size_t need, double radius,
                    double time_limit, const std::string& what) {
  const ExperimentConfig cfg = load_config(config);
  const RunResult r = execute(cfg);
  save(r, out);
  const BenchmarkSpec spec = make_benchmark(cfg);
  const auto found = flagged_truths(r.trace, spec, radius);
  const bool ok = found.size() >= need && r.seconds < time_limit;
  verdict(id, ok, what,
          "flagged steps " + std::to_string(r.trace.flagged_steps().size()) + ", maxima within " + fmt(radius) +
              ": " + std::to_string(found.size()) + " of " + std::to_string(spec.ground_truth.size()) +
              " (need " + std::to_string(need) + "), " + fmt(r.seconds, 3) + " s (limit " + fmt(time_limit) +
              " s)");
}

void griewank3d(const fs::path& config, const fs::path& out) {
  const ExperimentConfig cfg = load_config(config);
  const RunResult r = execute(cfg);
  save(r, out);
  const BenchmarkSpec spec = make_benchmark(cfg);
  const auto found = flagged_truths(r.trace, spec, 0.25);
  // Closest flagged point per located maximum, as in a table of found optima.
  std::string rows;
  bool values_ok = true;
  for (std::size_t t : found) {
    const StepRecord* best = nullptr;
    for (const StepRecord* s : r.trace.flagged_steps()) {
      const double d = (s->point - spec.ground_truth[t].location).norm();
      if (d <= 0.25 && (!best || d < (best->point - spec.ground_truth[t].location).norm())) best = s;
    }
    const double d = (best->point - spec.ground_truth[t].location).norm();
    rows += " step " + std::to_string(best->step) + " f=" + fmt(best->value) + " d=" + fmt(d, 3) + ";";
  }
  for (const StepRecord* s : r.trace.flagged_steps()) {
    if (nearest_truth_distance(spec, s->point) <= 0.25 && s->value < 1.98) values_ok = false;
  }
  const bool ok = found.size() >= 3 && values_ok && r.seconds < 600.0;
  verdict(3, ok, "3D Griewank: >= 3 of 4 maxima within 0.25, flagged values >= 1.98, < 10 min",
          "located " + std::to_string(found.size()) + " of " + std::to_string(spec.ground_truth.size()) + ":" +
              rows + " flagged values ok: " + (values_ok ? "yes" : "no") + ", " + fmt(r.seconds, 4) + " s");
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

void compare(const fs::path& config, const fs::path& out) {
  const ExperimentConfig cfg = load_config(config);
  const auto runs = run_compare(cfg);
  for (const auto& r : runs) save(r, out / r.label);
  std::ofstream(out / "report.csv") << compare_report(runs);

  const BenchmarkSpec spec = make_benchmark(cfg);
  std::vector<std::size_t> order(spec.ground_truth.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](auto a, auto b) { return spec.ground_truth[a].value > spec.ground_truth[b].value; });
  const std::size_t third = order.at(2);

  std::map<std::string, std::vector<double>> ad90, hit3;
  for (const auto& r : runs) {
    const std::string m(to_string(r.config.optimizer.acquisition.family));
    ad90[m].push_back(average_distance(r.trace, spec, 90));
    const auto h = first_hit_steps(r.trace, spec, cfg.hit_radius)[third];
    hit3[m].push_back(h ? static_cast<double>(*h) : std::numeric_limits<double>::infinity());
  }
  const double jpi = median(ad90["joint_pi"]), jei = median(ad90["joint_ei"]);
  const double vpi = median(ad90["vanilla_pi"]), vei = median(ad90["vanilla_ei"]);
  const double hjpi = median(hit3["joint_pi"]), hjei = median(hit3["joint_ei"]);
  const double hvpi = median(hit3["vanilla_pi"]), hvei = median(hit3["vanilla_ei"]);
  const bool ok = jei < vei && jpi < vpi && hjei < hvei && hjpi < hvpi;
  verdict(4, ok, "synthetic 1D, 10 seeds: median distance@90 and 3rd-max first hit, joint < vanilla",
          "distance@90 EI " + fmt(jei) + " vs " + fmt(vei) + ", PI " + fmt(jpi) + " vs " + fmt(vpi) +
              "; 3rd-max hit EI " + fmt(hjei) + " vs " + fmt(hvei) + ", PI " + fmt(hjpi) + " vs " + fmt(hvpi));
}

struct AblationOutcome {
  bool posterior_misses = false;
  bool derivative_off_target = false;
  bool joint_on_target = false;
  std::string detail;
};

AblationOutcome ablation_outcome(const ExperimentConfig& cfg, const std::vector<RunResult>& runs) {
  const BenchmarkSpec spec = make_benchmark(cfg);
  const double radius = 0.1;
  const auto joint = flagged_truths(runs[0].trace, spec, radius);
  const auto post = flagged_truths(runs[1].trace, spec, radius);
  AblationOutcome o;
  for (auto t : joint) {
    if (std::find(post.begin(), post.end(), t) == post.end()) o.posterior_misses = true;
  }
  std::size_t off_deriv = 0, off_joint = 0;
  for (const StepRecord* s : runs[2].trace.flagged_steps()) off_deriv += nearest_truth_distance(spec, s->point) > radius;
  for (const StepRecord* s : runs[0].trace.flagged_steps()) off_joint += nearest_truth_distance(spec, s->point) > radius;
  o.derivative_off_target = off_deriv >= 1;
  o.joint_on_target = off_joint == 0;
  o.detail = "joint maxima " + list(joint) + " (" + std::to_string(runs[0].trace.flagged_steps().size()) +
             " flags, " + std::to_string(off_joint) + " off target), posterior-only maxima " + list(post) +
             ", derivative-only off-target flags " + std::to_string(off_deriv);
  return o;
}

void ablation(const fs::path& config, const fs::path& out) {
  const ExperimentConfig cfg = load_config(config);
  const auto runs = run_ablation(cfg);
  for (const auto& r : runs) save(r, out / r.label);
  std::ofstream(out / "report.csv") << ablation_report(runs);
  const AblationOutcome o = ablation_outcome(cfg, runs);
  const bool ok = o.posterior_misses && o.derivative_off_target && o.joint_on_target;
  verdict(5, ok, "ablation on the synthetic benchmark (bundled seed)", o.detail);

  // Not part of the verdict: how often each clause holds across seeds.
  int a = 0, b = 0, c = 0, all = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    ExperimentConfig s = cfg;
    s.optimizer.seed = seed;
    const AblationOutcome os = ablation_outcome(s, run_ablation(s));
    a += os.posterior_misses;
    b += os.derivative_off_target;
    c += os.joint_on_target;
    all += os.posterior_misses && os.derivative_off_target && os.joint_on_target;
  }
  std::cout << "  info: seeds 0-9: posterior-only misses a joint maximum " << a << "/10, derivative-only off target "
            << b << "/10, joint on target " << c << "/10, all three " << all << "/10" << std::endl;
}

void property_suite(const fs::path& unit_binary) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::string cmd = "\"" + unit_binary.string() + "\" --minimal > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  const double secs = seconds_since(t0);
  verdict(6, status == 0 && secs < 120.0, "property and unit suite",
          "exit status " + std::to_string(status) + ", " + fmt(secs, 3) + " s (limit 120 s)");
}

void sweeps(const fs::path& config, const fs::path& out) {
  const ExperimentConfig cfg = load_config(config);
  bool ok = true;
  std::string detail;
  auto sweep = [&](const std::string& param, const std::vector<double>& values) {
    const auto runs = run_sweep(cfg, param, values);
    for (const auto& r : runs) save(r, out / param / r.label);
    const std::string report = sweep_report(param, runs);
    std::ofstream(out / param / "report.csv") << report;
    const auto rows = std::count(report.begin(), report.end(), '\n') - 4;  // comments + header
    if (rows != static_cast<long>(values.size())) ok = false;
    detail += param + ": " + std::to_string(runs.size()) + " runs";
    return runs;
  };
  for (const auto& r : sweep("min_distance", {0.05, 0.8})) {
    double best = std::numeric_limits<double>::infinity();
    const auto& st = r.trace.steps;
    for (std::size_t i = 0; i < st.size(); ++i) {
      for (std::size_t j = 0; j < i; ++j) best = std::min(best, (st[i].point - st[j].point).norm());
    }
    const bool d_ok = best >= r.config.optimizer.min_distance;
    ok = ok && d_ok;
    detail += " (" + r.label + " min pairwise " + fmt(best) + ")";
  }
  detail += "; ";
  sweep("alpha", {10, 30});
  detail += "; ";
  sweep("threshold", {0, 40, 80});
  detail += "; ";
  sweep("length_scale", {0.1, 0.05});
  verdict(7, ok, "sensitivity sweeps run end to end, d-sweep keeps min pairwise distance >= d", detail);
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 3) {
    std::cerr << "usage: mmbo_acceptance <source dir> <unit test binary> [output dir]\n";
    return 2;
  }
  const fs::path src = argv[1];
  const fs::path unit = argv[2];
  const fs::path out = argc > 3 ? fs::path(argv[3]) : fs::temp_directory_path() / "mmbo_acceptance";
  const fs::path configs = src / "configs";

  auto guarded = [&](int id, auto&& f) {
    try {
      f();
    } catch (const std::exception& e) {
      verdict(id, false, "raised an error", e.what());
    }
  };
  guarded(1, [&] {
    flagged_optima(1, configs / "griewank2d_jointpi.cfg", out / "griewank2d_jointpi", 2, 0.25, 30.0,
                   "Griewank 2D joint PI: >= 2 maxima flagged within 0.25 in 40 steps, < 30 s");
  });
  guarded(2, [&] {
    flagged_optima(2, configs / "shubert_jointei.cfg", out / "shubert_jointei", 3, 0.25, 60.0,
                   "Shubert [-2,0]^2 joint EI: >= 3 maxima flagged within 0.25 in 40 steps, < 60 s");
  });
  guarded(3, [&] { griewank3d(configs / "griewank3d.cfg", out / "griewank3d"); });
  guarded(4, [&] { compare(configs / "synthetic_compare.cfg", out / "synthetic_compare"); });
  guarded(5, [&] { ablation(configs / "synthetic_ablate.cfg", out / "synthetic_ablate"); });
  guarded(6, [&] { property_suite(unit); });
  guarded(7, [&] { sweeps(configs / "shubert_sweep.cfg", out / "sweeps"); });

  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
