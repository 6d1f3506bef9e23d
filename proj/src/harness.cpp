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
#include "mmbo/harness.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"
#include "mmbo/errors.hpp"

namespace mmbo {

namespace {

using Json = nlohmann::ordered_json;

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? s.npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

// Shortest representation that parses back to the same double.
std::string num(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

double parse_double(std::string_view text, bool allow_nan = false) {
  const std::string t = trim(text);
  if (allow_nan && t == "nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
    throw std::invalid_argument("not a number: '" + t + "'");
  }
  return v;
}

double key_double(const std::string& key, const std::string& value) {
  double v;
  try {
    v = parse_double(value);
  } catch (const std::invalid_argument&) {
    throw ConfigError("`" + key + "`: expected a number, got '" + value + "'");
  }
  if (!std::isfinite(v)) throw ConfigError("`" + key + "`: value must be finite");
  return v;
}

std::uint64_t key_unsigned(const std::string& key, const std::string& value) {
  const std::string t = trim(value);
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
    throw ConfigError("`" + key + "`: expected a non-negative integer, got '" + value + "'");
  }
  return v;
}

bool key_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError("`" + key + "`: expected true or false, got '" + value + "'");
}

// "a, b, c" or "a b c"
std::vector<double> key_numbers(const std::string& key, const std::string& value) {
  std::string text = value;
  std::replace(text.begin(), text.end(), ',', ' ');
  std::istringstream in(text);
  std::vector<double> out;
  std::string tok;
  while (in >> tok) out.push_back(key_double(key, tok));
  return out;
}

// "p1; p2; ..." where each p is a list of numbers.
std::vector<std::vector<double>> key_rows(const std::string& key, const std::string& value) {
  std::vector<std::vector<double>> rows;
  for (const auto& part : split(value, ';')) {
    if (part.empty()) continue;
    rows.push_back(key_numbers(key, part));
  }
  return rows;
}

std::string join_numbers(const Vector& v) {
  std::string s;
  for (Eigen::Index i = 0; i < v.size(); ++i) s += (i ? ", " : "") + num(v(i));
  return s;
}

// Kernel hyperparameters are kept per kernel so key order does not matter.
struct KernelParams {
  SquaredExponential se{10.0, 0.1};
  Polynomial poly;
};

KernelParams kernel_params(const KernelSpec& k) {
  KernelParams p;
  if (const auto* se = std::get_if<SquaredExponential>(&k)) p.se = *se;
  if (const auto* poly = std::get_if<Polynomial>(&k)) p.poly = *poly;
  return p;
}

const std::set<std::string> kBenchmarks{"griewank", "shubert", "synthetic1d", "tabulated"};

}  // namespace

void set_option(ExperimentConfig& cfg, const std::string& key, const std::string& raw) {
  const std::string value = trim(raw);
  auto& opt = cfg.optimizer;
  const bool is_se = std::holds_alternative<SquaredExponential>(opt.kernel);
  KernelParams kp = kernel_params(opt.kernel);

  if (key == "benchmark") {
    if (!kBenchmarks.count(value)) throw ConfigError("`benchmark`: unknown benchmark '" + value + "'");
    cfg.benchmark = value;
  } else if (key == "tabulated_path") {
    cfg.tabulated_path = value;
  } else if (key == "bumps") {
    cfg.bumps.clear();
    for (const auto& row : key_rows(key, value)) {
      if (row.size() != 3) throw ConfigError("`bumps`: each bump is `height, center, width`");
      cfg.bumps.push_back({row[0], row[1], row[2]});
    }
  } else if (key == "bounds") {
    opt.bounds.clear();
    for (const auto& part : split(value, ',')) {
      const auto lh = split(part, ':');
      if (lh.size() != 2) throw ConfigError("`bounds`: expected `low:high` pairs separated by commas");
      opt.bounds.push_back({key_double(key, lh[0]), key_double(key, lh[1])});
    }
  } else if (key == "grid_step") {
    opt.candidates = {};
    opt.candidates.mode = CandidateSpec::Mode::GridStep;
    opt.candidates.step = key_double(key, value);
  } else if (key == "grid_points") {
    opt.candidates = {};
    opt.candidates.mode = CandidateSpec::Mode::GridPoints;
    opt.candidates.points_per_dim = key_unsigned(key, value);
  } else if (key == "candidate_count") {
    opt.candidates = {};
    opt.candidates.mode = CandidateSpec::Mode::Random;
    opt.candidates.random_count = key_unsigned(key, value);
  } else if (key == "min_distance") {
    opt.min_distance = key_double(key, value);
  } else if (key == "budget") {
    opt.budget = key_unsigned(key, value);
  } else if (key == "prior_points") {
    opt.prior_points.clear();
    for (const auto& row : key_rows(key, value)) {
      opt.prior_points.push_back(Eigen::Map<const Vector>(row.data(), static_cast<Eigen::Index>(row.size())));
    }
  } else if (key == "prior_count") {
    opt.prior_count = key_unsigned(key, value);
  } else if (key == "seed") {
    opt.seed = key_unsigned(key, value);
  } else if (key == "acquisition") {
    const auto family = parse_acquisition_family(value);
    if (!family) {
      throw ConfigError("`acquisition`: expected joint_pi, joint_ei, vanilla_pi, vanilla_ei or "
                        "derivative_only, got '" + value + "'");
    }
    opt.acquisition.family = *family;
  } else if (key == "threshold") {
    opt.acquisition.threshold = key_double(key, value);
  } else if (key == "epsilon") {
    opt.acquisition.epsilon = key_double(key, value);
  } else if (key == "kernel") {
    if (value == "se") {
      opt.kernel = kp.se;
    } else if (value == "polynomial") {
      opt.kernel = kp.poly;
    } else {
      throw ConfigError("`kernel`: expected se or polynomial, got '" + value + "'");
    }
  } else if (key == "alpha" || key == "length_scale") {
    if (!is_se) throw ConfigError("`" + key + "` applies to the se kernel only");
    (key == "alpha" ? kp.se.alpha : kp.se.length_scale) = key_double(key, value);
    opt.kernel = kp.se;
  } else if (key == "poly_alpha" || key == "poly_offset" || key == "poly_degree") {
    if (is_se) throw ConfigError("`" + key + "` applies to the polynomial kernel only (set `kernel` first)");
    if (key == "poly_alpha") kp.poly.alpha_bar = key_double(key, value);
    if (key == "poly_offset") kp.poly.offset = key_double(key, value);
    if (key == "poly_degree") kp.poly.degree = static_cast<int>(key_unsigned(key, value));
    opt.kernel = kp.poly;
  } else if (key == "relative_length_scale") {
    opt.relative_length_scale = key_bool(key, value);
  } else if (key == "prior_mean") {
    opt.prior_mean = key_double(key, value);
  } else if (key == "incumbent_threshold") {
    opt.incumbent_threshold = key_bool(key, value);
  } else if (key == "threads") {
    opt.threads = static_cast<unsigned>(key_unsigned(key, value));
  } else if (key == "output_dir") {
    cfg.output_dir = value;
  } else if (key == "emit_plot_data") {
    cfg.emit_plot_data = key_bool(key, value);
  } else if (key == "checkpoints") {
    cfg.checkpoints.clear();
    for (const auto& part : split(value, ',')) {
      if (!part.empty()) cfg.checkpoints.push_back(key_unsigned(key, part));
    }
  } else if (key == "hit_radius") {
    cfg.hit_radius = key_double(key, value);
  } else if (key == "repeats") {
    cfg.repeats = key_unsigned(key, value);
  } else if (key == "vanilla_incumbent") {
    cfg.vanilla_incumbent = key_bool(key, value);
  } else {
    throw ConfigError("unknown key `" + key + "`");
  }
}

ExperimentConfig parse_config(std::istream& in, const std::filesystem::path& base_dir) {
  ExperimentConfig cfg;
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    const std::string content = trim(std::string_view(line).substr(0, hash));
    if (content.empty()) continue;
    const auto eq = content.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected `key = value`");
    }
    const std::string key = trim(std::string_view(content).substr(0, eq));
    const std::string value = trim(std::string_view(content).substr(eq + 1));
    if (!seen.insert(key).second) {
      throw ConfigError("line " + std::to_string(line_no) + ": key `" + key + "` given twice");
    }
    try {
      set_option(cfg, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  for (const char* required : {"benchmark", "bounds"}) {
    if (!seen.count(required)) throw ConfigError(std::string("missing required key `") + required + "`");
  }
  if (seen.count("grid_step") + seen.count("grid_points") + seen.count("candidate_count") > 1) {
    throw ConfigError("`grid_step`, `grid_points` and `candidate_count` are mutually exclusive");
  }
  if (seen.count("prior_points") && seen.count("prior_count")) {
    throw ConfigError("`prior_points` and `prior_count` are mutually exclusive");
  }
  if (!base_dir.empty()) {
    if (!cfg.tabulated_path.empty() && cfg.tabulated_path.is_relative()) {
      cfg.tabulated_path = base_dir / cfg.tabulated_path;
    }
  }
  validate(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  return parse_config(in, path.parent_path());
}

ConfigEntries config_entries(const ExperimentConfig& cfg) {
  const auto& opt = cfg.optimizer;
  ConfigEntries e;
  e.emplace_back("benchmark", cfg.benchmark);
  if (cfg.benchmark == "tabulated") e.emplace_back("tabulated_path", cfg.tabulated_path.string());
  if (cfg.benchmark == "synthetic1d") {
    std::string s;
    for (const Bump& b : cfg.bumps.empty() ? default_bumps() : cfg.bumps) {
      s += (s.empty() ? "" : "; ") + num(b.height) + ", " + num(b.center) + ", " + num(b.width);
    }
    e.emplace_back("bumps", s);
  }
  std::string bounds;
  for (const auto& b : opt.bounds) bounds += (bounds.empty() ? "" : ", ") + num(b.low) + ":" + num(b.high);
  e.emplace_back("bounds", bounds);
  switch (opt.candidates.mode) {
    case CandidateSpec::Mode::GridStep:
      e.emplace_back("grid_step", num(opt.candidates.step));
      break;
    case CandidateSpec::Mode::GridPoints:
      e.emplace_back("grid_points", std::to_string(opt.candidates.points_per_dim));
      break;
    case CandidateSpec::Mode::Random:
      e.emplace_back("candidate_count", std::to_string(opt.candidates.random_count));
      break;
  }
  e.emplace_back("min_distance", num(opt.min_distance));
  e.emplace_back("budget", std::to_string(opt.budget));
  if (opt.prior_points.empty()) {
    e.emplace_back("prior_count", std::to_string(opt.prior_count));
  } else {
    std::string s;
    for (const auto& p : opt.prior_points) s += (s.empty() ? "" : "; ") + join_numbers(p);
    e.emplace_back("prior_points", s);
  }
  e.emplace_back("seed", std::to_string(opt.seed));
  e.emplace_back("acquisition", std::string(to_string(opt.acquisition.family)));
  e.emplace_back("threshold", num(opt.acquisition.threshold));
  e.emplace_back("epsilon", num(opt.acquisition.epsilon));
  if (const auto* se = std::get_if<SquaredExponential>(&opt.kernel)) {
    e.emplace_back("kernel", "se");
    e.emplace_back("alpha", num(se->alpha));
    e.emplace_back("length_scale", num(se->length_scale));
  } else {
    const auto& p = std::get<Polynomial>(opt.kernel);
    e.emplace_back("kernel", "polynomial");
    e.emplace_back("poly_alpha", num(p.alpha_bar));
    e.emplace_back("poly_offset", num(p.offset));
    e.emplace_back("poly_degree", std::to_string(p.degree));
  }
  e.emplace_back("relative_length_scale", opt.relative_length_scale ? "true" : "false");
  e.emplace_back("prior_mean", num(opt.prior_mean));
  e.emplace_back("incumbent_threshold", opt.incumbent_threshold ? "true" : "false");
  e.emplace_back("threads", std::to_string(opt.threads));
  e.emplace_back("output_dir", cfg.output_dir.string());
  e.emplace_back("emit_plot_data", cfg.emit_plot_data ? "true" : "false");
  std::string cps;
  for (auto c : cfg.checkpoints) cps += (cps.empty() ? "" : ", ") + std::to_string(c);
  e.emplace_back("checkpoints", cps);
  e.emplace_back("hit_radius", num(cfg.hit_radius));
  e.emplace_back("repeats", std::to_string(cfg.repeats));
  e.emplace_back("vanilla_incumbent", cfg.vanilla_incumbent ? "true" : "false");
  return e;
}

namespace {

ExperimentConfig config_from_entries(const ConfigEntries& entries) {
  std::ostringstream text;
  for (const auto& [k, v] : entries) text << k << " = " << v << '\n';
  std::istringstream in(text.str());
  return parse_config(in);
}

}  // namespace

void validate(const ExperimentConfig& cfg) {
  if (!kBenchmarks.count(cfg.benchmark)) throw ConfigError("`benchmark`: unknown benchmark '" + cfg.benchmark + "'");
  const auto& bounds = cfg.optimizer.bounds;
  if (bounds.empty()) throw ConfigError("`bounds`: at least one dimension is required");
  try {
    validate(cfg.optimizer);
    if (cfg.benchmark == "synthetic1d") validate_bumps(cfg.bumps.empty() ? default_bumps() : cfg.bumps);
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  } catch (const DimensionMismatch& e) {
    throw ConfigError(e.what());
  }
  if (cfg.benchmark == "shubert" && bounds.size() != 2) throw ConfigError("`bounds`: shubert is 2-dimensional");
  if (cfg.benchmark == "synthetic1d") {
    if (bounds.size() != 1 || bounds[0].low < 0.0 || bounds[0].high > 1.0) {
      throw ConfigError("`bounds`: synthetic1d is defined on [0, 1]");
    }
  }
  if (cfg.benchmark == "tabulated") {
    if (cfg.tabulated_path.empty()) throw ConfigError("`tabulated_path` is required for the tabulated benchmark");
    TabulatedSurface surface = [&] {
      try {
        return load_tabulated(cfg.tabulated_path);
      } catch (const ParseError& e) {
        throw ConfigError("`tabulated_path` " + cfg.tabulated_path.string() + ": " + e.what());
      }
    }();
    const Bounds box = surface.bounds();
    if (box.size() != bounds.size()) throw ConfigError("`bounds`: dimension differs from the tabulated surface");
    for (std::size_t d = 0; d < box.size(); ++d) {
      if (bounds[d].low < box[d].low || bounds[d].high > box[d].high) {
        throw ConfigError("`bounds`: outside the tabulated grid");
      }
    }
  }
  if (cfg.checkpoints.empty() || std::count(cfg.checkpoints.begin(), cfg.checkpoints.end(), 0u) > 0) {
    throw ConfigError("`checkpoints`: need one or more positive step counts");
  }
  if (!(cfg.hit_radius > 0.0)) throw ConfigError("`hit_radius` must be > 0");
  if (cfg.repeats < 1) throw ConfigError("`repeats` must be >= 1");
}

BenchmarkSpec make_benchmark(const ExperimentConfig& cfg) {
  const auto& bounds = cfg.optimizer.bounds;
  if (cfg.benchmark == "griewank") return griewank_benchmark(bounds);
  if (cfg.benchmark == "shubert") return shubert_benchmark(bounds);
  if (cfg.benchmark == "synthetic1d") {
    BenchmarkSpec spec = synthetic1d_benchmark(cfg.bumps.empty() ? default_bumps() : cfg.bumps);
    if (bounds[0].low > 0.0 || bounds[0].high < 1.0) {
      std::erase_if(spec.ground_truth, [&](const GroundTruth& t) { return !within_bounds(bounds, t.location); });
      spec.bounds = bounds;
    }
    return spec;
  }
  if (cfg.benchmark == "tabulated") {
    BenchmarkSpec spec = tabulated_benchmark(load_tabulated(cfg.tabulated_path));
    std::erase_if(spec.ground_truth, [&](const GroundTruth& t) { return !within_bounds(bounds, t.location); });
    spec.bounds = bounds;
    return spec;
  }
  throw ConfigError("`benchmark`: unknown benchmark '" + cfg.benchmark + "'");
}

// ---------------------------------------------------------------------------
// Trace files

void write_trace(const RunTrace& trace, std::ostream& out) {
  for (const auto& [k, v] : trace.config_echo) out << "# config " << k << " = " << v << '\n';
  out << "# termination = " << trace.termination << '\n';
  out << "# sample_count = " << trace.sample_count << '\n';
  out << "# final_jitter = " << num(trace.final_jitter) << '\n';
  const Eigen::Index dim = trace.steps.empty() ? 0 : trace.steps.front().point.size();
  out << "step,kind";
  for (Eigen::Index i = 0; i < dim; ++i) out << ",x" << i + 1;
  out << ",value,acquisition,flagged,distance\n";
  for (const auto& s : trace.steps) {
    out << s.step << ',' << (s.kind == StepKind::Prior ? "prior" : "search");
    for (Eigen::Index i = 0; i < s.point.size(); ++i) out << ',' << num(s.point(i));
    out << ',' << num(s.value) << ',' << num(s.acquisition) << ',' << (s.flagged ? 1 : 0) << ',';
    if (s.distance) out << num(*s.distance);
    out << '\n';
  }
}

RunTrace parse_trace(std::istream& in) {
  RunTrace trace;
  std::string line;
  std::size_t line_no = 0;
  std::size_t columns = 0;
  auto fail = [&](const std::string& what) { throw ParseError("trace: " + what, line_no); };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::string body = trim(std::string_view(line).substr(1));
      const auto eq = body.find(" = ");
      if (eq == std::string::npos) continue;
      std::string key = body.substr(0, eq);
      const std::string value = body.substr(eq + 3);
      if (key.rfind("config ", 0) == 0) {
        trace.config_echo.emplace_back(key.substr(7), value);
      } else if (key == "termination") {
        trace.termination = value;
      } else if (key == "sample_count") {
        trace.sample_count = std::stoull(value);
      } else if (key == "final_jitter") {
        trace.final_jitter = parse_double(value);
      }
      continue;
    }
    const auto fields = split(line, ',');
    if (columns == 0) {
      if (fields.size() < 6 || fields[0] != "step" || fields[1] != "kind") fail("bad header");
      columns = fields.size();
      continue;
    }
    if (fields.size() != columns) fail("expected " + std::to_string(columns) + " fields");
    try {
      StepRecord s;
      s.step = std::stoull(fields[0]);
      if (fields[1] == "prior") {
        s.kind = StepKind::Prior;
      } else if (fields[1] == "search") {
        s.kind = StepKind::Search;
      } else {
        fail("bad kind '" + fields[1] + "'");
      }
      const std::size_t dim = columns - 6;
      s.point.resize(static_cast<Eigen::Index>(dim));
      for (std::size_t i = 0; i < dim; ++i) s.point(static_cast<Eigen::Index>(i)) = parse_double(fields[2 + i]);
      s.value = parse_double(fields[2 + dim]);
      s.acquisition = parse_double(fields[3 + dim], true);
      s.flagged = fields[4 + dim] == "1";
      if (!fields[5 + dim].empty()) s.distance = parse_double(fields[5 + dim]);
      trace.steps.push_back(std::move(s));
    } catch (const std::invalid_argument& e) {
      fail(e.what());
    }
  }
  if (columns == 0) fail("missing header");
  return trace;
}

RunTrace load_trace(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string(), 0);
  return parse_trace(in);
}

// ---------------------------------------------------------------------------
// Runs

RunResult execute(const ExperimentConfig& cfg, std::string label) {
  validate(cfg);
  const BenchmarkSpec spec = make_benchmark(cfg);
  const auto t0 = std::chrono::steady_clock::now();
  RunResult result;
  result.label = std::move(label);
  result.config = cfg;
  result.trace = run(spec.objective, cfg.optimizer, spec.ground_truth.empty() ? nullptr : &spec);
  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  result.trace.config_echo = config_entries(cfg);
  return result;
}

RunResult result_from_trace(const RunTrace& trace, std::string label) {
  RunResult r;
  r.label = std::move(label);
  r.config = config_from_entries(trace.config_echo);
  r.trace = trace;
  return r;
}

namespace {

Json vector_json(const Vector& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

double min_pairwise_distance(const RunTrace& t) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < t.steps.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) best = std::min(best, (t.steps[i].point - t.steps[j].point).norm());
  }
  return best;
}

void write_file(const std::filesystem::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << body;
}

Json summary_json(const RunResult& r, const BenchmarkSpec& spec) {
  Json j;
  Json cfg = Json::object();
  for (const auto& [k, v] : r.trace.config_echo) cfg[k] = v;
  j["config"] = cfg;
  j["label"] = r.label;
  j["termination"] = r.trace.termination;
  j["search_steps"] = r.trace.search_steps().size();
  j["sample_count"] = r.trace.sample_count;
  j["final_jitter"] = r.trace.final_jitter;
  Json truths = Json::array();
  for (const auto& t : spec.ground_truth) truths.push_back({{"x", vector_json(t.location)}, {"value", t.value}});
  j["ground_truth"] = truths;
  Json flagged = Json::array();
  for (const StepRecord* s : r.trace.flagged_steps()) {
    Json f{{"step", s->step}, {"x", vector_json(s->point)}, {"value", s->value}};
    if (!spec.ground_truth.empty()) {
      const auto t = nearest_truth_index(spec, s->point);
      f["nearest_truth"] = t;
      f["distance"] = (spec.ground_truth[t].location - s->point).norm();
    }
    flagged.push_back(f);
  }
  j["flagged"] = flagged;
  if (!spec.ground_truth.empty() && !r.trace.search_steps().empty()) {
    const MetricReport m = make_report(r.trace, spec, r.config.checkpoints, r.config.hit_radius);
    Json avg = Json::object();
    for (std::size_t i = 0; i < m.checkpoints.size(); ++i) avg[std::to_string(m.checkpoints[i])] = m.checkpoint_average[i];
    Json hits = Json::array();
    for (const auto& h : m.first_hit) hits.push_back(h ? Json(*h) : Json(nullptr));
    j["metrics"] = {{"hit_radius", m.hit_radius},
                    {"average_distance", avg},
                    {"first_hit", hits},
                    {"optima_found", m.optima_found}};
  }
  return j;
}

// Final posterior over the candidate set, for 1D and 2D surfaces.
std::string surface_csv(const RunResult& r) {
  const auto& opt = r.config.optimizer;
  std::vector<Vector> xs;
  std::vector<double> fs;
  for (const auto& s : r.trace.steps) {
    xs.push_back(s.point);
    fs.push_back(s.value);
  }
  const GPState state = GPState::fit(xs, fs, opt.prior_mean, effective_kernel(opt));
  AcquisitionConfig acq = opt.acquisition;
  if (opt.incumbent_threshold) acq.threshold = *std::max_element(fs.begin(), fs.end());
  std::ostringstream out;
  const auto dim = static_cast<Eigen::Index>(opt.bounds.size());
  for (Eigen::Index i = 0; i < dim; ++i) out << 'x' << i + 1 << ',';
  out << "mean,sd,acquisition\n";
  for (const Vector& x : generate_candidates(opt, opt.seed)) {
    const JointGaussian j = joint_posterior(state, x);
    for (Eigen::Index i = 0; i < dim; ++i) out << num(x(i)) << ',';
    out << num(j.mean(0)) << ',' << num(std::sqrt(std::max(j.cov(0, 0), 0.0))) << ','
        << num(acquisition_value(j, acq)) << '\n';
  }
  return out.str();
}

std::string plot_csv(const RunTrace& t) {
  std::ostringstream out;
  const Eigen::Index dim = t.steps.empty() ? 0 : t.steps.front().point.size();
  out << "step";
  for (Eigen::Index i = 0; i < dim; ++i) out << ",x" << i + 1;
  out << ",value,acquisition,distance\n";
  for (const StepRecord* s : t.search_steps()) {
    out << s->step;
    for (Eigen::Index i = 0; i < dim; ++i) out << ',' << num(s->point(i));
    out << ',' << num(s->value) << ',' << num(s->acquisition) << ',' << (s->distance ? num(*s->distance) : "") << '\n';
  }
  return out.str();
}

}  // namespace

void write_run_outputs(const RunResult& result, const BenchmarkSpec& spec, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::ostringstream trace;
  write_trace(result.trace, trace);
  write_file(dir / "trace.csv", trace.str());
  write_file(dir / "summary.json", summary_json(result, spec).dump(2) + "\n");
  if (result.config.emit_plot_data) {
    write_file(dir / "plot.csv", plot_csv(result.trace));
    if (result.config.optimizer.bounds.size() <= 2) write_file(dir / "surface.csv", surface_csv(result));
  }
}

std::vector<RunResult> run_sweep(const ExperimentConfig& cfg, const std::string& parameter,
                                 const std::vector<double>& values) {
  static const std::set<std::string> sweepable{"alpha", "length_scale", "threshold", "min_distance"};
  if (!sweepable.count(parameter)) {
    throw ConfigError("sweep parameter must be alpha, length_scale, threshold or min_distance, got '" +
                      parameter + "'");
  }
  if (values.empty()) throw ConfigError("sweep needs at least one value");
  std::vector<RunResult> runs;
  for (double v : values) {
    ExperimentConfig c = cfg;
    set_option(c, parameter, num(v));
    validate(c);
    runs.push_back(execute(c, parameter + "=" + num(v)));
  }
  return runs;
}

std::vector<RunResult> run_ablation(const ExperimentConfig& cfg) {
  const auto family = cfg.optimizer.acquisition.family;
  if (family != AcquisitionFamily::JointPI && family != AcquisitionFamily::JointEI) {
    throw ConfigError("`acquisition`: ablation starts from joint_pi or joint_ei");
  }
  const std::pair<const char*, AcquisitionFamily> variants[] = {
      {"joint", family},
      {"posterior_only",
       family == AcquisitionFamily::JointPI ? AcquisitionFamily::VanillaPI : AcquisitionFamily::VanillaEI},
      {"derivative_only", AcquisitionFamily::DerivativeOnly}};
  std::vector<RunResult> runs;
  for (const auto& [label, f] : variants) {
    ExperimentConfig c = cfg;
    c.optimizer.acquisition.family = f;
    runs.push_back(execute(c, label));
  }
  return runs;
}

std::vector<RunResult> run_compare(const ExperimentConfig& cfg) {
  if (make_benchmark(cfg).ground_truth.empty()) throw ConfigError("compare needs a benchmark with known maxima");
  std::vector<RunResult> runs;
  for (std::size_t r = 0; r < cfg.repeats; ++r) {
    for (auto f : {AcquisitionFamily::JointPI, AcquisitionFamily::JointEI, AcquisitionFamily::VanillaPI,
                   AcquisitionFamily::VanillaEI}) {
      ExperimentConfig c = cfg;
      c.optimizer.seed = cfg.optimizer.seed + r;
      c.optimizer.acquisition.family = f;
      const bool vanilla = f == AcquisitionFamily::VanillaPI || f == AcquisitionFamily::VanillaEI;
      c.optimizer.incumbent_threshold = vanilla ? cfg.vanilla_incumbent : cfg.optimizer.incumbent_threshold;
      runs.push_back(execute(c, std::string(to_string(f)) + "/seed_" + std::to_string(c.optimizer.seed)));
    }
  }
  return runs;
}

// ---------------------------------------------------------------------------
// Reports

namespace {

std::string cell(std::optional<double> v) { return v ? num(*v) : ""; }

std::optional<double> checkpoint_average(const RunResult& r, const BenchmarkSpec& spec, std::size_t c) {
  if (spec.ground_truth.empty() || c > r.trace.search_steps().size()) return std::nullopt;
  return average_distance(r.trace, spec, c);
}

std::string checkpoint_header(const std::vector<std::size_t>& cps) {
  std::string s;
  for (auto c : cps) s += ",avg_distance_" + std::to_string(c);
  return s;
}

// Median where a missing value counts as larger than any present one.
std::optional<double> median(std::vector<std::optional<double>> v) {
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> x;
  for (const auto& e : v) x.push_back(e.value_or(inf));
  std::sort(x.begin(), x.end());
  const std::size_t n = x.size();
  const double m = n % 2 ? x[n / 2] : 0.5 * (x[n / 2 - 1] + x[n / 2]);
  if (!std::isfinite(m)) return std::nullopt;
  return m;
}

}  // namespace

std::string sweep_report(const std::string& parameter, const std::vector<RunResult>& runs) {
  std::ostringstream out;
  out << "# sweep over " << parameter << "; one run per value, shared seed and priors\n"
      << "# optima_found: ground-truth maxima with a flagged step within hit_radius\n"
      << "# avg_distance_N: mean distance to the nearest maximum over the first N search steps\n";
  if (runs.empty()) return out.str();
  const auto& cps = runs.front().config.checkpoints;
  out << "label,search_steps,termination,flagged,optima_found,min_pairwise_distance,min_distance"
      << checkpoint_header(cps) << '\n';
  for (const RunResult& r : runs) {
    const BenchmarkSpec spec = make_benchmark(r.config);
    out << r.label << ',' << r.trace.search_steps().size() << ',' << r.trace.termination << ','
        << r.trace.flagged_steps().size() << ',';
    if (!spec.ground_truth.empty()) out << flagged_truths(r.trace, spec, r.config.hit_radius).size();
    out << ',' << num(min_pairwise_distance(r.trace)) << ',' << num(r.config.optimizer.min_distance);
    for (auto c : cps) out << ',' << cell(checkpoint_average(r, spec, c));
    out << '\n';
  }
  return out.str();
}

std::string ablation_report(const std::vector<RunResult>& runs) {
  std::ostringstream out;
  out << "# ablation: identical seed, priors and candidates; variants differ only in the acquisition\n"
      << "# flagged_truths: indices of ground-truth maxima with a flagged step within hit_radius\n"
      << "# off_target_flags: flagged steps farther than hit_radius from every maximum\n";
  if (runs.empty()) return out.str();
  const auto& cps = runs.front().config.checkpoints;
  out << "variant,acquisition,flagged,optima_found,flagged_truths,off_target_flags" << checkpoint_header(cps)
      << '\n';
  for (const RunResult& r : runs) {
    const BenchmarkSpec spec = make_benchmark(r.config);
    const auto truths = flagged_truths(r.trace, spec, r.config.hit_radius);
    std::string list;
    for (auto t : truths) list += (list.empty() ? "" : ";") + std::to_string(t);
    std::size_t off = 0;
    for (const StepRecord* s : r.trace.flagged_steps()) {
      if (nearest_truth_distance(spec, s->point) > r.config.hit_radius) ++off;
    }
    out << r.label << ',' << to_string(r.config.optimizer.acquisition.family) << ','
        << r.trace.flagged_steps().size() << ',' << truths.size() << ',' << list << ',' << off;
    for (auto c : cps) out << ',' << cell(checkpoint_average(r, spec, c));
    out << '\n';
  }
  return out.str();
}

std::string compare_report(const std::vector<RunResult>& runs) {
  std::ostringstream out;
  if (runs.empty()) return out.str();
  const BenchmarkSpec spec = make_benchmark(runs.front().config);
  // Maxima ranked by height; the report follows the three largest.
  std::vector<std::size_t> order(spec.ground_truth.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) {
    return spec.ground_truth[a].value > spec.ground_truth[b].value;
  });
  order.resize(std::min<std::size_t>(order.size(), 3));
  const auto& cps = runs.front().config.checkpoints;

  std::vector<std::string> methods;
  std::map<std::string, std::vector<const RunResult*>> by_method;
  std::set<std::uint64_t> seeds;
  for (const RunResult& r : runs) {
    const std::string m(to_string(r.config.optimizer.acquisition.family));
    if (!by_method.count(m)) methods.push_back(m);
    by_method[m].push_back(&r);
    seeds.insert(r.config.optimizer.seed);
  }
  out << "# methods compared on " << spec.name << " over " << seeds.size() << " seed(s); cells are medians\n";
  for (std::size_t k = 0; k < order.size(); ++k) {
    const auto& t = spec.ground_truth[order[k]];
    out << "# max" << k + 1 << ": x = " << join_numbers(t.location) << ", f = " << num(t.value) << '\n';
  }
  out << "# first_hit_maxK: first search step within hit_radius = " << num(runs.front().config.hit_radius)
      << " of maximum K (empty: not reached in the median)\n"
      << "# avg_distance_N: mean over the first N search steps of the distance to the nearest maximum "
         "(all maxima, not restricted to steps after an earlier hit)\n";
  out << "method";
  for (std::size_t k = 0; k < order.size(); ++k) out << ",first_hit_max" << k + 1;
  out << checkpoint_header(cps) << '\n';
  for (const auto& m : methods) {
    out << m;
    const auto& rs = by_method[m];
    for (std::size_t k = 0; k < order.size(); ++k) {
      std::vector<std::optional<double>> hits;
      for (const RunResult* r : rs) {
        const auto h = first_hit_steps(r->trace, spec, r->config.hit_radius)[order[k]];
        hits.push_back(h ? std::optional<double>(static_cast<double>(*h)) : std::nullopt);
      }
      out << ',' << cell(median(hits));
    }
    for (auto c : cps) {
      std::vector<std::optional<double>> avgs;
      for (const RunResult* r : rs) avgs.push_back(checkpoint_average(*r, spec, c));
      out << ',' << cell(median(avgs));
    }
    out << '\n';
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Commands

namespace {

ExperimentConfig load_with_overrides(const std::filesystem::path& path, const CliOverrides& o) {
  ExperimentConfig cfg = load_config(path);
  if (o.seed) cfg.optimizer.seed = *o.seed;
  if (o.output_dir) cfg.output_dir = *o.output_dir;
  validate(cfg);
  return cfg;
}

template <class F>
int guarded(F&& body) {
  try {
    body();
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}

void log_run(const RunResult& r, const std::filesystem::path& dir) {
  std::cout << r.label << ": " << r.trace.search_steps().size() << " steps, "
            << r.trace.flagged_steps().size() << " flagged, " << r.seconds << " s -> " << dir.string() << '\n';
}

void write_all(const std::vector<RunResult>& runs, const ExperimentConfig& cfg, const std::string& report) {
  for (const RunResult& r : runs) {
    const auto dir = cfg.output_dir / r.label;
    write_run_outputs(r, make_benchmark(r.config), dir);
    log_run(r, dir);
  }
  std::filesystem::create_directories(cfg.output_dir);
  write_file(cfg.output_dir / "report.csv", report);
  std::cout << "report: " << (cfg.output_dir / "report.csv").string() << '\n';
}

}  // namespace

int cmd_run(const std::filesystem::path& config, const CliOverrides& overrides) {
  return guarded([&] {
    const ExperimentConfig cfg = load_with_overrides(config, overrides);
    const RunResult r = execute(cfg);
    write_run_outputs(r, make_benchmark(cfg), cfg.output_dir);
    log_run(r, cfg.output_dir);
  });
}

int cmd_sweep(const std::filesystem::path& config, const std::string& parameter,
              const std::vector<double>& values, const CliOverrides& overrides) {
  return guarded([&] {
    const ExperimentConfig cfg = load_with_overrides(config, overrides);
    const auto runs = run_sweep(cfg, parameter, values);
    write_all(runs, cfg, sweep_report(parameter, runs));
  });
}

int cmd_ablate(const std::filesystem::path& config, const CliOverrides& overrides) {
  return guarded([&] {
    const ExperimentConfig cfg = load_with_overrides(config, overrides);
    const auto runs = run_ablation(cfg);
    write_all(runs, cfg, ablation_report(runs));
  });
}

int cmd_compare(const std::filesystem::path& config, const CliOverrides& overrides) {
  return guarded([&] {
    const ExperimentConfig cfg = load_with_overrides(config, overrides);
    const auto runs = run_compare(cfg);
    write_all(runs, cfg, compare_report(runs));
  });
}

}  // namespace mmbo
