/*
 * Copyright 2026 The m3lcmf Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Experiment harness: train, evaluate, ablate, sweep, noise, gen, validate.
//
// Every command reads an optional JSON config; command-line flags override
// its keys. Exit codes: 0 success, 1 usage, 2 data error, 3 numerical failure.

#include "m3lcmf/m3lcmf.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace m3lcmf;
namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumerical = 3;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Run configuration
// ---------------------------------------------------------------------------

struct RunConfig {
  std::string dataset;
  std::string output_dir = "m3lcmf_out";
  SolverConfig solver;
  double train_fraction = 0.7;
  std::uint64_t partition_seed = 0;
  bool split_views = false;
  std::uint64_t split_seed = 0;
  int repeats = 1;
  std::string level = "bag";
  Index n_noisy = 10;
  std::uint64_t noise_seed = 1000;
  std::vector<double> lambda_grid = {1e-2, 1e-1, 1e0, 1e1, 1e2,
                                     1e3,  1e4,  1e5, 1e6};
  std::vector<Index> d_grid = {20, 60, 100, 140, 180};
};

void check_keys(const Json& j, const std::set<std::string>& known,
                const std::string& where) {
  if (!j.is_object()) throw UsageError(where + ": expected a JSON object");
  for (const auto& [key, value] : j.items())
    if (!known.count(key))
      throw UsageError(where + ": unknown key '" + key + "'");
}

RunConfig run_config_from_json(const Json& j) {
  check_keys(j,
             {"dataset", "output_dir", "solver", "partition", "split_views",
              "repeats", "level", "noise", "sweep"},
             "config");
  RunConfig c;
  try {
    c.dataset = j.value("dataset", c.dataset);
    c.output_dir = j.value("output_dir", c.output_dir);
    if (j.contains("solver")) c.solver = solver_config_from_json(j["solver"]);
    if (j.contains("partition")) {
      const Json& p = j["partition"];
      check_keys(p, {"train_fraction", "seed"}, "config.partition");
      c.train_fraction = p.value("train_fraction", c.train_fraction);
      c.partition_seed = p.value("seed", c.partition_seed);
    }
    if (j.contains("split_views")) {
      const Json& s = j["split_views"];
      check_keys(s, {"enabled", "seed"}, "config.split_views");
      c.split_views = s.value("enabled", c.split_views);
      c.split_seed = s.value("seed", c.split_seed);
    }
    c.repeats = j.value("repeats", c.repeats);
    c.level = j.value("level", c.level);
    if (j.contains("noise")) {
      const Json& n = j["noise"];
      check_keys(n, {"n_noisy", "seed"}, "config.noise");
      c.n_noisy = n.value("n_noisy", c.n_noisy);
      c.noise_seed = n.value("seed", c.noise_seed);
    }
    if (j.contains("sweep")) {
      const Json& s = j["sweep"];
      check_keys(s, {"lambda_grid", "d_grid"}, "config.sweep");
      c.lambda_grid = s.value("lambda_grid", c.lambda_grid);
      c.d_grid = s.value("d_grid", c.d_grid);
    }
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("config: ") + e.what());
  }
  return c;
}

Json to_json(const RunConfig& c) {
  return Json{{"dataset", c.dataset},
              {"output_dir", c.output_dir},
              {"solver", m3lcmf::to_json(c.solver)},
              {"partition",
               {{"train_fraction", c.train_fraction},
                {"seed", c.partition_seed}}},
              {"split_views",
               {{"enabled", c.split_views}, {"seed", c.split_seed}}},
              {"repeats", c.repeats},
              {"level", c.level},
              {"noise", {{"n_noisy", c.n_noisy}, {"seed", c.noise_seed}}},
              {"sweep", {{"lambda_grid", c.lambda_grid}, {"d_grid", c.d_grid}}}};
}

void validate(const RunConfig& c) {
  c.solver.validate();
  if (!(c.train_fraction > 0.0 && c.train_fraction < 1.0))
    throw UsageError("config: partition.train_fraction must lie in (0,1)");
  if (c.repeats < 1) throw UsageError("config: repeats must be >= 1");
  if (c.level != "bag" && c.level != "instance")
    throw UsageError("config: level must be 'bag' or 'instance'");
  if (c.n_noisy < 0) throw UsageError("config: noise.n_noisy must be >= 0");
}

/// Flags shared by the experiment commands; each set flag overrides the
/// corresponding config key.
struct Overrides {
  std::string config_path;
  std::optional<std::string> dataset;
  std::optional<std::string> output_dir;
  std::optional<std::uint64_t> seed;
  std::optional<Index> rank;
  std::optional<double> lambda1;
  std::optional<double> lambda2;
  std::optional<int> max_iters;
  std::optional<double> rel_tol;
  std::optional<std::string> ablation;
  std::optional<double> train_fraction;
  std::optional<std::uint64_t> partition_seed;
  std::optional<int> repeats;
  std::optional<std::string> level;
  std::optional<Index> n_noisy;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("-c,--config", o.config_path, "JSON config file");
  cmd->add_option("-d,--dataset", o.dataset, "dataset directory");
  cmd->add_option("-o,--out", o.output_dir, "output directory");
  cmd->add_option("--seed", o.seed, "solver seed");
  cmd->add_option("--rank", o.rank, "latent rank d");
  cmd->add_option("--lambda1", o.lambda1, "bag view-weight regularizer");
  cmd->add_option("--lambda2", o.lambda2, "instance view-weight regularizer");
  cmd->add_option("--max-iters", o.max_iters, "iteration cap");
  cmd->add_option("--rel-tol", o.rel_tol, "relative objective tolerance");
  cmd->add_option("--ablation", o.ablation,
                  "full, nR11, nR22, nR33 or nR23");
  cmd->add_option("--train-fraction", o.train_fraction, "training fraction");
  cmd->add_option("--partition-seed", o.partition_seed, "first split seed");
  cmd->add_option("--repeats", o.repeats, "number of random partitions");
}

RunConfig resolve(const Overrides& o) {
  RunConfig c;
  if (!o.config_path.empty()) {
    std::ifstream in(o.config_path);
    if (!in) throw UsageError(o.config_path + ": cannot open config");
    Json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw UsageError(o.config_path + ": " + e.what());
    }
    c = run_config_from_json(j);
  }
  if (o.dataset) c.dataset = *o.dataset;
  if (o.output_dir) c.output_dir = *o.output_dir;
  if (o.seed) c.solver.seed = *o.seed;
  if (o.rank) c.solver.rank_d = *o.rank;
  if (o.lambda1) c.solver.lambda1 = *o.lambda1;
  if (o.lambda2) c.solver.lambda2 = *o.lambda2;
  if (o.max_iters) c.solver.max_iters = *o.max_iters;
  if (o.rel_tol) c.solver.rel_tol = *o.rel_tol;
  if (o.ablation) c.solver.ablation = Ablation::from_name(*o.ablation);
  if (o.train_fraction) c.train_fraction = *o.train_fraction;
  if (o.partition_seed) c.partition_seed = *o.partition_seed;
  if (o.repeats) c.repeats = *o.repeats;
  if (o.level) c.level = *o.level;
  if (o.n_noisy) c.n_noisy = *o.n_noisy;
  validate(c);
  return c;
}

MultiViewMimlDataset load(const RunConfig& c) {
  if (c.dataset.empty())
    throw UsageError("missing dataset path (set 'dataset' or pass --dataset)");
  MultiViewMimlDataset data = load_dataset(c.dataset);
  if (c.split_views) data = split_views(data, 2, c.split_seed);
  return data;
}

std::uint64_t partition_seed(const RunConfig& c, int repeat) {
  return c.partition_seed + static_cast<std::uint64_t>(repeat);
}

SolverConfig solver_for(const RunConfig& c, int repeat) {
  SolverConfig s = c.solver;
  s.seed += static_cast<std::uint64_t>(repeat);
  return s;
}

// ---------------------------------------------------------------------------
// Validated output
// ---------------------------------------------------------------------------

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(path.string() + ": cannot open for writing");
  out << text;
  if (!out) throw DataError(path.string() + ": write failed");
}

/// Checks that every CSV row has the header's column count and that every
/// cell from column `first_numeric` on parses as a finite number.
void check_csv(const std::string& text, std::size_t first_numeric,
               const std::string& what) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.empty())
    throw NumericalError(what + ": missing header");
  const std::size_t cols = io::split_csv_line(line).size();
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    const auto cells = io::split_csv_line(line);
    if (cells.size() != cols)
      throw NumericalError(what + ": row " + std::to_string(row) +
                           " has the wrong number of cells");
    for (std::size_t k = first_numeric; k < cells.size(); ++k)
      if (!std::isfinite(io::parse_double(cells[k], what)))
        throw NumericalError(what + ": non-finite value in row " +
                             std::to_string(row));
  }
}

void write_json(const fs::path& path, const Json& j) {
  write_file(path, j.dump(2) + "\n");
}

std::string fmt3(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", x);
  return buf;
}

std::string mean_pm_std(const MetricSummary& m) {
  return fmt3(m.mean) + "\xC2\xB1" + fmt3(m.stddev);
}

// ---------------------------------------------------------------------------
// Checkpoints
// ---------------------------------------------------------------------------

struct Checkpoint {
  std::string dataset;
  bool split_views = false;
  std::uint64_t split_seed = 0;
  SolverConfig config;
  double train_fraction = 0.7;
  std::uint64_t partition_seed = 0;
  Partition split;
  double train_cardinality = 0.0;
  FactorModel model;
};

Json checkpoint_json(const RunConfig& c, int repeat, const PartitionRun& run) {
  return Json{{"format", "m3lcmf-checkpoint"},
              {"version", 1},
              {"dataset", c.dataset},
              {"split_views",
               {{"enabled", c.split_views}, {"seed", c.split_seed}}},
              {"config", m3lcmf::to_json(run.config)},
              {"partition",
               {{"train_fraction", c.train_fraction},
                {"seed", partition_seed(c, repeat)},
                {"train", run.split.train},
                {"test", run.split.test}}},
              {"train_cardinality", run.train_cardinality},
              {"stop", to_string(run.fit.trace.stop)},
              {"iterations", run.fit.trace.terms.size() - 1},
              {"final_objective", run.fit.trace.terms.back().total()},
              {"model", m3lcmf::to_json(run.fit.model)}};
}

Checkpoint checkpoint_from_json(const Json& j) {
  const std::string w = "checkpoint";
  if (io::field(j, "format", w) != "m3lcmf-checkpoint")
    throw DataError("checkpoint: unexpected format tag");
  Checkpoint c;
  c.dataset = io::field(j, "dataset", w).get<std::string>();
  const Json& sv = io::field(j, "split_views", w);
  c.split_views = io::field(sv, "enabled", w).get<bool>();
  c.split_seed = io::field(sv, "seed", w).get<std::uint64_t>();
  c.config = solver_config_from_json(io::field(j, "config", w));
  const Json& p = io::field(j, "partition", w);
  c.train_fraction = io::field(p, "train_fraction", w).get<double>();
  c.partition_seed = io::field(p, "seed", w).get<std::uint64_t>();
  c.split.train = io::field(p, "train", w).get<std::vector<Index>>();
  c.split.test = io::field(p, "test", w).get<std::vector<Index>>();
  c.train_cardinality = io::field(j, "train_cardinality", w).get<double>();
  c.model = model_from_json(io::field(j, "model", w));
  return c;
}

Checkpoint read_checkpoint(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(path.string() + ": cannot open checkpoint");
  try {
    Json j;
    in >> j;
    return checkpoint_from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  } catch (const InvalidArgument& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

int cmd_train(const Overrides& o) {
  const RunConfig c = resolve(o);
  const auto data = load(c);
  const fs::path out = c.output_dir;
  write_json(out / "config.json", to_json(c));
  for (int r = 0; r < c.repeats; ++r) {
    const auto split = partition(data, c.train_fraction, partition_seed(c, r));
    const auto run = run_partition(data, split, solver_for(c, r));
    const Json ckpt = checkpoint_json(c, r, run);
    checkpoint_from_json(ckpt);
    std::ostringstream trace;
    write_trace_csv(trace, run.fit.trace);
    check_csv(trace.str(), 0, "trace");
    const std::string tag = std::to_string(r);
    write_json(out / ("checkpoint_" + tag + ".json"), ckpt);
    write_file(out / ("trace_" + tag + ".csv"), trace.str());
    std::cout << "repeat " << r << ": " << to_string(run.fit.trace.stop)
              << " after " << run.fit.trace.terms.size() - 1
              << " iterations, objective "
              << io::format_double(run.fit.trace.terms.back().total()) << '\n';
  }
  return kExitOk;
}

struct EvaluateArgs {
  std::vector<std::string> checkpoints;
  std::optional<std::string> dataset;
  std::optional<std::string> level;
  std::optional<std::string> out;
};

int cmd_evaluate(const EvaluateArgs& a) {
  const std::string level = a.level.value_or("bag");
  if (level != "bag" && level != "instance")
    throw UsageError("--level must be 'bag' or 'instance'");
  std::vector<std::vector<std::pair<std::string, double>>> runs;
  std::vector<std::uint64_t> seeds;
  SolverConfig cfg;
  double fraction = 0.7;
  for (const auto& path : a.checkpoints) {
    const Checkpoint ck = read_checkpoint(path);
    RunConfig rc;
    rc.dataset = a.dataset.value_or(ck.dataset);
    rc.split_views = ck.split_views;
    rc.split_seed = ck.split_seed;
    const auto data = load(rc);
    if (ck.model.g1.rows() != data.n_bags() ||
        ck.model.g2.rows() != data.n_instances() ||
        ck.model.g3.rows() != data.n_labels())
      throw DataError(path + ": checkpoint does not match dataset shape");
    const Matrix avg = membership_matrix(data);
    Vector inv(data.n_bags());
    for (Index b = 0; b < data.n_bags(); ++b)
      inv(b) = 1.0 / static_cast<double>(data.bag_size(b));
    if (level == "bag") {
      const Matrix scores = predict_bag_labels(
          ck.model, inv.asDiagonal() * avg, ck.config.ablation);
      runs.push_back(
          bag_metrics(data, scores, ck.split.test, ck.train_cardinality));
    } else {
      runs.push_back(instance_metrics(
          data, predict_instance_labels(ck.model), ck.split));
    }
    seeds.push_back(ck.partition_seed);
    cfg = ck.config;
    fraction = ck.train_fraction;
  }
  const EvaluationReport report =
      make_report(level, runs, cfg, seeds, fraction);
  const Json j = m3lcmf::to_json(report);
  if (!(report_from_json(j) == report))
    throw NumericalError("report failed schema round-trip");
  const fs::path out = a.out.value_or(
      (fs::path(a.checkpoints.front()).parent_path() /
       ("report_" + level + ".json"))
          .string());
  write_json(out, j);
  std::cout << "level " << level << ", " << runs.size() << " run(s)\n";
  for (const auto& m : report.metrics)
    std::cout << "  " << m.name << "  " << mean_pm_std(m) << '\n';
  return kExitOk;
}

int cmd_ablate(const Overrides& o) {
  const RunConfig c = resolve(o);
  const auto data = load(c);
  const auto& variants = ablation_variants();
  std::vector<std::vector<double>> scores(variants.size());
  for (int r = 0; r < c.repeats; ++r) {
    const auto split = partition(data, c.train_fraction, partition_seed(c, r));
    for (std::size_t v = 0; v < variants.size(); ++v) {
      SolverConfig s = solver_for(c, r);
      s.ablation = Ablation::from_name(variants[v]);
      const auto run = run_partition(data, split, s);
      scores[v].push_back(bag_metrics(data, run.bag_scores, split.test,
                                      run.train_cardinality)
                              .front()
                              .second);
    }
  }
  std::ostringstream csv;
  csv << "repeat";
  for (const auto& v : variants) csv << ',' << v;
  csv << '\n';
  for (int r = 0; r < c.repeats; ++r) {
    csv << r;
    for (const auto& s : scores)
      csv << ',' << io::format_double(s[static_cast<std::size_t>(r)]);
    csv << '\n';
  }
  std::vector<MetricSummary> summary;
  for (std::size_t v = 0; v < variants.size(); ++v)
    summary.push_back(summarize(variants[v], scores[v]));
  csv << "mean";
  for (const auto& s : summary) csv << ',' << io::format_double(s.mean);
  csv << "\nstd";
  for (const auto& s : summary) csv << ',' << io::format_double(s.stddev);
  csv << '\n';
  check_csv(csv.str(), 1, "ablation");
  write_file(fs::path(c.output_dir) / "ablation.csv", csv.str());
  std::cout << "bag-level 1-RankLoss over " << c.repeats << " partition(s)\n";
  for (const auto& s : summary)
    std::cout << "  " << s.name << "  " << mean_pm_std(s) << '\n';
  return kExitOk;
}

MetricSummary rankloss_over_repeats(const MultiViewMimlDataset& data,
                                    const RunConfig& c,
                                    const SolverConfig& base) {
  std::vector<double> values;
  for (int r = 0; r < c.repeats; ++r) {
    const auto split = partition(data, c.train_fraction, partition_seed(c, r));
    SolverConfig s = base;
    s.seed += static_cast<std::uint64_t>(r);
    const auto run = run_partition(data, split, s);
    values.push_back(bag_metrics(data, run.bag_scores, split.test,
                                 run.train_cardinality)
                         .front()
                         .second);
  }
  return summarize(kOneMinusRankLoss, std::move(values));
}

int cmd_sweep(const Overrides& o, const std::string& mode) {
  const RunConfig c = resolve(o);
  std::ostringstream csv;
  if (mode == "lambda") {
    if (c.lambda_grid.empty()) throw UsageError("sweep: empty lambda grid");
    const auto data = load(c);
    csv << "lambda1,lambda2,one_minus_rankloss_mean,one_minus_rankloss_std\n";
    for (double l1 : c.lambda_grid) {
      for (double l2 : c.lambda_grid) {
        SolverConfig s = c.solver;
        s.lambda1 = l1;
        s.lambda2 = l2;
        const auto m = rankloss_over_repeats(data, c, s);
        csv << io::format_double(l1) << ',' << io::format_double(l2) << ','
            << io::format_double(m.mean) << ',' << io::format_double(m.stddev)
            << '\n';
        std::cout << "lambda1=" << io::format_double(l1)
                  << " lambda2=" << io::format_double(l2) << "  "
                  << mean_pm_std(m) << '\n';
      }
    }
  } else if (mode == "d") {
    std::vector<Index> grid = c.d_grid;
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    if (grid.empty()) throw UsageError("sweep: empty d grid");
    for (Index d : grid)
      if (d < 1) throw UsageError("sweep: d values must be >= 1");
    const auto data = load(c);
    csv << "rank_d,one_minus_rankloss_mean,one_minus_rankloss_std\n";
    for (Index d : grid) {
      SolverConfig s = c.solver;
      s.rank_d = d;
      const auto m = rankloss_over_repeats(data, c, s);
      csv << d << ',' << io::format_double(m.mean) << ','
          << io::format_double(m.stddev) << '\n';
      std::cout << "d=" << d << "  " << mean_pm_std(m) << '\n';
    }
  } else {
    throw UsageError("sweep: --mode must be 'lambda' or 'd'");
  }
  check_csv(csv.str(), 0, "sweep");
  write_file(fs::path(c.output_dir) / ("sweep_" + mode + ".csv"), csv.str());
  return kExitOk;
}

int cmd_noise(const Overrides& o) {
  const RunConfig c = resolve(o);
  const auto data = load(c);
  Json runs = Json::array();
  std::ostringstream csv;
  std::vector<double> clean, noisy, mass;
  Index n_weights = 0;
  for (int r = 0; r < c.repeats; ++r) {
    const auto split = partition(data, c.train_fraction, partition_seed(c, r));
    const SolverConfig s = solver_for(c, r);
    const HeteroNetwork net = build_network(data, split, s);
    const Index valid = net.n_bag_views();
    const auto clean_run = run_on_network(data, net, split, s);
    const HeteroNetwork noisy_net = net.with_extra_bag_views(make_noisy_bag_views(
        net, c.n_noisy,
        c.noise_seed + static_cast<std::uint64_t>(r * c.n_noisy)));
    const auto noisy_run = run_on_network(data, noisy_net, split, s);
    const Vector& alpha = noisy_run.fit.model.alpha;
    const double noisy_mass = alpha.tail(alpha.size() - valid).sum();
    const double rl_clean = bag_metrics(data, clean_run.bag_scores, split.test,
                                        clean_run.train_cardinality)
                                .front()
                                .second;
    const double rl_noisy = bag_metrics(data, noisy_run.bag_scores, split.test,
                                        noisy_run.train_cardinality)
                                .front()
                                .second;
    clean.push_back(rl_clean);
    noisy.push_back(rl_noisy);
    mass.push_back(noisy_mass);
    runs.push_back(Json{{"repeat", r},
                        {"alpha", io::vector_to_json(alpha)},
                        {"noisy_alpha_mass", noisy_mass},
                        {"one_minus_rankloss_clean", rl_clean},
                        {"one_minus_rankloss_noisy", rl_noisy}});
    if (r == 0) {
      n_weights = alpha.size();
      csv << "repeat";
      for (Index k = 0; k < n_weights; ++k)
        csv << ",alpha_" << k << (k < valid ? "_valid" : "_noisy");
      csv << '\n';
    }
    csv << r;
    for (Index k = 0; k < alpha.size(); ++k)
      csv << ',' << io::format_double(alpha(k));
    csv << '\n';
  }
  const auto s_clean = summarize(kOneMinusRankLoss, clean);
  const auto s_noisy = summarize(kOneMinusRankLoss, noisy);
  const auto s_mass = summarize("noisy_alpha_mass", mass);
  const Json report{
      {"n_noisy", c.n_noisy},
      {"n_weights", n_weights},
      {"runs", runs},
      {"summary",
       {{"one_minus_rankloss_clean", {{"mean", s_clean.mean}, {"std", s_clean.stddev}}},
        {"one_minus_rankloss_noisy", {{"mean", s_noisy.mean}, {"std", s_noisy.stddev}}},
        {"noisy_alpha_mass", {{"mean", s_mass.mean}, {"std", s_mass.stddev}}}}}};
  check_csv(csv.str(), 0, "noise weights");
  const fs::path out = c.output_dir;
  write_json(out / "noise_report.json", report);
  write_file(out / "noise_alpha.csv", csv.str());
  std::cout << n_weights << " bag-view weights (" << c.n_noisy << " noisy)\n"
            << "  noisy alpha mass       " << mean_pm_std(s_mass) << '\n'
            << "  1-RankLoss, no noise   " << mean_pm_std(s_clean) << '\n'
            << "  1-RankLoss, with noise " << mean_pm_std(s_noisy) << '\n';
  return kExitOk;
}

struct GenArgs {
  std::string out;
  SyntheticSpec spec;
};

int cmd_gen(const GenArgs& a) {
  const auto syn = gen_synthetic(a.spec);
  save_dataset(syn.dataset, a.out);
  write_json(fs::path(a.out) / "planted.json", m3lcmf::to_json(syn.planted));
  std::cout << "wrote " << syn.dataset.n_bags() << " bags, "
            << syn.dataset.n_instances() << " instances, "
            << syn.dataset.n_labels() << " labels, " << syn.dataset.n_views()
            << " views to " << a.out << '\n';
  return kExitOk;
}

int cmd_validate(const std::string& path) {
  const auto data = load_dataset(path);
  std::vector<Index> all(static_cast<std::size_t>(data.n_bags()));
  for (Index b = 0; b < data.n_bags(); ++b) all[static_cast<std::size_t>(b)] = b;
  if (data.n_bags() >= 2 && data.n_instances() >= 2) assemble_network(data, all);
  std::cout << path << ": ok\n"
            << "  bags " << data.n_bags() << ", instances "
            << data.n_instances() << ", labels " << data.n_labels()
            << ", views " << data.n_views() << '\n';
  for (Index v = 0; v < data.n_views(); ++v)
    std::cout << "  view " << v << ": " << data.view(v).cols()
              << " features\n";
  std::cout << "  labels per bag " << fmt3(label_cardinality(data.bag_labels()))
            << (data.has_instance_labels() ? ", instance labels present\n"
                                           : "\n");
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-view multi-instance multi-label collaborative matrix "
               "factorization"};
  app.require_subcommand(1);

  Overrides train_o, ablate_o, sweep_o, noise_o;
  auto* train = app.add_subcommand("train", "fit and write checkpoints");
  add_common(train, train_o);

  EvaluateArgs eval_a;
  auto* evaluate =
      app.add_subcommand("evaluate", "score checkpoints on their test bags");
  evaluate->add_option("--checkpoint", eval_a.checkpoints, "checkpoint JSON")
      ->required();
  evaluate->add_option("-d,--dataset", eval_a.dataset,
                       "dataset directory (default: from checkpoint)");
  evaluate->add_option("--level", eval_a.level, "bag or instance");
  evaluate->add_option("-o,--out", eval_a.out, "report JSON path");

  auto* ablate = app.add_subcommand("ablate", "compare relation ablations");
  add_common(ablate, ablate_o);

  std::string sweep_mode = "lambda";
  auto* sweep = app.add_subcommand("sweep", "parameter sensitivity grid");
  add_common(sweep, sweep_o);
  sweep->add_option("--mode", sweep_mode, "lambda or d");

  auto* noise = app.add_subcommand("noise", "robustness to noisy bag views");
  add_common(noise, noise_o);
  noise->add_option("--n-noisy", noise_o.n_noisy, "noisy bag views to add");

  GenArgs gen_a;
  auto* gen = app.add_subcommand("gen", "write a synthetic dataset");
  gen->add_option("-o,--out", gen_a.out, "output directory")->required();
  gen->add_option("--n-bags", gen_a.spec.n_bags);
  gen->add_option("--min-instances", gen_a.spec.min_instances);
  gen->add_option("--max-instances", gen_a.spec.max_instances);
  gen->add_option("--n-labels", gen_a.spec.n_labels);
  gen->add_option("--n-views", gen_a.spec.n_views);
  gen->add_option("--rank", gen_a.spec.rank);
  gen->add_option("--features", gen_a.spec.features_per_view);
  gen->add_option("--noise", gen_a.spec.noise);
  gen->add_option("--seed", gen_a.spec.seed);

  std::string validate_path;
  auto* validate_cmd = app.add_subcommand("validate", "lint a dataset");
  validate_cmd->add_option("dataset", validate_path, "dataset directory")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*train) return cmd_train(train_o);
    if (*evaluate) return cmd_evaluate(eval_a);
    if (*ablate) return cmd_ablate(ablate_o);
    if (*sweep) return cmd_sweep(sweep_o, sweep_mode);
    if (*noise) return cmd_noise(noise_o);
    if (*gen) return cmd_gen(gen_a);
    if (*validate_cmd) return cmd_validate(validate_path);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const InvalidArgument& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}
