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

#pragma once

// Transductive train/evaluate protocol shared by the CLI and the acceptance
// suite. Test bags and their instances take part in network construction and
// factorization; only their label rows are withheld.

#include "m3lcmf/core.hpp"
#include "m3lcmf/dataio.hpp"
#include "m3lcmf/metrics.hpp"
#include "m3lcmf/network.hpp"
#include "m3lcmf/predict.hpp"
#include "m3lcmf/solver.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace m3lcmf {

inline constexpr const char* kOneMinusRankLoss = "one_minus_rankloss";
inline constexpr const char* kMacroAuc = "macro_auc";
inline constexpr const char* kAvgRecall = "avg_recall";
inline constexpr const char* kAvgF1 = "avg_f1";

/// Everything produced by one fit on one partition.
struct PartitionRun {
  Partition split;
  FitResult fit;
  SolverConfig config;
  double train_cardinality = 0.0;
  Matrix bag_scores;       // n x q
  Matrix instance_scores;  // m x q
};

/// `n_noisy` row-shuffled copies of the network's bag similarity matrices,
/// cycling through the valid views. Each copy is symmetrized before use.
inline std::vector<Matrix> make_noisy_bag_views(const HeteroNetwork& net,
                                                Index n_noisy,
                                                std::uint64_t seed) {
  std::vector<Matrix> out;
  const auto& valid = net.bag_similarity();
  for (Index k = 0; k < n_noisy; ++k) {
    const Matrix& src = valid[static_cast<std::size_t>(k) % valid.size()];
    out.push_back(
        symmetrized(make_noisy_view(src, seed + static_cast<std::uint64_t>(k))));
  }
  return out;
}

/// Network for a partition, optionally with known instance labels of the
/// training bags when the config asks for them.
inline HeteroNetwork build_network(const MultiViewMimlDataset& data,
                                   const Partition& split,
                                   const SolverConfig& cfg) {
  HeteroNetwork net = assemble_network(data, split.train);
  if (cfg.use_instance_labels && data.has_instance_labels()) {
    Vector mask = Vector::Zero(data.n_instances());
    for (Index k : instances_of(data, split.train)) mask(k) = 1.0;
    net = net.with_instance_labels(*data.instance_labels(), mask);
  }
  return net;
}

/// Fits on a prepared network and scores every bag and instance.
inline PartitionRun run_on_network(const MultiViewMimlDataset& data,
                                   const HeteroNetwork& net,
                                   const Partition& split,
                                   const SolverConfig& cfg) {
  PartitionRun run;
  run.split = split;
  run.config = cfg;
  run.fit = fit(net, cfg);
  run.train_cardinality =
      label_cardinality(select_rows(data.bag_labels(), split.train));
  run.instance_scores = predict_instance_labels(run.fit.model);
  run.bag_scores = predict_bag_labels(run.fit.model, net, cfg.ablation);
  return run;
}

inline PartitionRun run_partition(const MultiViewMimlDataset& data,
                                  const Partition& split,
                                  const SolverConfig& cfg) {
  return run_on_network(data, build_network(data, split, cfg), split, cfg);
}

/// Bag-level metrics on the test bags: all four.
inline std::vector<std::pair<std::string, double>> bag_metrics(
    const MultiViewMimlDataset& data, const Matrix& bag_scores,
    const std::vector<Index>& test_bags, double train_cardinality) {
  const Matrix scores = select_rows(bag_scores, test_bags);
  const Matrix truth = select_rows(data.bag_labels(), test_bags);
  const Matrix pred = binarize(scores, train_cardinality);
  return {{kOneMinusRankLoss, one_minus_rankloss(scores, truth)},
          {kMacroAuc, macro_auc(scores, truth)},
          {kAvgRecall, avg_recall(pred, truth)},
          {kAvgF1, avg_f1(pred, truth)}};
}

/// Instance-level metrics on the instances of the test bags: 1-RankLoss and
/// AvgF1. Top-k uses the mean label count of training-bag instances.
inline std::vector<std::pair<std::string, double>> instance_metrics(
    const MultiViewMimlDataset& data, const Matrix& instance_scores,
    const Partition& split) {
  if (!data.has_instance_labels())
    throw InvalidArgument(
        "instance-level evaluation requires instance labels");
  const auto test = instances_of(data, split.test);
  const auto train = instances_of(data, split.train);
  const Matrix scores = select_rows(instance_scores, test);
  const Matrix truth = select_rows(*data.instance_labels(), test);
  const double k =
      label_cardinality(select_rows(*data.instance_labels(), train));
  const Matrix pred = binarize(scores, k);
  return {{kOneMinusRankLoss, one_minus_rankloss(scores, truth)},
          {kAvgF1, avg_f1(pred, truth)}};
}

/// Collects per-run metric lists into an EvaluationReport.
inline EvaluationReport make_report(
    std::string level,
    const std::vector<std::vector<std::pair<std::string, double>>>& runs,
    const SolverConfig& cfg, std::vector<std::uint64_t> seeds,
    double train_fraction) {
  EvaluationReport r;
  r.level = std::move(level);
  r.config = cfg;
  r.seeds = std::move(seeds);
  r.train_fraction = train_fraction;
  if (!runs.empty()) {
    for (std::size_t k = 0; k < runs.front().size(); ++k) {
      std::vector<double> values;
      for (const auto& run : runs) values.push_back(run.at(k).second);
      r.metrics.push_back(summarize(runs.front()[k].first, std::move(values)));
    }
  }
  r.validate();
  return r;
}

/// The five relation variants compared by the ablation study.
inline const std::vector<std::string>& ablation_variants() {
  static const std::vector<std::string> names = {"full", "nR11", "nR22",
                                                 "nR33", "nR23"};
  return names;
}

}  // namespace m3lcmf
