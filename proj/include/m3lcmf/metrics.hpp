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

#include "m3lcmf/core.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

namespace m3lcmf {

// Example-based and label-based multi-label metrics. Pair counts treat ties
// as half-concordant.

namespace detail {

inline void check_same_shape(const Matrix& a, const Matrix& b,
                             const char* what) {
  require(a.rows() == b.rows() && a.cols() == b.cols(),
          std::string(what) + ": score and truth shapes differ");
}

/// Probability that a random positive outranks a random negative, from the
/// rank-sum of the positives with mid-ranks for ties. O(r log r).
template <typename Scores, typename Truth>
double rank_auc(const Scores& scores, const Truth& truth, Index positives) {
  const Index r = scores.size();
  std::vector<Index> order(static_cast<std::size_t>(r));
  std::iota(order.begin(), order.end(), Index{0});
  std::sort(order.begin(), order.end(),
            [&](Index a, Index b) { return scores(a) < scores(b); });
  double pos_rank_sum = 0.0;
  for (Index start = 0; start < r;) {
    Index end = start;
    while (end < r && scores(order[static_cast<std::size_t>(end)]) ==
                          scores(order[static_cast<std::size_t>(start)]))
      ++end;
    const double mid_rank = 0.5 * static_cast<double>(start + end + 1);
    for (Index k = start; k < end; ++k)
      if (truth(order[static_cast<std::size_t>(k)]) != 0.0)
        pos_rank_sum += mid_rank;
    start = end;
  }
  const double p = static_cast<double>(positives);
  const double n = static_cast<double>(r - positives);
  return (pos_rank_sum - p * (p + 1.0) / 2.0) / (p * n);
}

}  // namespace detail

/// 1 - ranking loss. The ranking loss of a row is the fraction of
/// (relevant, irrelevant) label pairs where the irrelevant label scores
/// higher; rows without relevant or without irrelevant labels are skipped.
inline double one_minus_rankloss(const Matrix& scores, const Matrix& truth) {
  detail::check_same_shape(scores, truth, "one_minus_rankloss");
  double loss = 0.0;
  Index rows = 0;
  for (Index i = 0; i < scores.rows(); ++i) {
    const Index pos = static_cast<Index>((truth.row(i).array() != 0.0).count());
    if (pos == 0 || pos == truth.cols()) continue;
    // A misordered pair is the complement of a concordant one.
    loss += 1.0 - detail::rank_auc(scores.row(i), truth.row(i), pos);
    ++rows;
  }
  if (rows == 0) throw DataError("rankloss undefined: no evaluable rows");
  return 1.0 - loss / static_cast<double>(rows);
}

/// Mean over labels of the column-wise AUC. Labels whose column is all
/// positive or all negative are excluded.
inline double macro_auc(const Matrix& scores, const Matrix& truth) {
  detail::check_same_shape(scores, truth, "macro_auc");
  double sum = 0.0;
  Index labels = 0;
  for (Index c = 0; c < scores.cols(); ++c) {
    const Index pos = static_cast<Index>((truth.col(c).array() != 0.0).count());
    if (pos == 0 || pos == truth.rows()) continue;
    sum += detail::rank_auc(scores.col(c), truth.col(c), pos);
    ++labels;
  }
  if (labels == 0) throw DataError("macro AUC undefined: no evaluable labels");
  return sum / static_cast<double>(labels);
}

/// Example-based recall |pred & truth| / |truth|, rows with empty truth
/// skipped.
inline double avg_recall(const Matrix& pred, const Matrix& truth) {
  detail::check_same_shape(pred, truth, "avg_recall");
  double sum = 0.0;
  Index rows = 0;
  for (Index i = 0; i < truth.rows(); ++i) {
    const auto t = truth.row(i).array() != 0.0;
    const auto p = pred.row(i).array() != 0.0;
    const double nt = static_cast<double>(t.count());
    if (nt == 0.0) continue;
    sum += static_cast<double>((t && p).count()) / nt;
    ++rows;
  }
  if (rows == 0) throw DataError("recall undefined: every truth row is empty");
  return sum / static_cast<double>(rows);
}

/// Example-based F1 2|pred & truth| / (|pred| + |truth|). Rows where both
/// sets are empty are skipped.
inline double avg_f1(const Matrix& pred, const Matrix& truth) {
  detail::check_same_shape(pred, truth, "avg_f1");
  double sum = 0.0;
  Index rows = 0;
  for (Index i = 0; i < truth.rows(); ++i) {
    const auto t = truth.row(i).array() != 0.0;
    const auto p = pred.row(i).array() != 0.0;
    const double denom = static_cast<double>(t.count() + p.count());
    if (denom == 0.0) continue;
    sum += 2.0 * static_cast<double>((t && p).count()) / denom;
    ++rows;
  }
  if (rows == 0) throw DataError("F1 undefined: every row is empty");
  return sum / static_cast<double>(rows);
}

}  // namespace m3lcmf
