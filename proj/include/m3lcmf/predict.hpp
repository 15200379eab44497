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
#include <cmath>
#include <numeric>
#include <vector>

namespace m3lcmf {

/// Instance-label scores G2 G3^T.
inline Matrix predict_instance_labels(const FactorModel& model) {
  detail::require(model.g2.cols() == model.g3.cols(),
                  "predict: factor ranks differ");
  return model.g2 * model.g3.transpose();
}

/// Bag-label scores from a bag-averaging matrix diag(1/n_i) R12 (n x m).
/// Each bag's row is the mean of its instances' score rows.
inline Matrix predict_bag_labels(const FactorModel& model,
                                 const Matrix& averaging,
                                 const Ablation& ablation = {}) {
  if (ablation.no_instance_label_relation)
    return model.g1 * model.g3.transpose();
  detail::require(averaging.cols() == model.g2.rows(),
                  "predict: averaging matrix must have m columns");
  return averaging * predict_instance_labels(model);
}

inline Matrix predict_bag_labels(const FactorModel& model,
                                 const HeteroNetwork& net,
                                 const Ablation& ablation = {}) {
  return predict_bag_labels(model, net.averaging(), ablation);
}

/// Top-k binarization with k = round(train_cardinality), clamped to q.
/// Ties go to the lower label index; an all-zero score row stays all zero.
inline Matrix binarize(const Matrix& scores, double train_cardinality) {
  detail::require(train_cardinality >= 0.0 && std::isfinite(train_cardinality),
                  "binarize: label cardinality must be finite and >= 0");
  const Index q = scores.cols();
  const Index k =
      std::min<Index>(q, static_cast<Index>(std::llround(train_cardinality)));
  Matrix out = Matrix::Zero(scores.rows(), q);
  std::vector<Index> order(static_cast<std::size_t>(q));
  for (Index i = 0; i < scores.rows(); ++i) {
    if ((scores.row(i).array() == 0.0).all()) continue;
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
      return scores(i, a) > scores(i, b);
    });
    for (Index r = 0; r < k; ++r) out(i, order[static_cast<std::size_t>(r)]) = 1.0;
  }
  return out;
}

/// Mean number of positive labels per row.
inline double label_cardinality(const Matrix& labels) {
  detail::require(labels.rows() >= 1, "label_cardinality: empty matrix");
  return labels.sum() / static_cast<double>(labels.rows());
}

}  // namespace m3lcmf
