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
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <vector>

namespace m3lcmf {

// Heterogeneous network construction: Gaussian instance kernels, composite
// Hausdorff bag kernels, cosine label correlation and the inter-relation
// matrices.

/// Pairwise Euclidean distances between the rows of `x`.
inline Matrix pairwise_distances(const Matrix& x) {
  const Index m = x.rows();
  // Row-major copy so each instance is contiguous.
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>
      rows = x;
  Matrix dist(m, m);
  for (Index j = 0; j < m; ++j) {
    dist(j, j) = 0.0;
    for (Index i = j + 1; i < m; ++i)
      dist(i, j) = dist(j, i) = (rows.row(i) - rows.row(j)).norm();
  }
  return dist;
}

/// Mean of the strictly upper triangle of a square matrix.
inline double mean_off_diagonal(const Matrix& d) {
  const Index n = d.rows();
  double sum = 0.0;
  for (Index j = 1; j < n; ++j)
    for (Index i = 0; i < j; ++i) sum += d(i, j);
  return sum / (0.5 * static_cast<double>(n) * static_cast<double>(n - 1));
}

/// Gaussian heat kernel between instances of one view:
/// exp(-||x_i - x_j||^2 / sigma^2), sigma = mean pairwise distance (i < j).
inline Matrix instance_similarity(const Matrix& features) {
  detail::require(features.rows() >= 2,
                  "instance_similarity: at least two instances are required");
  detail::require(features.allFinite(),
                  "instance_similarity: features must be finite");
  const Matrix dist = pairwise_distances(features);
  const double sigma = mean_off_diagonal(dist);
  if (!(sigma > 0.0)) throw DataError("degenerate view: zero dispersion");
  const double s2 = sigma * sigma;
  Matrix sim(dist.rows(), dist.cols());
  for (Index j = 0; j < dist.cols(); ++j)
    for (Index i = 0; i < dist.rows(); ++i)
      sim(i, j) = std::exp(-(dist(i, j) * dist(i, j)) / s2);
  return sim;
}

/// The three Hausdorff variants between two bags.
struct HausdorffParts {
  double average = 0.0;
  double maximal = 0.0;
  double minimal = 0.0;

  double composite() const { return (average + maximal + minimal) / 3.0; }
};

/// Hausdorff variants from the |A| x |B| block of instance distances.
template <typename Derived>
HausdorffParts hausdorff_from_distances(const Eigen::MatrixBase<Derived>& d) {
  if (d.rows() == 0 || d.cols() == 0)
    throw InvalidArgument("composite_hausdorff: bags must be non-empty");
  const Vector a_to_b = d.rowwise().minCoeff();
  const Vector b_to_a = d.colwise().minCoeff().transpose();
  HausdorffParts h;
  h.average = (a_to_b.sum() + b_to_a.sum()) /
              static_cast<double>(d.rows() + d.cols());
  h.maximal = std::max(a_to_b.maxCoeff(), b_to_a.maxCoeff());
  h.minimal = d.minCoeff();
  return h;
}

/// Composite Hausdorff distance: the mean of the average, maximal and minimal
/// Hausdorff distances. Rows of `bag_a` and `bag_b` are instances.
inline double composite_hausdorff(const Matrix& bag_a, const Matrix& bag_b) {
  if (bag_a.rows() == 0 || bag_b.rows() == 0)
    throw InvalidArgument("composite_hausdorff: bags must be non-empty");
  detail::require(bag_a.cols() == bag_b.cols(),
                  "composite_hausdorff: feature dimensions differ");
  Matrix d(bag_a.rows(), bag_b.rows());
  for (Index j = 0; j < bag_b.rows(); ++j)
    for (Index i = 0; i < bag_a.rows(); ++i)
      d(i, j) = (bag_a.row(i) - bag_b.row(j)).norm();
  return hausdorff_from_distances(d).composite();
}

/// Composite Hausdorff distances between all bag pairs of one view.
inline Matrix bag_distances(const MultiViewMimlDataset& data, Index view) {
  const Index n = data.n_bags();
  const Matrix inst = pairwise_distances(data.view(view));
  Matrix h = Matrix::Zero(n, n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = j + 1; i < n; ++i) {
      const auto block = inst.block(data.bag_offset(i), data.bag_offset(j),
                                    data.bag_size(i), data.bag_size(j));
      h(i, j) = h(j, i) = hausdorff_from_distances(block).composite();
    }
  }
  return h;
}

/// Bag kernel exp(-H(i,j) / sigma_H^2), sigma_H = mean composite Hausdorff
/// distance over bag pairs i < j. The exponent uses H itself, not H^2.
inline Matrix bag_similarity(const MultiViewMimlDataset& data, Index view) {
  detail::require(data.n_bags() >= 2,
                  "bag_similarity: at least two bags are required");
  detail::require(view >= 0 && view < data.n_views(),
                  "bag_similarity: view index out of range");
  const Matrix h = bag_distances(data, view);
  const double sigma = mean_off_diagonal(h);
  if (!(sigma > 0.0)) throw DataError("degenerate view: zero bag dispersion");
  const double s2 = sigma * sigma;
  Matrix sim = (-h.array() / s2).exp().matrix();
  sim.diagonal().setOnes();
  return sim;
}

/// Cosine similarity between label columns. A label that never occurs is
/// uncorrelated with every other label and has self-correlation 1.
inline Matrix label_correlation(const Matrix& labels) {
  detail::require(labels.cols() >= 1,
                  "label_correlation: at least one label is required");
  const Index q = labels.cols();
  const Vector norms = labels.colwise().norm().transpose();
  const Matrix dots = labels.transpose() * labels;
  Matrix r(q, q);
  for (Index b = 0; b < q; ++b) {
    for (Index a = 0; a < q; ++a) {
      if (a == b) {
        r(a, b) = 1.0;
      } else if (norms(a) == 0.0 || norms(b) == 0.0) {
        r(a, b) = 0.0;
      } else {
        r(a, b) = std::clamp(dots(a, b) / (norms(a) * norms(b)), 0.0, 1.0);
      }
    }
  }
  // Enforce exact symmetry regardless of floating-point evaluation order.
  for (Index b = 0; b < q; ++b)
    for (Index a = b + 1; a < q; ++a) r(b, a) = r(a, b);
  return r;
}

/// Binary n x m membership matrix: entry (i, k) is 1 iff bag i holds
/// instance k.
inline Matrix membership_matrix(const MultiViewMimlDataset& data) {
  Matrix r12 = Matrix::Zero(data.n_bags(), data.n_instances());
  const auto& owner = data.bag_of_instance();
  for (Index k = 0; k < data.n_instances(); ++k)
    r12(owner[static_cast<std::size_t>(k)], k) = 1.0;
  return r12;
}

/// Builds the full network. Only the label rows of `train_bags` are visible:
/// the bag-label matrix has all other rows zeroed and the label correlation
/// is estimated from training rows alone. Instance-label relations start at
/// zero.
inline HeteroNetwork assemble_network(const MultiViewMimlDataset& data,
                                      std::span<const Index> train_bags) {
  const Index n = data.n_bags();
  Matrix r13 = Matrix::Zero(n, data.n_labels());
  for (Index b : train_bags) {
    detail::require(b >= 0 && b < n,
                    "assemble_network: training bag index out of range");
    r13.row(b) = data.bag_labels().row(b);
  }
  std::vector<Matrix> bags;
  std::vector<Matrix> instances;
  for (Index v = 0; v < data.n_views(); ++v) {
    bags.push_back(bag_similarity(data, v));
    instances.push_back(instance_similarity(data.view(v)));
  }
  return HeteroNetwork(std::move(bags), std::move(instances),
                       label_correlation(r13), membership_matrix(data), r13,
                       Matrix::Zero(data.n_instances(), data.n_labels()));
}

/// Destroys the structure of a relation matrix: the nonzero values of each
/// row are permuted uniformly at random among that row's nonzero positions.
/// Zero pattern, row sums and row value multisets are preserved; the result
/// is in general not symmetric.
inline Matrix make_noisy_view(const Matrix& intra, std::uint64_t seed) {
  detail::require(intra.rows() == intra.cols(),
                  "make_noisy_view: matrix must be square");
  std::mt19937_64 rng(seed);
  Matrix out = intra;
  std::vector<Index> pos;
  std::vector<double> vals;
  for (Index i = 0; i < intra.rows(); ++i) {
    pos.clear();
    vals.clear();
    for (Index j = 0; j < intra.cols(); ++j) {
      if (intra(i, j) != 0.0) {
        pos.push_back(j);
        vals.push_back(intra(i, j));
      }
    }
    std::shuffle(vals.begin(), vals.end(), rng);
    for (std::size_t k = 0; k < pos.size(); ++k) out(i, pos[k]) = vals[k];
  }
  return out;
}

/// Symmetric part (W + W^T) / 2, used to give a shuffled relation matrix a
/// positive semidefinite graph Laplacian before it enters the network.
inline Matrix symmetrized(const Matrix& w) {
  Matrix s = 0.5 * (w + w.transpose());
  for (Index j = 0; j < s.cols(); ++j)
    for (Index i = j + 1; i < s.rows(); ++i) s(j, i) = s(i, j);
  return s;
}

}  // namespace m3lcmf
