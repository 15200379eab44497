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

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace m3lcmf {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// ----------------------------------------------------------------------------
// Errors
// ----------------------------------------------------------------------------

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A value violates a documented invariant or precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Input data is malformed, inconsistent or degenerate.
class DataError : public Error {
 public:
  using Error::Error;
};

/// The optimizer produced a non-finite value.
class NumericalError : public Error {
 public:
  using Error::Error;
};

namespace detail {

inline void require(bool condition, std::string_view message) {
  if (!condition) throw InvalidArgument(std::string(message));
}

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

inline bool is_binary(const Matrix& m) {
  for (Index j = 0; j < m.cols(); ++j)
    for (Index i = 0; i < m.rows(); ++i)
      if (m(i, j) != 0.0 && m(i, j) != 1.0) return false;
  return true;
}

/// Shape-checked exact equality.
template <typename A, typename B>
bool same_matrix(const A& a, const B& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && a == b;
}

inline std::string shape_str(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

}  // namespace detail

// ----------------------------------------------------------------------------
// MultiViewMimlDataset
// ----------------------------------------------------------------------------

/// Bags of instances described by V feature views and annotated with q labels.
///
/// Instances are stored in canonical order: the instances of bag 0 first, then
/// those of bag 1, and so on. Every view indexes the same m instances in that
/// order. The constructor validates all invariants and throws InvalidArgument
/// naming the first violated condition.
class MultiViewMimlDataset {
 public:
  MultiViewMimlDataset() = default;

  /// `bag_sizes[i]` is the number of instances of bag i.
  MultiViewMimlDataset(std::vector<Matrix> views, std::vector<Index> bag_sizes,
                       Matrix bag_labels,
                       std::optional<Matrix> instance_labels = std::nullopt,
                       std::vector<std::string> label_names = {})
      : views_(std::move(views)),
        bag_sizes_(std::move(bag_sizes)),
        bag_labels_(std::move(bag_labels)),
        instance_labels_(std::move(instance_labels)),
        label_names_(std::move(label_names)) {
    using detail::require;
    require(!bag_sizes_.empty(), "dataset: at least one bag is required");
    require(!views_.empty(), "dataset: at least one view is required");
    Index m = 0;
    for (std::size_t i = 0; i < bag_sizes_.size(); ++i) {
      require(bag_sizes_[i] >= 1,
              "dataset: bag " + std::to_string(i) + " has no instances");
      bag_of_instance_.insert(bag_of_instance_.end(),
                              static_cast<std::size_t>(bag_sizes_[i]),
                              static_cast<Index>(i));
      bag_offsets_.push_back(m);
      m += bag_sizes_[i];
    }
    for (std::size_t v = 0; v < views_.size(); ++v) {
      require(views_[v].rows() == m,
              "dataset: view " + std::to_string(v) + " has " +
                  std::to_string(views_[v].rows()) +
                  " rows but bag sizes sum to " + std::to_string(m));
      require(views_[v].cols() >= 1,
              "dataset: view " + std::to_string(v) + " has no features");
      require(detail::all_finite(views_[v]),
              "dataset: view " + std::to_string(v) + " has non-finite values");
    }
    require(bag_labels_.rows() == n_bags(),
            "dataset: bag label rows must equal the number of bags");
    require(bag_labels_.cols() >= 1, "dataset: at least one label is required");
    require(detail::is_binary(bag_labels_),
            "dataset: bag labels must be 0/1");
    if (instance_labels_) {
      require(instance_labels_->rows() == m &&
                  instance_labels_->cols() == bag_labels_.cols(),
              "dataset: instance labels must be m x q");
      require(detail::is_binary(*instance_labels_),
              "dataset: instance labels must be 0/1");
    }
    if (label_names_.empty()) {
      for (Index c = 0; c < n_labels(); ++c)
        label_names_.push_back("label_" + std::to_string(c));
    }
    require(static_cast<Index>(label_names_.size()) == n_labels(),
            "dataset: label name count must equal q");
  }

  Index n_bags() const { return static_cast<Index>(bag_sizes_.size()); }
  Index n_instances() const {
    return static_cast<Index>(bag_of_instance_.size());
  }
  Index n_labels() const { return bag_labels_.cols(); }
  Index n_views() const { return static_cast<Index>(views_.size()); }

  const std::vector<Matrix>& views() const { return views_; }
  const Matrix& view(Index v) const {
    return views_.at(static_cast<std::size_t>(v));
  }
  const std::vector<Index>& bag_sizes() const { return bag_sizes_; }
  Index bag_size(Index bag) const {
    return bag_sizes_.at(static_cast<std::size_t>(bag));
  }
  /// First instance index of `bag`.
  Index bag_offset(Index bag) const {
    return bag_offsets_.at(static_cast<std::size_t>(bag));
  }
  const std::vector<Index>& bag_of_instance() const { return bag_of_instance_; }
  const Matrix& bag_labels() const { return bag_labels_; }
  const std::optional<Matrix>& instance_labels() const {
    return instance_labels_;
  }
  bool has_instance_labels() const { return instance_labels_.has_value(); }
  const std::vector<std::string>& label_names() const { return label_names_; }

  /// Rows of view `v` belonging to `bag`.
  auto bag_rows(Index v, Index bag) const {
    return view(v).middleRows(bag_offset(bag), bag_size(bag));
  }

  friend bool operator==(const MultiViewMimlDataset& a,
                         const MultiViewMimlDataset& b) {
    if (a.views_.size() != b.views_.size()) return false;
    for (std::size_t v = 0; v < a.views_.size(); ++v)
      if (!detail::same_matrix(a.views_[v], b.views_[v])) return false;
    if (a.instance_labels_.has_value() != b.instance_labels_.has_value())
      return false;
    if (a.instance_labels_ &&
        !detail::same_matrix(*a.instance_labels_, *b.instance_labels_))
      return false;
    return a.bag_sizes_ == b.bag_sizes_ &&
           detail::same_matrix(a.bag_labels_, b.bag_labels_) &&
           a.label_names_ == b.label_names_;
  }

 private:
  std::vector<Matrix> views_;
  std::vector<Index> bag_sizes_;
  std::vector<Index> bag_offsets_;
  std::vector<Index> bag_of_instance_;
  Matrix bag_labels_;
  std::optional<Matrix> instance_labels_;
  std::vector<std::string> label_names_;
};

// ----------------------------------------------------------------------------
// HeteroNetwork
// ----------------------------------------------------------------------------

/// Intra- and inter-relational matrices of the bag/instance/label network.
///
/// Bag-bag similarity matrices (one per bag view) regularize the bag factors
/// and are weighted by alpha; instance-instance matrices (one per instance
/// view) regularize the instance factors and are weighted by beta. Degree
/// matrices and the bag-averaging diagonal are derived, never stored
/// independently.
class HeteroNetwork {
 public:
  HeteroNetwork() = default;

  HeteroNetwork(std::vector<Matrix> bag_similarity,
                std::vector<Matrix> instance_similarity,
                Matrix label_correlation, Matrix bag_instance,
                Matrix bag_label, Matrix instance_label)
      : bag_sim_(std::move(bag_similarity)),
        inst_sim_(std::move(instance_similarity)),
        label_corr_(std::move(label_correlation)),
        r12_(std::move(bag_instance)),
        r13_(std::move(bag_label)),
        r23_(std::move(instance_label)) {
    using detail::require;
    const Index n = r12_.rows();
    const Index m = r12_.cols();
    const Index q = r13_.cols();
    require(n >= 1 && m >= 1 && q >= 1, "network: empty relation matrix");
    require(!bag_sim_.empty(), "network: at least one bag view is required");
    require(!inst_sim_.empty(),
            "network: at least one instance view is required");
    require(r13_.rows() == n, "network: bag-label matrix must be n x q");
    require(r23_.rows() == m && r23_.cols() == q,
            "network: instance-label matrix must be m x q");
    require(detail::is_binary(r12_), "network: bag-instance matrix must be 0/1");
    require(r13_.allFinite() && r13_.minCoeff() >= 0.0,
            "network: bag-label matrix must be finite and nonnegative");
    require(r23_.allFinite() && r23_.minCoeff() >= 0.0,
            "network: instance-label matrix must be finite and nonnegative");
    for (Index k = 0; k < m; ++k)
      require(r12_.col(k).sum() == 1.0,
              "network: instance " + std::to_string(k) +
                  " must belong to exactly one bag");
    lambda_diag_.resize(n);
    for (Index i = 0; i < n; ++i) {
      const double size = r12_.row(i).sum();
      require(size >= 1.0,
              "network: bag " + std::to_string(i) + " has no instances");
      lambda_diag_(i) = 1.0 / size;
    }
    for (std::size_t v = 0; v < bag_sim_.size(); ++v)
      check_similarity(bag_sim_[v], n, "bag similarity " + std::to_string(v));
    for (std::size_t v = 0; v < inst_sim_.size(); ++v)
      check_similarity(inst_sim_[v], m,
                       "instance similarity " + std::to_string(v));
    check_similarity(label_corr_, q, "label correlation");
    for (const auto& w : bag_sim_) bag_deg_.push_back(w.rowwise().sum());
    for (const auto& w : inst_sim_) inst_deg_.push_back(w.rowwise().sum());
    label_deg_ = label_corr_.rowwise().sum();
    inst_label_mask_ = Vector::Zero(m);
  }

  Index n_bags() const { return r12_.rows(); }
  Index n_instances() const { return r12_.cols(); }
  Index n_labels() const { return r13_.cols(); }
  Index n_bag_views() const { return static_cast<Index>(bag_sim_.size()); }
  Index n_instance_views() const {
    return static_cast<Index>(inst_sim_.size());
  }

  const std::vector<Matrix>& bag_similarity() const { return bag_sim_; }
  const std::vector<Matrix>& instance_similarity() const { return inst_sim_; }
  const Matrix& label_correlation() const { return label_corr_; }
  const Matrix& bag_instance() const { return r12_; }
  const Matrix& bag_label() const { return r13_; }
  const Matrix& instance_label() const { return r23_; }

  /// Diagonal of the bag-averaging matrix: entry i is 1 / n_i.
  const Vector& lambda_diag() const { return lambda_diag_; }
  /// Degree vectors (row sums) of the similarity matrices.
  const std::vector<Vector>& bag_degree() const { return bag_deg_; }
  const std::vector<Vector>& instance_degree() const { return inst_deg_; }
  const Vector& label_degree() const { return label_deg_; }

  /// Row-stochastic bag-averaging operator diag(1/n_i) * R12.
  Matrix averaging() const { return lambda_diag_.asDiagonal() * r12_; }

  /// Per-instance 0/1 flags marking rows of the instance-label matrix that
  /// hold observed labels. All zero unless set by with_instance_labels().
  const Vector& instance_label_mask() const { return inst_label_mask_; }

  friend bool operator==(const HeteroNetwork& a, const HeteroNetwork& b) {
    auto same_list = [](const std::vector<Matrix>& x,
                        const std::vector<Matrix>& y) {
      if (x.size() != y.size()) return false;
      for (std::size_t i = 0; i < x.size(); ++i)
        if (!detail::same_matrix(x[i], y[i])) return false;
      return true;
    };
    return same_list(a.bag_sim_, b.bag_sim_) &&
           same_list(a.inst_sim_, b.inst_sim_) &&
           detail::same_matrix(a.label_corr_, b.label_corr_) &&
           detail::same_matrix(a.r12_, b.r12_) &&
           detail::same_matrix(a.r13_, b.r13_) &&
           detail::same_matrix(a.r23_, b.r23_) &&
           detail::same_matrix(a.inst_label_mask_, b.inst_label_mask_);
  }

  /// Copy of this network with additional bag-bag similarity matrices.
  HeteroNetwork with_extra_bag_views(const std::vector<Matrix>& extra) const {
    std::vector<Matrix> bags = bag_sim_;
    bags.insert(bags.end(), extra.begin(), extra.end());
    HeteroNetwork out(std::move(bags), inst_sim_, label_corr_, r12_, r13_,
                      r23_);
    out.inst_label_mask_ = inst_label_mask_;
    return out;
  }

  /// Copy of this network whose instance-label matrix holds known labels on
  /// the rows flagged by `row_mask`.
  HeteroNetwork with_instance_labels(const Matrix& labels,
                                     const Vector& row_mask) const {
    detail::require(labels.rows() == n_instances() &&
                        labels.cols() == n_labels(),
                    "network: instance labels must be m x q");
    detail::require(row_mask.size() == n_instances() &&
                        detail::is_binary(row_mask),
                    "network: instance label mask must be a 0/1 vector of "
                    "length m");
    Matrix r23 = row_mask.asDiagonal() * labels;
    HeteroNetwork out(bag_sim_, inst_sim_, label_corr_, r12_, r13_,
                      std::move(r23));
    out.inst_label_mask_ = row_mask;
    return out;
  }

 private:
  static void check_similarity(const Matrix& w, Index size,
                               const std::string& what) {
    using detail::require;
    require(w.rows() == size && w.cols() == size,
            "network: " + what + " must be " + std::to_string(size) + "x" +
                std::to_string(size) + ", got " + detail::shape_str(w));
    require(w.allFinite(), "network: " + what + " has non-finite entries");
    require(w.minCoeff() >= 0.0 && w.maxCoeff() <= 1.0,
            "network: " + what + " entries must lie in [0,1]");
    require(w == w.transpose(), "network: " + what + " must be symmetric");
  }

  std::vector<Matrix> bag_sim_;
  std::vector<Matrix> inst_sim_;
  Matrix label_corr_;
  Matrix r12_;
  Matrix r13_;
  Matrix r23_;
  Vector lambda_diag_;
  std::vector<Vector> bag_deg_;
  std::vector<Vector> inst_deg_;
  Vector label_deg_;
  Vector inst_label_mask_;
};

// ----------------------------------------------------------------------------
// FactorModel
// ----------------------------------------------------------------------------

/// Nonnegative low-rank factors of bags (g1), instances (g2) and labels (g3)
/// plus simplex view weights for bag views (alpha) and instance views (beta).
struct FactorModel {
  Matrix g1;
  Matrix g2;
  Matrix g3;
  Vector alpha;
  Vector beta;

  Index rank() const { return g1.cols(); }

  void validate() const {
    using detail::require;
    require(g1.cols() == g2.cols() && g2.cols() == g3.cols() && g1.cols() >= 1,
            "model: factors must share a positive rank");
    require(g1.allFinite() && g2.allFinite() && g3.allFinite(),
            "model: factors must be finite");
    require(g1.size() == 0 || g1.minCoeff() >= 0.0,
            "model: g1 must be nonnegative");
    require(g2.size() == 0 || g2.minCoeff() >= 0.0,
            "model: g2 must be nonnegative");
    require(g3.size() == 0 || g3.minCoeff() >= 0.0,
            "model: g3 must be nonnegative");
    check_simplex(alpha, "alpha");
    check_simplex(beta, "beta");
  }

  friend bool operator==(const FactorModel& a, const FactorModel& b) {
    auto same = [](const auto& x, const auto& y) {
      return detail::same_matrix(x, y);
    };
    return same(a.g1, b.g1) && same(a.g2, b.g2) && same(a.g3, b.g3) &&
           same(a.alpha, b.alpha) && same(a.beta, b.beta);
  }

 private:
  static void check_simplex(const Vector& w, const char* name) {
    using detail::require;
    const std::string n(name);
    require(w.size() >= 1, "model: " + n + " must be non-empty");
    require(w.allFinite() && w.minCoeff() >= 0.0,
            "model: " + n + " entries must be nonnegative");
    require(std::abs(w.sum() - 1.0) <= 1e-9, "model: " + n + " must sum to 1");
  }
};

// ----------------------------------------------------------------------------
// SolverConfig
// ----------------------------------------------------------------------------

/// Relation-ablation switches. Each flag removes one relation type from the
/// objective, its updates and (for the instance-label relation) prediction.
struct Ablation {
  bool no_bag_relation = false;             // nR11
  bool no_instance_relation = false;        // nR22
  bool no_label_relation = false;           // nR33
  bool no_instance_label_relation = false;  // nR23

  static constexpr std::string_view kNames[4] = {"nR11", "nR22", "nR33",
                                                 "nR23"};

  bool any() const {
    return no_bag_relation || no_instance_relation || no_label_relation ||
           no_instance_label_relation;
  }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    if (no_bag_relation) out.emplace_back(kNames[0]);
    if (no_instance_relation) out.emplace_back(kNames[1]);
    if (no_label_relation) out.emplace_back(kNames[2]);
    if (no_instance_label_relation) out.emplace_back(kNames[3]);
    return out;
  }

  void set(std::string_view name) {
    if (name == kNames[0]) no_bag_relation = true;
    else if (name == kNames[1]) no_instance_relation = true;
    else if (name == kNames[2]) no_label_relation = true;
    else if (name == kNames[3]) no_instance_label_relation = true;
    else throw InvalidArgument("unknown ablation '" + std::string(name) + "'");
  }

  static Ablation from_name(std::string_view name) {
    Ablation a;
    if (name != "full") a.set(name);
    return a;
  }

  friend bool operator==(const Ablation&, const Ablation&) = default;
};

struct SolverConfig {
  Index rank_d = 140;
  double lambda1 = 1000.0;
  double lambda2 = 1000.0;
  int max_iters = 500;
  double rel_tol = 1e-6;
  double epsilon = 1e-12;
  Ablation ablation;
  std::uint64_t seed = 0;
  /// Adds a masked instance-label reconstruction term for known instance
  /// labels. Off by default.
  bool use_instance_labels = false;

  void validate() const {
    using detail::require;
    require(rank_d >= 1, "config: rank_d must be >= 1");
    require(lambda1 >= 0.0 && std::isfinite(lambda1),
            "config: lambda1 must be >= 0");
    require(lambda2 >= 0.0 && std::isfinite(lambda2),
            "config: lambda2 must be >= 0");
    require(max_iters >= 1, "config: max_iters must be >= 1");
    require(rel_tol >= 0.0, "config: rel_tol must be >= 0");
    require(epsilon > 0.0, "config: epsilon must be > 0");
  }

  friend bool operator==(const SolverConfig&, const SolverConfig&) = default;
};

// ----------------------------------------------------------------------------
// EvaluationReport
// ----------------------------------------------------------------------------

struct MetricSummary {
  std::string name;
  double mean = 0.0;
  double stddev = 0.0;
  std::vector<double> runs;

  friend bool operator==(const MetricSummary&, const MetricSummary&) = default;
};

/// Metric values over repeated random partitions.
struct EvaluationReport {
  std::string level;  // "bag" or "instance"
  std::vector<MetricSummary> metrics;
  SolverConfig config;
  std::vector<std::uint64_t> seeds;
  double train_fraction = 0.7;

  void validate() const {
    using detail::require;
    require(level == "bag" || level == "instance",
            "report: level must be 'bag' or 'instance'");
    for (const auto& m : metrics) {
      require(m.mean >= 0.0 && m.mean <= 1.0,
              "report: " + m.name + " mean outside [0,1]");
      require(m.stddev >= 0.0, "report: " + m.name + " stddev negative");
      for (double r : m.runs)
        require(r >= 0.0 && r <= 1.0,
                "report: " + m.name + " run value outside [0,1]");
    }
    require(train_fraction > 0.0 && train_fraction < 1.0,
            "report: train fraction must lie in (0,1)");
  }

  const MetricSummary* find(std::string_view name) const {
    for (const auto& m : metrics)
      if (m.name == name) return &m;
    return nullptr;
  }

  friend bool operator==(const EvaluationReport&,
                         const EvaluationReport&) = default;
};

/// Mean and (population) standard deviation of `runs`.
inline MetricSummary summarize(std::string name, std::vector<double> runs) {
  MetricSummary s;
  s.name = std::move(name);
  s.runs = std::move(runs);
  if (s.runs.empty()) return s;
  double sum = 0.0;
  for (double r : s.runs) sum += r;
  s.mean = sum / static_cast<double>(s.runs.size());
  double var = 0.0;
  for (double r : s.runs) var += (r - s.mean) * (r - s.mean);
  s.stddev = std::sqrt(var / static_cast<double>(s.runs.size()));
  return s;
}

}  // namespace m3lcmf
