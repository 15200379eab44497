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
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace m3lcmf {

// Collaborative nonnegative factorization of the heterogeneous network.
//
// Objective (all norms Frobenius, L = D - W graph Laplacians):
//
//   ||R12 - G1 G2^T||^2 + ||R13 - G1 G3^T||^2 + ||R13 - A G2 G3^T||^2
//   + sum_v alpha_v tr(G1^T L_bag^v G1) + sum_v beta_v tr(G2^T L_inst^v G2)
//   + tr(G3^T L_label G3) + lambda1 ||alpha||^2 + lambda2 ||beta||^2
//
// with A = diag(1/n_i) R12 the bag-averaging operator. An optional masked
// term ||M (R23 - G2 G3^T)||^2 uses observed instance labels.

/// Value of every objective term at one point.
struct ObjectiveTerms {
  double bag_instance = 0.0;    // ||R12 - G1 G2^T||^2
  double bag_label = 0.0;       // ||R13 - G1 G3^T||^2
  double aggregation = 0.0;     // ||R13 - A G2 G3^T||^2
  double bag_laplacian = 0.0;   // sum_v alpha_v tr(G1^T L^v G1)
  double instance_laplacian = 0.0;
  double label_laplacian = 0.0;
  double alpha_penalty = 0.0;   // lambda1 ||alpha||^2
  double beta_penalty = 0.0;    // lambda2 ||beta||^2
  double instance_label = 0.0;  // masked instance-label term, when enabled
  /// Unweighted smoothness losses tr(G^T L^v G), one per view.
  std::vector<double> bag_view_losses;
  std::vector<double> instance_view_losses;

  double total() const {
    return bag_instance + bag_label + aggregation + bag_laplacian +
           instance_laplacian + label_laplacian + alpha_penalty +
           beta_penalty + instance_label;
  }

  bool finite() const { return std::isfinite(total()); }
};

/// Positive and negative parts of a factor's gradient, split so that
/// gradient = 2 (denominator - numerator).
struct MultiplicativeTerms {
  Matrix numerator;
  Matrix denominator;
};

enum class StopReason { kConverged, kMaxIters };

inline const char* to_string(StopReason r) {
  return r == StopReason::kConverged ? "converged" : "max_iters";
}

/// Per-iteration record of a fit. Entry 0 is the initial point.
struct SolveTrace {
  std::vector<ObjectiveTerms> terms;
  std::vector<Vector> alpha;
  std::vector<Vector> beta;
  StopReason stop = StopReason::kMaxIters;

  std::vector<double> objective() const {
    std::vector<double> out;
    out.reserve(terms.size());
    for (const auto& t : terms) out.push_back(t.total());
    return out;
  }
};

struct FitResult {
  FactorModel model;
  SolveTrace trace;
};

namespace detail {

/// tr(G^T (diag(deg) - W) G) without forming the Laplacian.
inline double laplacian_trace(const Matrix& w, const Vector& deg,
                              const Matrix& g) {
  const double diag_part =
      (deg.array() * g.rowwise().squaredNorm().array()).sum();
  return diag_part - (g.array() * (w * g).array()).sum();
}

inline void check_shapes(const FactorModel& model, const HeteroNetwork& net) {
  require(model.g1.rows() == net.n_bags(), "model/network: g1 must have n rows");
  require(model.g2.rows() == net.n_instances(),
          "model/network: g2 must have m rows");
  require(model.g3.rows() == net.n_labels(),
          "model/network: g3 must have q rows");
  require(model.g1.cols() == model.g2.cols() &&
              model.g2.cols() == model.g3.cols(),
          "model: factors must share the same rank");
  require(model.alpha.size() == net.n_bag_views(),
          "model/network: alpha length must equal the number of bag views");
  require(model.beta.size() == net.n_instance_views(),
          "model/network: beta length must equal the number of instance "
          "views");
}

inline bool instance_term_active(const HeteroNetwork& net,
                                 const SolverConfig& cfg) {
  return cfg.use_instance_labels && net.instance_label_mask().sum() > 0.0;
}

/// Weighted sums sum_v w_v W^v and sum_v w_v deg^v.
inline std::pair<Matrix, Vector> combine_views(const std::vector<Matrix>& sims,
                                               const std::vector<Vector>& degs,
                                               const Vector& weights) {
  Matrix w = Matrix::Zero(sims.front().rows(), sims.front().cols());
  Vector d = Vector::Zero(degs.front().size());
  for (std::size_t v = 0; v < sims.size(); ++v) {
    const double a = weights(static_cast<Index>(v));
    if (a == 0.0) continue;
    w.noalias() += a * sims[v];
    d.noalias() += a * degs[v];
  }
  return {std::move(w), std::move(d)};
}

}  // namespace detail

/// Evaluates every objective term. Ablated relations contribute zero.
inline ObjectiveTerms objective(const FactorModel& model,
                                const HeteroNetwork& net,
                                const SolverConfig& cfg) {
  detail::check_shapes(model, net);
  const auto& ab = cfg.ablation;
  ObjectiveTerms t;
  t.bag_instance =
      (net.bag_instance() - model.g1 * model.g2.transpose()).squaredNorm();
  t.bag_label =
      (net.bag_label() - model.g1 * model.g3.transpose()).squaredNorm();
  if (!ab.no_instance_label_relation) {
    const Matrix ag2 = net.averaging() * model.g2;
    t.aggregation = (net.bag_label() - ag2 * model.g3.transpose()).squaredNorm();
  }
  if (!ab.no_bag_relation) {
    for (Index v = 0; v < net.n_bag_views(); ++v) {
      const double loss = detail::laplacian_trace(
          net.bag_similarity()[v], net.bag_degree()[v], model.g1);
      t.bag_view_losses.push_back(loss);
      t.bag_laplacian += model.alpha(v) * loss;
    }
  }
  if (!ab.no_instance_relation) {
    for (Index v = 0; v < net.n_instance_views(); ++v) {
      const double loss = detail::laplacian_trace(
          net.instance_similarity()[v], net.instance_degree()[v], model.g2);
      t.instance_view_losses.push_back(loss);
      t.instance_laplacian += model.beta(v) * loss;
    }
  }
  if (!ab.no_label_relation) {
    t.label_laplacian = detail::laplacian_trace(
        net.label_correlation(), net.label_degree(), model.g3);
  }
  t.alpha_penalty = cfg.lambda1 * model.alpha.squaredNorm();
  t.beta_penalty = cfg.lambda2 * model.beta.squaredNorm();
  if (detail::instance_term_active(net, cfg)) {
    const auto& mask = net.instance_label_mask();
    t.instance_label =
        (mask.asDiagonal() *
         (net.instance_label() - model.g2 * model.g3.transpose()))
            .squaredNorm();
  }
  return t;
}

/// Gradient split for the bag factors.
inline MultiplicativeTerms g1_terms(const FactorModel& model,
                                    const HeteroNetwork& net,
                                    const SolverConfig& cfg) {
  detail::check_shapes(model, net);
  const Matrix& g1 = model.g1;
  MultiplicativeTerms t;
  t.numerator = net.bag_instance() * model.g2 + net.bag_label() * model.g3;
  t.denominator = g1 * (model.g2.transpose() * model.g2) +
                  g1 * (model.g3.transpose() * model.g3);
  if (!cfg.ablation.no_bag_relation) {
    auto [w, d] = detail::combine_views(net.bag_similarity(),
                                        net.bag_degree(), model.alpha);
    t.numerator.noalias() += w * g1;
    t.denominator.noalias() += d.asDiagonal() * g1;
  }
  return t;
}

/// Gradient split for the instance factors.
inline MultiplicativeTerms g2_terms(const FactorModel& model,
                                    const HeteroNetwork& net,
                                    const SolverConfig& cfg) {
  detail::check_shapes(model, net);
  const Matrix& g2 = model.g2;
  const Matrix g3tg3 = model.g3.transpose() * model.g3;
  MultiplicativeTerms t;
  t.numerator = net.bag_instance().transpose() * model.g1;
  t.denominator = g2 * (model.g1.transpose() * model.g1);
  if (!cfg.ablation.no_instance_label_relation) {
    const Matrix avg = net.averaging();
    t.numerator.noalias() +=
        avg.transpose() * (net.bag_label() * model.g3);
    t.denominator.noalias() += avg.transpose() * ((avg * g2) * g3tg3);
  }
  if (!cfg.ablation.no_instance_relation) {
    auto [w, d] = detail::combine_views(net.instance_similarity(),
                                        net.instance_degree(), model.beta);
    t.numerator.noalias() += w * g2;
    t.denominator.noalias() += d.asDiagonal() * g2;
  }
  if (detail::instance_term_active(net, cfg)) {
    const auto& mask = net.instance_label_mask();
    t.numerator.noalias() += mask.asDiagonal() * (net.instance_label() * model.g3);
    t.denominator.noalias() +=
        mask.asDiagonal() * ((g2 * model.g3.transpose()) * model.g3);
  }
  return t;
}

/// Gradient split for the label factors.
inline MultiplicativeTerms g3_terms(const FactorModel& model,
                                    const HeteroNetwork& net,
                                    const SolverConfig& cfg) {
  detail::check_shapes(model, net);
  const Matrix& g3 = model.g3;
  MultiplicativeTerms t;
  t.numerator = net.bag_label().transpose() * model.g1;
  t.denominator = g3 * (model.g1.transpose() * model.g1);
  if (!cfg.ablation.no_instance_label_relation) {
    const Matrix ag2 = net.averaging() * model.g2;
    t.numerator.noalias() += net.bag_label().transpose() * ag2;
    t.denominator.noalias() += g3 * (ag2.transpose() * ag2);
  }
  if (!cfg.ablation.no_label_relation) {
    t.numerator.noalias() += net.label_correlation() * g3;
    t.denominator.noalias() += net.label_degree().asDiagonal() * g3;
  }
  if (detail::instance_term_active(net, cfg)) {
    const auto& mask = net.instance_label_mask();
    const Matrix mg2 = mask.asDiagonal() * model.g2;
    t.numerator.noalias() += net.instance_label().transpose() * mg2;
    t.denominator.noalias() += (g3 * model.g2.transpose()) * mg2;
  }
  return t;
}

/// factor <- factor * numerator / (denominator + epsilon), elementwise.
inline Matrix multiplicative_step(const Matrix& factor,
                                  const MultiplicativeTerms& terms,
                                  double epsilon) {
  return (factor.array() * terms.numerator.array() /
          (terms.denominator.array() + epsilon))
      .matrix();
}

inline Matrix update_g1(const FactorModel& model, const HeteroNetwork& net,
                        const SolverConfig& cfg) {
  return multiplicative_step(model.g1, g1_terms(model, net, cfg), cfg.epsilon);
}

inline Matrix update_g2(const FactorModel& model, const HeteroNetwork& net,
                        const SolverConfig& cfg) {
  return multiplicative_step(model.g2, g2_terms(model, net, cfg), cfg.epsilon);
}

inline Matrix update_g3(const FactorModel& model, const HeteroNetwork& net,
                        const SolverConfig& cfg) {
  return multiplicative_step(model.g3, g3_terms(model, net, cfg), cfg.epsilon);
}

/// Exact minimizer of sum_v w_v losses_v + lambda ||w||^2 over the
/// probability simplex: w_v = max(0, (mu - losses_v) / (2 lambda)) with mu
/// fixed by sum_v w_v = 1. For lambda = 0 all mass goes to the minimum-loss
/// views, split uniformly among ties.
inline Vector solve_view_weights(std::span<const double> losses,
                                 double lambda) {
  detail::require(!losses.empty(), "solve_view_weights: no views");
  detail::require(lambda >= 0.0, "solve_view_weights: lambda must be >= 0");
  for (double l : losses)
    detail::require(std::isfinite(l), "solve_view_weights: non-finite loss");
  const auto n = static_cast<Index>(losses.size());
  Vector w = Vector::Zero(n);
  if (lambda == 0.0) {
    const double best = *std::min_element(losses.begin(), losses.end());
    Index ties = 0;
    for (double l : losses) ties += (l == best) ? 1 : 0;
    for (Index v = 0; v < n; ++v)
      if (losses[static_cast<std::size_t>(v)] == best)
        w(v) = 1.0 / static_cast<double>(ties);
    return w;
  }
  std::vector<double> sorted(losses.begin(), losses.end());
  std::sort(sorted.begin(), sorted.end());
  // Largest active set k whose threshold mu_k exceeds the k-th loss.
  double prefix = 0.0;
  double mu = sorted.front() + 2.0 * lambda;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    prefix += sorted[k];
    const double candidate =
        (2.0 * lambda + prefix) / static_cast<double>(k + 1);
    if (candidate > sorted[k]) mu = candidate;
    else break;
  }
  for (Index v = 0; v < n; ++v)
    w(v) = std::max(0.0, (mu - losses[static_cast<std::size_t>(v)]) /
                             (2.0 * lambda));
  w /= w.sum();
  return w;
}

/// Strictly positive random factors scaled by sqrt(mean(R12) / d) and
/// uniform view weights.
inline FactorModel init_factors(const HeteroNetwork& net,
                                const SolverConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(
      std::numeric_limits<double>::min(), 1.0);
  const double scale =
      std::sqrt(net.bag_instance().mean() / static_cast<double>(cfg.rank_d));
  auto draw = [&](Index rows) {
    Matrix g(rows, cfg.rank_d);
    for (Index j = 0; j < g.cols(); ++j)
      for (Index i = 0; i < g.rows(); ++i) g(i, j) = unit(rng) * scale;
    return g;
  };
  FactorModel model;
  model.g1 = draw(net.n_bags());
  model.g2 = draw(net.n_instances());
  model.g3 = draw(net.n_labels());
  model.alpha = Vector::Constant(net.n_bag_views(),
                                 1.0 / static_cast<double>(net.n_bag_views()));
  model.beta = Vector::Constant(
      net.n_instance_views(), 1.0 / static_cast<double>(net.n_instance_views()));
  return model;
}

/// One full alternating pass: g1, g2, g3, then alpha and beta.
inline void iterate_once(FactorModel& model, const HeteroNetwork& net,
                         const SolverConfig& cfg) {
  model.g1 = update_g1(model, net, cfg);
  model.g2 = update_g2(model, net, cfg);
  model.g3 = update_g3(model, net, cfg);
  if (!cfg.ablation.no_bag_relation) {
    std::vector<double> losses;
    for (Index v = 0; v < net.n_bag_views(); ++v)
      losses.push_back(detail::laplacian_trace(net.bag_similarity()[v],
                                               net.bag_degree()[v], model.g1));
    model.alpha = solve_view_weights(losses, cfg.lambda1);
  }
  if (!cfg.ablation.no_instance_relation) {
    std::vector<double> losses;
    for (Index v = 0; v < net.n_instance_views(); ++v)
      losses.push_back(detail::laplacian_trace(
          net.instance_similarity()[v], net.instance_degree()[v], model.g2));
    model.beta = solve_view_weights(losses, cfg.lambda2);
  }
}

/// Runs alternating updates from `start` until the relative objective change
/// drops below cfg.rel_tol or cfg.max_iters passes are done.
inline FitResult fit_from(FactorModel start, const HeteroNetwork& net,
                          const SolverConfig& cfg) {
  cfg.validate();
  detail::check_shapes(start, net);
  FitResult out;
  out.model = std::move(start);
  auto record = [&](int iter) {
    ObjectiveTerms t = objective(out.model, net, cfg);
    if (!t.finite())
      throw NumericalError("non-finite objective at iteration " +
                           std::to_string(iter));
    out.trace.terms.push_back(std::move(t));
    out.trace.alpha.push_back(out.model.alpha);
    out.trace.beta.push_back(out.model.beta);
  };
  record(0);
  out.trace.stop = StopReason::kMaxIters;
  for (int it = 1; it <= cfg.max_iters; ++it) {
    iterate_once(out.model, net, cfg);
    record(it);
    const auto& z = out.trace.terms;
    const double prev = z[z.size() - 2].total();
    const double cur = z.back().total();
    if (std::abs(cur - prev) / std::max(prev, 1e-12) < cfg.rel_tol) {
      out.trace.stop = StopReason::kConverged;
      break;
    }
  }
  return out;
}

inline FitResult fit(const HeteroNetwork& net, const SolverConfig& cfg) {
  return fit_from(init_factors(net, cfg), net, cfg);
}

}  // namespace m3lcmf
