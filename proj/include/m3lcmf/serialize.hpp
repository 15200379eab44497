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

// JSON serialization of the core types and CSV export of traces and score
// matrices. Matrices are stored as {"rows": r, "cols": c, "data": [[...]]}
// with one inner array per row. Every from_json() re-runs the type's
// invariant checks.

#include "m3lcmf/core.hpp"
#include "m3lcmf/solver.hpp"

#include <json.hpp>

#include <charconv>
#include <ostream>
#include <set>
#include <string>
#include <vector>

namespace m3lcmf {

using Json = nlohmann::json;

namespace io {

/// Shortest decimal string that parses back to exactly `x`.
inline std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

inline Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return Json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", rows}};
}

inline Matrix matrix_from_json(const Json& j, const std::string& what) {
  if (!j.is_object() || !j.contains("rows") || !j.contains("cols") ||
      !j.contains("data"))
    throw DataError(what + ": expected {rows, cols, data}");
  const auto rows = j.at("rows").get<Index>();
  const auto cols = j.at("cols").get<Index>();
  const Json& data = j.at("data");
  if (rows < 0 || cols < 0 || !data.is_array() ||
      static_cast<Index>(data.size()) != rows)
    throw DataError(what + ": row count does not match 'rows'");
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    const Json& row = data[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Index>(row.size()) != cols)
      throw DataError(what + ": row " + std::to_string(i) +
                      " does not have 'cols' entries");
    for (Index c = 0; c < cols; ++c) {
      const Json& x = row[static_cast<std::size_t>(c)];
      if (!x.is_number())
        throw DataError(what + ": non-numeric entry at (" + std::to_string(i) +
                        "," + std::to_string(c) + ")");
      m(i, c) = x.get<double>();
    }
  }
  return m;
}

inline Json vector_to_json(const Vector& v) {
  Json out = Json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

inline Vector vector_from_json(const Json& j, const std::string& what) {
  if (!j.is_array()) throw DataError(what + ": expected an array");
  Vector v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number())
      throw DataError(what + ": non-numeric entry " + std::to_string(i));
    v(static_cast<Index>(i)) = j[i].get<double>();
  }
  return v;
}

inline std::vector<Matrix> matrices_from_json(const Json& j,
                                              const std::string& what) {
  if (!j.is_array()) throw DataError(what + ": expected an array");
  std::vector<Matrix> out;
  for (std::size_t i = 0; i < j.size(); ++i)
    out.push_back(matrix_from_json(j[i], what + "[" + std::to_string(i) + "]"));
  return out;
}

inline Json matrices_to_json(const std::vector<Matrix>& ms) {
  Json out = Json::array();
  for (const auto& m : ms) out.push_back(matrix_to_json(m));
  return out;
}

inline const Json& field(const Json& j, const char* key,
                         const std::string& what) {
  if (!j.is_object() || !j.contains(key))
    throw DataError(what + ": missing field '" + key + "'");
  return j.at(key);
}

}  // namespace io

// ---- MultiViewMimlDataset --------------------------------------------------

inline Json to_json(const MultiViewMimlDataset& d) {
  Json j;
  j["n_bags"] = d.n_bags();
  j["n_instances"] = d.n_instances();
  j["n_labels"] = d.n_labels();
  j["n_views"] = d.n_views();
  j["bag_sizes"] = d.bag_sizes();
  j["views"] = io::matrices_to_json(d.views());
  j["bag_labels"] = io::matrix_to_json(d.bag_labels());
  j["instance_labels"] = d.instance_labels()
                             ? io::matrix_to_json(*d.instance_labels())
                             : Json(nullptr);
  j["label_names"] = d.label_names();
  return j;
}

inline MultiViewMimlDataset dataset_from_json(const Json& j) {
  const std::string w = "dataset";
  std::optional<Matrix> inst;
  if (j.contains("instance_labels") && !j.at("instance_labels").is_null())
    inst = io::matrix_from_json(j.at("instance_labels"), w + ".instance_labels");
  MultiViewMimlDataset d(
      io::matrices_from_json(io::field(j, "views", w), w + ".views"),
      io::field(j, "bag_sizes", w).get<std::vector<Index>>(),
      io::matrix_from_json(io::field(j, "bag_labels", w), w + ".bag_labels"),
      std::move(inst),
      j.value("label_names", std::vector<std::string>{}));
  if (j.contains("n_bags") && j.at("n_bags").get<Index>() != d.n_bags())
    throw DataError("dataset: n_bags does not match bag_sizes");
  if (j.contains("n_instances") &&
      j.at("n_instances").get<Index>() != d.n_instances())
    throw DataError("dataset: n_instances does not match bag_sizes");
  return d;
}

// ---- HeteroNetwork ---------------------------------------------------------

inline Json to_json(const HeteroNetwork& n) {
  return Json{{"bag_similarity", io::matrices_to_json(n.bag_similarity())},
              {"instance_similarity",
               io::matrices_to_json(n.instance_similarity())},
              {"label_correlation", io::matrix_to_json(n.label_correlation())},
              {"bag_instance", io::matrix_to_json(n.bag_instance())},
              {"bag_label", io::matrix_to_json(n.bag_label())},
              {"instance_label", io::matrix_to_json(n.instance_label())},
              {"instance_label_mask",
               io::vector_to_json(n.instance_label_mask())}};
}

inline HeteroNetwork network_from_json(const Json& j) {
  const std::string w = "network";
  HeteroNetwork net(
      io::matrices_from_json(io::field(j, "bag_similarity", w),
                             w + ".bag_similarity"),
      io::matrices_from_json(io::field(j, "instance_similarity", w),
                             w + ".instance_similarity"),
      io::matrix_from_json(io::field(j, "label_correlation", w),
                           w + ".label_correlation"),
      io::matrix_from_json(io::field(j, "bag_instance", w), w + ".bag_instance"),
      io::matrix_from_json(io::field(j, "bag_label", w), w + ".bag_label"),
      io::matrix_from_json(io::field(j, "instance_label", w),
                           w + ".instance_label"));
  if (j.contains("instance_label_mask")) {
    const Vector mask = io::vector_from_json(j.at("instance_label_mask"),
                                             w + ".instance_label_mask");
    if (mask.size() == net.n_instances() && mask.sum() > 0.0) {
      // Stored rows are already masked, so re-masking is the identity.
      return net.with_instance_labels(net.instance_label(), mask);
    }
  }
  return net;
}

// ---- FactorModel -----------------------------------------------------------

inline Json to_json(const FactorModel& m) {
  return Json{{"rank", m.rank()},
              {"g1", io::matrix_to_json(m.g1)},
              {"g2", io::matrix_to_json(m.g2)},
              {"g3", io::matrix_to_json(m.g3)},
              {"alpha", io::vector_to_json(m.alpha)},
              {"beta", io::vector_to_json(m.beta)}};
}

inline FactorModel model_from_json(const Json& j) {
  const std::string w = "model";
  FactorModel m;
  m.g1 = io::matrix_from_json(io::field(j, "g1", w), w + ".g1");
  m.g2 = io::matrix_from_json(io::field(j, "g2", w), w + ".g2");
  m.g3 = io::matrix_from_json(io::field(j, "g3", w), w + ".g3");
  m.alpha = io::vector_from_json(io::field(j, "alpha", w), w + ".alpha");
  m.beta = io::vector_from_json(io::field(j, "beta", w), w + ".beta");
  m.validate();
  return m;
}

// ---- SolverConfig ----------------------------------------------------------

inline Json to_json(const SolverConfig& c) {
  return Json{{"rank_d", c.rank_d},
              {"lambda1", c.lambda1},
              {"lambda2", c.lambda2},
              {"max_iters", c.max_iters},
              {"rel_tol", c.rel_tol},
              {"epsilon", c.epsilon},
              {"ablation", c.ablation.names()},
              {"seed", c.seed},
              {"use_instance_labels", c.use_instance_labels}};
}

/// Missing keys keep their defaults; unknown keys are rejected by name.
inline SolverConfig solver_config_from_json(const Json& j) {
  if (!j.is_object()) throw InvalidArgument("solver config: expected object");
  static const std::set<std::string> known = {
      "rank_d", "lambda1", "lambda2", "max_iters", "rel_tol",
      "epsilon", "ablation", "seed", "use_instance_labels"};
  for (const auto& [key, value] : j.items())
    if (!known.count(key))
      throw InvalidArgument("solver config: unknown key '" + key + "'");
  SolverConfig c;
  try {
    c.rank_d = j.value("rank_d", c.rank_d);
    c.lambda1 = j.value("lambda1", c.lambda1);
    c.lambda2 = j.value("lambda2", c.lambda2);
    c.max_iters = j.value("max_iters", c.max_iters);
    c.rel_tol = j.value("rel_tol", c.rel_tol);
    c.epsilon = j.value("epsilon", c.epsilon);
    c.seed = j.value("seed", c.seed);
    c.use_instance_labels = j.value("use_instance_labels", false);
    if (j.contains("ablation")) {
      const Json& ab = j.at("ablation");
      if (ab.is_string()) {
        if (ab.get<std::string>() != "full") c.ablation.set(ab.get<std::string>());
      } else {
        for (const auto& name : ab) c.ablation.set(name.get<std::string>());
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("solver config: ") + e.what());
  }
  c.validate();
  return c;
}

// ---- EvaluationReport ------------------------------------------------------

inline Json to_json(const EvaluationReport& r) {
  Json metrics = Json::array();
  for (const auto& m : r.metrics)
    metrics.push_back(Json{{"name", m.name},
                           {"mean", m.mean},
                           {"std", m.stddev},
                           {"runs", m.runs}});
  return Json{{"level", r.level},
              {"metrics", metrics},
              {"config", to_json(r.config)},
              {"seeds", r.seeds},
              {"train_fraction", r.train_fraction}};
}

inline EvaluationReport report_from_json(const Json& j) {
  const std::string w = "report";
  EvaluationReport r;
  r.level = io::field(j, "level", w).get<std::string>();
  for (const auto& m : io::field(j, "metrics", w)) {
    MetricSummary s;
    s.name = io::field(m, "name", w).get<std::string>();
    s.mean = io::field(m, "mean", w).get<double>();
    s.stddev = io::field(m, "std", w).get<double>();
    s.runs = io::field(m, "runs", w).get<std::vector<double>>();
    r.metrics.push_back(std::move(s));
  }
  r.config = solver_config_from_json(io::field(j, "config", w));
  r.seeds = io::field(j, "seeds", w).get<std::vector<std::uint64_t>>();
  r.train_fraction = io::field(j, "train_fraction", w).get<double>();
  r.validate();
  return r;
}

// ---- SolveTrace ------------------------------------------------------------

inline Json to_json(const SolveTrace& t) {
  Json iters = Json::array();
  for (std::size_t i = 0; i < t.terms.size(); ++i) {
    const auto& x = t.terms[i];
    iters.push_back(Json{{"iteration", i},
                         {"total", x.total()},
                         {"bag_instance", x.bag_instance},
                         {"bag_label", x.bag_label},
                         {"aggregation", x.aggregation},
                         {"bag_laplacian", x.bag_laplacian},
                         {"instance_laplacian", x.instance_laplacian},
                         {"label_laplacian", x.label_laplacian},
                         {"alpha_penalty", x.alpha_penalty},
                         {"beta_penalty", x.beta_penalty},
                         {"instance_label", x.instance_label},
                         {"alpha", io::vector_to_json(t.alpha[i])},
                         {"beta", io::vector_to_json(t.beta[i])}});
  }
  return Json{{"stop", to_string(t.stop)}, {"iterations", iters}};
}

inline constexpr const char* kTraceCsvHeader =
    "iteration,total,bag_instance,bag_label,aggregation,bag_laplacian,"
    "instance_laplacian,label_laplacian,alpha_penalty,beta_penalty,"
    "instance_label";

/// One row per recorded iteration; row 0 is the initial point.
inline void write_trace_csv(std::ostream& os, const SolveTrace& t) {
  os << kTraceCsvHeader << '\n';
  for (std::size_t i = 0; i < t.terms.size(); ++i) {
    const auto& x = t.terms[i];
    os << i;
    for (double v : {x.total(), x.bag_instance, x.bag_label, x.aggregation,
                     x.bag_laplacian, x.instance_laplacian, x.label_laplacian,
                     x.alpha_penalty, x.beta_penalty, x.instance_label})
      os << ',' << io::format_double(v);
    os << '\n';
  }
}

/// Score or prediction matrix with a header row naming the labels.
inline void write_scores_csv(std::ostream& os, const Matrix& scores,
                             const std::vector<std::string>& label_names) {
  detail::require(static_cast<Index>(label_names.size()) == scores.cols(),
                  "write_scores_csv: one name per column is required");
  for (std::size_t c = 0; c < label_names.size(); ++c)
    os << (c ? "," : "") << label_names[c];
  os << '\n';
  for (Index i = 0; i < scores.rows(); ++i) {
    for (Index c = 0; c < scores.cols(); ++c)
      os << (c ? "," : "") << io::format_double(scores(i, c));
    os << '\n';
  }
}

}  // namespace m3lcmf
