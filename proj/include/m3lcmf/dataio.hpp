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

// Dataset directory format, view splitting, bag partitioning and the planted
// synthetic generator.
//
// A dataset directory holds:
//   meta.json             {"format": "m3lcmf-dataset", "version": 1,
//                          "n_bags", "n_instances", "n_labels", "n_views",
//                          "label_names": [...] (optional)}
//   view_<v>.csv          header row + m rows of d_v features, v = 0..V-1,
//                         row k describes instance k
//   membership.csv        header "instance_id,bag_id" + m rows
//   bag_labels.csv        header of label names + n rows of 0/1
//   instance_labels.csv   optional, header + m rows of 0/1, row k = instance k
//
// CSV files are UTF-8 with '.' as the decimal separator. Instances are
// reordered on load so that each bag's instances are contiguous, in bag order
// and then by instance_id.

#include "m3lcmf/core.hpp"
#include "m3lcmf/serialize.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace m3lcmf {

namespace io {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' '))
      cell.pop_back();
    std::size_t start = 0;
    while (start < cell.size() && cell[start] == ' ') ++start;
    out.push_back(cell.substr(start));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline double parse_double(const std::string& cell, const std::string& where) {
  double x = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  if (first != last && *first == '+') ++first;
  const auto res = std::from_chars(first, last, x);
  if (res.ec != std::errc() || res.ptr != last || !std::isfinite(x))
    throw DataError(where + ": cannot parse '" + cell + "' as a finite number");
  return x;
}

/// Reads a numeric CSV with a header row. Every data row must have as many
/// cells as the header.
inline CsvTable read_numeric_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(path.string() + ": cannot open file");
  CsvTable t;
  std::string line;
  if (!std::getline(in, line))
    throw DataError(path.string() + ": missing header row");
  t.header = split_csv_line(line);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv_line(line);
    const std::string where = path.string() + ":" + std::to_string(lineno);
    if (cells.size() != t.header.size())
      throw DataError(where + ": expected " + std::to_string(t.header.size()) +
                      " columns, found " + std::to_string(cells.size()));
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) row.push_back(parse_double(c, where));
    t.rows.push_back(std::move(row));
  }
  return t;
}

inline Matrix table_to_matrix(const CsvTable& t) {
  Matrix m(static_cast<Index>(t.rows.size()),
           static_cast<Index>(t.header.size()));
  for (std::size_t i = 0; i < t.rows.size(); ++i)
    for (std::size_t j = 0; j < t.header.size(); ++j)
      m(static_cast<Index>(i), static_cast<Index>(j)) = t.rows[i][j];
  return m;
}

inline void write_matrix_csv(const std::filesystem::path& path,
                             const std::vector<std::string>& header,
                             const Matrix& m) {
  std::ofstream out(path);
  if (!out) throw DataError(path.string() + ": cannot open for writing");
  write_scores_csv(out, m, header);
  if (!out) throw DataError(path.string() + ": write failed");
}

inline void check_binary_table(const Matrix& m, const std::string& file) {
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j)
      if (m(i, j) != 0.0 && m(i, j) != 1.0)
        throw DataError(file + ":" + std::to_string(i + 2) + ": label value " +
                        format_double(m(i, j)) + " in column " +
                        std::to_string(j) + " is not 0/1");
}

inline Index as_index(double x, const std::string& where) {
  if (x != std::floor(x) || x < 0.0)
    throw DataError(where + ": expected a nonnegative integer id, found " +
                    format_double(x));
  return static_cast<Index>(x);
}

}  // namespace io

/// Loads and validates a dataset directory.
inline MultiViewMimlDataset load_dataset(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir))
    throw DataError(dir.string() + ": not a dataset directory");
  Json meta;
  {
    std::ifstream in(dir / "meta.json");
    if (!in) throw DataError((dir / "meta.json").string() + ": cannot open");
    try {
      in >> meta;
    } catch (const nlohmann::json::exception& e) {
      throw DataError((dir / "meta.json").string() + ": " + e.what());
    }
  }
  Index n = 0, m = 0, q = 0, v_count = 0;
  try {
    n = meta.at("n_bags").get<Index>();
    m = meta.at("n_instances").get<Index>();
    q = meta.at("n_labels").get<Index>();
    v_count = meta.at("n_views").get<Index>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError((dir / "meta.json").string() + ": " + e.what());
  }
  if (n < 1 || m < 1 || q < 1 || v_count < 1)
    throw DataError((dir / "meta.json").string() +
                    ": counts must be positive");

  // Membership: canonical order = by bag, then by instance id.
  const auto mem_path = (dir / "membership.csv").string();
  const auto mem = io::read_numeric_csv(dir / "membership.csv");
  if (mem.header.size() != 2)
    throw DataError(mem_path + ": expected header 'instance_id,bag_id'");
  if (static_cast<Index>(mem.rows.size()) != m)
    throw DataError(mem_path + ": expected " + std::to_string(m) +
                    " rows (n_instances), found " +
                    std::to_string(mem.rows.size()));
  std::vector<Index> bag_of(static_cast<std::size_t>(m), -1);
  for (std::size_t r = 0; r < mem.rows.size(); ++r) {
    const std::string where = mem_path + ":" + std::to_string(r + 2);
    const Index inst = io::as_index(mem.rows[r][0], where);
    const Index bag = io::as_index(mem.rows[r][1], where);
    if (inst >= m)
      throw DataError(where + ": instance_id " + std::to_string(inst) +
                      " out of range");
    if (bag >= n)
      throw DataError(where + ": bag_id " + std::to_string(bag) +
                      " out of range");
    auto& slot = bag_of[static_cast<std::size_t>(inst)];
    if (slot != -1)
      throw DataError(where + ": instance " + std::to_string(inst) +
                      " is assigned to more than one bag");
    slot = bag;
  }
  std::vector<Index> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    return bag_of[static_cast<std::size_t>(a)] <
           bag_of[static_cast<std::size_t>(b)];
  });
  std::vector<Index> sizes(static_cast<std::size_t>(n), 0);
  for (Index b : bag_of) ++sizes[static_cast<std::size_t>(b)];
  for (Index b = 0; b < n; ++b)
    if (sizes[static_cast<std::size_t>(b)] == 0)
      throw DataError(mem_path + ": bag " + std::to_string(b) +
                      " has no instances");
  auto reorder = [&](const Matrix& x) {
    Matrix out(x.rows(), x.cols());
    for (Index k = 0; k < m; ++k)
      out.row(k) = x.row(order[static_cast<std::size_t>(k)]);
    return out;
  };

  std::vector<Matrix> views;
  for (Index v = 0; v < v_count; ++v) {
    const auto file = "view_" + std::to_string(v) + ".csv";
    const Matrix x = io::table_to_matrix(io::read_numeric_csv(dir / file));
    if (x.rows() != m)
      throw DataError((dir / file).string() + ": expected " +
                      std::to_string(m) + " rows, found " +
                      std::to_string(x.rows()));
    views.push_back(reorder(x));
  }

  const auto bl_path = dir / "bag_labels.csv";
  const auto bl = io::read_numeric_csv(bl_path);
  if (static_cast<Index>(bl.header.size()) != q ||
      static_cast<Index>(bl.rows.size()) != n)
    throw DataError(bl_path.string() + ": expected " + std::to_string(n) +
                    " rows x " + std::to_string(q) + " label columns");
  const Matrix bag_labels = io::table_to_matrix(bl);
  io::check_binary_table(bag_labels, bl_path.string());

  std::optional<Matrix> inst_labels;
  const auto il_path = dir / "instance_labels.csv";
  if (fs::exists(il_path)) {
    const auto il = io::read_numeric_csv(il_path);
    if (static_cast<Index>(il.header.size()) != q ||
        static_cast<Index>(il.rows.size()) != m)
      throw DataError(il_path.string() + ": expected " + std::to_string(m) +
                      " rows x " + std::to_string(q) + " label columns");
    const Matrix x = io::table_to_matrix(il);
    io::check_binary_table(x, il_path.string());
    inst_labels = reorder(x);
  }

  std::vector<std::string> names =
      meta.value("label_names", std::vector<std::string>{});
  if (names.empty()) names = bl.header;
  try {
    return MultiViewMimlDataset(std::move(views), std::move(sizes), bag_labels,
                                std::move(inst_labels), std::move(names));
  } catch (const InvalidArgument& e) {
    throw DataError(dir.string() + ": " + e.what());
  }
}

/// Writes `data` in the directory format, creating `dir` if needed.
inline void save_dataset(const MultiViewMimlDataset& data,
                         const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  Json meta{{"format", "m3lcmf-dataset"},
            {"version", 1},
            {"n_bags", data.n_bags()},
            {"n_instances", data.n_instances()},
            {"n_labels", data.n_labels()},
            {"n_views", data.n_views()},
            {"label_names", data.label_names()}};
  {
    std::ofstream out(dir / "meta.json");
    out << meta.dump(2) << '\n';
  }
  for (Index v = 0; v < data.n_views(); ++v) {
    std::vector<std::string> header;
    for (Index f = 0; f < data.view(v).cols(); ++f)
      header.push_back("f" + std::to_string(f));
    io::write_matrix_csv(dir / ("view_" + std::to_string(v) + ".csv"), header,
                         data.view(v));
  }
  {
    std::ofstream out(dir / "membership.csv");
    out << "instance_id,bag_id\n";
    const auto& owner = data.bag_of_instance();
    for (std::size_t k = 0; k < owner.size(); ++k)
      out << k << ',' << owner[k] << '\n';
  }
  io::write_matrix_csv(dir / "bag_labels.csv", data.label_names(),
                       data.bag_labels());
  if (data.instance_labels())
    io::write_matrix_csv(dir / "instance_labels.csv", data.label_names(),
                         *data.instance_labels());
  else if (fs::exists(dir / "instance_labels.csv"))
    fs::remove(dir / "instance_labels.csv");
}

// ----------------------------------------------------------------------------
// View splitting and partitioning
// ----------------------------------------------------------------------------

/// Random disjoint column sets of sizes ceil(d/2) and floor(d/2), each sorted.
inline std::pair<std::vector<Index>, std::vector<Index>> split_view_columns(
    Index d, std::uint64_t seed) {
  if (d < 2) throw InvalidArgument("split_views: need at least 2 features");
  std::vector<Index> cols(static_cast<std::size_t>(d));
  std::iota(cols.begin(), cols.end(), Index{0});
  std::mt19937_64 rng(seed);
  std::shuffle(cols.begin(), cols.end(), rng);
  const auto half = static_cast<std::ptrdiff_t>((d + 1) / 2);
  std::vector<Index> first(cols.begin(), cols.begin() + half);
  std::vector<Index> second(cols.begin() + half, cols.end());
  std::sort(first.begin(), first.end());
  std::sort(second.begin(), second.end());
  return {first, second};
}

/// Splits a single-view dataset into two views by random halves of its
/// feature columns.
inline MultiViewMimlDataset split_views(const MultiViewMimlDataset& data,
                                        Index n_views, std::uint64_t seed) {
  if (data.n_views() != 1)
    throw InvalidArgument("split_views: dataset must have exactly one view");
  if (n_views != 2)
    throw InvalidArgument("split_views: only a two-way split is supported");
  const Matrix& x = data.view(0);
  const auto [first, second] = split_view_columns(x.cols(), seed);
  auto take = [&](const std::vector<Index>& cols) {
    Matrix out(x.rows(), static_cast<Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c)
      out.col(static_cast<Index>(c)) = x.col(cols[c]);
    return out;
  };
  return MultiViewMimlDataset({take(first), take(second)}, data.bag_sizes(),
                              data.bag_labels(), data.instance_labels(),
                              data.label_names());
}

struct Partition {
  std::vector<Index> train;
  std::vector<Index> test;
};

/// Uniform random bag partition with round(train_fraction * n) training bags.
/// Both index lists are sorted.
inline Partition partition(Index n_bags, double train_fraction,
                           std::uint64_t seed) {
  if (n_bags < 2) throw InvalidArgument("partition: need at least 2 bags");
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw InvalidArgument("partition: train fraction must lie in (0,1)");
  std::vector<Index> bags(static_cast<std::size_t>(n_bags));
  std::iota(bags.begin(), bags.end(), Index{0});
  std::mt19937_64 rng(seed);
  std::shuffle(bags.begin(), bags.end(), rng);
  const auto n_train = static_cast<std::ptrdiff_t>(
      std::llround(train_fraction * static_cast<double>(n_bags)));
  Partition p;
  p.train.assign(bags.begin(), bags.begin() + n_train);
  p.test.assign(bags.begin() + n_train, bags.end());
  std::sort(p.train.begin(), p.train.end());
  std::sort(p.test.begin(), p.test.end());
  return p;
}

inline Partition partition(const MultiViewMimlDataset& data,
                           double train_fraction, std::uint64_t seed) {
  return partition(data.n_bags(), train_fraction, seed);
}

/// Instance indices of the given bags, in canonical order.
inline std::vector<Index> instances_of(const MultiViewMimlDataset& data,
                                       const std::vector<Index>& bags) {
  std::vector<Index> out;
  for (Index b : bags)
    for (Index k = 0; k < data.bag_size(b); ++k)
      out.push_back(data.bag_offset(b) + k);
  return out;
}

/// Selected rows of `m`, in the given order.
inline Matrix select_rows(const Matrix& m, const std::vector<Index>& rows) {
  Matrix out(static_cast<Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i)
    out.row(static_cast<Index>(i)) = m.row(rows[i]);
  return out;
}

// ----------------------------------------------------------------------------
// Synthetic data with planted structure
// ----------------------------------------------------------------------------

struct SyntheticSpec {
  Index n_bags = 60;
  Index min_instances = 1;
  Index max_instances = 5;
  Index n_labels = 8;
  Index n_views = 2;
  Index rank = 5;
  Index features_per_view = 10;
  /// Standard deviation of the Gaussian feature noise, relative to the
  /// prototype scale.
  double noise = 0.02;
  /// Standard deviation of the topic prototype coordinates.
  double feature_scale = 0.1;
  /// Probability that a bag carries a second topic.
  double secondary_topic_prob = 0.0;
  /// Probability that an instance draws its topic from its bag's topics
  /// rather than uniformly.
  double bag_coherence = 1.0;
  std::uint64_t seed = 0;
};

struct SyntheticData {
  MultiViewMimlDataset dataset;
  FactorModel planted;
};

/// Draws a dataset from planted nonnegative factors.
///
/// Each label loads on one latent topic (labels 0..rank-1 cover every
/// topic). Each bag draws one topic and, with probability
/// `secondary_topic_prob`, a second one. Each instance takes one of its bag's
/// topics with probability `bag_coherence`, otherwise a uniform topic; its
/// labels are the thresholded planted scores G2 G3^T >= 0.5. Bag labels are
/// the union of member instance labels. View features are topic prototypes
/// plus Gaussian noise, so same-topic instances cluster in every view.
inline SyntheticData gen_synthetic(const SyntheticSpec& spec) {
  using detail::require;
  require(spec.n_bags >= 2, "gen_synthetic: need at least 2 bags");
  require(spec.rank >= 1 && spec.rank <= std::min(spec.n_bags, spec.n_labels),
          "gen_synthetic: rank must lie in [1, min(n, q)]");
  require(spec.min_instances >= 1 && spec.max_instances >= spec.min_instances,
          "gen_synthetic: invalid per-bag instance count range");
  require(spec.n_views >= 1 && spec.features_per_view >= 1,
          "gen_synthetic: need at least one view and one feature");
  require(spec.noise >= 0.0, "gen_synthetic: noise must be >= 0");
  require(spec.secondary_topic_prob >= 0.0 && spec.secondary_topic_prob <= 1.0,
          "gen_synthetic: secondary topic probability must lie in [0,1]");
  require(spec.bag_coherence >= 0.0 && spec.bag_coherence <= 1.0,
          "gen_synthetic: bag coherence must lie in [0,1]");
  require(spec.feature_scale > 0.0, "gen_synthetic: feature scale must be > 0");

  std::mt19937_64 rng(spec.seed);
  const Index r = spec.rank;
  const Index q = spec.n_labels;

  Matrix g3 = Matrix::Zero(q, r);
  std::uniform_int_distribution<Index> topic(0, r - 1);
  for (Index c = 0; c < q; ++c) g3(c, c < r ? c : topic(rng)) = 1.0;

  std::uniform_int_distribution<Index> size(spec.min_instances,
                                            spec.max_instances);
  std::vector<Index> sizes;
  Index m = 0;
  for (Index b = 0; b < spec.n_bags; ++b) {
    sizes.push_back(size(rng));
    m += sizes.back();
  }

  std::bernoulli_distribution second(spec.secondary_topic_prob);
  std::bernoulli_distribution coherent(spec.bag_coherence);
  Matrix g2 = Matrix::Zero(m, r);
  {
    Index k = 0;
    for (Index b = 0; b < spec.n_bags; ++b) {
      std::vector<Index> bag_topics{topic(rng)};
      if (r > 1 && second(rng)) {
        Index u = topic(rng);
        while (u == bag_topics.front()) u = topic(rng);
        bag_topics.push_back(u);
      }
      std::uniform_int_distribution<std::size_t> pick(0, bag_topics.size() - 1);
      for (Index j = 0; j < sizes[static_cast<std::size_t>(b)]; ++j, ++k)
        g2(k, coherent(rng) ? bag_topics[pick(rng)] : topic(rng)) = 1.0;
    }
  }
  const Matrix inst_labels =
      ((g2 * g3.transpose()).array() >= 0.5).cast<double>().matrix();

  Matrix bag_labels = Matrix::Zero(spec.n_bags, q);
  Matrix g1 = Matrix::Zero(spec.n_bags, r);
  {
    Index k = 0;
    for (Index b = 0; b < spec.n_bags; ++b) {
      for (Index j = 0; j < sizes[static_cast<std::size_t>(b)]; ++j, ++k) {
        bag_labels.row(b) = bag_labels.row(b).cwiseMax(inst_labels.row(k));
        g1.row(b) += g2.row(k);
      }
      g1.row(b) /= static_cast<double>(sizes[static_cast<std::size_t>(b)]);
    }
  }

  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<Matrix> views;
  for (Index v = 0; v < spec.n_views; ++v) {
    Matrix proto(r, spec.features_per_view);
    for (Index j = 0; j < proto.cols(); ++j)
      for (Index i = 0; i < proto.rows(); ++i)
        proto(i, j) = spec.feature_scale * gauss(rng);
    Matrix x = g2 * proto;
    for (Index j = 0; j < x.cols(); ++j)
      for (Index i = 0; i < x.rows(); ++i)
        x(i, j) += spec.noise * spec.feature_scale * gauss(rng);
    views.push_back(std::move(x));
  }

  SyntheticData out{
      MultiViewMimlDataset(std::move(views), std::move(sizes), bag_labels,
                           inst_labels),
      FactorModel{}};
  out.planted.g1 = std::move(g1);
  out.planted.g2 = std::move(g2);
  out.planted.g3 = std::move(g3);
  out.planted.alpha = Vector::Constant(
      spec.n_views, 1.0 / static_cast<double>(spec.n_views));
  out.planted.beta = out.planted.alpha;
  return out;
}

}  // namespace m3lcmf
