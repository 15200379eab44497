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

#include <gtest/gtest.h>

#include "m3lcmf/m3lcmf.hpp"

namespace m3lcmf {
namespace {

MultiViewMimlDataset small_dataset() {
  Matrix x(3, 2);
  x << 0, 1, 2, 3, 4, 5;
  Matrix y(2, 2);
  y << 1, 0, 1, 1;
  return MultiViewMimlDataset({x}, {2, 1}, y);
}

TEST(Dataset, CanonicalIndexing) {
  const auto d = small_dataset();
  EXPECT_EQ(d.n_bags(), 2);
  EXPECT_EQ(d.n_instances(), 3);
  EXPECT_EQ(d.n_labels(), 2);
  EXPECT_EQ(d.n_views(), 1);
  EXPECT_EQ(d.bag_of_instance(), (std::vector<Index>{0, 0, 1}));
  EXPECT_EQ(d.bag_offset(1), 2);
  EXPECT_EQ(d.bag_size(0), 2);
  EXPECT_EQ(Matrix(d.bag_rows(0, 1)), (Matrix(1, 2) << 4, 5).finished());
  EXPECT_EQ(d.label_names(), (std::vector<std::string>{"label_0", "label_1"}));
  EXPECT_FALSE(d.has_instance_labels());
}

TEST(Dataset, RejectsViolatedInvariants) {
  const Matrix x = Matrix::Zero(3, 2);
  const Matrix y = Matrix::Zero(2, 2);
  EXPECT_THROW(MultiViewMimlDataset({x}, {2, 2}, y), InvalidArgument);
  EXPECT_THROW(MultiViewMimlDataset({x}, {3, 0}, y), InvalidArgument);
  EXPECT_THROW(MultiViewMimlDataset({x}, {2, 1}, Matrix::Constant(2, 2, 0.5)),
               InvalidArgument);
  EXPECT_THROW(MultiViewMimlDataset({x}, {2, 1}, y, Matrix::Zero(2, 2)),
               InvalidArgument);
  EXPECT_THROW(MultiViewMimlDataset({x}, {2, 1}, y, std::nullopt, {"a"}),
               InvalidArgument);
  EXPECT_THROW(MultiViewMimlDataset({}, {2, 1}, y), InvalidArgument);
  Matrix bad = x;
  bad(0, 0) = std::nan("");
  EXPECT_THROW(MultiViewMimlDataset({bad}, {2, 1}, y), InvalidArgument);
}

TEST(Dataset, Equality) {
  EXPECT_EQ(small_dataset(), small_dataset());
  const auto d = small_dataset();
  const MultiViewMimlDataset other({d.view(0)}, {1, 2}, d.bag_labels());
  EXPECT_FALSE(d == other);
}

HeteroNetwork tiny_network(Matrix r12) {
  const Index n = r12.rows(), m = r12.cols();
  return HeteroNetwork({Matrix::Identity(n, n)}, {Matrix::Identity(m, m)},
                       Matrix::Identity(1, 1), r12, Matrix::Zero(n, 1),
                       Matrix::Zero(m, 1));
}

TEST(Network, ValidatesMembershipAndSimilarities) {
  Matrix r12(2, 3);
  r12 << 1, 1, 0, 0, 0, 1;
  const HeteroNetwork net = tiny_network(r12);
  EXPECT_EQ(net.lambda_diag(), (Vector(2) << 0.5, 1.0).finished());
  EXPECT_EQ(net.averaging(),
            (Matrix(2, 3) << 0.5, 0.5, 0, 0, 0, 1).finished());
  EXPECT_EQ(net.instance_label_mask(), Vector::Zero(3));

  Matrix shared = r12;
  shared(1, 0) = 1;  // instance 0 in two bags
  EXPECT_THROW(tiny_network(shared), InvalidArgument);
  Matrix empty_bag(2, 2);
  empty_bag << 1, 1, 0, 0;
  EXPECT_THROW(tiny_network(empty_bag), InvalidArgument);

  Matrix asym = Matrix::Identity(2, 2);
  asym(0, 1) = 0.3;
  EXPECT_THROW(HeteroNetwork({asym}, {Matrix::Identity(3, 3)},
                             Matrix::Identity(1, 1), r12, Matrix::Zero(2, 1),
                             Matrix::Zero(3, 1)),
               InvalidArgument);
  EXPECT_THROW(HeteroNetwork({Matrix::Constant(2, 2, 2.0)},
                             {Matrix::Identity(3, 3)}, Matrix::Identity(1, 1),
                             r12, Matrix::Zero(2, 1), Matrix::Zero(3, 1)),
               InvalidArgument);
}

TEST(Network, ExtraViewsAndInstanceLabels) {
  Matrix r12(2, 3);
  r12 << 1, 1, 0, 0, 0, 1;
  const HeteroNetwork net = tiny_network(r12);
  const HeteroNetwork more = net.with_extra_bag_views({Matrix::Ones(2, 2)});
  EXPECT_EQ(more.n_bag_views(), 2);
  EXPECT_EQ(more.bag_degree()[1], Vector::Constant(2, 2.0));

  const Matrix labels = (Matrix(3, 1) << 1, 0, 1).finished();
  const Vector mask = (Vector(3) << 1, 1, 0).finished();
  const HeteroNetwork known = net.with_instance_labels(labels, mask);
  EXPECT_EQ(known.instance_label(), (Matrix(3, 1) << 1, 0, 0).finished());
  EXPECT_EQ(known.instance_label_mask(), mask);
  EXPECT_FALSE(known == net);
  EXPECT_EQ(known.with_extra_bag_views({}).instance_label_mask(), mask);
}

TEST(FactorModel, Validation) {
  FactorModel m;
  m.g1 = Matrix::Ones(2, 2);
  m.g2 = Matrix::Ones(3, 2);
  m.g3 = Matrix::Ones(1, 2);
  m.alpha = (Vector(2) << 0.25, 0.75).finished();
  m.beta = Vector::Ones(1);
  EXPECT_NO_THROW(m.validate());
  EXPECT_EQ(m.rank(), 2);
  FactorModel neg = m;
  neg.g2(1, 1) = -1e-3;
  EXPECT_THROW(neg.validate(), InvalidArgument);
  FactorModel off = m;
  off.alpha(0) = 0.5;
  EXPECT_THROW(off.validate(), InvalidArgument);
  FactorModel ranks = m;
  ranks.g3 = Matrix::Ones(1, 3);
  EXPECT_THROW(ranks.validate(), InvalidArgument);
}

TEST(Ablation, Names) {
  EXPECT_FALSE(Ablation::from_name("full").any());
  const Ablation a = Ablation::from_name("nR33");
  EXPECT_TRUE(a.no_label_relation);
  EXPECT_EQ(a.names(), (std::vector<std::string>{"nR33"}));
  EXPECT_TRUE(Ablation::from_name("nR23").no_instance_label_relation);
  EXPECT_TRUE(Ablation::from_name("nR11").no_bag_relation);
  EXPECT_TRUE(Ablation::from_name("nR22").no_instance_relation);
  EXPECT_THROW(Ablation::from_name("nR44"), InvalidArgument);
}

TEST(SolverConfig, Validation) {
  SolverConfig c;
  EXPECT_NO_THROW(c.validate());
  c.max_iters = 0;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = SolverConfig{};
  c.rank_d = 0;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = SolverConfig{};
  c.epsilon = 0.0;
  EXPECT_THROW(c.validate(), InvalidArgument);
}

TEST(Report, SummarizeAndValidate) {
  const MetricSummary s = summarize("m", {0.7, 0.75, 0.8});
  EXPECT_NEAR(s.mean, 0.75, 1e-15);
  EXPECT_NEAR(s.stddev, std::sqrt(0.05 * 0.05 * 2.0 / 3.0), 1e-15);
  EvaluationReport r;
  r.level = "bag";
  r.metrics = {s};
  EXPECT_NO_THROW(r.validate());
  EXPECT_EQ(r.find("m"), &r.metrics[0]);
  EXPECT_EQ(r.find("x"), nullptr);
  r.level = "group";
  EXPECT_THROW(r.validate(), InvalidArgument);
}

}  // namespace
}  // namespace m3lcmf
