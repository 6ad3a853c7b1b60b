// Copyright 2026 The CEC Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "cec/adapter.hpp"
#include "cec/error.hpp"
#include "cec/gradcheck.hpp"
#include "grad_cases.hpp"
#include "test_util.hpp"

namespace cec {
namespace {

using testing::random_bank;

AdapterConfig config(std::size_t c, std::size_t d = 0, std::size_t heads = 1) {
  AdapterConfig a;
  a.embedding_dim = c;
  a.projection_dim = d;
  a.heads = heads;
  a.dropout = 0.0;
  return a;
}

AdapterParams with_u(AdapterParams p, double lo, double hi, std::uint64_t seed) {
  Rng rng(seed);
  for (std::size_t h = 0; h < p.config.heads; ++h) {
    Tensor& u = p.params.at("adapter.u." + std::to_string(h));
    u = uniform_tensor(u.shape(), lo, hi, rng);
  }
  return p;
}

TEST(Adapter, TwoNodeExampleByHand) {
  AdapterParams p = init_adapter(config(2), 1);
  p.params["adapter.phi.0"] = Tensor::from_rows({{1, 0}, {0, 1}});
  p.params["adapter.theta.0"] = Tensor::from_rows({{1, 0}, {0, 1}});
  p.params["adapter.u.0"] = Tensor::from_rows({{1, 0}, {0, 1}});
  ClassifierBank bank;
  bank.heads.push_back({HeadKind::kCosine, Tensor::from_rows({{1, 0}, {0, 1}}), {}, 16.0, {0, 1}, 0});
  // E = I, so each row attends e/(e+1) to itself; the message is A W = A.
  const double a = std::exp(1.0) / (std::exp(1.0) + 1.0), b = 1.0 - a;
  const Tensor expected = Tensor::from_rows({{1 + a, b}, {b, 1 + a}});
  EXPECT_LE(max_abs_diff(adapt(p, bank).stacked(), expected), 1e-15);
  EXPECT_LE(max_abs_diff(attention_normalize(relation_coefficients(p, bank)),
                         Tensor::from_rows({{a, b}, {b, a}})),
            1e-15);
}

TEST(Adapter, ShapesAndNames) {
  const AdapterParams p = init_adapter(config(6, 4, 2), 3);
  EXPECT_EQ(p.phi(1).shape(), (Shape{6, 4}));
  EXPECT_EQ(p.u(0).shape(), (Shape{6, 6}));
  EXPECT_EQ(p.params.size(), 6u);
  for (double v : p.u(1).values()) EXPECT_LE(std::abs(v), 1e-3);
  AdapterConfig ln = config(6);
  ln.layer_norm = true;
  const AdapterParams q = init_adapter(ln, 3);
  EXPECT_EQ(q.params.at("adapter.ln.gain"), Tensor::matrix(1, 6, 1.0));
  EXPECT_EQ(q.params.at("adapter.ln.bias"), Tensor::matrix(1, 6, 0.0));
}

TEST(Adapter, AttentionRowsSumToOne) {
  for (std::uint64_t s = 0; s < 100; ++s) {
    const std::size_t m = 2 + s % 63;
    const AdapterParams p = init_adapter(config(8), s);
    const Tensor a = attention_normalize(relation_coefficients(p, random_bank(m, 8, s)));
    for (std::size_t j = 0; j < m; ++j) {
      double sum = 0.0;
      for (double v : a.row_span(j)) {
        EXPECT_GE(v, 0.0);
        sum += v;
      }
      EXPECT_NEAR(sum, 1.0, 1e-9);
    }
  }
}

TEST(Adapter, ZeroMessageIsExactIdentity) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const AdapterParams p = with_u(init_adapter(config(7, 3, 1 + s % 3), s), 0.0, 0.0, s);
    const ClassifierBank bank = random_bank(2 + s % 30, 7, s + 5);
    const ClassifierBank out = adapt(p, bank);
    EXPECT_EQ(out.stacked(), bank.stacked());
    EXPECT_EQ(out.class_ids(), bank.class_ids());
  }
}

TEST(Adapter, PermutationEquivariance) {
  for (std::uint64_t s = 0; s < 100; ++s) {
    const std::size_t m = 2 + s % 63;
    const AdapterParams p = with_u(init_adapter(config(8, 0, 1 + s % 2), s), -0.3, 0.3, s + 9);
    const ClassifierBank bank = random_bank(m, 8, s + 17);
    std::vector<std::size_t> perm(m);
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng(s);
    std::shuffle(perm.begin(), perm.end(), rng);
    const Tensor permuted_rows = select_rows(bank.stacked(), perm);
    const Tensor lhs = adapt(p, bank.with_rows(permuted_rows)).stacked();
    const Tensor rhs = select_rows(adapt(p, bank).stacked(), perm);
    EXPECT_LE(max_abs_diff(lhs, rhs), 1e-9) << "seed " << s;
  }
}

TEST(Adapter, AppliesToBanksOfAnySize) {
  const AdapterParams p = init_adapter(config(16), 2);
  for (std::size_t m : {1u, 30u, 200u}) {
    const ClassifierBank bank = random_bank(m, 16, m);
    const ClassifierBank out = adapt(p, bank);
    EXPECT_EQ(out.stacked().shape(), bank.stacked().shape());
    EXPECT_EQ(out.heads.size(), bank.heads.size());
  }
}

TEST(Adapter, RelationCoefficientsMatchLoopOracle) {
  for (std::uint64_t s = 0; s < 50; ++s) {
    const AdapterParams p = init_adapter(config(6, 1 + s % 6, 2), s);
    const ClassifierBank bank = random_bank(2 + s % 10, 6, s);
    for (std::size_t h = 0; h < 2; ++h) {
      EXPECT_LE(max_abs_diff(relation_coefficients(p, bank, h),
                             testing::relation_oracle(bank.stacked(), p.phi(h), p.theta(h))),
                1e-12);
    }
  }
}

TEST(Adapter, DropoutOnlyInTraining) {
  AdapterConfig c = config(8);
  c.dropout = 0.5;
  const AdapterParams p = with_u(init_adapter(c, 1), -0.5, 0.5, 2);
  AdapterConfig c0 = c;
  c0.dropout = 0.0;
  AdapterParams p0 = p;
  p0.config = c0;
  const ClassifierBank bank = random_bank(10, 8, 4);
  EXPECT_EQ(adapt(p, bank).stacked(), adapt(p0, bank).stacked());
  const Tensor t1 = adapt(p, bank, AdaptMode::train(7)).stacked();
  EXPECT_EQ(adapt(p, bank, AdaptMode::train(7)).stacked(), t1);
  EXPECT_NE(adapt(p, bank, AdaptMode::train(8)).stacked(), t1);
  EXPECT_NE(t1, adapt(p, bank).stacked());
}

TEST(Adapter, LayerNormOutputRows) {
  AdapterConfig c = config(5);
  c.layer_norm = true;
  const AdapterParams p = with_u(init_adapter(c, 1), -0.5, 0.5, 2);
  const Tensor out = adapt(p, random_bank(6, 5, 3)).stacked();
  for (std::size_t r = 0; r < out.rows(); ++r) {
    double mean = 0.0, sq = 0.0;
    for (double v : out.row_span(r)) mean += v / 5.0;
    for (double v : out.row_span(r)) sq += (v - mean) * (v - mean);
    EXPECT_NEAR(mean, 0.0, 1e-12);
    EXPECT_NEAR(sq, 5.0, 1e-9);
  }
}

TEST(Adapter, QueryNodeKeepsBankShape) {
  AdapterConfig c = config(6);
  c.query_node = true;
  const AdapterParams p = with_u(init_adapter(c, 1), -0.5, 0.5, 2);
  const ClassifierBank bank = random_bank(7, 6, 3);
  const Tensor q = testing::random_matrix(1, 6, 4);
  const ClassifierBank a = adapt_with_query(p, bank, q.row_span(0));
  EXPECT_EQ(a.stacked().shape(), bank.stacked().shape());
  const Tensor q2 = testing::random_matrix(1, 6, 5);
  EXPECT_NE(adapt_with_query(p, bank, q2.row_span(0)).stacked(), a.stacked());
}

TEST(Adapter, LossGradientsCheckOut) {
  for (std::uint64_t s = 1; s <= 10; ++s) {
    auto [bg, root] = testing::adapter_loss_case(s);
    EXPECT_LE(grad_check(bg.graph, bg.bindings, 1e-6, root), 1e-4);
    auto [bg2, root2] = testing::adapter_loss_case(s, {5, 3, 2, true, 0.0, false});
    EXPECT_LE(grad_check(bg2.graph, bg2.bindings, 1e-6, root2), 1e-4);
  }
}

TEST(Adapter, RandomBanksStayFinite) {
  for (std::uint64_t s = 0; s < 100; ++s) {
    const AdapterParams p = with_u(init_adapter(config(8, 0, 1 + s % 3), s), -1.0, 1.0, s);
    const ClassifierBank bank = random_bank(2 + s % 40, 8, s + 1);
    EXPECT_TRUE(adapt(p, bank).stacked().all_finite());
    const Tensor q = testing::random_matrix(6, 8, s + 2);
    std::vector<int> labels(6);
    for (std::size_t i = 0; i < 6; ++i) labels[i] = static_cast<int>(i % bank.rows());
    AdaptLossGraph lg = adapt_loss_graph(p, bank, q, labels);
    EXPECT_TRUE(std::isfinite(lg.bg.backward(lg.loss).loss));
  }
}

TEST(Adapter, BankValidationAndDocuments) {
  ClassifierBank dup = random_bank(4, 3, 1);
  dup.heads[0].class_ids[0] = 3;
  EXPECT_THROW(dup.validate(), std::invalid_argument);
  EXPECT_THROW(ClassifierBank{}.validate(), std::invalid_argument);

  const AdapterParams p = init_adapter(config(6, 3, 2), 9);
  const AdapterParams back = adapter_from_document(read_params_json(write_params_json(adapter_to_document(p))));
  EXPECT_EQ(back.config, p.config);
  EXPECT_EQ(params_digest(back.params), params_digest(p.params));
  ParamDocument broken = adapter_to_document(p);
  broken.params.erase("adapter.u.1");
  EXPECT_THROW(adapter_from_document(broken), FormatError);
}

}  // namespace
}  // namespace cec
