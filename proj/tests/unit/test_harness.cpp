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

#include "cec/evaluate.hpp"
#include "cec/harness.hpp"
#include "cec/metrics.hpp"
#include "cec/synth.hpp"
#include "test_util.hpp"

namespace cec {
namespace {

const std::vector<double> kTableRow{75.85, 71.94, 68.50, 63.50, 62.43, 58.27,
                                    57.73, 55.81, 54.83, 53.52, 52.28};
const std::vector<double> kCifarRow{73.07, 68.88, 65.26, 61.19, 58.09, 55.57, 53.22, 51.34, 49.14};

TEST(Metrics, PdExamples) {
  EXPECT_NEAR(compute_pd(kTableRow), 23.57, 1e-9);
  EXPECT_NEAR(compute_pd(kCifarRow), 23.93, 1e-9);
  const double flat[] = {0.5, 0.7, 0.5};
  EXPECT_EQ(compute_pd(flat), 0.0);
  EXPECT_THROW(compute_pd({}), std::invalid_argument);
  EXPECT_NEAR(average_accuracy(kTableRow), 61.33, 0.005);
  EXPECT_THROW(average_accuracy({}), std::invalid_argument);
}

TEST(Metrics, SessionsCsv) {
  SessionMetrics m;
  m.accuracies = {0.75, 0.5};
  m.classes = {4, 6};
  m.test_counts = {8, 12};
  finalize(m);
  EXPECT_EQ(m.pd, 0.25);
  EXPECT_EQ(m.avg, 0.625);
  EXPECT_EQ(sessions_csv(m), "session,classes,accuracy\n0,4,75.00\n1,6,50.00\n");
}

TEST(Evaluate, MatchesCountingOracle) {
  for (std::uint64_t s = 0; s < 100; ++s) {
    Rng rng(s);
    const std::size_t n = 1 + s % 40, m = 2 + s % 9;
    Tensor logits = testing::random_matrix(n, m, s);
    // Coarse values create plenty of ties.
    for (double& v : logits.values()) v = std::round(v * 2.0);
    std::vector<int> ids(m);
    std::iota(ids.begin(), ids.end(), 100);
    std::shuffle(ids.begin(), ids.end(), rng);
    std::vector<int> labels(n);
    std::uniform_int_distribution<std::size_t> pick(0, m - 1);
    for (int& l : labels) l = ids[pick(rng)];
    const EvalResult r = evaluate_logits(logits, ids, labels);
    EXPECT_EQ(r.correct, testing::correct_count_oracle(logits, ids, labels)) << "seed " << s;
    EXPECT_EQ(r.total, n);
    EXPECT_EQ(r.accuracy, static_cast<double>(r.correct) / static_cast<double>(n));
    EXPECT_EQ(r.confusion.trace(), r.correct);
    EXPECT_EQ(r.confusion.total(), n);
    for (std::size_t c = 0; c < m; ++c) {
      const int id = r.confusion.classes[c];
      EXPECT_EQ(r.confusion.row_sum(c),
                static_cast<std::size_t>(std::count(labels.begin(), labels.end(), id)));
    }
  }
}

TEST(Evaluate, TiesGoToLowestClassId) {
  const Tensor logits = Tensor::from_rows({{1.0, 1.0, 0.0}});
  const int ids[] = {7, 3, 5};
  EXPECT_EQ(predict(logits, ids), std::vector<int>{3});
}

TEST(Evaluate, OracleBankIsPerfectConstantPredictorIsChance) {
  const Tensor emb = testing::random_matrix(10, 4, 3);
  std::vector<int> labels(10);
  std::iota(labels.begin(), labels.end(), 0);
  const ClassifierWeights oracle = init_from_data(emb, labels, HeadKind::kNegL2);
  const EvalResult r = evaluate_embeddings(oracle, emb, labels);
  EXPECT_EQ(r.accuracy, 1.0);
  for (std::size_t i = 0; i < 10; ++i) EXPECT_EQ(r.confusion.counts[i][i], 1u);

  Tensor constant = Tensor::matrix(50, 10);
  for (std::size_t i = 0; i < 50; ++i) constant(i, 4) = 1.0;
  std::vector<int> balanced(50);
  for (std::size_t i = 0; i < 50; ++i) balanced[i] = static_cast<int>(i % 10);
  EXPECT_DOUBLE_EQ(evaluate_logits(constant, labels, balanced).accuracy, 0.1);

  const int unknown[] = {42};
  EXPECT_THROW(evaluate_logits(Tensor::matrix(1, 10), labels, unknown), std::invalid_argument);
}

TEST(Evaluate, ThreadCountDoesNotChangeResults) {
  const ClassifierWeights head = init_random(std::vector<int>{0, 1, 2, 3}, 6, HeadKind::kCosine, 2);
  const Tensor emb = testing::random_matrix(101, 6, 4);
  std::vector<int> labels(101);
  for (std::size_t i = 0; i < 101; ++i) labels[i] = static_cast<int>(i % 4);
  const EvalResult a = evaluate_embeddings(head, emb, labels, 1);
  for (std::size_t t : {2u, 3u, 7u, 200u}) {
    const EvalResult b = evaluate_embeddings(head, emb, labels, t);
    EXPECT_EQ(a.predictions, b.predictions);
    EXPECT_EQ(a.confusion, b.confusion);
    EXPECT_EQ(score_batch_parallel(head, emb, t), score_batch(head, emb));
  }
}

class HarnessTest : public ::testing::Test {
 protected:
  Dataset data = synth_blob_dataset(8, 10, 5, 8, 13);
  SessionSplit split = make_session_split(data, 4, 2, 2, 2, 3);
  EncoderParams encoder = [] {
    EncoderConfig c;
    c.kind = EncoderKind::kMlp;
    c.input = {1, 8, 8};
    c.hidden = {12};
    c.embedding_dim = 6;
    c.augment.enabled = false;
    return init_encoder(c, 4);
  }();

  AdapterParams adapter(double u) const {
    AdapterConfig c;
    c.embedding_dim = 6;
    AdapterParams p = init_adapter(c, 5);
    p.params["adapter.u.0"] = Tensor::matrix(6, 6, u);
    return p;
  }
};

TEST_F(HarnessTest, CumulativePoolsAndMetricInvariants) {
  std::vector<SessionTrace> traces;
  const RunResult r = run_incremental(encoder, std::nullopt, std::nullopt, data, split, RunConfig{},
                                      [&](const SessionTrace& t) { traces.push_back(t); });
  ASSERT_EQ(r.metrics.accuracies.size(), 3u);
  EXPECT_EQ(r.metrics.classes, (std::vector<std::size_t>{4, 6, 8}));
  EXPECT_EQ(r.metrics.test_counts, (std::vector<std::size_t>{20, 30, 40}));
  EXPECT_EQ(r.metrics.pd, r.metrics.accuracies.front() - r.metrics.accuracies.back());
  for (std::size_t i = 0; i < 3; ++i) {
    const double a = r.metrics.accuracies[i];
    EXPECT_GE(a, 0.0);
    EXPECT_LE(a, 1.0);
    const ConfusionMatrix& cm = r.metrics.confusions[i];
    EXPECT_EQ(static_cast<double>(cm.trace()) / static_cast<double>(cm.total()), a);
    for (std::size_t row = 0; row < cm.classes.size(); ++row) EXPECT_EQ(cm.row_sum(row), 5u);
    EXPECT_EQ(traces[i].raw_bank.heads.size(), i + 1);
    EXPECT_EQ(traces[i].labels.size(), r.metrics.test_counts[i]);
    EXPECT_EQ(traces[i].scoring_head.weights, traces[i].raw_bank.stacked());
  }
}

TEST_F(HarnessTest, DecoupledRunsNeverTouchTheEncoder) {
  RunConfig cfg;
  const RunResult r = run_incremental(encoder, adapter(0.01), std::nullopt, data, split, cfg);
  EXPECT_EQ(r.encoder_digest_before, r.encoder_digest_after);
  EXPECT_EQ(r.encoder_digest_before, params_digest(encoder));
  cfg.switches.decoupled = false;
  cfg.head = HeadKind::kLinear;
  cfg.finetune_epochs = 2;
  const RunResult f = run_incremental(encoder, std::nullopt, std::nullopt, data, split, cfg);
  EXPECT_NE(f.encoder_digest_before, f.encoder_digest_after);
}

TEST_F(HarnessTest, ZeroMessageAdapterReproducesAdapterOff) {
  RunConfig off;
  RunConfig on;
  on.switches.adapter = true;
  std::vector<Tensor> a, b;
  run_incremental(encoder, std::nullopt, std::nullopt, data, split, off,
                  [&](const SessionTrace& t) { a.push_back(t.logits); });
  const RunResult r = run_incremental(encoder, adapter(0.0), std::nullopt, data, split, on,
                                      [&](const SessionTrace& t) { b.push_back(t.logits); });
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i], b[i]);
  const RunResult nonzero = run_incremental(encoder, adapter(0.05), std::nullopt, data, split, on,
                                            [&](const SessionTrace& t) { b.push_back(t.logits); });
  EXPECT_NE(b.back(), a.back());
}

TEST_F(HarnessTest, BaseSessionOnly) {
  const Dataset four = synth_blob_dataset(4, 10, 5, 8, 13);
  const SessionSplit base_only = make_session_split(four, 4, 0, 2, 2, 3);
  const RunResult r = run_incremental(encoder, std::nullopt, std::nullopt, four, base_only, RunConfig{});
  EXPECT_EQ(r.metrics.accuracies.size(), 1u);
  EXPECT_EQ(r.metrics.pd, 0.0);
  EXPECT_EQ(r.metrics.avg, r.metrics.accuracies[0]);
}

TEST_F(HarnessTest, ThreadCountDoesNotChangeMetrics) {
  RunConfig cfg;
  cfg.switches.adapter = true;
  const RunResult one = run_incremental(encoder, adapter(0.02), std::nullopt, data, split, cfg);
  cfg.threads = 4;
  const RunResult four = run_incremental(encoder, adapter(0.02), std::nullopt, data, split, cfg);
  EXPECT_EQ(one.metrics.accuracies, four.metrics.accuracies);
  EXPECT_EQ(one.metrics.confusions, four.metrics.confusions);
  EXPECT_EQ(metrics_to_json(one.metrics).dump(), metrics_to_json(four.metrics).dump());
}

TEST_F(HarnessTest, RandomInitHeadsAndQueryNode) {
  RunConfig cfg;
  cfg.switches.data_init = false;
  cfg.fit_epochs = 5;
  const RunResult r = run_incremental(encoder, std::nullopt, std::nullopt, data, split, cfg);
  EXPECT_EQ(r.metrics.accuracies.size(), 3u);

  AdapterParams q = adapter(0.02);
  q.config.query_node = true;
  RunConfig qc;
  qc.switches.adapter = true;
  const RunResult rq = run_incremental(encoder, q, std::nullopt, data, split, qc);
  EXPECT_EQ(rq.metrics.accuracies.size(), 3u);
  EXPECT_THROW(run_incremental(encoder, std::nullopt, std::nullopt, data, split, qc),
               std::invalid_argument);
}

}  // namespace
}  // namespace cec
