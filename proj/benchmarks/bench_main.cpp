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

#include <vector>

#include <benchmark/benchmark.h>

#include "cec/adapter.hpp"
#include "cec/encoder.hpp"
#include "cec/evaluate.hpp"
#include "cec/random.hpp"

namespace cec {
namespace {

Tensor random_matrix(std::size_t r, std::size_t c, std::uint64_t seed) {
  Rng rng(seed);
  return uniform_tensor({r, c}, -1.0, 1.0, rng);
}

void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Tensor a = random_matrix(n, n, 1), b = random_matrix(n, n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(matmul(a, b));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n * n));
}
BENCHMARK(BM_Matmul)->Arg(32)->Arg(64)->Arg(128);

void BM_Embed(benchmark::State& state) {
  const EncoderParams enc = init_encoder(EncoderConfig{}, 3);
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(4);
  const Tensor batch = uniform_tensor({n, 256}, 0.0, 1.0, rng);
  for (auto _ : state) benchmark::DoNotOptimize(embed(enc, batch));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Embed)->Arg(64)->Arg(512);

ClassifierBank bank_of(std::size_t m, std::size_t c) {
  ClassifierBank bank;
  ClassifierWeights h;
  h.weights = random_matrix(m, c, 5);
  for (std::size_t i = 0; i < m; ++i) h.class_ids.push_back(static_cast<int>(i));
  bank.heads.push_back(std::move(h));
  return bank;
}

void BM_Adapt(benchmark::State& state) {
  AdapterConfig cfg;
  cfg.embedding_dim = 32;
  const AdapterParams p = init_adapter(cfg, 6);
  const ClassifierBank bank = bank_of(static_cast<std::size_t>(state.range(0)), 32);
  for (auto _ : state) benchmark::DoNotOptimize(adapt(p, bank));
}
BENCHMARK(BM_Adapt)->Arg(20)->Arg(100)->Arg(200);

void BM_EvaluateEmbeddings(benchmark::State& state) {
  const ClassifierBank bank = bank_of(100, 32);
  const ClassifierWeights head = bank.concatenated();
  const Tensor emb = random_matrix(2000, 32, 7);
  std::vector<int> labels(2000);
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = static_cast<int>(i % 100);
  const auto threads = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(evaluate_embeddings(head, emb, labels, threads));
}
BENCHMARK(BM_EvaluateEmbeddings)->Arg(1)->Arg(4);

}  // namespace
}  // namespace cec

BENCHMARK_MAIN();
