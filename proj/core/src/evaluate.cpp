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

#include "cec/evaluate.hpp"

#include <algorithm>
#include <exception>
#include <thread>

#include <fmt/format.h>

#include "cec/error.hpp"

namespace cec {

std::vector<int> predict(const Tensor& logits, std::span<const int> class_ids) {
  if (logits.cols() != class_ids.size()) {
    throw ShapeError(fmt::format("predict: {} logit columns for {} classes", logits.cols(),
                                 class_ids.size()));
  }
  std::vector<int> out(logits.rows());
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    auto row = logits.row_span(i);
    std::size_t best = 0;
    for (std::size_t j = 1; j < row.size(); ++j) {
      if (row[j] > row[best] || (row[j] == row[best] && class_ids[j] < class_ids[best])) best = j;
    }
    out[i] = class_ids[best];
  }
  return out;
}

EvalResult evaluate_logits(const Tensor& logits, std::span<const int> class_ids,
                           std::span<const int> labels) {
  if (logits.rows() != labels.size()) {
    throw ShapeError(fmt::format("evaluate: {} logit rows for {} labels", logits.rows(), labels.size()));
  }
  EvalResult r;
  r.confusion.classes.assign(class_ids.begin(), class_ids.end());
  std::sort(r.confusion.classes.begin(), r.confusion.classes.end());
  const std::size_t m = class_ids.size();
  r.confusion.counts.assign(m, std::vector<std::size_t>(m, 0));
  r.predictions = predict(logits, class_ids);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (!std::binary_search(r.confusion.classes.begin(), r.confusion.classes.end(), labels[i])) {
      throw std::invalid_argument(fmt::format("evaluate: test label {} has no classifier", labels[i]));
    }
    ++r.confusion.counts[r.confusion.index_of(labels[i])][r.confusion.index_of(r.predictions[i])];
    if (r.predictions[i] == labels[i]) ++r.correct;
  }
  r.total = labels.size();
  r.accuracy = r.total == 0 ? 0.0 : static_cast<double>(r.correct) / static_cast<double>(r.total);
  return r;
}

Tensor score_batch_parallel(const ClassifierWeights& head, const Tensor& embeddings,
                            std::size_t threads) {
  const std::size_t n = embeddings.rows();
  threads = std::max<std::size_t>(1, std::min(threads, n));
  if (threads == 1) return score_batch(head, embeddings);
  Tensor out = Tensor::matrix(n, head.num_classes());
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  const std::size_t per = (n + threads - 1) / threads;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::size_t i = t * per; i < std::min(n, (t + 1) * per); ++i) {
          const std::vector<double> row = score(head, embeddings.row_span(i));
          std::copy(row.begin(), row.end(), out.row_span(i).begin());
        }
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

EvalResult evaluate_embeddings(const ClassifierWeights& head, const Tensor& embeddings,
                               std::span<const int> labels, std::size_t threads) {
  return evaluate_logits(score_batch_parallel(head, embeddings, threads), head.class_ids, labels);
}

EvalResult evaluate(const EncoderParams& encoder, const ClassifierWeights& head,
                    const Dataset& data, std::span<const SampleRef> pool, std::size_t threads) {
  std::vector<int> labels;
  for (const SampleRef& s : pool) labels.push_back(s.class_id);
  const Tensor emb = embed(encoder, data.gather(Split::kTest, pool), threads);
  return evaluate_embeddings(head, emb, labels, threads);
}

}  // namespace cec
