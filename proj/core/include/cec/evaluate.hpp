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

#pragma once

#include <span>
#include <vector>

#include "cec/dataset.hpp"
#include "cec/encoder.hpp"
#include "cec/heads.hpp"
#include "cec/metrics.hpp"

namespace cec {

struct EvalResult {
  std::size_t correct = 0;
  std::size_t total = 0;
  double accuracy = 0.0;
  ConfusionMatrix confusion;
  std::vector<int> predictions;  // class ids, sample order
};

/// Class id of the largest logit in each row; ties go to the lowest class id.
std::vector<int> predict(const Tensor& logits, std::span<const int> class_ids);

/// Top-1 accuracy and confusion matrix of precomputed logits [N, M] whose
/// columns are `class_ids`. Every label must be one of the class ids.
EvalResult evaluate_logits(const Tensor& logits, std::span<const int> class_ids,
                           std::span<const int> labels);

/// Scores `embeddings` with `head`, splitting rows over `threads` workers.
/// Counts are integers, so the result does not depend on the thread count.
EvalResult evaluate_embeddings(const ClassifierWeights& head, const Tensor& embeddings,
                               std::span<const int> labels, std::size_t threads = 1);

/// Embeds every pool image with the frozen encoder, then evaluate_embeddings.
EvalResult evaluate(const EncoderParams& encoder, const ClassifierWeights& head,
                    const Dataset& data, std::span<const SampleRef> pool, std::size_t threads = 1);

/// Row-parallel score_batch.
Tensor score_batch_parallel(const ClassifierWeights& head, const Tensor& embeddings,
                            std::size_t threads);

}  // namespace cec
