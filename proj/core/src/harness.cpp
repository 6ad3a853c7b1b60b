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

#include "cec/harness.hpp"

#include <fmt/format.h>

#include "cec/error.hpp"
#include "cec/evaluate.hpp"
#include "cec/optim.hpp"
#include "cec/random.hpp"

namespace cec {

void to_json(nlohmann::json& j, const RunConfig& c) {
  j = {{"decoupled", c.switches.decoupled},
       {"data_init", c.switches.data_init},
       {"adapter", c.switches.adapter},
       {"pil", c.switches.pil},
       {"head", std::string(head_name(c.head))},
       {"scale", c.scale},
       {"fit_epochs", c.fit_epochs},
       {"fit_lr", c.fit_lr},
       {"base_head", c.base_head == BaseHead::kDataInit ? "data-init" : "pretrained"},
       {"finetune_epochs", c.finetune_epochs},
       {"finetune_lr", c.finetune_lr},
       {"seed", c.seed}};
}

void from_json(const nlohmann::json& j, RunConfig& c) {
  RunConfig d;
  c.switches.decoupled = j.value("decoupled", d.switches.decoupled);
  c.switches.data_init = j.value("data_init", d.switches.data_init);
  c.switches.adapter = j.value("adapter", d.switches.adapter);
  c.switches.pil = j.value("pil", d.switches.pil);
  c.head = parse_head_kind(j.value("head", std::string(head_name(d.head))));
  c.scale = j.value("scale", d.scale);
  c.fit_epochs = j.value("fit_epochs", d.fit_epochs);
  c.fit_lr = j.value("fit_lr", d.fit_lr);
  const std::string base = j.value("base_head", std::string("data-init"));
  if (base == "data-init") {
    c.base_head = BaseHead::kDataInit;
  } else if (base == "pretrained") {
    c.base_head = BaseHead::kPretrained;
  } else {
    throw std::invalid_argument(fmt::format("unknown base_head '{}'", base));
  }
  c.finetune_epochs = j.value("finetune_epochs", d.finetune_epochs);
  c.finetune_lr = j.value("finetune_lr", d.finetune_lr);
  c.seed = j.value("seed", d.seed);
  c.threads = j.value("threads", d.threads);
}

namespace {

std::vector<int> labels_of(std::span<const SampleRef> refs) {
  std::vector<int> out;
  out.reserve(refs.size());
  for (const SampleRef& r : refs) out.push_back(r.class_id);
  return out;
}

ClassifierWeights learn_head(const EncoderParams& encoder, const Dataset& data,
                             const Session& session, const RunConfig& cfg, std::uint64_t seed) {
  const Tensor emb = embed(encoder, data.gather(Split::kTrain, session.train), cfg.threads);
  const std::vector<int> labels = labels_of(session.train);
  ClassifierWeights head;
  if (cfg.switches.data_init) {
    head = init_from_data(emb, labels, session.classes, cfg.head, cfg.scale);
    if (cfg.fit_epochs > 0) head = fit_head(head, emb, labels, cfg.fit_epochs, cfg.fit_lr, seed);
  } else {
    head = init_random(session.classes, encoder.config.embedding_dim, cfg.head, seed, cfg.scale);
    const std::size_t epochs = cfg.fit_epochs > 0 ? cfg.fit_epochs : kDefaultFitEpochs;
    head = fit_head(head, emb, labels, epochs, cfg.fit_lr, derive_seed(seed, 1));
  }
  head.session = session.index;
  return head;
}

// Joint cross-entropy finetuning of the whole encoder and every head row on
// one session's support set: the non-decoupled baseline.
void finetune_all(EncoderParams& encoder, ClassifierBank& bank, const Dataset& data,
                  const Session& session, const RunConfig& cfg) {
  if (cfg.finetune_epochs == 0) return;
  const ClassifierWeights flat = bank.concatenated();
  const std::vector<int> columns = label_columns(flat, labels_of(session.train));
  const Tensor input = images_to_batch(data.gather(Split::kTrain, session.train));

  ParamSet params = encoder.params;
  params.emplace("head.w", flat.weights);
  if (flat.bias) params.emplace("head.b", *flat.bias);
  SgdState opt = make_sgd_state(params, cfg.finetune_lr, 0.9);

  for (std::size_t epoch = 0; epoch < cfg.finetune_epochs; ++epoch) {
    EncoderParams current{encoder.config, {}};
    for (const auto& [name, t] : params) {
      if (!name.starts_with("head.")) current.params.emplace(name, t);
    }
    BoundGraph bg;
    NodeId in = bg.constant("input", input);
    NodeId emb = build_encoder(bg, current, in, Trainable::kAll);
    NodeId w = bg.parameter("head.w", params.at("head.w"));
    std::optional<NodeId> b;
    if (flat.bias) b = bg.parameter("head.b", params.at("head.b"));
    NodeId logits = head_logits(bg, flat.kind, emb, w, b, flat.scale, input.rows(),
                                flat.num_classes(), flat.dim());
    NodeId loss = bg.graph.cross_entropy(logits, columns);
    BackwardResult res;
    try {
      res = bg.backward(loss);
    } catch (const NonFiniteError& e) {
      throw DivergenceError(fmt::format("session {} finetuning diverged in epoch {}: {}",
                                        session.index, epoch, e.what()));
    }
    SgdUpdate step = sgd_step(params, bg.named_grads(res), opt);
    params = std::move(step.params);
    opt = std::move(step.state);
  }

  for (auto& [name, t] : encoder.params) t = params.at(name);
  bank = bank.with_rows(params.at("head.w"));
  if (flat.bias) {
    const Tensor& bias = params.at("head.b");
    std::size_t offset = 0;
    for (ClassifierWeights& h : bank.heads) {
      Tensor hb = Tensor::matrix(1, h.num_classes());
      for (std::size_t i = 0; i < h.num_classes(); ++i) hb[i] = bias[offset + i];
      h.bias = std::move(hb);
      offset += h.num_classes();
    }
  }
}

}  // namespace

RunResult run_incremental(const EncoderParams& encoder, const std::optional<AdapterParams>& adapter,
                          const std::optional<ClassifierWeights>& pretrained_head,
                          const Dataset& data, const SessionSplit& split, const RunConfig& cfg,
                          const SessionObserver& observer) {
  if (split.sessions.empty()) throw std::invalid_argument("run_incremental: split has no sessions");
  if (cfg.switches.adapter && !adapter) {
    throw std::invalid_argument("run_incremental: adapter switch is on but no adapter was given");
  }
  if (adapter && adapter->config.embedding_dim != encoder.config.embedding_dim) {
    throw ShapeError("run_incremental: adapter and encoder embedding dimensions differ");
  }

  RunResult result;
  result.encoder_digest_before = params_digest(encoder);
  EncoderParams current = encoder;
  ClassifierBank bank;

  for (const Session& session : split.sessions) {
    const std::uint64_t session_seed = derive_seed(cfg.seed, session.index);
    if (session.index == 0 && cfg.base_head == BaseHead::kPretrained) {
      if (!pretrained_head) throw std::invalid_argument("run_incremental: no pretrained base head");
      if (cfg.head != HeadKind::kLinear || pretrained_head->kind != HeadKind::kLinear) {
        throw std::invalid_argument("run_incremental: the pretrained base head is linear");
      }
      if (pretrained_head->class_ids != session.classes) {
        throw std::invalid_argument("run_incremental: pretrained head classes differ from session 0");
      }
      bank.heads.push_back(*pretrained_head);
      bank.heads.back().session = 0;
    } else {
      bank.heads.push_back(learn_head(current, data, session, cfg, session_seed));
    }
    bank.validate();

    if (session.index > 0 && !cfg.switches.decoupled) finetune_all(current, bank, data, session, cfg);

    const std::vector<SampleRef> pool = session_test_pool(data, split, session.index);
    const std::vector<int> labels = labels_of(pool);
    const Tensor emb = embed(current, data.gather(Split::kTest, pool), cfg.threads);

    SessionTrace trace;
    trace.session = session.index;
    if (cfg.switches.adapter && adapter->config.query_node) {
      trace.scoring_head = bank.concatenated();
      trace.logits = Tensor::matrix(emb.rows(), bank.rows());
      for (std::size_t i = 0; i < emb.rows(); ++i) {
        const ClassifierWeights h = adapt_with_query(*adapter, bank, emb.row_span(i)).concatenated();
        const std::vector<double> row = score(h, emb.row_span(i));
        std::copy(row.begin(), row.end(), trace.logits.row_span(i).begin());
      }
    } else {
      trace.scoring_head =
          cfg.switches.adapter ? adapt(*adapter, bank).concatenated() : bank.concatenated();
      trace.logits = score_batch_parallel(trace.scoring_head, emb, cfg.threads);
    }
    const EvalResult eval = evaluate_logits(trace.logits, trace.scoring_head.class_ids, labels);

    result.metrics.accuracies.push_back(eval.accuracy);
    result.metrics.classes.push_back(bank.rows());
    result.metrics.test_counts.push_back(pool.size());
    result.metrics.confusions.push_back(eval.confusion);

    if (observer) {
      trace.raw_bank = bank;
      trace.labels = labels;
      observer(trace);
    }
  }
  finalize(result.metrics);
  result.encoder_digest_after = params_digest(current);
  result.final_encoder = std::move(current);
  return result;
}

}  // namespace cec
