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

#include "cec/pil.hpp"

#include <cmath>

#include <fmt/format.h>

#include "cec/episode.hpp"
#include "cec/error.hpp"
#include "cec/random.hpp"

namespace cec {

void to_json(nlohmann::json& j, const PilConfig& c) {
  j = {{"way", c.way},
       {"shot", c.shot},
       {"query", c.query},
       {"angle_pool", c.angle_pool},
       {"iterations", c.iterations},
       {"learning_rate", c.learning_rate},
       {"lr_decay", c.lr_decay},
       {"decay_every", c.decay_every},
       {"momentum", c.momentum},
       {"last_layer_lr_ratio", c.last_layer_lr_ratio},
       {"inner_epochs", c.inner_epochs},
       {"inner_lr", c.inner_lr},
       {"head", std::string(head_name(c.head))},
       {"scale", c.scale},
       {"augment", c.augment},
       {"incremental", c.incremental},
       {"seed", c.seed},
       {"adapter", c.adapter}};
}

void from_json(const nlohmann::json& j, PilConfig& c) {
  PilConfig d;
  c.way = j.value("way", d.way);
  c.shot = j.value("shot", d.shot);
  c.query = j.value("query", d.query);
  c.angle_pool = j.value("angle_pool", d.angle_pool);
  c.iterations = j.value("iterations", d.iterations);
  c.learning_rate = j.value("learning_rate", d.learning_rate);
  c.lr_decay = j.value("lr_decay", d.lr_decay);
  c.decay_every = j.value("decay_every", d.decay_every);
  c.momentum = j.value("momentum", d.momentum);
  c.last_layer_lr_ratio = j.value("last_layer_lr_ratio", d.last_layer_lr_ratio);
  c.inner_epochs = j.value("inner_epochs", d.inner_epochs);
  c.inner_lr = j.value("inner_lr", d.inner_lr);
  c.head = parse_head_kind(j.value("head", std::string(head_name(d.head))));
  c.scale = j.value("scale", d.scale);
  c.augment = j.value("augment", d.augment);
  c.incremental = j.value("incremental", d.incremental);
  c.seed = j.value("seed", d.seed);
  c.adapter = j.value("adapter", d.adapter);
}

void validate(const PilConfig& c) {
  if (c.iterations < 1) throw std::invalid_argument("pil: iterations must be at least 1");
  if (c.way < 1 || c.shot < 1 || c.query < 1) {
    throw std::invalid_argument("pil: way, shot and query must be at least 1");
  }
  if (c.angle_pool.empty()) throw std::invalid_argument("pil: empty angle pool");
  if (!(c.learning_rate > 0.0)) throw std::invalid_argument("pil: learning rate must be positive");
  if (c.last_layer_lr_ratio < 0.0) throw std::invalid_argument("pil: negative last-layer lr ratio");
  if (c.decay_every == 0) throw std::invalid_argument("pil: decay_every must be positive");
}

double pil_learning_rate(const PilConfig& c, std::size_t iteration) {
  return c.learning_rate * std::pow(c.lr_decay, static_cast<double>(iteration / c.decay_every));
}

PilState make_pil_state(const EncoderParams& encoder, const AdapterParams& adapter,
                        const PilConfig& config) {
  PilState s{adapter, encoder, make_sgd_state(adapter.params, config.learning_rate, config.momentum), {}};
  ParamSet last;
  for (const auto& [name, t] : encoder.params) {
    if (is_last_layer(name)) last.emplace(name, t);
  }
  s.last_layer_opt = make_sgd_state(
      last, config.learning_rate * std::max(config.last_layer_lr_ratio, 1e-12), config.momentum);
  return s;
}

std::uint64_t pil_iteration_seed(std::uint64_t seed, std::size_t it) {
  return derive_seed(derive_seed(seed, 0x50494cULL), it);
}

namespace {

struct LabelledImages {
  std::vector<Image> images;
  std::vector<int> labels;
};

void append(LabelledImages& out, const std::vector<EpisodeSample>& samples, const PilConfig& cfg,
            const AugmentConfig& aug, std::uint64_t seed) {
  for (const EpisodeSample& s : samples) {
    const std::uint64_t image_seed = derive_seed(seed, out.images.size());
    out.images.push_back(cfg.augment ? augment_image(s.image, aug, image_seed) : s.image);
    out.labels.push_back(s.label);
  }
}

ClassifierWeights support_head(const EncoderParams& enc, const LabelledImages& support,
                               std::vector<int> class_ids, std::size_t session,
                               const PilConfig& cfg, std::uint64_t seed) {
  const Tensor emb = embed(enc, images_to_batch(support.images));
  ClassifierWeights head = init_from_data(emb, support.labels, class_ids, cfg.head, cfg.scale);
  if (cfg.inner_epochs > 0) {
    head = fit_head(head, emb, support.labels, cfg.inner_epochs, cfg.inner_lr, seed);
  }
  head.session = session;
  return head;
}

}  // namespace

PilStep pil_iteration(const PilState& state, const Dataset& data, std::span<const int> base_classes,
                      const PilConfig& cfg, std::uint64_t iteration_seed, double lr) {
  const PseudoEpisode ep = sample_pseudo_episode(data, base_classes, cfg.way, cfg.shot, cfg.query,
                                                 derive_seed(iteration_seed, 0), cfg.angle_pool);
  const AugmentConfig& aug = state.encoder.config.augment;

  LabelledImages base_support, novel_support, queries;
  append(base_support, ep.base_support, cfg, aug, derive_seed(iteration_seed, 1));
  append(novel_support, ep.novel_support, cfg, aug, derive_seed(iteration_seed, 2));
  append(queries, ep.base_query, cfg, aug, derive_seed(iteration_seed, 3));
  append(queries, ep.novel_query, cfg, aug, derive_seed(iteration_seed, 4));

  std::vector<int> base_ids(cfg.way), novel_ids(cfg.way);
  for (std::size_t k = 0; k < cfg.way; ++k) {
    base_ids[k] = static_cast<int>(k);
    novel_ids[k] = static_cast<int>(cfg.way + k);
  }

  ClassifierBank bank;
  if (cfg.incremental) {
    bank.heads.push_back(support_head(state.encoder, base_support, base_ids, 0, cfg,
                                      derive_seed(iteration_seed, 5)));
    bank.heads.push_back(support_head(state.encoder, novel_support, novel_ids, 1, cfg,
                                      derive_seed(iteration_seed, 6)));
  } else {
    LabelledImages all = base_support;
    all.images.insert(all.images.end(), novel_support.images.begin(), novel_support.images.end());
    all.labels.insert(all.labels.end(), novel_support.labels.begin(), novel_support.labels.end());
    std::vector<int> ids = base_ids;
    ids.insert(ids.end(), novel_ids.begin(), novel_ids.end());
    bank.heads.push_back(support_head(state.encoder, all, ids, 0, cfg, derive_seed(iteration_seed, 5)));
  }

  const bool tune_last = cfg.last_layer_lr_ratio > 0.0;
  BoundGraph bg;
  NodeId q;
  const Tensor query_batch = images_to_batch(queries.images);
  if (tune_last) {
    NodeId in = bg.constant("input", query_batch);
    q = build_encoder(bg, state.encoder, in, Trainable::kLastLayer);
  } else {
    q = bg.constant("queries", embed(state.encoder, query_batch));
  }
  NodeId loss = build_adapt_loss(bg, state.adapter, bank, q, queries.images.size(), queries.labels,
                                 AdaptMode::train(derive_seed(iteration_seed, 7)), true);

  BackwardResult res;
  try {
    res = bg.backward(loss);
  } catch (const NonFiniteError& e) {
    throw DivergenceError(e.what());
  }
  const ParamSet grads = bg.named_grads(res);

  PilStep step;
  step.loss = res.loss;
  step.state = state;

  ParamSet adapter_grads, last_grads, last_params;
  for (const auto& [name, g] : grads) {
    if (is_last_layer(name)) {
      last_grads.emplace(name, g);
    } else {
      adapter_grads.emplace(name, g);
    }
  }
  SgdState aopt = state.adapter_opt;
  aopt.learning_rate = lr;
  SgdUpdate a = sgd_step(state.adapter.params, adapter_grads, aopt);
  step.state.adapter.params = std::move(a.params);
  step.state.adapter_opt = std::move(a.state);

  if (tune_last) {
    for (const auto& [name, t] : state.encoder.params) {
      if (is_last_layer(name)) last_params.emplace(name, t);
    }
    SgdState lopt = state.last_layer_opt;
    lopt.learning_rate = lr * cfg.last_layer_lr_ratio;
    SgdUpdate l = sgd_step(last_params, last_grads, lopt);
    for (auto& [name, t] : l.params) step.state.encoder.params.at(name) = std::move(t);
    step.state.last_layer_opt = std::move(l.state);
  }
  return step;
}

PilResult run_pil(const EncoderParams& encoder, const Dataset& data,
                  std::span<const int> base_classes, const PilConfig& config,
                  const std::optional<AdapterParams>& init) {
  validate(config);
  if (2 * config.way > base_classes.size()) {
    throw std::invalid_argument(fmt::format(
        "pil: {}-way episodes need {} base classes, have {}", config.way, 2 * config.way,
        base_classes.size()));
  }
  AdapterConfig acfg = config.adapter;
  acfg.embedding_dim = encoder.config.embedding_dim;
  AdapterParams adapter = init ? *init : init_adapter(acfg, derive_seed(config.seed, 0x41444150ULL));
  if (adapter.config.embedding_dim != encoder.config.embedding_dim) {
    throw ShapeError("pil: adapter and encoder embedding dimensions differ");
  }

  PilState state = make_pil_state(encoder, adapter, config);
  PilResult result;
  for (std::size_t it = 0; it < config.iterations; ++it) {
    const double lr = pil_learning_rate(config, it);
    PilStep step;
    try {
      step = pil_iteration(state, data, base_classes, config, pil_iteration_seed(config.seed, it), lr);
    } catch (const DivergenceError& e) {
      throw DivergenceError(fmt::format("pil diverged at iteration {}: {}", it, e.what()));
    }
    if (!std::isfinite(step.loss)) {
      throw DivergenceError(fmt::format("pil diverged at iteration {}", it));
    }
    result.log.push_back({it, step.loss, lr});
    state = std::move(step.state);
  }
  result.adapter = std::move(state.adapter);
  result.encoder = std::move(state.encoder);
  return result;
}

std::string loss_log_csv(std::span<const PilLogEntry> log) {
  std::string out = "iteration,loss,lr\n";
  for (const PilLogEntry& e : log) out += fmt::format("{},{:.17g},{:.17g}\n", e.iteration, e.loss, e.lr);
  return out;
}

}  // namespace cec
