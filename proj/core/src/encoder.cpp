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

#include "cec/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

#include <fmt/format.h>

#include "cec/error.hpp"
#include "cec/optim.hpp"
#include "cec/random.hpp"

namespace cec {

std::string_view encoder_name(EncoderKind kind) {
  return kind == EncoderKind::kMlp ? "mlp" : "tiny-cnn";
}

EncoderKind parse_encoder_kind(std::string_view name) {
  if (name == "mlp") return EncoderKind::kMlp;
  if (name == "tiny-cnn") return EncoderKind::kTinyCnn;
  throw std::invalid_argument(fmt::format("unknown encoder kind '{}'", name));
}

void to_json(nlohmann::json& j, const EncoderConfig& c) {
  j = {{"kind", std::string(encoder_name(c.kind))},
       {"channels", c.input.channels},
       {"height", c.input.height},
       {"width", c.input.width},
       {"hidden", c.hidden},
       {"embedding_dim", c.embedding_dim},
       {"augment", c.augment}};
}

void from_json(const nlohmann::json& j, EncoderConfig& c) {
  EncoderConfig d;
  c.kind = parse_encoder_kind(j.value("kind", std::string(encoder_name(d.kind))));
  c.input.channels = j.value("channels", d.input.channels);
  c.input.height = j.value("height", d.input.height);
  c.input.width = j.value("width", d.input.width);
  c.hidden = j.value("hidden", d.hidden);
  c.embedding_dim = j.value("embedding_dim", d.embedding_dim);
  c.augment = j.value("augment", d.augment);
}

namespace {

// Flattened feature width entering the last layer.
std::size_t trunk_width(const EncoderConfig& c) {
  if (c.kind == EncoderKind::kMlp) return c.hidden.empty() ? c.input.size() : c.hidden.back();
  ImageGeometry g = conv_output_geometry(c.input, c.hidden[0], 3, 3);
  g = pool_output_geometry(g);
  g = conv_output_geometry(g, c.hidden[1], 3, 3);
  g = pool_output_geometry(g);
  return g.size();
}

}  // namespace

void validate(const EncoderConfig& c) {
  if (c.embedding_dim < 2) throw std::invalid_argument("encoder: embedding_dim must be at least 2");
  if (c.input.size() == 0) throw std::invalid_argument("encoder: empty input geometry");
  if (std::find(c.hidden.begin(), c.hidden.end(), 0u) != c.hidden.end()) {
    throw std::invalid_argument("encoder: hidden widths must be positive");
  }
  if (c.kind == EncoderKind::kTinyCnn) {
    if (c.hidden.size() != 2) {
      throw std::invalid_argument("encoder: tiny-cnn needs exactly two conv channel counts");
    }
    // conv3 -> pool -> conv3 -> pool must leave at least one pixel.
    const std::size_t side = std::min(c.input.height, c.input.width);
    if (side < 10) throw std::invalid_argument("encoder: tiny-cnn needs inputs of at least 10x10");
  }
}

bool is_last_layer(std::string_view name) { return name.starts_with(kLastLayerPrefix); }

EncoderParams init_encoder(const EncoderConfig& config, std::uint64_t seed) {
  validate(config);
  Rng rng(seed);
  EncoderParams p;
  p.config = config;
  if (config.kind == EncoderKind::kTinyCnn) {
    const std::size_t cin = config.input.channels, c1 = config.hidden[0], c2 = config.hidden[1];
    p.params.emplace("conv1.k", glorot_uniform({c1, cin * 9}, cin * 9, c1 * 9, rng));
    p.params.emplace("conv2.k", glorot_uniform({c2, c1 * 9}, c1 * 9, c2 * 9, rng));
  } else {
    std::size_t in = config.input.size();
    for (std::size_t i = 0; i < config.hidden.size(); ++i) {
      const std::size_t h = config.hidden[i];
      p.params.emplace(fmt::format("fc{}.w", i + 1), glorot_uniform({in, h}, in, h, rng));
      p.params.emplace(fmt::format("fc{}.b", i + 1), Tensor::matrix(1, h));
      in = h;
    }
  }
  const std::size_t in = trunk_width(config);
  p.params.emplace("last.w", glorot_uniform({in, config.embedding_dim}, in, config.embedding_dim, rng));
  p.params.emplace("last.b", Tensor::matrix(1, config.embedding_dim));
  return p;
}

NodeId build_encoder(BoundGraph& bg, const EncoderParams& params, NodeId input,
                     Trainable trainable) {
  const EncoderConfig& c = params.config;
  auto leaf = [&](const std::string& name) {
    const Tensor& t = params.params.at(name);
    const bool train = trainable == Trainable::kAll ||
                       (trainable == Trainable::kLastLayer && is_last_layer(name));
    return train ? bg.parameter(name, t) : bg.constant(name, t);
  };
  Graph& g = bg.graph;
  NodeId x = input;
  if (c.kind == EncoderKind::kTinyCnn) {
    ImageGeometry geo = c.input;
    x = g.relu(g.conv2d_valid(x, leaf("conv1.k"), geo, 3, 3));
    geo = conv_output_geometry(geo, c.hidden[0], 3, 3);
    x = g.avgpool2x2(x, geo);
    geo = pool_output_geometry(geo);
    x = g.relu(g.conv2d_valid(x, leaf("conv2.k"), geo, 3, 3));
    geo = conv_output_geometry(geo, c.hidden[1], 3, 3);
    x = g.avgpool2x2(x, geo);
  } else {
    for (std::size_t i = 0; i < c.hidden.size(); ++i) {
      x = g.relu(g.add(g.matmul(x, leaf(fmt::format("fc{}.w", i + 1))),
                       leaf(fmt::format("fc{}.b", i + 1))));
    }
  }
  return g.add(g.matmul(x, leaf("last.w")), leaf("last.b"));
}

namespace {

constexpr std::size_t kEmbedChunk = 256;

Tensor embed_rows(const EncoderParams& params, const Tensor& batch, std::size_t begin,
                  std::size_t end) {
  Tensor out = Tensor::matrix(end - begin, params.config.embedding_dim);
  for (std::size_t start = begin; start < end; start += kEmbedChunk) {
    const std::size_t stop = std::min(end, start + kEmbedChunk);
    std::vector<std::size_t> idx(stop - start);
    std::iota(idx.begin(), idx.end(), start);
    BoundGraph bg;
    NodeId in = bg.constant("input", select_rows(batch, idx));
    NodeId emb = build_encoder(bg, params, in, Trainable::kNone);
    const Tensor& e = bg.forward(emb);
    std::copy(e.values().begin(), e.values().end(),
              out.values().begin() + static_cast<std::ptrdiff_t>((start - begin) * e.cols()));
  }
  return out;
}

}  // namespace

Tensor embed(const EncoderParams& params, const Tensor& batch, std::size_t threads) {
  if (batch.rank() != 2 || batch.cols() != params.config.input.size()) {
    throw ShapeError(fmt::format("embed: batch {} does not match encoder input size {}",
                                 shape_to_string(batch.shape()), params.config.input.size()));
  }
  const std::size_t n = batch.rows();
  threads = std::max<std::size_t>(1, std::min(threads, (n + kEmbedChunk - 1) / kEmbedChunk));
  if (threads == 1) return embed_rows(params, batch, 0, n);

  std::vector<Tensor> parts(threads);
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  const std::size_t per = (n + threads - 1) / threads;
  for (std::size_t t = 0; t < threads; ++t) {
    const std::size_t b = std::min(n, t * per), e = std::min(n, b + per);
    pool.emplace_back([&, t, b, e] {
      try {
        if (b < e) parts[t] = embed_rows(params, batch, b, e);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& err : errors) {
    if (err) std::rethrow_exception(err);
  }
  std::vector<Tensor> nonempty;
  for (auto& p : parts) {
    if (!p.empty()) nonempty.push_back(std::move(p));
  }
  return concat_rows(nonempty);
}

Tensor embed(const EncoderParams& params, std::span<const Image* const> images,
             std::size_t threads) {
  for (const Image* img : images) {
    if (img->geometry() != params.config.input) {
      throw ShapeError("embed: image geometry does not match the encoder input");
    }
  }
  return embed(params, images_to_batch(images), threads);
}

std::string params_digest(const EncoderParams& params) { return params_digest(params.params); }

ParamDocument encoder_to_document(const EncoderParams& params) {
  ParamDocument doc;
  doc.meta = {{"kind", "encoder"}, {"config", params.config}};
  doc.params = params.params;
  return doc;
}

EncoderParams encoder_from_document(const ParamDocument& doc) {
  if (doc.meta.value("kind", std::string()) != "encoder") {
    throw FormatError("checkpoint is not an encoder");
  }
  EncoderParams p;
  p.config = doc.meta.at("config").get<EncoderConfig>();
  p.params = doc.params;
  const EncoderParams fresh = init_encoder(p.config, 0);
  for (const auto& [name, t] : fresh.params) {
    auto it = p.params.find(name);
    if (it == p.params.end() || it->second.shape() != t.shape()) {
      throw FormatError(fmt::format("encoder checkpoint: tensor '{}' missing or misshapen", name));
    }
  }
  if (p.params.size() != fresh.params.size()) {
    throw FormatError("encoder checkpoint: unexpected extra tensors");
  }
  return p;
}

void to_json(nlohmann::json& j, const PretrainConfig& c) {
  j = {{"epochs", c.epochs},   {"batch_size", c.batch_size}, {"learning_rate", c.learning_rate},
       {"momentum", c.momentum}, {"lr_step", c.lr_step},     {"lr_gamma", c.lr_gamma}};
}

void from_json(const nlohmann::json& j, PretrainConfig& c) {
  PretrainConfig d;
  c.epochs = j.value("epochs", d.epochs);
  c.batch_size = j.value("batch_size", d.batch_size);
  c.learning_rate = j.value("learning_rate", d.learning_rate);
  c.momentum = j.value("momentum", d.momentum);
  c.lr_step = j.value("lr_step", d.lr_step);
  c.lr_gamma = j.value("lr_gamma", d.lr_gamma);
}

namespace {

double argmax_accuracy(const ClassifierWeights& head, const Tensor& emb,
                       std::span<const int> columns) {
  const Tensor logits = score_batch(head, emb);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    auto row = logits.row_span(i);
    const auto best = std::max_element(row.begin(), row.end()) - row.begin();
    if (best == columns[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(logits.rows());
}

}  // namespace

PretrainResult pretrain(const Dataset& data, std::span<const int> classes,
                        const EncoderConfig& config, const PretrainConfig& train,
                        std::uint64_t seed) {
  if (classes.size() < 2) throw std::invalid_argument("pretrain: need at least two base classes");
  if (!(train.learning_rate > 0.0)) throw std::invalid_argument("pretrain: learning rate must be positive");
  if (train.batch_size == 0) throw std::invalid_argument("pretrain: batch size must be positive");
  if (data.geometry() != config.input) {
    throw ShapeError("pretrain: dataset geometry does not match the encoder input");
  }

  PretrainResult result;
  result.encoder = init_encoder(config, derive_seed(seed, 0));
  result.head = init_random(classes, config.embedding_dim, HeadKind::kLinear, derive_seed(seed, 1));

  const std::vector<SampleRef> samples = train_samples(data, classes);
  const std::vector<int> columns = [&] {
    std::vector<int> labels;
    for (const SampleRef& s : samples) labels.push_back(s.class_id);
    return label_columns(result.head, labels);
  }();

  ParamSet params = result.encoder.params;
  params.emplace("head.w", result.head.weights);
  params.emplace("head.b", *result.head.bias);
  SgdState opt = make_sgd_state(params, train.learning_rate, train.momentum);

  Rng shuffle_rng(derive_seed(seed, 2));
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  const std::size_t n_classes = classes.size();

  for (std::size_t epoch = 0; epoch < train.epochs; ++epoch) {
    if (train.lr_step > 0) {
      opt.learning_rate = train.learning_rate *
                          std::pow(train.lr_gamma, static_cast<double>(epoch / train.lr_step));
    }
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    const std::uint64_t epoch_seed = derive_seed(seed, 3 + epoch);
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += train.batch_size) {
      const std::size_t end = std::min(order.size(), start + train.batch_size);
      std::vector<Image> images;
      std::vector<int> cols;
      for (std::size_t k = start; k < end; ++k) {
        const std::size_t i = order[k];
        images.push_back(augment_image(data.image(Split::kTrain, samples[i]), config.augment,
                                       derive_seed(epoch_seed, i)));
        cols.push_back(columns[i]);
      }
      EncoderParams current{config, {}};
      for (const auto& [name, t] : params) {
        if (!name.starts_with("head.")) current.params.emplace(name, t);
      }
      BoundGraph bg;
      NodeId in = bg.constant("input", images_to_batch(images));
      NodeId emb = build_encoder(bg, current, in, Trainable::kAll);
      NodeId w = bg.parameter("head.w", params.at("head.w"));
      NodeId b = bg.parameter("head.b", params.at("head.b"));
      NodeId logits = head_logits(bg, HeadKind::kLinear, emb, w, b, 1.0, images.size(), n_classes,
                                  config.embedding_dim);
      NodeId loss = bg.graph.cross_entropy(logits, std::move(cols));
      BackwardResult res;
      try {
        res = bg.backward(loss);
      } catch (const NonFiniteError& e) {
        throw DivergenceError(fmt::format("pretrain diverged in epoch {}: {}", epoch, e.what()));
      }
      if (!std::isfinite(res.loss)) {
        throw DivergenceError(fmt::format("pretrain diverged in epoch {}", epoch));
      }
      auto step = sgd_step(params, bg.named_grads(res), opt);
      params = std::move(step.params);
      opt = std::move(step.state);
      loss_sum += res.loss;
      ++batches;
    }
    result.epoch_losses.push_back(loss_sum / static_cast<double>(batches));
  }

  result.encoder.params.clear();
  for (const auto& [name, t] : params) {
    if (!name.starts_with("head.")) result.encoder.params.emplace(name, t);
  }
  result.head.weights = params.at("head.w");
  result.head.bias = params.at("head.b");

  const Tensor emb = embed(result.encoder, data.gather(Split::kTrain, samples));
  result.train_accuracy = argmax_accuracy(result.head, emb, columns);
  return result;
}

}  // namespace cec
