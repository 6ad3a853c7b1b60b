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
#include <vector>

#include <gtest/gtest.h>

#include "cec/encoder.hpp"
#include "cec/error.hpp"
#include "cec/gradcheck.hpp"
#include "cec/synth.hpp"
#include "test_util.hpp"

namespace cec {
namespace {

EncoderConfig tiny_mlp() {
  EncoderConfig c;
  c.kind = EncoderKind::kMlp;
  c.input = {1, 1, 2};
  c.hidden = {2};
  c.embedding_dim = 2;
  return c;
}

TEST(Encoder, MlpMatchesHandComputation) {
  EncoderParams p = init_encoder(tiny_mlp(), 1);
  p.params["fc1.w"] = Tensor::from_rows({{1.0, -1.0}, {2.0, 0.5}});
  p.params["fc1.b"] = Tensor::from_rows({{0.0, -1.0}});
  p.params["last.w"] = Tensor::from_rows({{3.0, 1.0}, {-2.0, 1.0}});
  p.params["last.b"] = Tensor::from_rows({{0.25, 0.0}});
  // x = (1, 0.5): h = relu(1 + 1, -1 + 0.25 - 1) = (2, 0); out = (6.25, 2).
  // x = (0, 1):   h = relu(2, 0.5 - 1)        = (2, 0); out = (6.25, 2).
  // x = (0.5, 0): h = relu(0.5, -0.5 - 1)     = (0.5, 0); out = (1.75, 0.5).
  const Tensor batch = Tensor::from_rows({{1.0, 0.5}, {0.0, 1.0}, {0.5, 0.0}});
  EXPECT_EQ(embed(p, batch), Tensor::from_rows({{6.25, 2.0}, {6.25, 2.0}, {1.75, 0.5}}));
}

TEST(Encoder, ParameterNamesAndShapes) {
  const EncoderParams cnn = init_encoder(EncoderConfig{}, 3);
  EXPECT_EQ(cnn.params.at("conv1.k").shape(), (Shape{8, 9}));
  EXPECT_EQ(cnn.params.at("conv2.k").shape(), (Shape{16, 72}));
  // 16 -> conv 14 -> pool 7 -> conv 5 -> pool 2
  EXPECT_EQ(cnn.params.at("last.w").shape(), (Shape{16 * 2 * 2, 32}));
  EXPECT_TRUE(is_last_layer("last.w"));
  EXPECT_FALSE(is_last_layer("conv2.k"));
  EncoderConfig bad;
  bad.hidden = {8};
  EXPECT_THROW(init_encoder(bad, 1), std::invalid_argument);
  bad = EncoderConfig{};
  bad.input = {1, 8, 8};
  EXPECT_THROW(init_encoder(bad, 1), std::invalid_argument);
}

TEST(Encoder, RowsAreIndependentAndThreadCountInvariant) {
  const EncoderParams p = init_encoder(EncoderConfig{}, 5);
  std::vector<Image> imgs;
  for (std::uint64_t s = 0; s < 300; ++s) imgs.push_back(testing::random_image(1, 16, 16, s));
  const Tensor batch = images_to_batch(imgs);
  const Tensor one = embed(p, batch, 1);
  EXPECT_EQ(embed(p, batch, 3), one);
  EXPECT_EQ(embed(p, batch, 8), one);
  for (std::size_t i : {0u, 7u, 299u}) {
    const Image single[] = {imgs[i]};
    const Tensor row = embed(p, images_to_batch(single));
    for (std::size_t j = 0; j < row.cols(); ++j) EXPECT_EQ(row(0, j), one(i, j));
  }
}

TEST(Encoder, GraphGradientsCheckOut) {
  EncoderConfig c;
  c.input = {1, 10, 10};
  c.hidden = {2, 3};
  c.embedding_dim = 4;
  const EncoderParams p = init_encoder(c, 8);
  std::vector<Image> imgs{testing::smooth_image(10, 1), testing::smooth_image(10, 2)};
  BoundGraph bg;
  NodeId x = bg.constant("x", images_to_batch(imgs));
  NodeId emb = build_encoder(bg, p, x, Trainable::kAll);
  NodeId loss = bg.graph.cross_entropy(emb, {1, 3});
  EXPECT_EQ(bg.graph.trainable_leaves().size(), 4u);
  try {
    EXPECT_LE(grad_check(bg.graph, bg.bindings, 1e-6, loss), 1e-4);
  } catch (const KinkError&) {
    GTEST_SKIP() << "relu input at a kink for this seed";
  }
}

TEST(Encoder, LastLayerSelection) {
  const EncoderParams p = init_encoder(EncoderConfig{}, 2);
  BoundGraph bg;
  NodeId x = bg.constant("x", Tensor::matrix(1, 256, 0.5));
  build_encoder(bg, p, x, Trainable::kLastLayer);
  std::vector<std::string> names;
  for (NodeId id : bg.graph.trainable_leaves()) names.push_back(bg.graph.node(id).name);
  std::sort(names.begin(), names.end());
  EXPECT_EQ(names, (std::vector<std::string>{"last.b", "last.w"}));
}

TEST(Encoder, DocumentRoundTripAndDigest) {
  const EncoderParams p = init_encoder(EncoderConfig{}, 4);
  const EncoderParams back = encoder_from_document(read_params_json(write_params_json(encoder_to_document(p))));
  EXPECT_EQ(back.config, p.config);
  EXPECT_EQ(params_digest(back), params_digest(p));
  EncoderParams q = p;
  q.params["conv1.k"][0] += 1e-12;
  EXPECT_NE(params_digest(q), params_digest(p));
  ParamDocument broken = encoder_to_document(p);
  broken.params.erase("last.b");
  EXPECT_THROW(encoder_from_document(broken), FormatError);
}

class PretrainTest : public ::testing::Test {
 protected:
  Dataset data = synth_blob_dataset(20, 40, 10, 16, 21);
  std::vector<int> classes = [] {
    std::vector<int> c(20);
    for (int i = 0; i < 20; ++i) c[static_cast<std::size_t>(i)] = i;
    return c;
  }();
};

TEST_F(PretrainTest, ZeroEpochsReturnsInit) {
  PretrainConfig t;
  t.epochs = 0;
  const PretrainResult r = pretrain(data, classes, EncoderConfig{}, t, 6);
  const PretrainResult again = pretrain(data, classes, EncoderConfig{}, t, 6);
  EXPECT_TRUE(r.epoch_losses.empty());
  EXPECT_EQ(params_digest(r.encoder), params_digest(again.encoder));
}

TEST_F(PretrainTest, LearnsTheBaseClassesDeterministically) {
  EncoderConfig c;
  c.augment.horizontal_flip = false;
  c.augment.crop_padding = 1;
  PretrainConfig t;
  t.epochs = 15;
  const PretrainResult a = pretrain(data, classes, c, t, 6);
  EXPECT_GE(a.train_accuracy, 0.9);
  EXPECT_LT(a.epoch_losses.back(), a.epoch_losses.front());
  t.epochs = 2;
  const PretrainResult x = pretrain(data, classes, c, t, 6);
  const PretrainResult y = pretrain(data, classes, c, t, 6);
  EXPECT_EQ(params_digest(x.encoder), params_digest(y.encoder));
  EXPECT_EQ(x.epoch_losses, y.epoch_losses);
}

TEST_F(PretrainTest, DivergenceIsReported) {
  PretrainConfig t;
  t.epochs = 3;
  t.learning_rate = 1e6;
  EXPECT_THROW(pretrain(data, classes, EncoderConfig{}, t, 6), DivergenceError);
}

}  // namespace
}  // namespace cec
