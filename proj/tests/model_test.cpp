// Copyright 2026 The rcnqa Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "rcnqa/model.hpp"
#include "support/fixtures.hpp"

using namespace rcnqa;
using rcnqa::testing::tiny_hyperparams;
using rcnqa::testing::tiny_model;
using rcnqa::testing::TinyModel;

namespace {

bool has_block(const std::vector<ParamBlockView>& blocks,
               const std::string& name) {
  return std::any_of(blocks.begin(), blocks.end(),
                     [&](const ParamBlockView& b) { return b.name == name; });
}

}  // namespace

TEST_CASE("join vector sizes follow the relational mode") {
  HyperParams hp;
  hp.num_filters = 100;
  hp.feature_count = 4;
  hp.relation = RelationMode::none;
  CHECK(hp.join_size() == 201);
  hp.relation = RelationMode::emb;
  CHECK(hp.join_size() == 201);
  hp.relation = RelationMode::fvec;
  CHECK(hp.join_size() == 205);
  hp.relation = RelationMode::both;
  CHECK(hp.join_size() == 205);

  hp.num_filters = 0;
  CHECK_THROWS_AS(hp.validate(), ConfigError);
}

TEST_CASE("relation mode string conversions") {
  for (const char* name : {"none", "fvec", "emb", "both"}) {
    CHECK(to_string(relation_mode_from_string(name)) == name);
  }
  CHECK_THROWS_AS(relation_mode_from_string("bogus"), ConfigError);
}

TEST_CASE("initialization is deterministic under the seed") {
  const TinyModel a = tiny_model(RelationMode::emb, ConvMode::wide, 5);
  const TinyModel b = tiny_model(RelationMode::emb, ConvMode::wide, 5);
  CHECK(a.params.conv_q.weights.data() == b.params.conv_q.weights.data());
  CHECK(a.params.conv_a.weights.data() == b.params.conv_a.weights.data());
  CHECK(a.params.sim.data() == b.params.sim.data());
  CHECK(a.params.hidden_w.data() == b.params.hidden_w.data());
  CHECK(a.params.out_w.data() == b.params.out_w.data());
  CHECK(a.params.word_emb.vectors.data() == b.params.word_emb.vectors.data());
  CHECK(a.params.overlap_emb.rows.data() == b.params.overlap_emb.rows.data());
  for (double v : a.params.hidden_b) CHECK(v == 0.0);
  for (double v : a.params.conv_q.bias) CHECK(v == 0.0);

  const TinyModel c = tiny_model(RelationMode::emb, ConvMode::wide, 6);
  CHECK(a.params.conv_q.weights.data() != c.params.conv_q.weights.data());
}

TEST_CASE("forward produces a probability pair and caches the join vector") {
  const TinyModel tm = tiny_model(RelationMode::both, ConvMode::wide, 7);
  const LabeledPair& p = tm.pairs.front();
  const ForwardCache cache =
      forward(p.question, p.answer, tm.params, p.features);
  CHECK(cache.probs[0] + cache.probs[1] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(cache.probs[0] > 0.0);
  CHECK(cache.probs[1] > 0.0);
  CHECK(cache.x_join.size() == tm.params.hp.join_size());
  CHECK(cache.x_feat == *p.features);
  CHECK(score(p.question, p.answer, tm.params, p.features) ==
        cache.probs[1]);

  // feature vector must match the declared mode
  CHECK_THROWS_AS(forward(p.question, p.answer, tm.params, std::nullopt),
                  DimensionError);
  const TinyModel none = tiny_model(RelationMode::none, ConvMode::wide, 7);
  const std::optional<std::vector<double>> extra{{1.0, 2.0, 3.0, 4.0}};
  CHECK_THROWS_AS(
      forward(none.pairs[0].question, none.pairs[0].answer, none.params, extra),
      DimensionError);
}

TEST_CASE("zero similarity matrix gives zero x_sim") {
  TinyModel tm = tiny_model(RelationMode::emb, ConvMode::wide, 8);
  for (double& v : tm.params.sim.data()) v = 0.0;
  tm.params.revision += 1;
  const LabeledPair& p = tm.pairs.front();
  const ForwardCache cache =
      forward(p.question, p.answer, tm.params, std::nullopt);
  CHECK(cache.x_sim == 0.0);
}

TEST_CASE("backward rejects a stale cache") {
  TinyModel tm = tiny_model(RelationMode::emb, ConvMode::wide, 9);
  const LabeledPair& p = tm.pairs.front();
  const ForwardCache cache =
      forward(p.question, p.answer, tm.params, std::nullopt);
  tm.params.revision += 1;  // simulates an optimizer step
  CHECK_THROWS_WITH_AS(backward(cache, p.label, tm.params),
                       doctest::Contains("stale"), Error);
}

TEST_CASE("trainable blocks respect freeze and relational mode") {
  TinyModel frozen = tiny_model(RelationMode::emb, ConvMode::wide, 10);
  frozen.params.hp.freeze_embeddings = true;
  CHECK_FALSE(has_block(trainable_blocks(frozen.params), "word_emb"));
  CHECK(has_block(trainable_blocks(frozen.params), "overlap_emb"));

  TinyModel unfrozen = tiny_model(RelationMode::none, ConvMode::wide, 10);
  CHECK(has_block(trainable_blocks(unfrozen.params), "word_emb"));
  CHECK_FALSE(has_block(trainable_blocks(unfrozen.params), "overlap_emb"));

  TinyModel fvec = tiny_model(RelationMode::fvec, ConvMode::wide, 10);
  CHECK_FALSE(has_block(trainable_blocks(fvec.params), "overlap_emb"));
  TinyModel both = tiny_model(RelationMode::both, ConvMode::wide, 10);
  CHECK(has_block(trainable_blocks(both.params), "overlap_emb"));
}

TEST_CASE("modes none and fvec share the encoder output exactly") {
  // same seed, same sentence pair: both modes zero the overlap flags, and the
  // encoder-side parameters are drawn before any join-size dependent block
  const TinyModel none = tiny_model(RelationMode::none, ConvMode::wide, 11);
  const TinyModel fvec = tiny_model(RelationMode::fvec, ConvMode::wide, 11);
  const LabeledPair& p = none.pairs.front();
  const ForwardCache c_none =
      forward(p.question, p.answer, none.params, std::nullopt);
  const ForwardCache c_fvec =
      forward(p.question, p.answer, fvec.params, fvec.pairs.front().features);
  const auto xq_none = c_none.q.vector();
  const auto xq_fvec = c_fvec.q.vector();
  REQUIRE(xq_none.size() == xq_fvec.size());
  for (std::size_t i = 0; i < xq_none.size(); ++i) {
    CHECK(xq_none[i] == xq_fvec[i]);
  }
  const auto xa_none = c_none.a.vector();
  const auto xa_fvec = c_fvec.a.vector();
  for (std::size_t i = 0; i < xa_none.size(); ++i) {
    CHECK(xa_none[i] == xa_fvec[i]);
  }
  CHECK(c_none.x_sim == c_fvec.x_sim);
}

TEST_CASE("none and emb modes treat overlap flags differently") {
  const TinyModel tm = tiny_model(RelationMode::emb, ConvMode::wide, 12);
  LabeledPair p = tm.pairs.front();
  REQUIRE(std::any_of(p.answer.overlap.begin(), p.answer.overlap.end(),
                      [](std::uint8_t f) { return f == 1; }));
  const ForwardCache with_flags =
      forward(p.question, p.answer, tm.params, std::nullopt);

  LabeledPair cleared = p;
  std::fill(cleared.answer.overlap.begin(), cleared.answer.overlap.end(),
            std::uint8_t{0});
  std::fill(cleared.question.overlap.begin(), cleared.question.overlap.end(),
            std::uint8_t{0});
  const ForwardCache without_flags =
      forward(cleared.question, cleared.answer, tm.params, std::nullopt);
  // emb mode must read the flags: generically the encodings differ
  CHECK(with_flags.a.S.data() != without_flags.a.S.data());

  TinyModel none = tiny_model(RelationMode::none, ConvMode::wide, 12);
  const ForwardCache n1 = forward(p.question, p.answer, none.params, std::nullopt);
  const ForwardCache n2 =
      forward(cleared.question, cleared.answer, none.params, std::nullopt);
  CHECK(n1.probs == n2.probs);  // none mode ignores them
}

TEST_CASE("flipping one overlap flag moves exactly overlap_dim matrix entries") {
  const TinyModel tm = tiny_model(RelationMode::emb, ConvMode::wide, 13);
  LabeledPair p = tm.pairs.front();
  const ForwardCache before =
      forward(p.question, p.answer, tm.params, std::nullopt);
  const std::size_t flip = p.answer.overlap.size() / 2;
  p.answer.overlap[flip] ^= 1;
  const ForwardCache after =
      forward(p.question, p.answer, tm.params, std::nullopt);

  std::size_t diffs = 0;
  REQUIRE(before.a.S.same_shape(after.a.S));
  for (std::size_t r = 0; r < before.a.S.rows(); ++r) {
    for (std::size_t c = 0; c < before.a.S.cols(); ++c) {
      if (before.a.S(r, c) != after.a.S(r, c)) {
        ++diffs;
        CHECK(c == flip);
        CHECK(r >= tm.params.hp.word_dim);
      }
    }
  }
  CHECK(diffs == tm.params.hp.overlap_dim);
  CHECK(before.q.S.data() == after.q.S.data());
}

TEST_CASE("gradients pass finite-difference checks in every mode") {
  for (RelationMode mode : {RelationMode::none, RelationMode::fvec,
                            RelationMode::emb, RelationMode::both}) {
    TinyModel tm = tiny_model(mode, ConvMode::wide, 21);
    const GradCheckReport report =
        check_model_gradients(tm.params, tm.pairs, 1e-5, 1e-4);
    INFO("mode ", to_string(mode), " note ", report.note);
    CHECK(report.pass);
    CHECK(report.max_rel_error < 1e-4);
  }
  // narrow convolution exercises the padding path
  TinyModel narrow = tiny_model(RelationMode::emb, ConvMode::narrow, 22);
  const GradCheckReport report =
      check_model_gradients(narrow.params, narrow.pairs, 1e-5, 1e-4);
  CHECK(report.pass);
}

TEST_CASE("feature inputs are live in fvec mode") {
  const TinyModel tm = tiny_model(RelationMode::fvec, ConvMode::wide, 23);
  LabeledPair p = tm.pairs.front();
  const ForwardCache cache = forward(p.question, p.answer, tm.params, p.features);
  const Gradients g = backward(cache, p.label, tm.params);
  REQUIRE(g.features.size() == 4);

  double max_abs = 0.0;
  const double eps = 1e-6;
  for (std::size_t i = 0; i < 4; ++i) {
    std::vector<double> feat = *p.features;
    feat[i] += eps;
    const ForwardCache up = forward(p.question, p.answer, tm.params, feat);
    const double up_loss = softmax_nll(up.logits, p.label).loss;
    feat[i] -= 2 * eps;
    const ForwardCache down = forward(p.question, p.answer, tm.params, feat);
    const double down_loss = softmax_nll(down.logits, p.label).loss;
    const double numeric = (up_loss - down_loss) / (2 * eps);
    CHECK(std::abs(g.features[i] - numeric) < 1e-5);
    max_abs = std::max(max_abs, std::abs(g.features[i]));
  }
  CHECK(max_abs > 0.0);  // features are not dead inputs
}

TEST_CASE("batch gradients average per-example gradients") {
  const TinyModel tm = tiny_model(RelationMode::emb, ConvMode::wide, 24);
  const std::vector<LabeledPair> once = {tm.pairs[0]};
  const std::vector<LabeledPair> twice = {tm.pairs[0], tm.pairs[0]};
  CHECK(batch_loss(once, tm.params) ==
        doctest::Approx(batch_loss(twice, tm.params)).epsilon(1e-15));
  const Gradients g1 = batch_gradients(once, tm.params);
  const Gradients g2 = batch_gradients(twice, tm.params);
  for (std::size_t i = 0; i < g1.sim.size(); ++i) {
    CHECK(g1.sim.data()[i] == doctest::Approx(g2.sim.data()[i]).epsilon(1e-12));
  }
}

TEST_CASE("probability and logit orderings agree") {
  const TinyModel tm = tiny_model(RelationMode::emb, ConvMode::wide, 25);
  std::vector<double> probs, logit_diffs;
  for (const LabeledPair& p : tm.pairs) {
    const ForwardCache c = forward(p.question, p.answer, tm.params, std::nullopt);
    probs.push_back(c.probs[1]);
    logit_diffs.push_back(c.logits[1] - c.logits[0]);
  }
  for (std::size_t i = 0; i < probs.size(); ++i) {
    for (std::size_t j = 0; j < probs.size(); ++j) {
      CHECK((probs[i] < probs[j]) == (logit_diffs[i] < logit_diffs[j]));
    }
  }
}
