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

#include "rcnqa/model.hpp"

#include <cmath>

namespace rcnqa {

std::string to_string(RelationMode mode) {
  switch (mode) {
    case RelationMode::none:
      return "none";
    case RelationMode::fvec:
      return "fvec";
    case RelationMode::emb:
      return "emb";
    case RelationMode::both:
      return "both";
  }
  throw ConfigError("invalid relation mode value");
}

RelationMode relation_mode_from_string(const std::string& s) {
  if (s == "none") return RelationMode::none;
  if (s == "fvec") return RelationMode::fvec;
  if (s == "emb") return RelationMode::emb;
  if (s == "both") return RelationMode::both;
  throw ConfigError("unknown relation mode: " + s);
}

void HyperParams::validate() const {
  if (word_dim == 0 || overlap_dim == 0 || num_filters == 0 ||
      filter_width == 0) {
    throw ConfigError("model dimensions must all be positive");
  }
  if (uses_features() && feature_count == 0) {
    throw ConfigError("feature count must be positive in fvec/both modes");
  }
}

namespace {

double fan_range(std::size_t fan_in, std::size_t fan_out) {
  return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

void fill_uniform(DenseMatrix& m, Rng& rng, double r) {
  for (double& v : m.data()) v = rng.uniform(-r, r);
}

}  // namespace

ModelParams allocate_params(const HyperParams& hp, const Vocabulary& vocab) {
  hp.validate();
  if (vocab.size() == 0) throw ConfigError("empty vocabulary");

  ModelParams p;
  p.hp = hp;
  p.vocab = vocab;

  const std::size_t depth = hp.word_dim + hp.overlap_dim;
  const std::size_t join = hp.join_size();
  p.word_emb = make_embedding_table(vocab.size(), hp.word_dim);
  p.overlap_emb = make_overlap_table(hp.overlap_dim);
  p.conv_q = make_filter_bank(hp.num_filters, depth, hp.filter_width);
  p.conv_a = make_filter_bank(hp.num_filters, depth, hp.filter_width);
  p.sim = DenseMatrix(hp.num_filters, hp.num_filters);
  p.hidden_w = DenseMatrix(join, join);
  p.hidden_b.assign(join, 0.0);
  p.out_w = DenseMatrix(2, join);
  p.out_b.assign(2, 0.0);
  p.revision = 1;
  return p;
}

ModelParams init_params(const HyperParams& hp, const Vocabulary& vocab,
                        std::uint64_t seed) {
  ModelParams p = allocate_params(hp, vocab);
  const std::size_t depth = hp.word_dim + hp.overlap_dim;
  const std::size_t join = hp.join_size();

  // One stream, fixed draw order, so models differing only in join size share
  // every encoder-side draw under the same seed.
  Rng rng(seed);
  const double conv_r =
      fan_range(depth * hp.filter_width, hp.num_filters * hp.filter_width);
  fill_uniform(p.conv_q.weights, rng, conv_r);
  fill_uniform(p.conv_a.weights, rng, conv_r);
  fill_uniform(p.overlap_emb.rows, rng, 0.25);
  fill_uniform(p.word_emb.vectors, rng, 0.25);
  fill_uniform(p.sim, rng, fan_range(hp.num_filters, hp.num_filters));
  fill_uniform(p.hidden_w, rng, fan_range(join, join));
  fill_uniform(p.out_w, rng, fan_range(join, 2));
  return p;
}

namespace {

AnnotatedSentence without_flags(const AnnotatedSentence& s) {
  AnnotatedSentence out = s;
  out.overlap.assign(out.overlap.size(), 0);
  return out;
}

}  // namespace

ForwardCache forward(const AnnotatedSentence& q, const AnnotatedSentence& a,
                     const ModelParams& params,
                     const std::optional<std::vector<double>>& x_feat) {
  const HyperParams& hp = params.hp;
  if (hp.uses_features()) {
    if (!x_feat.has_value() || x_feat->size() != hp.feature_count) {
      throw DimensionError(
          "relational mode requires " + std::to_string(hp.feature_count) +
          " count features, got " +
          (x_feat ? std::to_string(x_feat->size()) : std::string("none")));
    }
  } else if (x_feat.has_value()) {
    throw DimensionError("count features passed to a mode that ignores them");
  }

  ForwardCache c;
  if (hp.uses_overlap_flags()) {
    c.q = encode_sentence(q, params.word_emb, params.overlap_emb,
                          params.conv_q, hp.conv_mode);
    c.a = encode_sentence(a, params.word_emb, params.overlap_emb,
                          params.conv_a, hp.conv_mode);
  } else {
    c.q = encode_sentence(without_flags(q), params.word_emb,
                          params.overlap_emb, params.conv_q, hp.conv_mode);
    c.a = encode_sentence(without_flags(a), params.word_emb,
                          params.overlap_emb, params.conv_a, hp.conv_mode);
  }

  c.x_sim = bilinear(c.q.vector(), params.sim, c.a.vector());
  if (hp.uses_features()) c.x_feat = *x_feat;

  c.x_join.reserve(hp.join_size());
  c.x_join.insert(c.x_join.end(), c.q.vector().begin(), c.q.vector().end());
  c.x_join.push_back(c.x_sim);
  c.x_join.insert(c.x_join.end(), c.a.vector().begin(), c.a.vector().end());
  c.x_join.insert(c.x_join.end(), c.x_feat.begin(), c.x_feat.end());

  c.hidden_pre = affine(params.hidden_w, c.x_join, params.hidden_b);
  c.hidden_act = relu(c.hidden_pre);
  const std::vector<double> logits =
      affine(params.out_w, c.hidden_act, params.out_b);
  c.logits = {logits[0], logits[1]};
  c.probs = softmax_nll(c.logits, 0).probs;
  c.revision = params.revision;
  return c;
}

double score(const AnnotatedSentence& q, const AnnotatedSentence& a,
             const ModelParams& params,
             const std::optional<std::vector<double>>& x_feat) {
  return forward(q, a, params, x_feat).probs[1];
}

Gradients make_zero_gradients(const ModelParams& params) {
  const HyperParams& hp = params.hp;
  Gradients g;
  if (!hp.freeze_embeddings) {
    g.word_emb = DenseMatrix(params.word_emb.size(), params.word_emb.dim());
  }
  if (hp.uses_overlap_flags()) {
    g.overlap_emb = DenseMatrix(2, hp.overlap_dim);
  }
  g.conv_q_w = DenseMatrix(params.conv_q.weights.rows(),
                           params.conv_q.weights.cols());
  g.conv_q_b.assign(params.conv_q.bias.size(), 0.0);
  g.conv_a_w = DenseMatrix(params.conv_a.weights.rows(),
                           params.conv_a.weights.cols());
  g.conv_a_b.assign(params.conv_a.bias.size(), 0.0);
  g.sim = DenseMatrix(params.sim.rows(), params.sim.cols());
  g.hidden_w = DenseMatrix(params.hidden_w.rows(), params.hidden_w.cols());
  g.hidden_b.assign(params.hidden_b.size(), 0.0);
  g.out_w = DenseMatrix(params.out_w.rows(), params.out_w.cols());
  g.out_b.assign(params.out_b.size(), 0.0);
  if (hp.uses_features()) g.features.assign(hp.feature_count, 0.0);
  return g;
}

namespace {

void add_into(DenseMatrix& acc, const DenseMatrix& g) {
  if (!acc.same_shape(g)) throw DimensionError("gradient shape mismatch");
  for (std::size_t i = 0; i < acc.size(); ++i) acc.data()[i] += g.data()[i];
}

void add_into(std::vector<double>& acc, const std::vector<double>& g) {
  if (acc.size() != g.size()) throw DimensionError("gradient size mismatch");
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += g[i];
}

}  // namespace

void accumulate(Gradients& acc, const Gradients& g) {
  if (!acc.word_emb.empty()) add_into(acc.word_emb, g.word_emb);
  if (!acc.overlap_emb.empty()) add_into(acc.overlap_emb, g.overlap_emb);
  add_into(acc.conv_q_w, g.conv_q_w);
  add_into(acc.conv_q_b, g.conv_q_b);
  add_into(acc.conv_a_w, g.conv_a_w);
  add_into(acc.conv_a_b, g.conv_a_b);
  add_into(acc.sim, g.sim);
  add_into(acc.hidden_w, g.hidden_w);
  add_into(acc.hidden_b, g.hidden_b);
  add_into(acc.out_w, g.out_w);
  add_into(acc.out_b, g.out_b);
  if (!acc.features.empty()) add_into(acc.features, g.features);
  acc.loss += g.loss;
}

void scale_gradients(Gradients& g, double factor) {
  auto scale_m = [factor](DenseMatrix& m) {
    for (double& v : m.data()) v *= factor;
  };
  auto scale_v = [factor](std::vector<double>& v) {
    for (double& x : v) x *= factor;
  };
  scale_m(g.word_emb);
  scale_m(g.overlap_emb);
  scale_m(g.conv_q_w);
  scale_v(g.conv_q_b);
  scale_m(g.conv_a_w);
  scale_v(g.conv_a_b);
  scale_m(g.sim);
  scale_m(g.hidden_w);
  scale_v(g.hidden_b);
  scale_m(g.out_w);
  scale_v(g.out_b);
  scale_v(g.features);
  g.loss *= factor;
}

Gradients backward(const ForwardCache& cache, int label,
                   const ModelParams& params) {
  if (cache.revision != params.revision) {
    throw Error("forward cache is stale: parameters changed since forward()");
  }
  const HyperParams& hp = params.hp;
  const std::size_t n = hp.num_filters;

  Gradients g = make_zero_gradients(params);
  const SoftmaxNll sm = softmax_nll(cache.logits, label);
  g.loss = sm.loss;

  const std::vector<double> dlogits = {sm.dlogits[0], sm.dlogits[1]};
  AffineGrads out_g = affine_backward(params.out_w, cache.hidden_act, dlogits);
  g.out_w = std::move(out_g.weight);
  g.out_b = std::move(out_g.bias);

  const std::vector<double> d_hidden_pre =
      relu_grad(cache.hidden_pre, out_g.input);
  AffineGrads hid_g = affine_backward(params.hidden_w, cache.x_join,
                                      d_hidden_pre);
  g.hidden_w = std::move(hid_g.weight);
  g.hidden_b = std::move(hid_g.bias);

  const std::vector<double>& d_join = hid_g.input;
  std::vector<double> d_xq(d_join.begin(), d_join.begin() + n);
  const double d_sim_out = d_join[n];
  std::vector<double> d_xa(d_join.begin() + n + 1, d_join.begin() + 2 * n + 1);
  if (hp.uses_features()) {
    g.features.assign(d_join.begin() + 2 * n + 1, d_join.end());
  }

  BilinearGrads bg = bilinear_backward(cache.q.vector(), params.sim,
                                       cache.a.vector(), d_sim_out);
  g.sim = std::move(bg.matrix);
  add_into(d_xq, bg.left);
  add_into(d_xa, bg.right);

  EncoderGrads eq = encode_backward(cache.q, params.conv_q, hp.conv_mode, d_xq);
  g.conv_q_w = std::move(eq.filters);
  g.conv_q_b = std::move(eq.bias);
  EncoderGrads ea = encode_backward(cache.a, params.conv_a, hp.conv_mode, d_xa);
  g.conv_a_w = std::move(ea.filters);
  g.conv_a_b = std::move(ea.bias);

  DenseMatrix* dW = hp.freeze_embeddings ? nullptr : &g.word_emb;
  DenseMatrix* dWo = hp.uses_overlap_flags() ? &g.overlap_emb : nullptr;
  scatter_embedding_grads(cache.q, eq.sentence, dW, dWo);
  scatter_embedding_grads(cache.a, ea.sentence, dW, dWo);
  return g;
}

std::vector<ParamBlockView> trainable_blocks(ModelParams& params) {
  std::vector<ParamBlockView> blocks;
  auto add_m = [&blocks](const char* name, DenseMatrix& m) {
    blocks.push_back({name, std::span<double>(m.data())});
  };
  auto add_v = [&blocks](const char* name, std::vector<double>& v) {
    blocks.push_back({name, std::span<double>(v)});
  };
  if (!params.hp.freeze_embeddings) {
    add_m("word_emb", params.word_emb.vectors);
  }
  if (params.hp.uses_overlap_flags()) {
    add_m("overlap_emb", params.overlap_emb.rows);
  }
  add_m("conv_q.weights", params.conv_q.weights);
  add_v("conv_q.bias", params.conv_q.bias);
  add_m("conv_a.weights", params.conv_a.weights);
  add_v("conv_a.bias", params.conv_a.bias);
  add_m("sim", params.sim);
  add_m("hidden_w", params.hidden_w);
  add_v("hidden_b", params.hidden_b);
  add_m("out_w", params.out_w);
  add_v("out_b", params.out_b);
  return blocks;
}

std::vector<GradBlockView> gradient_views(const Gradients& g,
                                          const ModelParams& params) {
  std::vector<GradBlockView> blocks;
  auto add_m = [&blocks](const char* name, const DenseMatrix& m) {
    blocks.push_back({name, std::span<const double>(m.data())});
  };
  auto add_v = [&blocks](const char* name, const std::vector<double>& v) {
    blocks.push_back({name, std::span<const double>(v)});
  };
  if (!params.hp.freeze_embeddings) add_m("word_emb", g.word_emb);
  if (params.hp.uses_overlap_flags()) add_m("overlap_emb", g.overlap_emb);
  add_m("conv_q.weights", g.conv_q_w);
  add_v("conv_q.bias", g.conv_q_b);
  add_m("conv_a.weights", g.conv_a_w);
  add_v("conv_a.bias", g.conv_a_b);
  add_m("sim", g.sim);
  add_m("hidden_w", g.hidden_w);
  add_v("hidden_b", g.hidden_b);
  add_m("out_w", g.out_w);
  add_v("out_b", g.out_b);
  return blocks;
}

Gradients batch_gradients(const std::vector<LabeledPair>& pairs,
                          const ModelParams& params) {
  if (pairs.empty()) throw ConfigError("empty batch");
  Gradients acc = make_zero_gradients(params);
  for (const LabeledPair& p : pairs) {
    const ForwardCache cache =
        forward(p.question, p.answer, params, p.features);
    accumulate(acc, backward(cache, p.label, params));
  }
  scale_gradients(acc, 1.0 / static_cast<double>(pairs.size()));
  return acc;
}

double batch_loss(const std::vector<LabeledPair>& pairs,
                  const ModelParams& params) {
  if (pairs.empty()) throw ConfigError("empty batch");
  double total = 0.0;
  for (const LabeledPair& p : pairs) {
    const ForwardCache cache =
        forward(p.question, p.answer, params, p.features);
    total += softmax_nll(cache.logits, p.label).loss;
  }
  return total / static_cast<double>(pairs.size());
}

GradCheckReport check_model_gradients(ModelParams& params,
                                      const std::vector<LabeledPair>& pairs,
                                      double epsilon, double tolerance) {
  const Gradients g = batch_gradients(pairs, params);
  std::vector<ParamBlockView> pviews = trainable_blocks(params);
  std::vector<GradBlockView> gviews = gradient_views(g, params);
  if (pviews.size() != gviews.size()) {
    throw DimensionError("parameter and gradient block lists disagree");
  }
  std::vector<GradCheckBlock> blocks;
  blocks.reserve(pviews.size());
  for (std::size_t i = 0; i < pviews.size(); ++i) {
    if (pviews[i].name != gviews[i].name) {
      throw DimensionError("parameter and gradient block order disagree");
    }
    blocks.push_back({pviews[i].name, pviews[i].values, gviews[i].values});
  }
  auto loss_fn = [&params, &pairs]() { return batch_loss(pairs, params); };
  return gradient_check(loss_fn, std::move(blocks), epsilon, tolerance);
}

}  // namespace rcnqa
