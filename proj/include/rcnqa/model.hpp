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

#ifndef RCNQA_MODEL_HPP
#define RCNQA_MODEL_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rcnqa/encoder.hpp"
#include "rcnqa/numeric.hpp"
#include "rcnqa/text.hpp"

namespace rcnqa {

// How question/answer relational information enters the network:
//   none  ignore it entirely
//   fvec  append overlap count features to the join vector
//   emb   overlap-flag embeddings inside the sentence matrices
//   both  fvec and emb together
enum class RelationMode { none, fvec, emb, both };

std::string to_string(RelationMode mode);
RelationMode relation_mode_from_string(const std::string& s);

struct HyperParams {
  std::size_t word_dim = 50;
  std::size_t overlap_dim = 5;
  std::size_t num_filters = 100;
  std::size_t filter_width = 5;
  ConvMode conv_mode = ConvMode::wide;
  RelationMode relation = RelationMode::emb;
  std::size_t feature_count = 4;
  bool freeze_embeddings = true;

  bool uses_features() const {
    return relation == RelationMode::fvec || relation == RelationMode::both;
  }
  bool uses_overlap_flags() const {
    return relation == RelationMode::emb || relation == RelationMode::both;
  }
  // [x_q; similarity scalar; x_a; optional count features]
  std::size_t join_size() const {
    return 2 * num_filters + 1 + (uses_features() ? feature_count : 0);
  }
  void validate() const;
};

struct ModelParams {
  HyperParams hp;
  Vocabulary vocab;
  std::uint64_t stopword_hash = 0;
  IdfTable idf;  // carried so saved models can recompute count features

  EmbeddingTable word_emb;            // |V| x word_dim
  OverlapEmbeddingTable overlap_emb;  // 2 x overlap_dim
  FilterBank conv_q;
  FilterBank conv_a;
  DenseMatrix sim;               // num_filters x num_filters
  DenseMatrix hidden_w;          // join_size x join_size
  std::vector<double> hidden_b;  // join_size
  DenseMatrix out_w;             // 2 x join_size
  std::vector<double> out_b;     // 2

  // Bumped whenever parameter values change; guards stale forward caches.
  std::uint64_t revision = 0;
};

// All parameter blocks sized per the hyperparameters, zero filled.
ModelParams allocate_params(const HyperParams& hp, const Vocabulary& vocab);

// Deterministic parameter initialization. Weight matrices draw uniformly from
// +/- sqrt(6 / (fan_in + fan_out)); word and overlap embeddings draw from
// +/- 0.25; biases start at zero. Pretrained word vectors, when available, are
// loaded into word_emb afterwards.
ModelParams init_params(const HyperParams& hp, const Vocabulary& vocab,
                        std::uint64_t seed);

struct ForwardCache {
  SentenceEncoding q;
  SentenceEncoding a;
  double x_sim = 0.0;
  std::vector<double> x_feat;
  std::vector<double> x_join;
  std::vector<double> hidden_pre;
  std::vector<double> hidden_act;
  std::array<double, 2> logits = {0.0, 0.0};
  std::array<double, 2> probs = {0.0, 0.0};
  std::uint64_t revision = 0;
};

// Full network forward pass. Modes without overlap embeddings run the
// encoders with all flags forced to zero. Modes with count features require
// x_feat of the declared length; other modes forbid it.
ForwardCache forward(const AnnotatedSentence& q, const AnnotatedSentence& a,
                     const ModelParams& params,
                     const std::optional<std::vector<double>>& x_feat);

// Probability that the answer is correct; the ranking key.
double score(const AnnotatedSentence& q, const AnnotatedSentence& a,
             const ModelParams& params,
             const std::optional<std::vector<double>>& x_feat);

// Gradients for every unfrozen block. Blocks absent under the current mode or
// freeze flag stay empty. `features` holds d(loss)/d(x_feat) for diagnostics.
struct Gradients {
  DenseMatrix word_emb;
  DenseMatrix overlap_emb;
  DenseMatrix conv_q_w;
  std::vector<double> conv_q_b;
  DenseMatrix conv_a_w;
  std::vector<double> conv_a_b;
  DenseMatrix sim;
  DenseMatrix hidden_w;
  std::vector<double> hidden_b;
  DenseMatrix out_w;
  std::vector<double> out_b;
  std::vector<double> features;
  double loss = 0.0;
};

Gradients make_zero_gradients(const ModelParams& params);
void accumulate(Gradients& acc, const Gradients& g);
void scale_gradients(Gradients& g, double factor);

// Negative log-likelihood loss and its exact gradients for one labeled pair.
// The cache must come from forward() on the current parameter revision.
Gradients backward(const ForwardCache& cache, int label,
                   const ModelParams& params);

// A named view over one parameter block; `values` aliases params storage.
struct ParamBlockView {
  std::string name;
  std::span<double> values;
};

struct GradBlockView {
  std::string name;
  std::span<const double> values;
};

// The unfrozen blocks under the current mode/freeze flags, in a fixed order
// matched by gradient_views().
std::vector<ParamBlockView> trainable_blocks(ModelParams& params);
std::vector<GradBlockView> gradient_views(const Gradients& g,
                                          const ModelParams& params);

struct LabeledPair {
  AnnotatedSentence question;
  AnnotatedSentence answer;
  int label = 0;
  std::optional<std::vector<double>> features;
};

// Mean loss over the pairs, with gradients averaged to match.
Gradients batch_gradients(const std::vector<LabeledPair>& pairs,
                          const ModelParams& params);

double batch_loss(const std::vector<LabeledPair>& pairs,
                  const ModelParams& params);

// Finite-difference validation of batch_gradients over every unfrozen block.
GradCheckReport check_model_gradients(ModelParams& params,
                                      const std::vector<LabeledPair>& pairs,
                                      double epsilon, double tolerance);

}  // namespace rcnqa

#endif  // RCNQA_MODEL_HPP
