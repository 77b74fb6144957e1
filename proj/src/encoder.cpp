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

#include "rcnqa/encoder.hpp"

namespace rcnqa {

OverlapEmbeddingTable make_overlap_table(std::size_t dim) {
  if (dim == 0) {
    throw DimensionError("overlap embedding dimension must be positive");
  }
  OverlapEmbeddingTable t;
  t.rows = DenseMatrix(2, dim);
  return t;
}

namespace {

DenseMatrix build_matrix_from_columns(
    const std::vector<std::ptrdiff_t>& tokens,
    const std::vector<std::uint8_t>& flags, const EmbeddingTable& words,
    const OverlapEmbeddingTable& overlap) {
  const std::size_t d_w = words.dim();
  const std::size_t d_o = overlap.dim();
  DenseMatrix s(d_w + d_o, tokens.size());
  for (std::size_t c = 0; c < tokens.size(); ++c) {
    if (tokens[c] != kPadColumn) {
      const auto idx = static_cast<std::size_t>(tokens[c]);
      if (idx >= words.size()) {
        throw DimensionError("token index out of embedding table range");
      }
      auto row = words.vectors.row(idx);
      for (std::size_t k = 0; k < d_w; ++k) s(k, c) = row[k];
    }
    const std::size_t flag_row = flags[c] ? 1 : 0;
    auto orow = overlap.rows.row(flag_row);
    for (std::size_t k = 0; k < d_o; ++k) s(d_w + k, c) = orow[k];
  }
  return s;
}

}  // namespace

DenseMatrix build_sentence_matrix(const AnnotatedSentence& sent,
                                  const EmbeddingTable& words,
                                  const OverlapEmbeddingTable& overlap) {
  if (sent.indices.empty()) {
    throw DimensionError("cannot build a sentence matrix for an empty sentence");
  }
  if (sent.indices.size() != sent.overlap.size()) {
    throw DimensionError("sentence indices and overlap flags differ in length");
  }
  std::vector<std::ptrdiff_t> tokens(sent.indices.begin(), sent.indices.end());
  return build_matrix_from_columns(tokens, sent.overlap, words, overlap);
}

SentenceEncoding encode_sentence(const AnnotatedSentence& sent,
                                 const EmbeddingTable& words,
                                 const OverlapEmbeddingTable& overlap,
                                 const FilterBank& fb, ConvMode mode) {
  if (sent.indices.empty()) {
    throw DimensionError("cannot encode an empty sentence");
  }
  if (sent.indices.size() != sent.overlap.size()) {
    throw DimensionError("sentence indices and overlap flags differ in length");
  }
  SentenceEncoding enc;
  enc.word_dim = words.dim();

  const std::size_t len = sent.indices.size();
  std::size_t pad = 0;
  if (mode == ConvMode::narrow && len < fb.width) pad = fb.width - len;
  enc.column_tokens.assign(pad, kPadColumn);
  enc.column_flags.assign(pad, 0);
  for (std::size_t i = 0; i < len; ++i) {
    enc.column_tokens.push_back(static_cast<std::ptrdiff_t>(sent.indices[i]));
    enc.column_flags.push_back(sent.overlap[i] ? 1 : 0);
  }

  enc.S = build_matrix_from_columns(enc.column_tokens, enc.column_flags, words,
                                    overlap);
  enc.conv_pre = conv1d_forward(enc.S, fb, mode);
  enc.activated = relu(enc.conv_pre);
  enc.pooled = maxpool_rows(enc.activated);
  return enc;
}

EncoderGrads encode_backward(const SentenceEncoding& enc, const FilterBank& fb,
                             ConvMode mode, std::span<const double> dx) {
  if (dx.size() != enc.pooled.values.size()) {
    throw DimensionError("encoder gradient length does not match feature maps");
  }
  const DenseMatrix d_act =
      maxpool_rows_backward(enc.pooled, enc.activated.cols(), dx);
  const DenseMatrix d_pre = relu_grad(enc.conv_pre, d_act);
  ConvGrads cg = conv1d_backward(enc.S, fb, mode, d_pre);
  EncoderGrads g;
  g.sentence = std::move(cg.input);
  g.filters = std::move(cg.filters);
  g.bias = std::move(cg.bias);
  return g;
}

void scatter_embedding_grads(const SentenceEncoding& enc,
                             const DenseMatrix& dS, DenseMatrix* d_words,
                             DenseMatrix* d_overlap) {
  if (dS.rows() < enc.word_dim || dS.cols() != enc.column_tokens.size()) {
    throw DimensionError("sentence gradient shape mismatch");
  }
  const std::size_t d_w = enc.word_dim;
  const std::size_t d_o = dS.rows() - d_w;
  for (std::size_t c = 0; c < dS.cols(); ++c) {
    if (d_words != nullptr && enc.column_tokens[c] != kPadColumn) {
      auto row = d_words->row(static_cast<std::size_t>(enc.column_tokens[c]));
      for (std::size_t k = 0; k < d_w; ++k) row[k] += dS(k, c);
    }
    if (d_overlap != nullptr) {
      auto row = d_overlap->row(enc.column_flags[c] ? 1 : 0);
      for (std::size_t k = 0; k < d_o; ++k) row[k] += dS(d_w + k, c);
    }
  }
}

}  // namespace rcnqa
