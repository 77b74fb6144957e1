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

#ifndef RCNQA_ENCODER_HPP
#define RCNQA_ENCODER_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "rcnqa/numeric.hpp"
#include "rcnqa/text.hpp"

namespace rcnqa {

// Trainable overlap-flag lookup table: row 0 embeds flag 0, row 1 flag 1.
struct OverlapEmbeddingTable {
  DenseMatrix rows;  // 2 x dim
  std::size_t dim() const { return rows.cols(); }
};

OverlapEmbeddingTable make_overlap_table(std::size_t dim);

// Column index value marking a padding column (zero word vector, flag 0).
inline constexpr std::ptrdiff_t kPadColumn = -1;

// Everything the backward pass needs about one encoded sentence.
struct SentenceEncoding {
  std::vector<std::ptrdiff_t> column_tokens;  // vocab index, or kPadColumn
  std::vector<std::uint8_t> column_flags;
  std::size_t word_dim = 0;
  DenseMatrix S;          // (word_dim + overlap_dim) x columns
  DenseMatrix conv_pre;   // filters x output columns, before the nonlinearity
  DenseMatrix activated;  // relu(conv_pre)
  MaxPoolResult pooled;   // pooled.values is the sentence vector

  std::span<const double> vector() const { return pooled.values; }
};

// Stacks one column per token: the word embedding on top, the overlap-flag
// embedding underneath. Empty sentences are rejected.
DenseMatrix build_sentence_matrix(const AnnotatedSentence& sent,
                                  const EmbeddingTable& words,
                                  const OverlapEmbeddingTable& overlap);

// Sentence matrix, convolution, ReLU, max pooling. In narrow mode a sentence
// shorter than the filter width is left-padded with zero-embedding columns
// carrying overlap flag 0; wide mode needs no padding.
SentenceEncoding encode_sentence(const AnnotatedSentence& sent,
                                 const EmbeddingTable& words,
                                 const OverlapEmbeddingTable& overlap,
                                 const FilterBank& fb, ConvMode mode);

struct EncoderGrads {
  DenseMatrix sentence;      // d(loss)/dS
  DenseMatrix filters;       // matches fb.weights
  std::vector<double> bias;  // matches fb.bias
};

// Chains pooling, ReLU, and convolution backward for d(loss)/d(pooled vector).
EncoderGrads encode_backward(const SentenceEncoding& enc, const FilterBank& fb,
                             ConvMode mode, std::span<const double> dx);

// Splits each column gradient of dS at the word/overlap boundary and
// accumulates into embedding gradient rows. Pass nullptr to skip a table
// (frozen word matrix, or overlap gradients disabled by the relational mode).
// Padding columns contribute nothing to d_words; their overlap part still
// accumulates into row 0 of d_overlap.
void scatter_embedding_grads(const SentenceEncoding& enc,
                             const DenseMatrix& dS, DenseMatrix* d_words,
                             DenseMatrix* d_overlap);

}  // namespace rcnqa

#endif  // RCNQA_ENCODER_HPP
