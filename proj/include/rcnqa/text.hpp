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

#ifndef RCNQA_TEXT_HPP
#define RCNQA_TEXT_HPP

#include <array>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "rcnqa/common.hpp"
#include "rcnqa/numeric.hpp"

namespace rcnqa {

inline constexpr const char* kUnknownToken = "<unk>";
inline constexpr std::size_t kUnknownIndex = 0;

struct TokenizerOptions {
  // When set, a run of consecutive digits becomes a single '0' instead of one
  // '0' per digit.
  bool collapse_digits = false;
};

// Lowercases ASCII letters, maps every digit to '0', splits on whitespace and
// peels leading/trailing ASCII punctuation off each chunk as single-character
// tokens. Interior punctuation (hyphens, apostrophes) is left alone. Bytes
// outside ASCII pass through untouched.
std::vector<std::string> tokenize_normalize(std::string_view raw,
                                            const TokenizerOptions& opts = {});

bool is_punctuation_token(std::string_view token);

class Vocabulary {
 public:
  Vocabulary();

  std::size_t add(const std::string& token);
  std::size_t lookup(const std::string& token) const;  // unknown -> 0
  bool contains(const std::string& token) const;
  std::size_t size() const { return tokens_.size(); }
  const std::string& token(std::size_t index) const;
  const std::vector<std::string>& tokens() const { return tokens_; }
  std::uint64_t hash() const;

  // Restores a vocabulary with a fixed index assignment, e.g. from a saved
  // model. The unknown token must sit at index 0 and entries must be unique.
  static Vocabulary from_tokens(const std::vector<std::string>& tokens);

 private:
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::string> tokens_;
};

Vocabulary build_vocab(const std::vector<std::vector<std::string>>& documents);

struct EmbeddingTable {
  DenseMatrix vectors;                   // |V| x dim
  std::vector<std::uint8_t> pretrained;  // 1 if the row came from a file

  std::size_t size() const { return vectors.rows(); }
  std::size_t dim() const { return vectors.cols(); }
};

EmbeddingTable make_embedding_table(std::size_t vocab_size, std::size_t dim);

enum class EmbeddingFormat { word2vec_text, word2vec_binary };

struct EmbeddingLoadResult {
  EmbeddingTable table;
  double coverage = 0.0;         // pretrained rows / |V|
  std::size_t file_entries = 0;  // entries declared by the file header
  std::size_t matched = 0;       // vocabulary rows filled from the file
};

// Reads a word2vec file and copies vectors for in-vocabulary tokens. Rows
// without a match stay zero and are flagged for init_oov. Header, dimension,
// and truncation problems raise ParseError naming the line (text) or byte
// offset (binary).
EmbeddingLoadResult load_word_embeddings(const std::string& path,
                                         EmbeddingFormat format,
                                         const Vocabulary& vocab);

// Writes every row in word2vec text format with full double precision.
void save_word_embeddings_text(const std::string& path,
                               const Vocabulary& vocab,
                               const EmbeddingTable& table);

// Fills rows not flagged pretrained with uniform samples from [-r, r].
void init_oov(EmbeddingTable& table, double r, std::uint64_t seed);

class StopwordList {
 public:
  StopwordList() = default;

  bool contains(const std::string& token) const {
    return words_.count(token) != 0;
  }
  std::size_t size() const { return words_.size(); }
  // Order-insensitive content hash, for checkpoint compatibility checks.
  std::uint64_t hash() const;
  const std::set<std::string>& words() const { return words_; }

  static StopwordList from_tokens(const std::vector<std::string>& tokens);
  // One token per line; blank lines and lines starting with '#' are skipped.
  static StopwordList from_file(const std::string& path);
  static StopwordList builtin();

 private:
  std::set<std::string> words_;
};

// The compiled-in default list, identical to data/stopwords.txt.
const std::vector<std::string>& builtin_stopword_tokens();

struct AnnotatedSentence {
  std::vector<std::string> tokens;
  std::vector<std::size_t> indices;
  std::vector<std::uint8_t> overlap;
};

AnnotatedSentence make_annotated(std::vector<std::string> tokens,
                                 const Vocabulary& vocab);

// Sets overlap flags on both sentences: a token is flagged iff its exact
// normalized form appears in the other sentence, it is not a stopword, and it
// is not pure punctuation. The relation is symmetric per token form.
void annotate_overlap(AnnotatedSentence& q, AnnotatedSentence& a,
                      const StopwordList& stopwords);

class IdfTable {
 public:
  IdfTable() = default;
  IdfTable(std::map<std::string, double> weights, double default_weight);

  double lookup(const std::string& token) const;
  double default_weight() const { return default_weight_; }
  const std::map<std::string, double>& weights() const { return weights_; }
  bool empty() const { return weights_.empty(); }

 private:
  std::map<std::string, double> weights_;
  double default_weight_ = 1.0;
};

// Smoothed inverse document frequency, ln((1+N)/(1+df)) + 1, over the given
// documents. Unseen tokens default to the largest observed weight.
IdfTable build_idf(const std::vector<std::vector<std::string>>& documents);

// Four counts over distinct token forms shared by both sentences:
//   [0] shared forms
//   [1] shared forms that carry an overlap flag (non-stopword, non-punctuation)
//   [2] idf-weighted sum over shared forms
//   [3] idf-weighted sum over flagged shared forms
// Flags must be annotated before calling.
std::array<double, 4> overlap_count_features(const AnnotatedSentence& q,
                                             const AnnotatedSentence& a,
                                             const IdfTable& idf);

}  // namespace rcnqa

#endif  // RCNQA_TEXT_HPP
