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

#ifndef RCNQA_TESTS_FIXTURES_HPP
#define RCNQA_TESTS_FIXTURES_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "rcnqa/data.hpp"
#include "rcnqa/model.hpp"
#include "rcnqa/text.hpp"

namespace rcnqa::testing {

// Synthetic reranking corpus. Every question has exactly one positive
// candidate, placed at a random slot, and the positive shares two marker
// tokens with its question. Negatives overlap the question only through the
// stopword "the". Markers are unique per question and namespaced by
// marker_prefix, so a split generated with a different prefix contains none
// of the training markers: a model must exploit the overlap signal itself,
// not memorized token identities, to rank that split well.
struct SyntheticSpec {
  std::size_t questions = 20;
  std::size_t candidates = 5;
  std::size_t filler_len = 5;
  std::uint64_t seed = 1;
  std::string marker_prefix = "mk";
};

// Raw dataset: tokens only. Callers run the usual annotate/index/feature
// pipeline (or prepared_corpus below does it for them).
Dataset synthetic_overlap_dataset(const SyntheticSpec& spec,
                                  const std::string& split);

struct PreparedCorpus {
  Dataset train;
  Dataset dev;
  Vocabulary vocab;  // built from train only; dev markers fall to <unk>
  IdfTable idf;
};

PreparedCorpus prepared_corpus(const SyntheticSpec& train_spec,
                               const SyntheticSpec& dev_spec);

// Tiny network for finite-difference work: word_dim 6, overlap_dim 2,
// 4 filters of width 3.
HyperParams tiny_hyperparams(RelationMode mode, ConvMode conv);

struct TinyModel {
  Vocabulary vocab;
  ModelParams params;
  std::vector<LabeledPair> pairs;  // sentence lengths 4..9, planted overlap
};

// Embeddings are unfrozen so the word-matrix gradient path is exercised.
TinyModel tiny_model(RelationMode mode, ConvMode conv, std::uint64_t seed);

// Unique path under the system temp directory. Nothing is created.
std::string temp_path(const std::string& stem);

// Writes content to a fresh temp file and returns its path.
std::string write_temp_file(const std::string& stem,
                            const std::string& content);

std::string read_file_bytes(const std::string& path);

}  // namespace rcnqa::testing

#endif  // RCNQA_TESTS_FIXTURES_HPP
