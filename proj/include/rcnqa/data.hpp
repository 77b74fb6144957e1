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

#ifndef RCNQA_DATA_HPP
#define RCNQA_DATA_HPP

#include <optional>
#include <string>
#include <vector>

#include "rcnqa/metrics.hpp"
#include "rcnqa/model.hpp"
#include "rcnqa/text.hpp"

namespace rcnqa {

struct QAPair {
  std::string question_id;
  std::string candidate_id;
  AnnotatedSentence question;  // overlap flags are specific to this pairing
  AnnotatedSentence answer;
  int label = 0;
  std::vector<double> features;  // overlap counts, filled by compute_features
};

struct QuestionGroup {
  std::string id;
  std::vector<QAPair> candidates;
};

struct Dataset {
  std::vector<QuestionGroup> questions;
  std::string split;   // provenance tag: train/dev/test, or empty
  std::string source;  // file the data came from
  // Hash of the stopword list used by annotate_dataset; 0 when unannotated.
  std::uint64_t stopword_hash = 0;

  std::size_t pair_count() const;
};

// 4 tab-separated columns: question_id, label, question_text, answer_text.
// Rows group by question id in first-appearance order; candidate ids count
// up from 0 within each question.
Dataset parse_canonical_tsv(const std::string& path,
                            const TokenizerOptions& opts = {});

// Official WikiQA layout: QuestionID, Question, DocumentID, DocumentTitle,
// SentenceID, Sentence, Label, with a header line. Candidate id is the
// sentence id. No question filtering happens here.
Dataset parse_wikiqa_tsv(const std::string& path,
                         const TokenizerOptions& opts = {});

struct DatasetStats {
  std::size_t questions = 0;
  std::size_t pairs = 0;
  std::size_t positives = 0;
  // positives / pairs; absent for an empty dataset
  std::optional<double> positive_fraction;
};

DatasetStats dataset_stats(const Dataset& ds);

// Fills overlap flags for every pair.
void annotate_dataset(Dataset& ds, const StopwordList& stopwords);

// Fills vocabulary indices for every sentence.
void index_dataset(Dataset& ds, const Vocabulary& vocab);

// Fills the 4 overlap count features for every pair.
void compute_features(Dataset& ds, const IdfTable& idf);

// Documents: each question once, plus every candidate answer.
IdfTable build_idf(const Dataset& ds);
Vocabulary build_vocab(const Dataset& ds);

// Drops questions violating the policy, preserving order.
Dataset filter_dataset(const Dataset& ds, FilterPolicy policy,
                       FilterReport* report = nullptr);

Qrels qrels_from_dataset(const Dataset& ds);

// Flattens into training pairs; with_features attaches the stored counts.
std::vector<LabeledPair> labeled_pairs(const Dataset& ds, bool with_features);

// Versioned binary container holding tokens, flags, labels, grouping, and
// features. Vocabulary indices are not stored; re-run index_dataset after
// loading.
void save_preprocessed(const Dataset& ds, const std::string& path);
Dataset load_preprocessed(const std::string& path);

}  // namespace rcnqa

#endif  // RCNQA_DATA_HPP
