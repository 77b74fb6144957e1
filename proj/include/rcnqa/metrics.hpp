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

#ifndef RCNQA_METRICS_HPP
#define RCNQA_METRICS_HPP

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "rcnqa/common.hpp"

namespace rcnqa {

struct ScoredCandidate {
  std::string id;
  double score = 0.0;
};

// Scores grouped by question, questions kept in insertion order. Within a
// question the ranking sorts by descending score, ties by ascending id.
class RankedRun {
 public:
  explicit RankedRun(std::string run_name = "run") : name_(std::move(run_name)) {}

  void add(const std::string& question_id, const std::string& candidate_id,
           double score);
  bool has_question(const std::string& question_id) const;
  const std::vector<std::string>& question_ids() const { return order_; }
  std::vector<ScoredCandidate> ranked(const std::string& question_id) const;
  const std::string& name() const { return name_; }

 private:
  std::string name_;
  std::vector<std::string> order_;
  std::map<std::string, std::vector<ScoredCandidate>> by_question_;
};

// Binary relevance judgements per question.
class Qrels {
 public:
  void set(const std::string& question_id, const std::string& candidate_id,
           int relevance);
  // -1 when the candidate is unjudged.
  int lookup(const std::string& question_id,
             const std::string& candidate_id) const;
  bool has_question(const std::string& question_id) const;
  const std::map<std::string, std::map<std::string, int>>& judgements() const {
    return by_question_;
  }

 private:
  std::map<std::string, std::map<std::string, int>> by_question_;
};

// Which judged questions to drop before aggregating metrics:
//   uniform      those whose candidates are all positive or all negative
//   no_positive  those without any positive candidate
//   none         keep everything
enum class FilterPolicy { uniform, no_positive, none };

std::string to_string(FilterPolicy policy);
FilterPolicy filter_policy_from_string(const std::string& s);

struct FilterReport {
  struct Removed {
    std::string question_id;
    std::string reason;
  };
  std::vector<Removed> removed;
};

Qrels filter_questions(const Qrels& qrels, FilterPolicy policy,
                       FilterReport* report = nullptr);

// AP over a ranked 0/1 relevance list; needs at least one relevant item.
double average_precision(const std::vector<int>& ranked_relevance);

struct Metrics {
  double map = 0.0;
  double mrr = 0.0;
  double p_at_1 = 0.0;
  std::size_t question_count = 0;
};

// Aggregates over the judged questions that survive filtering. Candidates
// judged but missing from the run are appended below all scored candidates in
// ascending id order; unjudged candidates in the run count as non-relevant.
Metrics evaluate(const RankedRun& run, const Qrels& qrels, FilterPolicy policy,
                 FilterReport* report = nullptr);

// Lines "qid Q0 candidate_id rank score run_name", ranks from 1.
void write_trec_run(const RankedRun& run, std::ostream& out);
void write_trec_run(const RankedRun& run, const std::string& path);

// Lines "qid 0 candidate_id relevance"; positive relevance collapses to 1.
Qrels read_qrels(std::istream& in, const std::string& source_name);
Qrels read_qrels(const std::string& path);
void write_qrels(const Qrels& qrels, std::ostream& out);
void write_qrels(const Qrels& qrels, const std::string& path);

}  // namespace rcnqa

#endif  // RCNQA_METRICS_HPP
