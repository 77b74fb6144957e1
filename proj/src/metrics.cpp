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

#include "rcnqa/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace rcnqa {

void RankedRun::add(const std::string& question_id,
                    const std::string& candidate_id, double score) {
  if (!std::isfinite(score)) {
    throw Error("non-finite score for question '" + question_id +
                "' candidate '" + candidate_id + "'");
  }
  auto [it, inserted] = by_question_.try_emplace(question_id);
  if (inserted) order_.push_back(question_id);
  for (const ScoredCandidate& c : it->second) {
    if (c.id == candidate_id) {
      throw Error("duplicate candidate '" + candidate_id + "' for question '" +
                  question_id + "'");
    }
  }
  it->second.push_back({candidate_id, score});
}

bool RankedRun::has_question(const std::string& question_id) const {
  return by_question_.count(question_id) != 0;
}

std::vector<ScoredCandidate> RankedRun::ranked(
    const std::string& question_id) const {
  auto it = by_question_.find(question_id);
  if (it == by_question_.end()) return {};
  std::vector<ScoredCandidate> out = it->second;
  std::stable_sort(out.begin(), out.end(),
                   [](const ScoredCandidate& a, const ScoredCandidate& b) {
                     if (a.score != b.score) return a.score > b.score;
                     return a.id < b.id;
                   });
  return out;
}

void Qrels::set(const std::string& question_id,
                const std::string& candidate_id, int relevance) {
  if (relevance != 0 && relevance != 1) {
    throw Error("relevance must be 0 or 1, got " + std::to_string(relevance));
  }
  by_question_[question_id][candidate_id] = relevance;
}

int Qrels::lookup(const std::string& question_id,
                  const std::string& candidate_id) const {
  auto qit = by_question_.find(question_id);
  if (qit == by_question_.end()) return -1;
  auto cit = qit->second.find(candidate_id);
  return cit == qit->second.end() ? -1 : cit->second;
}

bool Qrels::has_question(const std::string& question_id) const {
  return by_question_.count(question_id) != 0;
}

std::string to_string(FilterPolicy policy) {
  switch (policy) {
    case FilterPolicy::uniform:
      return "all-positive-or-all-negative";
    case FilterPolicy::no_positive:
      return "no-positive";
    case FilterPolicy::none:
      return "none";
  }
  throw ConfigError("invalid filter policy value");
}

FilterPolicy filter_policy_from_string(const std::string& s) {
  if (s == "all-positive-or-all-negative") return FilterPolicy::uniform;
  if (s == "no-positive") return FilterPolicy::no_positive;
  if (s == "none") return FilterPolicy::none;
  throw ConfigError("unknown filter policy: " + s);
}

Qrels filter_questions(const Qrels& qrels, FilterPolicy policy,
                       FilterReport* report) {
  Qrels out;
  for (const auto& [qid, judged] : qrels.judgements()) {
    std::size_t positives = 0;
    for (const auto& [cid, rel] : judged) positives += rel > 0 ? 1 : 0;
    const bool all_positive = positives == judged.size() && !judged.empty();
    const bool all_negative = positives == 0;

    bool drop = false;
    std::string reason;
    if (policy == FilterPolicy::uniform && (all_positive || all_negative)) {
      drop = true;
      reason = all_positive ? "all candidates positive"
                            : "all candidates negative";
    } else if (policy == FilterPolicy::no_positive && positives == 0) {
      drop = true;
      reason = "no positive candidate";
    }
    if (drop) {
      if (report != nullptr) report->removed.push_back({qid, reason});
      continue;
    }
    for (const auto& [cid, rel] : judged) out.set(qid, cid, rel);
  }
  return out;
}

double average_precision(const std::vector<int>& ranked_relevance) {
  std::size_t relevant = 0;
  double sum = 0.0;
  for (std::size_t k = 0; k < ranked_relevance.size(); ++k) {
    if (ranked_relevance[k] > 0) {
      ++relevant;
      sum += static_cast<double>(relevant) / static_cast<double>(k + 1);
    }
  }
  if (relevant == 0) {
    throw Error("average precision undefined without a relevant candidate");
  }
  return sum / static_cast<double>(relevant);
}

Metrics evaluate(const RankedRun& run, const Qrels& qrels, FilterPolicy policy,
                 FilterReport* report) {
  const Qrels kept = filter_questions(qrels, policy, report);
  Metrics m;
  double ap_sum = 0.0;
  double rr_sum = 0.0;
  double p1_sum = 0.0;
  for (const auto& [qid, judged] : kept.judgements()) {
    std::vector<ScoredCandidate> ranked = run.ranked(qid);
    // Judged candidates the run never scored go to the bottom, id order.
    for (const auto& [cid, rel] : judged) {
      const bool scored =
          std::any_of(ranked.begin(), ranked.end(),
                      [&cid](const ScoredCandidate& c) { return c.id == cid; });
      if (!scored) ranked.push_back({cid, 0.0});
    }
    std::vector<int> relevance;
    relevance.reserve(ranked.size());
    for (const ScoredCandidate& c : ranked) {
      const int rel = kept.lookup(qid, c.id);
      relevance.push_back(rel > 0 ? 1 : 0);
    }
    ap_sum += average_precision(relevance);
    for (std::size_t k = 0; k < relevance.size(); ++k) {
      if (relevance[k] > 0) {
        rr_sum += 1.0 / static_cast<double>(k + 1);
        break;
      }
    }
    p1_sum += relevance[0] > 0 ? 1.0 : 0.0;
    ++m.question_count;
  }
  if (m.question_count == 0) {
    throw Error("no questions left to evaluate after filtering");
  }
  const double n = static_cast<double>(m.question_count);
  m.map = ap_sum / n;
  m.mrr = rr_sum / n;
  m.p_at_1 = p1_sum / n;
  return m;
}

void write_trec_run(const RankedRun& run, std::ostream& out) {
  for (const std::string& qid : run.question_ids()) {
    const std::vector<ScoredCandidate> ranked = run.ranked(qid);
    for (std::size_t k = 0; k < ranked.size(); ++k) {
      out << qid << " Q0 " << ranked[k].id << ' ' << (k + 1) << ' '
          << format_double(ranked[k].score) << ' ' << run.name() << '\n';
    }
  }
}

void write_trec_run(const RankedRun& run, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write run file: " + path);
  write_trec_run(run, out);
  if (!out) throw Error("failed writing run file: " + path);
}

Qrels read_qrels(std::istream& in, const std::string& source_name) {
  Qrels q;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string qid, iteration, cid;
    long long rel = -1;
    std::string extra;
    if (!(ls >> qid >> iteration >> cid >> rel) || (ls >> extra) || rel < 0) {
      throw ParseError(source_name + " line " + std::to_string(line_no) +
                       ": expected 'qid iter candidate relevance'");
    }
    q.set(qid, cid, rel > 0 ? 1 : 0);
  }
  return q;
}

Qrels read_qrels(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open qrels file: " + path);
  return read_qrels(in, path);
}

void write_qrels(const Qrels& qrels, std::ostream& out) {
  for (const auto& [qid, judged] : qrels.judgements()) {
    for (const auto& [cid, rel] : judged) {
      out << qid << " 0 " << cid << ' ' << rel << '\n';
    }
  }
}

void write_qrels(const Qrels& qrels, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write qrels file: " + path);
  write_qrels(qrels, out);
}

}  // namespace rcnqa
