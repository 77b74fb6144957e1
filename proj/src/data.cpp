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

#include "rcnqa/data.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include "rcnqa/serialize.hpp"

namespace rcnqa {

std::size_t Dataset::pair_count() const {
  std::size_t n = 0;
  for (const QuestionGroup& g : questions) n += g.candidates.size();
  return n;
}

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t begin = 0;
  while (true) {
    const std::size_t tab = line.find('\t', begin);
    if (tab == std::string::npos) {
      out.push_back(line.substr(begin));
      return out;
    }
    out.push_back(line.substr(begin, tab - begin));
    begin = tab + 1;
  }
}

int parse_binary_label(const std::string& s, const std::string& path,
                       std::size_t line_no) {
  if (s == "0") return 0;
  if (s == "1") return 1;
  throw ParseError(path + " line " + std::to_string(line_no) +
                   ": label must be 0 or 1, got '" + s + "'");
}

AnnotatedSentence tokenize_sentence(const std::string& text,
                                    const TokenizerOptions& opts,
                                    const char* what, const std::string& path,
                                    std::size_t line_no) {
  std::vector<std::string> tokens = tokenize_normalize(text, opts);
  if (tokens.empty()) {
    throw ParseError(path + " line " + std::to_string(line_no) + ": " + what +
                     " text is empty after normalization");
  }
  AnnotatedSentence s;
  s.tokens = std::move(tokens);
  s.indices.assign(s.tokens.size(), kUnknownIndex);
  s.overlap.assign(s.tokens.size(), 0);
  return s;
}

QuestionGroup& group_for(Dataset& ds,
                         std::map<std::string, std::size_t>& group_index,
                         const std::string& qid) {
  auto it = group_index.find(qid);
  if (it != group_index.end()) return ds.questions[it->second];
  group_index.emplace(qid, ds.questions.size());
  ds.questions.push_back({qid, {}});
  return ds.questions.back();
}

}  // namespace

Dataset parse_canonical_tsv(const std::string& path,
                            const TokenizerOptions& opts) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open dataset file: " + path);
  Dataset ds;
  ds.source = path;
  std::map<std::string, std::size_t> group_index;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> cols = split_tabs(line);
    if (cols.size() != 4) {
      throw ParseError(path + " line " + std::to_string(line_no) +
                       ": expected 4 tab-separated columns, got " +
                       std::to_string(cols.size()));
    }
    QAPair pair;
    pair.question_id = cols[0];
    if (pair.question_id.empty()) {
      throw ParseError(path + " line " + std::to_string(line_no) +
                       ": empty question id");
    }
    pair.label = parse_binary_label(cols[1], path, line_no);
    pair.question = tokenize_sentence(cols[2], opts, "question", path, line_no);
    pair.answer = tokenize_sentence(cols[3], opts, "answer", path, line_no);

    QuestionGroup& g = group_for(ds, group_index, pair.question_id);
    pair.candidate_id = std::to_string(g.candidates.size());
    g.candidates.push_back(std::move(pair));
  }
  return ds;
}

Dataset parse_wikiqa_tsv(const std::string& path,
                         const TokenizerOptions& opts) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open dataset file: " + path);
  Dataset ds;
  ds.source = path;
  std::string line;
  if (!std::getline(in, line)) {
    throw ParseError(path + ": missing header line");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  {
    const std::vector<std::string> cols = split_tabs(line);
    if (cols.size() != 7 || cols[0] != "QuestionID") {
      throw ParseError(path +
                       " line 1: expected the 7-column header starting with "
                       "'QuestionID'");
    }
  }
  std::map<std::string, std::size_t> group_index;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> cols = split_tabs(line);
    if (cols.size() != 7) {
      throw ParseError(path + " line " + std::to_string(line_no) +
                       ": expected 7 tab-separated columns, got " +
                       std::to_string(cols.size()));
    }
    QAPair pair;
    pair.question_id = cols[0];
    pair.candidate_id = cols[4];
    if (pair.question_id.empty() || pair.candidate_id.empty()) {
      throw ParseError(path + " line " + std::to_string(line_no) +
                       ": empty question or sentence id");
    }
    pair.label = parse_binary_label(cols[6], path, line_no);
    pair.question = tokenize_sentence(cols[1], opts, "question", path, line_no);
    pair.answer = tokenize_sentence(cols[5], opts, "answer", path, line_no);

    QuestionGroup& g = group_for(ds, group_index, pair.question_id);
    for (const QAPair& existing : g.candidates) {
      if (existing.candidate_id == pair.candidate_id) {
        throw ParseError(path + " line " + std::to_string(line_no) +
                         ": duplicate sentence id '" + pair.candidate_id +
                         "' in question '" + pair.question_id + "'");
      }
    }
    g.candidates.push_back(std::move(pair));
  }
  return ds;
}

DatasetStats dataset_stats(const Dataset& ds) {
  DatasetStats st;
  st.questions = ds.questions.size();
  for (const QuestionGroup& g : ds.questions) {
    st.pairs += g.candidates.size();
    for (const QAPair& p : g.candidates) st.positives += p.label ? 1 : 0;
  }
  if (st.pairs > 0) {
    st.positive_fraction =
        static_cast<double>(st.positives) / static_cast<double>(st.pairs);
  }
  return st;
}

void annotate_dataset(Dataset& ds, const StopwordList& stopwords) {
  for (QuestionGroup& g : ds.questions) {
    for (QAPair& p : g.candidates) {
      annotate_overlap(p.question, p.answer, stopwords);
    }
  }
  ds.stopword_hash = stopwords.hash();
}

void index_dataset(Dataset& ds, const Vocabulary& vocab) {
  auto reindex = [&vocab](AnnotatedSentence& s) {
    s.indices.resize(s.tokens.size());
    for (std::size_t i = 0; i < s.tokens.size(); ++i) {
      s.indices[i] = vocab.lookup(s.tokens[i]);
    }
  };
  for (QuestionGroup& g : ds.questions) {
    for (QAPair& p : g.candidates) {
      reindex(p.question);
      reindex(p.answer);
    }
  }
}

void compute_features(Dataset& ds, const IdfTable& idf) {
  for (QuestionGroup& g : ds.questions) {
    for (QAPair& p : g.candidates) {
      const std::array<double, 4> f =
          overlap_count_features(p.question, p.answer, idf);
      p.features.assign(f.begin(), f.end());
    }
  }
}

namespace {

std::vector<std::vector<std::string>> documents_of(const Dataset& ds) {
  std::vector<std::vector<std::string>> docs;
  for (const QuestionGroup& g : ds.questions) {
    if (!g.candidates.empty()) docs.push_back(g.candidates[0].question.tokens);
    for (const QAPair& p : g.candidates) docs.push_back(p.answer.tokens);
  }
  return docs;
}

}  // namespace

IdfTable build_idf(const Dataset& ds) { return build_idf(documents_of(ds)); }

Vocabulary build_vocab(const Dataset& ds) {
  return build_vocab(documents_of(ds));
}

Dataset filter_dataset(const Dataset& ds, FilterPolicy policy,
                       FilterReport* report) {
  Dataset out;
  out.split = ds.split;
  out.source = ds.source;
  out.stopword_hash = ds.stopword_hash;
  for (const QuestionGroup& g : ds.questions) {
    std::size_t positives = 0;
    for (const QAPair& p : g.candidates) positives += p.label ? 1 : 0;
    const bool all_positive =
        !g.candidates.empty() && positives == g.candidates.size();
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
      if (report != nullptr) report->removed.push_back({g.id, reason});
      continue;
    }
    out.questions.push_back(g);
  }
  return out;
}

Qrels qrels_from_dataset(const Dataset& ds) {
  Qrels q;
  for (const QuestionGroup& g : ds.questions) {
    for (const QAPair& p : g.candidates) {
      q.set(g.id, p.candidate_id, p.label);
    }
  }
  return q;
}

std::vector<LabeledPair> labeled_pairs(const Dataset& ds, bool with_features) {
  std::vector<LabeledPair> out;
  out.reserve(ds.pair_count());
  for (const QuestionGroup& g : ds.questions) {
    for (const QAPair& p : g.candidates) {
      LabeledPair lp;
      lp.question = p.question;
      lp.answer = p.answer;
      lp.label = p.label;
      if (with_features) lp.features = p.features;
      out.push_back(std::move(lp));
    }
  }
  return out;
}

namespace {

nlohmann::json sentence_to_json(const AnnotatedSentence& s) {
  nlohmann::json j;
  j["tokens"] = s.tokens;
  j["flags"] = s.overlap;
  return j;
}

AnnotatedSentence sentence_from_json(const nlohmann::json& j) {
  AnnotatedSentence s;
  s.tokens = j.at("tokens").get<std::vector<std::string>>();
  s.overlap = j.at("flags").get<std::vector<std::uint8_t>>();
  if (s.tokens.size() != s.overlap.size()) {
    throw FormatError("stored sentence has mismatched tokens and flags");
  }
  s.indices.assign(s.tokens.size(), kUnknownIndex);
  return s;
}

}  // namespace

void save_preprocessed(const Dataset& ds, const std::string& path) {
  nlohmann::json header;
  header["split"] = ds.split;
  header["source"] = ds.source;
  header["stopword_hash"] = ds.stopword_hash;
  nlohmann::json questions = nlohmann::json::array();
  for (const QuestionGroup& g : ds.questions) {
    nlohmann::json jg;
    jg["id"] = g.id;
    nlohmann::json candidates = nlohmann::json::array();
    for (const QAPair& p : g.candidates) {
      nlohmann::json jp;
      jp["id"] = p.candidate_id;
      jp["label"] = p.label;
      jp["question"] = sentence_to_json(p.question);
      jp["answer"] = sentence_to_json(p.answer);
      jp["features"] = p.features;
      candidates.push_back(std::move(jp));
    }
    jg["candidates"] = std::move(candidates);
    questions.push_back(std::move(jg));
  }
  header["questions"] = std::move(questions);

  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write dataset file: " + path);
  write_container(out, kDatasetMagic, 1, header, {});
  if (!out) throw FormatError("failed writing dataset file: " + path);
}

Dataset load_preprocessed(const std::string& path) {
  const Container c = read_container_file(path, kDatasetMagic, 1);
  Dataset ds;
  try {
    ds.split = c.header.at("split").get<std::string>();
    ds.source = c.header.at("source").get<std::string>();
    ds.stopword_hash = c.header.at("stopword_hash").get<std::uint64_t>();
    for (const nlohmann::json& jg : c.header.at("questions")) {
      QuestionGroup g;
      g.id = jg.at("id").get<std::string>();
      for (const nlohmann::json& jp : jg.at("candidates")) {
        QAPair p;
        p.question_id = g.id;
        p.candidate_id = jp.at("id").get<std::string>();
        p.label = jp.at("label").get<int>();
        if (p.label != 0 && p.label != 1) {
          throw FormatError("stored label must be 0 or 1");
        }
        p.question = sentence_from_json(jp.at("question"));
        p.answer = sentence_from_json(jp.at("answer"));
        p.features = jp.at("features").get<std::vector<double>>();
        g.candidates.push_back(std::move(p));
      }
      ds.questions.push_back(std::move(g));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("dataset file " + path +
                      ": malformed header: " + e.what());
  }
  return ds;
}

}  // namespace rcnqa
