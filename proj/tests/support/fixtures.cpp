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

#include "support/fixtures.hpp"

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "rcnqa/common.hpp"

namespace rcnqa::testing {

namespace {

const std::vector<std::string>& question_fillers() {
  static const std::vector<std::string> v = {
      "what", "which", "when", "how", "does", "did", "name", "many"};
  return v;
}

const std::vector<std::string>& answer_fillers() {
  static const std::vector<std::string> v = {
      "river",  "valley", "engine", "harbor", "museum", "signal", "garden",
      "bridge", "copper", "forest", "window", "sensor", "market", "tunnel",
      "castle", "branch", "anchor", "fossil", "meadow", "hammer"};
  return v;
}

std::vector<std::string> draw(const std::vector<std::string>& pool,
                              std::size_t count, Rng& rng) {
  std::vector<std::string> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back(pool[rng.index(pool.size())]);
  }
  return out;
}

void insert_at_random(std::vector<std::string>& tokens,
                      const std::string& token, Rng& rng) {
  tokens.insert(tokens.begin() +
                    static_cast<std::ptrdiff_t>(rng.index(tokens.size() + 1)),
                token);
}

}  // namespace

Dataset synthetic_overlap_dataset(const SyntheticSpec& spec,
                                  const std::string& split) {
  Rng rng(spec.seed);
  Dataset ds;
  ds.split = split;
  ds.source = "synthetic:" + spec.marker_prefix;
  for (std::size_t qi = 0; qi < spec.questions; ++qi) {
    const std::string mark_a =
        spec.marker_prefix + std::to_string(qi) + "a";
    const std::string mark_b =
        spec.marker_prefix + std::to_string(qi) + "b";

    std::vector<std::string> q_tokens =
        draw(question_fillers(), spec.filler_len, rng);
    insert_at_random(q_tokens, "the", rng);
    insert_at_random(q_tokens, mark_a, rng);
    insert_at_random(q_tokens, mark_b, rng);

    QuestionGroup group;
    {
      std::ostringstream id;
      id << 'q';
      id.width(3);
      id.fill('0');
      id << qi;
      group.id = id.str();
    }
    const std::size_t positive_slot = rng.index(spec.candidates);
    for (std::size_t ci = 0; ci < spec.candidates; ++ci) {
      std::vector<std::string> a_tokens =
          draw(answer_fillers(), spec.filler_len + 1, rng);
      insert_at_random(a_tokens, "the", rng);
      if (ci == positive_slot) {
        insert_at_random(a_tokens, mark_a, rng);
        insert_at_random(a_tokens, mark_b, rng);
      }
      QAPair pair;
      pair.question_id = group.id;
      pair.candidate_id = std::to_string(ci);
      pair.question.tokens = q_tokens;
      pair.answer.tokens = std::move(a_tokens);
      pair.label = ci == positive_slot ? 1 : 0;
      group.candidates.push_back(std::move(pair));
    }
    ds.questions.push_back(std::move(group));
  }
  return ds;
}

PreparedCorpus prepared_corpus(const SyntheticSpec& train_spec,
                               const SyntheticSpec& dev_spec) {
  PreparedCorpus out;
  out.train = synthetic_overlap_dataset(train_spec, "train");
  out.dev = synthetic_overlap_dataset(dev_spec, "dev");
  const StopwordList stopwords = StopwordList::builtin();
  annotate_dataset(out.train, stopwords);
  annotate_dataset(out.dev, stopwords);
  out.vocab = build_vocab(out.train);
  out.idf = build_idf(out.train);
  index_dataset(out.train, out.vocab);
  index_dataset(out.dev, out.vocab);
  compute_features(out.train, out.idf);
  compute_features(out.dev, out.idf);
  return out;
}

HyperParams tiny_hyperparams(RelationMode mode, ConvMode conv) {
  HyperParams hp;
  hp.word_dim = 6;
  hp.overlap_dim = 2;
  hp.num_filters = 4;
  hp.filter_width = 3;
  hp.conv_mode = conv;
  hp.relation = mode;
  hp.feature_count = 4;
  hp.freeze_embeddings = false;
  return hp;
}

TinyModel tiny_model(RelationMode mode, ConvMode conv, std::uint64_t seed) {
  TinyModel tm;
  for (const char* t : {"alpha", "bravo", "charlie", "delta", "echo",
                        "foxtrot", "golf", "hotel"}) {
    tm.vocab.add(t);
  }
  const HyperParams hp = tiny_hyperparams(mode, conv);
  tm.params = init_params(hp, tm.vocab, seed);

  const std::vector<std::string>& pool = tm.vocab.tokens();
  Rng rng(seed + 17);
  const StopwordList stopwords = StopwordList::from_tokens({pool[1]});
  for (int k = 0; k < 3; ++k) {
    const std::size_t qlen = 4 + rng.index(6);
    const std::size_t alen = 4 + rng.index(6);
    std::vector<std::string> q_tokens, a_tokens;
    for (std::size_t i = 0; i < qlen; ++i) {
      q_tokens.push_back(pool[1 + rng.index(pool.size() - 1)]);
    }
    for (std::size_t i = 0; i < alen; ++i) {
      a_tokens.push_back(pool[1 + rng.index(pool.size() - 1)]);
    }
    // force a flagged overlap: shared token, never the stopword pool[1]
    q_tokens[0] = pool[2 + rng.index(pool.size() - 2)];
    a_tokens[0] = q_tokens[0];
    LabeledPair p;
    p.question = make_annotated(q_tokens, tm.vocab);
    p.answer = make_annotated(a_tokens, tm.vocab);
    annotate_overlap(p.question, p.answer, stopwords);
    p.label = k % 2;
    if (hp.uses_features()) {
      std::vector<double> f(hp.feature_count);
      for (double& v : f) v = rng.uniform(0.0, 2.0);
      p.features = std::move(f);
    }
    tm.pairs.push_back(std::move(p));
  }
  return tm;
}

std::string temp_path(const std::string& stem) {
  static std::atomic<std::uint64_t> counter{0};
  const std::uint64_t n = counter.fetch_add(1);
  const auto dir = std::filesystem::temp_directory_path() / "rcnqa_tests";
  std::filesystem::create_directories(dir);
  return (dir / (stem + "_" + std::to_string(::getpid()) + "_" +
                 std::to_string(n)))
      .string();
}

std::string write_temp_file(const std::string& stem,
                            const std::string& content) {
  const std::string path = temp_path(stem);
  std::ofstream out(path, std::ios::binary);
  out << content;
  out.close();
  return path;
}

std::string read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("fixture cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace rcnqa::testing
