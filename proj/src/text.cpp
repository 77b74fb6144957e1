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

#include "rcnqa/text.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <unordered_set>

namespace rcnqa {

namespace {

bool is_ascii_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' ||
         c == '\f';
}

bool is_ascii_punct(unsigned char c) {
  return (c >= '!' && c <= '/') || (c >= ':' && c <= '@') ||
         (c >= '[' && c <= '`') || (c >= '{' && c <= '~');
}

bool is_ascii_digit(unsigned char c) { return c >= '0' && c <= '9'; }

}  // namespace

bool is_punctuation_token(std::string_view token) {
  if (token.empty()) return false;
  for (unsigned char c : token) {
    if (!is_ascii_punct(c)) return false;
  }
  return true;
}

std::vector<std::string> tokenize_normalize(std::string_view raw,
                                            const TokenizerOptions& opts) {
  std::string norm;
  norm.reserve(raw.size());
  bool prev_digit = false;
  for (unsigned char c : raw) {
    if (is_ascii_digit(c)) {
      if (!(opts.collapse_digits && prev_digit)) norm.push_back('0');
      prev_digit = true;
      continue;
    }
    prev_digit = false;
    if (c >= 'A' && c <= 'Z') {
      norm.push_back(static_cast<char>(c - 'A' + 'a'));
    } else {
      norm.push_back(static_cast<char>(c));
    }
  }

  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < norm.size()) {
    while (i < norm.size() && is_ascii_space(norm[i])) ++i;
    std::size_t begin = i;
    while (i < norm.size() && !is_ascii_space(norm[i])) ++i;
    if (i == begin) continue;
    std::string_view chunk(norm.data() + begin, i - begin);

    std::size_t lead = 0;
    while (lead < chunk.size() && is_ascii_punct(chunk[lead])) ++lead;
    if (lead == chunk.size()) {
      // Pure punctuation chunk, one token per character.
      for (char c : chunk) out.emplace_back(1, c);
      continue;
    }
    std::size_t tail = chunk.size();
    while (tail > lead && is_ascii_punct(chunk[tail - 1])) --tail;
    for (std::size_t k = 0; k < lead; ++k) out.emplace_back(1, chunk[k]);
    out.emplace_back(chunk.substr(lead, tail - lead));
    for (std::size_t k = tail; k < chunk.size(); ++k) {
      out.emplace_back(1, chunk[k]);
    }
  }
  return out;
}

Vocabulary::Vocabulary() {
  tokens_.emplace_back(kUnknownToken);
  index_.emplace(kUnknownToken, kUnknownIndex);
}

std::size_t Vocabulary::add(const std::string& token) {
  auto it = index_.find(token);
  if (it != index_.end()) return it->second;
  const std::size_t idx = tokens_.size();
  tokens_.push_back(token);
  index_.emplace(token, idx);
  return idx;
}

std::size_t Vocabulary::lookup(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? kUnknownIndex : it->second;
}

bool Vocabulary::contains(const std::string& token) const {
  return index_.count(token) != 0;
}

const std::string& Vocabulary::token(std::size_t index) const {
  if (index >= tokens_.size()) {
    throw DimensionError("vocabulary index out of range: " +
                         std::to_string(index));
  }
  return tokens_[index];
}

std::uint64_t Vocabulary::hash() const { return hash_token_list(tokens_); }

Vocabulary Vocabulary::from_tokens(const std::vector<std::string>& tokens) {
  if (tokens.empty() || tokens[0] != kUnknownToken) {
    throw FormatError("vocabulary list must start with the unknown token");
  }
  Vocabulary v;
  for (std::size_t i = 1; i < tokens.size(); ++i) {
    if (v.contains(tokens[i])) {
      throw FormatError("duplicate vocabulary token: " + tokens[i]);
    }
    v.add(tokens[i]);
  }
  return v;
}

Vocabulary build_vocab(
    const std::vector<std::vector<std::string>>& documents) {
  Vocabulary v;
  for (const auto& doc : documents) {
    for (const auto& tok : doc) v.add(tok);
  }
  return v;
}

EmbeddingTable make_embedding_table(std::size_t vocab_size, std::size_t dim) {
  if (vocab_size == 0 || dim == 0) {
    throw DimensionError("embedding table dimensions must be positive");
  }
  EmbeddingTable t;
  t.vectors = DenseMatrix(vocab_size, dim);
  t.pretrained.assign(vocab_size, 0);
  return t;
}

namespace {

struct EmbeddingHeader {
  std::size_t count = 0;
  std::size_t dim = 0;
};

EmbeddingHeader parse_embedding_header(const std::string& line) {
  std::istringstream hs(line);
  long long count = -1;
  long long dim = -1;
  std::string extra;
  if (!(hs >> count >> dim) || (hs >> extra) || count < 0 || dim <= 0) {
    throw ParseError(
        "embedding file line 1: malformed header, expected '<count> <dim>'");
  }
  return {static_cast<std::size_t>(count), static_cast<std::size_t>(dim)};
}

EmbeddingLoadResult load_embeddings_text(const std::string& path,
                                         const Vocabulary& vocab) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open embedding file: " + path);
  std::string line;
  if (!std::getline(in, line)) {
    throw ParseError("embedding file line 1: missing header");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const EmbeddingHeader header = parse_embedding_header(line);

  EmbeddingLoadResult result;
  result.table = make_embedding_table(vocab.size(), header.dim);
  result.file_entries = header.count;

  for (std::size_t e = 0; e < header.count; ++e) {
    const std::size_t line_no = e + 2;
    if (!std::getline(in, line)) {
      throw ParseError("embedding file line " + std::to_string(line_no) +
                       ": file ends before all " +
                       std::to_string(header.count) + " declared entries");
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::string token;
    if (!(ls >> token)) {
      throw ParseError("embedding file line " + std::to_string(line_no) +
                       ": empty entry");
    }
    std::vector<double> row(header.dim);
    for (std::size_t d = 0; d < header.dim; ++d) {
      if (!(ls >> row[d])) {
        throw ParseError("embedding file line " + std::to_string(line_no) +
                         ": expected " + std::to_string(header.dim) +
                         " components for token '" + token + "', found " +
                         std::to_string(d));
      }
    }
    std::string extra;
    if (ls >> extra) {
      throw ParseError("embedding file line " + std::to_string(line_no) +
                       ": more than " + std::to_string(header.dim) +
                       " components for token '" + token + "'");
    }
    if (!vocab.contains(token)) continue;
    const std::size_t idx = vocab.lookup(token);
    if (result.table.pretrained[idx]) continue;  // first occurrence wins
    std::copy(row.begin(), row.end(), result.table.vectors.row(idx).begin());
    result.table.pretrained[idx] = 1;
    ++result.matched;
  }
  result.coverage =
      static_cast<double>(result.matched) / static_cast<double>(vocab.size());
  return result;
}

EmbeddingLoadResult load_embeddings_binary(const std::string& path,
                                           const Vocabulary& vocab) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open embedding file: " + path);

  std::string header_line;
  std::size_t offset = 0;
  int ci;
  while ((ci = in.get()) != std::ifstream::traits_type::eof()) {
    ++offset;
    if (ci == '\n') break;
    header_line.push_back(static_cast<char>(ci));
  }
  if (ci == std::ifstream::traits_type::eof()) {
    throw ParseError("embedding file byte " + std::to_string(offset) +
                     ": missing header line");
  }
  const EmbeddingHeader header = parse_embedding_header(header_line);

  EmbeddingLoadResult result;
  result.table = make_embedding_table(vocab.size(), header.dim);
  result.file_entries = header.count;

  std::vector<char> payload(header.dim * 4);
  for (std::size_t e = 0; e < header.count; ++e) {
    // Tolerate newlines between entries; some writers append one per vector.
    while ((ci = in.peek()) == '\n' || ci == ' ') {
      in.get();
      ++offset;
    }
    std::string token;
    while ((ci = in.get()) != std::ifstream::traits_type::eof()) {
      ++offset;
      if (ci == ' ') break;
      token.push_back(static_cast<char>(ci));
    }
    if (ci == std::ifstream::traits_type::eof()) {
      throw ParseError("embedding file byte " + std::to_string(offset) +
                       ": truncated token in entry " + std::to_string(e + 1));
    }
    in.read(payload.data(), static_cast<std::streamsize>(payload.size()));
    if (static_cast<std::size_t>(in.gcount()) != payload.size()) {
      throw ParseError("embedding file byte " +
                       std::to_string(offset + in.gcount()) +
                       ": truncated vector for token '" + token + "'");
    }
    offset += payload.size();

    const bool wanted =
        vocab.contains(token) && !result.table.pretrained[vocab.lookup(token)];
    if (!wanted) continue;
    const std::size_t idx = vocab.lookup(token);
    auto row = result.table.vectors.row(idx);
    for (std::size_t d = 0; d < header.dim; ++d) {
      std::uint32_t bits = 0;
      for (int b = 3; b >= 0; --b) {
        bits = (bits << 8) |
               static_cast<std::uint8_t>(payload[d * 4 + static_cast<std::size_t>(b)]);
      }
      row[d] = static_cast<double>(std::bit_cast<float>(bits));
    }
    result.table.pretrained[idx] = 1;
    ++result.matched;
  }
  result.coverage =
      static_cast<double>(result.matched) / static_cast<double>(vocab.size());
  return result;
}

}  // namespace

EmbeddingLoadResult load_word_embeddings(const std::string& path,
                                         EmbeddingFormat format,
                                         const Vocabulary& vocab) {
  return format == EmbeddingFormat::word2vec_text
             ? load_embeddings_text(path, vocab)
             : load_embeddings_binary(path, vocab);
}

void save_word_embeddings_text(const std::string& path,
                               const Vocabulary& vocab,
                               const EmbeddingTable& table) {
  if (table.size() != vocab.size()) {
    throw DimensionError("embedding table does not match vocabulary size");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write embedding file: " + path);
  out << table.size() << ' ' << table.dim() << '\n';
  for (std::size_t i = 0; i < table.size(); ++i) {
    out << vocab.token(i);
    for (double v : table.vectors.row(i)) out << ' ' << format_double(v);
    out << '\n';
  }
  if (!out) throw FormatError("failed writing embedding file: " + path);
}

void init_oov(EmbeddingTable& table, double r, std::uint64_t seed) {
  if (!(r > 0.0)) {
    throw ConfigError("out-of-vocabulary init range must be positive");
  }
  Rng rng(seed);
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (table.pretrained[i]) continue;
    for (double& v : table.vectors.row(i)) v = rng.uniform(-r, r);
  }
}

std::uint64_t StopwordList::hash() const {
  return hash_token_set({words_.begin(), words_.end()});
}

StopwordList StopwordList::from_tokens(const std::vector<std::string>& tokens) {
  StopwordList s;
  s.words_.insert(tokens.begin(), tokens.end());
  return s;
}

StopwordList StopwordList::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open stopword file: " + path);
  StopwordList s;
  std::string line;
  while (std::getline(in, line)) {
    std::size_t b = 0;
    std::size_t e = line.size();
    while (b < e && is_ascii_space(static_cast<unsigned char>(line[b]))) ++b;
    while (e > b && is_ascii_space(static_cast<unsigned char>(line[e - 1]))) --e;
    if (b == e || line[b] == '#') continue;
    s.words_.insert(line.substr(b, e - b));
  }
  return s;
}

StopwordList StopwordList::builtin() {
  return from_tokens(builtin_stopword_tokens());
}

AnnotatedSentence make_annotated(std::vector<std::string> tokens,
                                 const Vocabulary& vocab) {
  AnnotatedSentence s;
  s.indices.reserve(tokens.size());
  for (const auto& t : tokens) s.indices.push_back(vocab.lookup(t));
  s.overlap.assign(tokens.size(), 0);
  s.tokens = std::move(tokens);
  return s;
}

void annotate_overlap(AnnotatedSentence& q, AnnotatedSentence& a,
                      const StopwordList& stopwords) {
  const std::unordered_set<std::string> q_forms(q.tokens.begin(),
                                                q.tokens.end());
  const std::unordered_set<std::string> a_forms(a.tokens.begin(),
                                                a.tokens.end());
  auto flag = [&](AnnotatedSentence& s,
                  const std::unordered_set<std::string>& other) {
    s.overlap.assign(s.tokens.size(), 0);
    for (std::size_t i = 0; i < s.tokens.size(); ++i) {
      const std::string& t = s.tokens[i];
      if (other.count(t) && !stopwords.contains(t) &&
          !is_punctuation_token(t)) {
        s.overlap[i] = 1;
      }
    }
  };
  flag(q, a_forms);
  flag(a, q_forms);
}

IdfTable::IdfTable(std::map<std::string, double> weights,
                   double default_weight)
    : weights_(std::move(weights)), default_weight_(default_weight) {
  for (const auto& [tok, w] : weights_) {
    if (!(w >= 0.0)) {
      throw ConfigError("negative idf weight for token: " + tok);
    }
  }
}

double IdfTable::lookup(const std::string& token) const {
  auto it = weights_.find(token);
  return it == weights_.end() ? default_weight_ : it->second;
}

IdfTable build_idf(const std::vector<std::vector<std::string>>& documents) {
  if (documents.empty()) return IdfTable();
  std::map<std::string, std::size_t> df;
  for (const auto& doc : documents) {
    std::set<std::string> forms(doc.begin(), doc.end());
    for (const auto& f : forms) ++df[f];
  }
  const double n = static_cast<double>(documents.size());
  std::map<std::string, double> weights;
  double max_w = 1.0;
  for (const auto& [tok, count] : df) {
    const double w =
        std::log((1.0 + n) / (1.0 + static_cast<double>(count))) + 1.0;
    weights.emplace(tok, w);
    max_w = std::max(max_w, w);
  }
  return IdfTable(std::move(weights), max_w);
}

std::array<double, 4> overlap_count_features(const AnnotatedSentence& q,
                                             const AnnotatedSentence& a,
                                             const IdfTable& idf) {
  if (q.tokens.size() != q.overlap.size()) {
    throw DimensionError("question sentence missing overlap annotation");
  }
  const std::unordered_set<std::string> a_forms(a.tokens.begin(),
                                                a.tokens.end());
  // Distinct question forms, remembering whether any occurrence was flagged.
  std::map<std::string, bool> q_forms;
  for (std::size_t i = 0; i < q.tokens.size(); ++i) {
    bool& flagged = q_forms[q.tokens[i]];
    flagged = flagged || q.overlap[i] != 0;
  }
  std::array<double, 4> feat = {0.0, 0.0, 0.0, 0.0};
  for (const auto& [form, flagged] : q_forms) {
    if (!a_forms.count(form)) continue;
    const double w = idf.lookup(form);
    feat[0] += 1.0;
    feat[2] += w;
    if (flagged) {
      feat[1] += 1.0;
      feat[3] += w;
    }
  }
  return feat;
}

}  // namespace rcnqa
