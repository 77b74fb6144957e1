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

#include "rcnqa/serialize.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace rcnqa {

namespace {

void put_bytes_le(std::ostream& out, std::uint64_t v, int nbytes) {
  for (int i = 0; i < nbytes; ++i) {
    out.put(static_cast<char>((v >> (8 * i)) & 0xffu));
  }
}

std::uint64_t get_bytes_le(std::istream& in, int nbytes,
                           const std::string& what,
                           const std::string& source) {
  std::uint64_t v = 0;
  for (int i = 0; i < nbytes; ++i) {
    const int c = in.get();
    if (c == std::istream::traits_type::eof()) {
      throw FormatError(source + ": truncated while reading " + what);
    }
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * i);
  }
  return v;
}

constexpr std::uint64_t kMaxHeaderBytes = 1ull << 30;

}  // namespace

void write_container(std::ostream& out, const char* magic,
                     std::uint32_t version, const nlohmann::json& header,
                     std::span<const double> payload) {
  out.write(magic, 6);
  put_bytes_le(out, version, 4);
  const std::string header_bytes = header.dump();
  put_bytes_le(out, header_bytes.size(), 8);
  out.write(header_bytes.data(),
            static_cast<std::streamsize>(header_bytes.size()));
  for (double d : payload) {
    put_bytes_le(out, std::bit_cast<std::uint64_t>(d), 8);
  }
}

Container read_container(std::istream& in, const char* magic,
                         std::uint32_t max_version,
                         const std::string& source_name) {
  char got[6];
  in.read(got, 6);
  if (in.gcount() != 6 || std::memcmp(got, magic, 6) != 0) {
    throw FormatError(source_name + ": bad magic bytes, expected '" +
                      std::string(magic, 6) + "'");
  }
  Container c;
  c.version = static_cast<std::uint32_t>(
      get_bytes_le(in, 4, "version field", source_name));
  if (c.version == 0 || c.version > max_version) {
    throw FormatError(source_name + ": unsupported format version " +
                      std::to_string(c.version) + " (newest supported is " +
                      std::to_string(max_version) + ")");
  }
  const std::uint64_t header_len =
      get_bytes_le(in, 8, "header length field", source_name);
  if (header_len > kMaxHeaderBytes) {
    throw FormatError(source_name + ": corrupt header length " +
                      std::to_string(header_len));
  }
  std::string header_bytes(header_len, '\0');
  in.read(header_bytes.data(), static_cast<std::streamsize>(header_len));
  if (static_cast<std::uint64_t>(in.gcount()) != header_len) {
    throw FormatError(source_name + ": truncated header");
  }
  try {
    c.header = nlohmann::json::parse(header_bytes);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(source_name + ": malformed JSON header: " + e.what());
  }

  char chunk[8];
  while (true) {
    in.read(chunk, 8);
    const std::streamsize got_n = in.gcount();
    if (got_n == 0) break;
    if (got_n != 8) {
      throw FormatError(source_name + ": truncated payload, " +
                        std::to_string(got_n) + " trailing bytes");
    }
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) {
      v = (v << 8) | static_cast<unsigned char>(chunk[i]);
    }
    c.payload.push_back(std::bit_cast<double>(v));
  }
  return c;
}

Container read_container_file(const std::string& path, const char* magic,
                              std::uint32_t max_version) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open file: " + path);
  return read_container(in, magic, max_version, path);
}

namespace {

nlohmann::json idf_to_json(const IdfTable& idf) {
  if (idf.empty()) return nullptr;
  nlohmann::json j;
  j["weights"] = idf.weights();
  j["default"] = idf.default_weight();
  return j;
}

IdfTable idf_from_json(const nlohmann::json& j) {
  if (j.is_null()) return IdfTable();
  return IdfTable(j.at("weights").get<std::map<std::string, double>>(),
                  j.at("default").get<double>());
}

struct TensorRef {
  std::string name;
  std::vector<std::size_t> shape;
  const double* data;
  std::size_t count;
};

class TensorDirectory {
 public:
  void add(const std::string& name, std::vector<std::size_t> shape,
           const double* data, std::size_t count) {
    refs_.push_back({name, std::move(shape), data, count});
  }
  void add(const std::string& name, const DenseMatrix& m) {
    add(name, {m.rows(), m.cols()}, m.data().data(), m.size());
  }
  void add(const std::string& name, const std::vector<double>& v) {
    add(name, {v.size()}, v.data(), v.size());
  }

  nlohmann::json directory_json() const {
    nlohmann::json dir = nlohmann::json::array();
    std::size_t offset = 0;
    for (const TensorRef& r : refs_) {
      nlohmann::json t;
      t["name"] = r.name;
      t["shape"] = r.shape;
      t["offset"] = offset * 8;  // bytes from payload start
      t["count"] = r.count;
      t["dtype"] = "f8";
      dir.push_back(std::move(t));
      offset += r.count;
    }
    return dir;
  }

  std::vector<double> payload() const {
    std::vector<double> out;
    std::size_t total = 0;
    for (const TensorRef& r : refs_) total += r.count;
    out.reserve(total);
    for (const TensorRef& r : refs_) {
      out.insert(out.end(), r.data, r.data + r.count);
    }
    return out;
  }

 private:
  std::vector<TensorRef> refs_;
};

// Resolves directory entries against the payload on load.
class TensorReader {
 public:
  TensorReader(const nlohmann::json& directory,
               const std::vector<double>& payload, const std::string& source)
      : payload_(payload), source_(source) {
    for (const nlohmann::json& t : directory) {
      Entry e;
      e.shape = t.at("shape").get<std::vector<std::size_t>>();
      e.offset = t.at("offset").get<std::size_t>();
      e.count = t.at("count").get<std::size_t>();
      if (t.at("dtype").get<std::string>() != "f8") {
        throw FormatError(source_ + ": tensor '" +
                          t.at("name").get<std::string>() +
                          "' has unsupported dtype");
      }
      if (e.offset % 8 != 0 || e.offset / 8 + e.count > payload_.size()) {
        throw FormatError(source_ + ": tensor '" +
                          t.at("name").get<std::string>() +
                          "' points outside the payload");
      }
      entries_.emplace(t.at("name").get<std::string>(), e);
    }
  }

  void read_matrix(const std::string& name, DenseMatrix& m) const {
    const Entry& e = find(name, {m.rows(), m.cols()});
    std::copy_n(payload_.begin() + static_cast<std::ptrdiff_t>(e.offset / 8),
                e.count, m.data().begin());
  }
  void read_vector(const std::string& name, std::vector<double>& v) const {
    const Entry& e = find(name, {v.size()});
    std::copy_n(payload_.begin() + static_cast<std::ptrdiff_t>(e.offset / 8),
                e.count, v.begin());
  }
  bool has(const std::string& name) const { return entries_.count(name) != 0; }

 private:
  struct Entry {
    std::vector<std::size_t> shape;
    std::size_t offset = 0;
    std::size_t count = 0;
  };

  const Entry& find(const std::string& name,
                    const std::vector<std::size_t>& shape) const {
    auto it = entries_.find(name);
    if (it == entries_.end()) {
      throw FormatError(source_ + ": missing tensor '" + name + "'");
    }
    if (it->second.shape != shape) {
      throw FormatError(source_ + ": tensor '" + name +
                        "' has an unexpected shape");
    }
    std::size_t n = 1;
    for (std::size_t s : shape) n *= s;
    if (it->second.count != n) {
      throw FormatError(source_ + ": tensor '" + name +
                        "' count disagrees with its shape");
    }
    return it->second;
  }

  std::map<std::string, Entry> entries_;
  const std::vector<double>& payload_;
  std::string source_;
};

nlohmann::json hyperparams_to_json(const HyperParams& hp) {
  nlohmann::json j;
  j["word_dim"] = hp.word_dim;
  j["overlap_dim"] = hp.overlap_dim;
  j["num_filters"] = hp.num_filters;
  j["filter_width"] = hp.filter_width;
  j["conv_mode"] = to_string(hp.conv_mode);
  j["relation"] = to_string(hp.relation);
  j["feature_count"] = hp.feature_count;
  j["freeze_embeddings"] = hp.freeze_embeddings;
  return j;
}

HyperParams hyperparams_from_json(const nlohmann::json& j) {
  HyperParams hp;
  hp.word_dim = j.at("word_dim").get<std::size_t>();
  hp.overlap_dim = j.at("overlap_dim").get<std::size_t>();
  hp.num_filters = j.at("num_filters").get<std::size_t>();
  hp.filter_width = j.at("filter_width").get<std::size_t>();
  hp.conv_mode = conv_mode_from_string(j.at("conv_mode").get<std::string>());
  hp.relation = relation_mode_from_string(j.at("relation").get<std::string>());
  hp.feature_count = j.at("feature_count").get<std::size_t>();
  hp.freeze_embeddings = j.at("freeze_embeddings").get<bool>();
  return hp;
}

void params_tensors(const ModelParams& p, TensorDirectory& dir) {
  dir.add("word_emb", p.word_emb.vectors);
  dir.add("overlap_emb", p.overlap_emb.rows);
  dir.add("conv_q.weights", p.conv_q.weights);
  dir.add("conv_q.bias", p.conv_q.bias);
  dir.add("conv_a.weights", p.conv_a.weights);
  dir.add("conv_a.bias", p.conv_a.bias);
  dir.add("sim", p.sim);
  dir.add("hidden_w", p.hidden_w);
  dir.add("hidden_b", p.hidden_b);
  dir.add("out_w", p.out_w);
  dir.add("out_b", p.out_b);
}

nlohmann::json history_to_json(const TrainHistory& h) {
  nlohmann::json j;
  nlohmann::json batches = nlohmann::json::array();
  for (const TrainHistory::BatchRecord& b : h.batches) {
    batches.push_back({b.step, b.epoch, b.loss});
  }
  nlohmann::json evals = nlohmann::json::array();
  for (const TrainHistory::EvalRecord& e : h.evals) {
    evals.push_back({e.step, e.dev_map, e.best});
  }
  j["batches"] = std::move(batches);
  j["evals"] = std::move(evals);
  j["best_dev_map"] = h.best_dev_map;
  j["best_step"] = h.best_step;
  j["stop_reason"] = h.stop_reason;
  return j;
}

TrainHistory history_from_json(const nlohmann::json& j) {
  TrainHistory h;
  for (const nlohmann::json& b : j.at("batches")) {
    h.batches.push_back({b.at(0).get<std::size_t>(),
                         b.at(1).get<std::size_t>(), b.at(2).get<double>()});
  }
  for (const nlohmann::json& e : j.at("evals")) {
    h.evals.push_back({e.at(0).get<std::size_t>(), e.at(1).get<double>(),
                       e.at(2).get<bool>()});
  }
  h.best_dev_map = j.at("best_dev_map").get<double>();
  h.best_step = j.at("best_step").get<std::size_t>();
  h.stop_reason = j.at("stop_reason").get<std::string>();
  return h;
}

}  // namespace

void save_lexicon(const Lexicon& lex, const std::string& path) {
  if (lex.embeddings.size() != lex.vocab.size()) {
    throw DimensionError("lexicon embeddings do not match vocabulary size");
  }
  nlohmann::json header;
  header["tokens"] = lex.vocab.tokens();
  header["dim"] = lex.embeddings.dim();
  header["stopword_hash"] = lex.stopword_hash;
  header["coverage"] = lex.coverage;
  header["idf"] = idf_to_json(lex.idf);

  TensorDirectory dir;
  dir.add("vectors", lex.embeddings.vectors);
  std::vector<double> flags(lex.embeddings.pretrained.begin(),
                            lex.embeddings.pretrained.end());
  dir.add("pretrained", flags);
  header["tensors"] = dir.directory_json();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write lexicon file: " + path);
  const std::vector<double> payload = dir.payload();
  write_container(out, kLexiconMagic, 1, header, payload);
  if (!out) throw FormatError("failed writing lexicon file: " + path);
}

Lexicon load_lexicon(const std::string& path) {
  const Container c = read_container_file(path, kLexiconMagic, 1);
  Lexicon lex;
  try {
    lex.vocab = Vocabulary::from_tokens(
        c.header.at("tokens").get<std::vector<std::string>>());
    const auto dim = c.header.at("dim").get<std::size_t>();
    lex.stopword_hash = c.header.at("stopword_hash").get<std::uint64_t>();
    lex.coverage = c.header.at("coverage").get<double>();
    lex.idf = idf_from_json(c.header.at("idf"));

    const TensorReader reader(c.header.at("tensors"), c.payload, path);
    lex.embeddings = make_embedding_table(lex.vocab.size(), dim);
    reader.read_matrix("vectors", lex.embeddings.vectors);
    std::vector<double> flags(lex.vocab.size(), 0.0);
    reader.read_vector("pretrained", flags);
    for (std::size_t i = 0; i < flags.size(); ++i) {
      lex.embeddings.pretrained[i] = flags[i] != 0.0 ? 1 : 0;
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("lexicon file " + path +
                      ": malformed header: " + e.what());
  }
  return lex;
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  const ModelParams& p = ckpt.params;
  nlohmann::json header;
  header["hyperparameters"] = hyperparams_to_json(p.hp);
  header["vocabulary"] = p.vocab.tokens();
  header["stopword_hash"] = p.stopword_hash;
  header["idf"] = idf_to_json(p.idf);

  TensorDirectory dir;
  params_tensors(p, dir);
  if (ckpt.optimizer.has_value()) {
    nlohmann::json opt;
    opt["rho"] = ckpt.optimizer->rho;
    opt["epsilon"] = ckpt.optimizer->epsilon;
    header["optimizer"] = std::move(opt);
    for (const auto& [name, block] : ckpt.optimizer->blocks) {
      dir.add("opt.Eg2." + name, block.grad_sq);
      dir.add("opt.Edx2." + name, block.update_sq);
    }
  } else {
    header["optimizer"] = nullptr;
  }
  header["history"] =
      ckpt.history.has_value() ? history_to_json(*ckpt.history) : nullptr;
  header["tensors"] = dir.directory_json();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write checkpoint file: " + path);
  const std::vector<double> payload = dir.payload();
  write_container(out, kCheckpointMagic, 1, header, payload);
  if (!out) throw FormatError("failed writing checkpoint file: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  const Container c = read_container_file(path, kCheckpointMagic, 1);
  Checkpoint ckpt;
  try {
    const HyperParams hp =
        hyperparams_from_json(c.header.at("hyperparameters"));
    const Vocabulary vocab = Vocabulary::from_tokens(
        c.header.at("vocabulary").get<std::vector<std::string>>());
    ckpt.params = allocate_params(hp, vocab);
    ckpt.params.stopword_hash =
        c.header.at("stopword_hash").get<std::uint64_t>();
    ckpt.params.idf = idf_from_json(c.header.at("idf"));

    const TensorReader reader(c.header.at("tensors"), c.payload, path);
    ModelParams& p = ckpt.params;
    reader.read_matrix("word_emb", p.word_emb.vectors);
    reader.read_matrix("overlap_emb", p.overlap_emb.rows);
    reader.read_matrix("conv_q.weights", p.conv_q.weights);
    reader.read_vector("conv_q.bias", p.conv_q.bias);
    reader.read_matrix("conv_a.weights", p.conv_a.weights);
    reader.read_vector("conv_a.bias", p.conv_a.bias);
    reader.read_matrix("sim", p.sim);
    reader.read_matrix("hidden_w", p.hidden_w);
    reader.read_vector("hidden_b", p.hidden_b);
    reader.read_matrix("out_w", p.out_w);
    reader.read_vector("out_b", p.out_b);
    // Word vectors in a checkpoint are no longer raw random rows.
    p.word_emb.pretrained.assign(p.word_emb.size(), 1);

    const nlohmann::json& opt = c.header.at("optimizer");
    if (!opt.is_null()) {
      AdadeltaState st;
      st.rho = opt.at("rho").get<double>();
      st.epsilon = opt.at("epsilon").get<double>();
      for (const ParamBlockView& b : trainable_blocks(p)) {
        AdadeltaBlockState& block = st.blocks[b.name];
        block.grad_sq.assign(b.values.size(), 0.0);
        block.update_sq.assign(b.values.size(), 0.0);
        reader.read_vector("opt.Eg2." + b.name, block.grad_sq);
        reader.read_vector("opt.Edx2." + b.name, block.update_sq);
      }
      ckpt.optimizer = std::move(st);
    }
    const nlohmann::json& hist = c.header.at("history");
    if (!hist.is_null()) ckpt.history = history_from_json(hist);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("checkpoint file " + path +
                      ": malformed header: " + e.what());
  }
  return ckpt;
}

}  // namespace rcnqa
