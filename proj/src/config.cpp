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

#include "rcnqa/config.hpp"

#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>

namespace rcnqa {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  return s.substr(b, e - b);
}

std::size_t parse_size(const std::string& v, const std::string& key) {
  char* end = nullptr;
  const unsigned long long n = std::strtoull(v.c_str(), &end, 10);
  if (end == v.c_str() || *end != '\0') {
    throw ConfigError("config key '" + key + "': expected an integer, got '" +
                      v + "'");
  }
  return static_cast<std::size_t>(n);
}

double parse_real(const std::string& v, const std::string& key) {
  char* end = nullptr;
  const double d = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0') {
    throw ConfigError("config key '" + key + "': expected a number, got '" +
                      v + "'");
  }
  return d;
}

bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("config key '" + key + "': expected true or false, got '" +
                    v + "'");
}

using Setter = std::function<void(RunConfig&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"word_dim",
       [](RunConfig& c, const std::string& v) {
         c.word_dim = parse_size(v, "word_dim");
       }},
      {"overlap_dim",
       [](RunConfig& c, const std::string& v) {
         c.overlap_dim = parse_size(v, "overlap_dim");
       }},
      {"num_filters",
       [](RunConfig& c, const std::string& v) {
         c.num_filters = parse_size(v, "num_filters");
       }},
      {"filter_width",
       [](RunConfig& c, const std::string& v) {
         c.filter_width = parse_size(v, "filter_width");
       }},
      {"conv_mode",
       [](RunConfig& c, const std::string& v) { c.conv_mode = v; }},
      {"relation", [](RunConfig& c, const std::string& v) { c.relation = v; }},
      {"freeze_embeddings",
       [](RunConfig& c, const std::string& v) {
         c.freeze_embeddings = parse_bool(v, "freeze_embeddings");
       }},
      {"batch_size",
       [](RunConfig& c, const std::string& v) {
         c.batch_size = parse_size(v, "batch_size");
       }},
      {"max_epochs",
       [](RunConfig& c, const std::string& v) {
         c.max_epochs = parse_size(v, "max_epochs");
       }},
      {"patience",
       [](RunConfig& c, const std::string& v) {
         c.patience = parse_size(v, "patience");
       }},
      {"eval_interval",
       [](RunConfig& c, const std::string& v) {
         c.eval_interval = parse_size(v, "eval_interval");
       }},
      {"seed",
       [](RunConfig& c, const std::string& v) {
         c.seed = static_cast<std::uint64_t>(parse_size(v, "seed"));
       }},
      {"rho",
       [](RunConfig& c, const std::string& v) { c.rho = parse_real(v, "rho"); }},
      {"adadelta_epsilon",
       [](RunConfig& c, const std::string& v) {
         c.adadelta_epsilon = parse_real(v, "adadelta_epsilon");
       }},
      {"oov_range",
       [](RunConfig& c, const std::string& v) {
         c.oov_range = parse_real(v, "oov_range");
       }},
      {"train_data",
       [](RunConfig& c, const std::string& v) { c.train_data = v; }},
      {"dev_data", [](RunConfig& c, const std::string& v) { c.dev_data = v; }},
      {"test_data",
       [](RunConfig& c, const std::string& v) { c.test_data = v; }},
      {"embeddings_path",
       [](RunConfig& c, const std::string& v) { c.embeddings_path = v; }},
      {"embeddings_format",
       [](RunConfig& c, const std::string& v) { c.embeddings_format = v; }},
      {"stopwords_path",
       [](RunConfig& c, const std::string& v) { c.stopwords_path = v; }},
      {"use_stopwords",
       [](RunConfig& c, const std::string& v) {
         c.use_stopwords = parse_bool(v, "use_stopwords");
       }},
      {"collapse_digits",
       [](RunConfig& c, const std::string& v) {
         c.collapse_digits = parse_bool(v, "collapse_digits");
       }},
      {"filter_policy",
       [](RunConfig& c, const std::string& v) { c.filter_policy = v; }},
      {"output_dir",
       [](RunConfig& c, const std::string& v) { c.output_dir = v; }},
      {"run_name", [](RunConfig& c, const std::string& v) { c.run_name = v; }},
  };
  return table;
}

}  // namespace

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  RunConfig cfg;
  bool version_seen = false;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const std::size_t eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path + " line " + std::to_string(line_no) +
                        ": expected 'key = value'");
    }
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key == "config_version") {
      if (value != "1") {
        throw ConfigError(path + " line " + std::to_string(line_no) +
                          ": unsupported config_version '" + value + "'");
      }
      version_seen = true;
      continue;
    }
    auto it = setters().find(key);
    if (it == setters().end()) {
      throw ConfigError(path + " line " + std::to_string(line_no) +
                        ": unknown config key '" + key + "'");
    }
    it->second(cfg, value);
  }
  if (!version_seen) {
    throw ConfigError(path + ": missing required key config_version");
  }
  return cfg;
}

void save_run_config(const RunConfig& cfg, std::ostream& out) {
  out << "config_version = 1\n";
  out << "word_dim = " << cfg.word_dim << '\n';
  out << "overlap_dim = " << cfg.overlap_dim << '\n';
  out << "num_filters = " << cfg.num_filters << '\n';
  out << "filter_width = " << cfg.filter_width << '\n';
  out << "conv_mode = " << cfg.conv_mode << '\n';
  out << "relation = " << cfg.relation << '\n';
  out << "freeze_embeddings = " << (cfg.freeze_embeddings ? "true" : "false")
      << '\n';
  out << "batch_size = " << cfg.batch_size << '\n';
  out << "max_epochs = " << cfg.max_epochs << '\n';
  out << "patience = " << cfg.patience << '\n';
  out << "eval_interval = " << cfg.eval_interval << '\n';
  out << "seed = " << cfg.seed << '\n';
  out << "rho = " << format_double(cfg.rho) << '\n';
  out << "adadelta_epsilon = " << format_double(cfg.adadelta_epsilon) << '\n';
  out << "oov_range = " << format_double(cfg.oov_range) << '\n';
  out << "train_data = " << cfg.train_data << '\n';
  out << "dev_data = " << cfg.dev_data << '\n';
  out << "test_data = " << cfg.test_data << '\n';
  out << "embeddings_path = " << cfg.embeddings_path << '\n';
  out << "embeddings_format = " << cfg.embeddings_format << '\n';
  out << "stopwords_path = " << cfg.stopwords_path << '\n';
  out << "use_stopwords = " << (cfg.use_stopwords ? "true" : "false") << '\n';
  out << "collapse_digits = " << (cfg.collapse_digits ? "true" : "false")
      << '\n';
  out << "filter_policy = " << cfg.filter_policy << '\n';
  out << "output_dir = " << cfg.output_dir << '\n';
  out << "run_name = " << cfg.run_name << '\n';
}

HyperParams hyperparams_of(const RunConfig& cfg) {
  HyperParams hp;
  hp.word_dim = cfg.word_dim;
  hp.overlap_dim = cfg.overlap_dim;
  hp.num_filters = cfg.num_filters;
  hp.filter_width = cfg.filter_width;
  hp.conv_mode = conv_mode_from_string(cfg.conv_mode);
  hp.relation = relation_mode_from_string(cfg.relation);
  hp.freeze_embeddings = cfg.freeze_embeddings;
  hp.validate();
  return hp;
}

TrainConfig train_config_of(const RunConfig& cfg) {
  TrainConfig tc;
  tc.batch_size = cfg.batch_size;
  tc.max_epochs = cfg.max_epochs;
  tc.patience = cfg.patience;
  tc.eval_interval = cfg.eval_interval;
  tc.seed = cfg.seed;
  tc.rho = cfg.rho;
  tc.epsilon = cfg.adadelta_epsilon;
  tc.validate();
  return tc;
}

TokenizerOptions tokenizer_options_of(const RunConfig& cfg) {
  TokenizerOptions opts;
  opts.collapse_digits = cfg.collapse_digits;
  return opts;
}

}  // namespace rcnqa
