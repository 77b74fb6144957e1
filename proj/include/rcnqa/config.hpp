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

#ifndef RCNQA_CONFIG_HPP
#define RCNQA_CONFIG_HPP

#include <cstdint>
#include <iosfwd>
#include <string>

#include "rcnqa/model.hpp"
#include "rcnqa/text.hpp"
#include "rcnqa/trainer.hpp"

namespace rcnqa {

// Everything a run needs, expressible as one flat config file. Command-line
// flags override individual keys.
struct RunConfig {
  // model shape
  std::size_t word_dim = 50;
  std::size_t overlap_dim = 5;
  std::size_t num_filters = 100;
  std::size_t filter_width = 5;
  std::string conv_mode = "wide";
  std::string relation = "emb";
  bool freeze_embeddings = true;

  // training
  std::size_t batch_size = 50;
  std::size_t max_epochs = 25;
  std::size_t patience = 5;
  std::size_t eval_interval = 10;
  std::uint64_t seed = 1;
  double rho = 0.95;
  double adadelta_epsilon = 1e-6;
  double oov_range = 0.25;

  // data and text handling
  std::string train_data;
  std::string dev_data;
  std::string test_data;
  std::string embeddings_path;
  std::string embeddings_format = "word2vec-text";
  std::string stopwords_path;  // empty -> compiled-in list
  bool use_stopwords = true;   // false -> empty list (flags every overlap)
  bool collapse_digits = false;
  std::string filter_policy = "all-positive-or-all-negative";
  std::string output_dir = ".";
  std::string run_name = "rcnqa";
};

// Flat "key = value" file; '#' comments; every key must be known; a
// config_version key equal to 1 is required.
RunConfig load_run_config(const std::string& path);

// Writes every key so the file alone reproduces the run.
void save_run_config(const RunConfig& cfg, std::ostream& out);

HyperParams hyperparams_of(const RunConfig& cfg);
TrainConfig train_config_of(const RunConfig& cfg);
TokenizerOptions tokenizer_options_of(const RunConfig& cfg);

}  // namespace rcnqa

#endif  // RCNQA_CONFIG_HPP
