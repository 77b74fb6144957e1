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

#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "rcnqa/config.hpp"
#include "support/fixtures.hpp"

using namespace rcnqa;
using rcnqa::testing::temp_path;
using rcnqa::testing::write_temp_file;

TEST_CASE("config files parse key = value lines with comments") {
  const std::string path = write_temp_file("run.cfg",
                                           "# reranker run\n"
                                           "config_version = 1\n"
                                           "\n"
                                           "word_dim=25\n"
                                           "  relation =  both  \n"
                                           "freeze_embeddings = false\n"
                                           "rho = 0.9\n"
                                           "run_name = exp1\n"
                                           "collapse_digits = true\n");
  const RunConfig cfg = load_run_config(path);
  CHECK(cfg.word_dim == 25);
  CHECK(cfg.relation == "both");
  CHECK_FALSE(cfg.freeze_embeddings);
  CHECK(cfg.rho == 0.9);
  CHECK(cfg.run_name == "exp1");
  CHECK(cfg.collapse_digits);
  // untouched keys keep their defaults
  CHECK(cfg.num_filters == 100);
  CHECK(cfg.filter_policy == "all-positive-or-all-negative");
  CHECK(cfg.use_stopwords);
}

TEST_CASE("config files require a version stamp") {
  const std::string missing = write_temp_file("nv.cfg", "word_dim = 10\n");
  CHECK_THROWS_WITH_AS(load_run_config(missing),
                       doctest::Contains("missing required key config_version"),
                       ConfigError);
  const std::string wrong =
      write_temp_file("wv.cfg", "config_version = 2\nword_dim = 10\n");
  CHECK_THROWS_WITH_AS(load_run_config(wrong),
                       doctest::Contains("unsupported config_version"),
                       ConfigError);
}

TEST_CASE("config errors name the offending line") {
  const std::string unknown = write_temp_file(
      "uk.cfg", "config_version = 1\nword_dims = 10\n");
  CHECK_THROWS_WITH_AS(load_run_config(unknown),
                       doctest::Contains("line 2: unknown config key"),
                       ConfigError);
  const std::string noeq =
      write_temp_file("ne.cfg", "config_version = 1\njust words\n");
  CHECK_THROWS_WITH_AS(load_run_config(noeq),
                       doctest::Contains("expected 'key = value'"),
                       ConfigError);
  const std::string badint =
      write_temp_file("bi.cfg", "config_version = 1\nword_dim = ten\n");
  CHECK_THROWS_WITH_AS(load_run_config(badint),
                       doctest::Contains("expected an integer"), ConfigError);
  const std::string badreal =
      write_temp_file("br.cfg", "config_version = 1\nrho = high\n");
  CHECK_THROWS_WITH_AS(load_run_config(badreal),
                       doctest::Contains("expected a number"), ConfigError);
  const std::string badbool =
      write_temp_file("bb.cfg", "config_version = 1\nuse_stopwords = yes\n");
  CHECK_THROWS_WITH_AS(load_run_config(badbool),
                       doctest::Contains("expected true or false"),
                       ConfigError);
  CHECK_THROWS_WITH_AS(load_run_config("/nonexistent/run.cfg"),
                       doctest::Contains("cannot open"), ConfigError);
}

TEST_CASE("saved configs reload to the identical run") {
  RunConfig cfg;
  cfg.word_dim = 32;
  cfg.overlap_dim = 3;
  cfg.conv_mode = "narrow";
  cfg.relation = "fvec";
  cfg.freeze_embeddings = false;
  cfg.batch_size = 17;
  cfg.seed = 99;
  cfg.rho = 0.875;
  cfg.adadelta_epsilon = 1e-7;
  cfg.oov_range = 0.125;
  cfg.train_data = "/data/train.tsv";
  cfg.embeddings_format = "word2vec-binary";
  cfg.stopwords_path = "/data/stop.txt";
  cfg.use_stopwords = false;
  cfg.collapse_digits = true;
  cfg.filter_policy = "none";
  cfg.output_dir = "/out";
  cfg.run_name = "trial 7";

  const std::string path = temp_path("saved.cfg");
  {
    std::ofstream out(path);
    save_run_config(cfg, out);
  }
  const RunConfig back = load_run_config(path);
  CHECK(back.word_dim == cfg.word_dim);
  CHECK(back.overlap_dim == cfg.overlap_dim);
  CHECK(back.conv_mode == cfg.conv_mode);
  CHECK(back.relation == cfg.relation);
  CHECK(back.freeze_embeddings == cfg.freeze_embeddings);
  CHECK(back.batch_size == cfg.batch_size);
  CHECK(back.max_epochs == cfg.max_epochs);
  CHECK(back.patience == cfg.patience);
  CHECK(back.eval_interval == cfg.eval_interval);
  CHECK(back.seed == cfg.seed);
  CHECK(back.rho == cfg.rho);
  CHECK(back.adadelta_epsilon == cfg.adadelta_epsilon);
  CHECK(back.oov_range == cfg.oov_range);
  CHECK(back.train_data == cfg.train_data);
  CHECK(back.dev_data == cfg.dev_data);
  CHECK(back.test_data == cfg.test_data);
  CHECK(back.embeddings_path == cfg.embeddings_path);
  CHECK(back.embeddings_format == cfg.embeddings_format);
  CHECK(back.stopwords_path == cfg.stopwords_path);
  CHECK(back.use_stopwords == cfg.use_stopwords);
  CHECK(back.collapse_digits == cfg.collapse_digits);
  CHECK(back.filter_policy == cfg.filter_policy);
  CHECK(back.output_dir == cfg.output_dir);
  CHECK(back.run_name == cfg.run_name);
}

TEST_CASE("run configuration maps onto the model and trainer structs") {
  RunConfig cfg;
  cfg.word_dim = 24;
  cfg.overlap_dim = 2;
  cfg.num_filters = 8;
  cfg.filter_width = 3;
  cfg.conv_mode = "narrow";
  cfg.relation = "both";
  cfg.freeze_embeddings = false;
  cfg.batch_size = 5;
  cfg.max_epochs = 2;
  cfg.patience = 1;
  cfg.eval_interval = 4;
  cfg.seed = 42;
  cfg.rho = 0.8;
  cfg.adadelta_epsilon = 1e-5;
  cfg.collapse_digits = true;

  const HyperParams hp = hyperparams_of(cfg);
  CHECK(hp.word_dim == 24);
  CHECK(hp.overlap_dim == 2);
  CHECK(hp.num_filters == 8);
  CHECK(hp.filter_width == 3);
  CHECK(hp.conv_mode == ConvMode::narrow);
  CHECK(hp.relation == RelationMode::both);
  CHECK_FALSE(hp.freeze_embeddings);
  CHECK(hp.feature_count == 4);

  const TrainConfig tc = train_config_of(cfg);
  CHECK(tc.batch_size == 5);
  CHECK(tc.max_epochs == 2);
  CHECK(tc.patience == 1);
  CHECK(tc.eval_interval == 4);
  CHECK(tc.seed == 42);
  CHECK(tc.rho == 0.8);
  CHECK(tc.epsilon == 1e-5);

  const TokenizerOptions topt = tokenizer_options_of(cfg);
  CHECK(topt.collapse_digits);

  RunConfig bad = cfg;
  bad.relation = "sideways";
  CHECK_THROWS_AS(hyperparams_of(bad), ConfigError);
  bad = cfg;
  bad.conv_mode = "diagonal";
  CHECK_THROWS_AS(hyperparams_of(bad), ConfigError);
}
