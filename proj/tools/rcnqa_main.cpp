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

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rcnqa/config.hpp"
#include "rcnqa/data.hpp"
#include "rcnqa/metrics.hpp"
#include "rcnqa/model.hpp"
#include "rcnqa/serialize.hpp"
#include "rcnqa/text.hpp"
#include "rcnqa/trainer.hpp"

namespace fs = std::filesystem;
using namespace rcnqa;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitCheck = 4;

EmbeddingFormat embedding_format_from_string(const std::string& s) {
  if (s == "word2vec-text") return EmbeddingFormat::word2vec_text;
  if (s == "word2vec-binary") return EmbeddingFormat::word2vec_binary;
  throw ConfigError("unknown embeddings format: " + s +
                    " (expected word2vec-text or word2vec-binary)");
}

StopwordList resolve_stopwords(const RunConfig& cfg) {
  if (!cfg.use_stopwords) return StopwordList();
  if (!cfg.stopwords_path.empty()) {
    return StopwordList::from_file(cfg.stopwords_path);
  }
  return StopwordList::builtin();
}

Dataset parse_dataset(const std::string& path, const std::string& format,
                      const TokenizerOptions& opts) {
  if (format == "canonical") return parse_canonical_tsv(path, opts);
  if (format == "wikiqa") return parse_wikiqa_tsv(path, opts);
  throw ConfigError("unknown dataset format: " + format +
                    " (expected canonical or wikiqa)");
}

void print_stats(const std::string& tag, const Dataset& ds) {
  const DatasetStats st = dataset_stats(ds);
  std::cout << tag << ": questions=" << st.questions << " pairs=" << st.pairs
            << " positives=" << st.positives;
  if (st.positive_fraction.has_value()) {
    std::cout << " positive_fraction=" << format_fixed4(*st.positive_fraction);
  }
  std::cout << '\n';
}

int cmd_preprocess(RunConfig& cfg, const std::string& format,
                   const std::string& ingest_filter, bool word_dim_explicit) {
  const TokenizerOptions opts = tokenizer_options_of(cfg);
  const StopwordList stopwords = resolve_stopwords(cfg);
  const FilterPolicy policy = filter_policy_from_string(ingest_filter);

  struct SplitSpec {
    const char* tag;
    std::string path;
  };
  const std::vector<SplitSpec> splits = {
      {"train", cfg.train_data}, {"dev", cfg.dev_data}, {"test", cfg.test_data}};
  if (cfg.train_data.empty()) {
    throw ConfigError("preprocess requires --train");
  }

  fs::create_directories(cfg.output_dir);
  Vocabulary vocab;
  IdfTable idf;
  bool lexicon_ready = false;

  for (const SplitSpec& spec : splits) {
    if (spec.path.empty()) continue;
    Dataset ds = parse_dataset(spec.path, format, opts);
    ds.split = spec.tag;
    if (policy != FilterPolicy::none) {
      FilterReport report;
      ds = filter_dataset(ds, policy, &report);
      for (const auto& r : report.removed) {
        std::cout << "removed question " << r.question_id << " (" << r.reason
                  << ")\n";
      }
    }
    annotate_dataset(ds, stopwords);
    if (std::string(spec.tag) == "train") {
      vocab = build_vocab(ds);
      idf = build_idf(ds);
      lexicon_ready = true;
    }
    if (!lexicon_ready) {
      throw ConfigError("internal ordering error: train split must come first");
    }
    index_dataset(ds, vocab);
    compute_features(ds, idf);
    print_stats(spec.tag, ds);
    const std::string out =
        (fs::path(cfg.output_dir) / (std::string(spec.tag) + ".rcd")).string();
    save_preprocessed(ds, out);
    std::cout << "wrote " << out << '\n';
  }

  Lexicon lex;
  lex.vocab = vocab;
  lex.idf = idf;
  lex.stopword_hash = stopwords.hash();
  if (!cfg.embeddings_path.empty()) {
    const EmbeddingLoadResult loaded = load_word_embeddings(
        cfg.embeddings_path, embedding_format_from_string(cfg.embeddings_format),
        vocab);
    if (word_dim_explicit && loaded.table.dim() != cfg.word_dim) {
      throw ConfigError(
          "word_dim " + std::to_string(cfg.word_dim) +
          " conflicts with embedding file dimension " +
          std::to_string(loaded.table.dim()) + "; drop --word-dim or fix it");
    }
    lex.embeddings = loaded.table;
    lex.coverage = loaded.coverage;
  } else {
    lex.embeddings = make_embedding_table(vocab.size(), cfg.word_dim);
    lex.coverage = 0.0;
  }
  std::cout << "vocabulary size: " << vocab.size() << '\n';
  std::cout << "embedding coverage: " << format_fixed4(lex.coverage) << '\n';
  const std::string lex_path =
      (fs::path(cfg.output_dir) / "lexicon.rcl").string();
  save_lexicon(lex, lex_path);
  std::cout << "wrote " << lex_path << '\n';
  return 0;
}

int cmd_train(RunConfig& cfg, const std::string& lexicon_path) {
  if (cfg.train_data.empty() || cfg.dev_data.empty()) {
    throw ConfigError("train requires --train and --dev");
  }
  const Lexicon lex = load_lexicon(lexicon_path);
  Dataset train_ds = load_preprocessed(cfg.train_data);
  Dataset dev_ds = load_preprocessed(cfg.dev_data);
  if (train_ds.stopword_hash != dev_ds.stopword_hash) {
    throw Error("train and dev sets were annotated with different stopword lists");
  }

  HyperParams hp = hyperparams_of(cfg);
  hp.word_dim = lex.embeddings.dim();  // the lexicon is authoritative
  hp.validate();
  cfg.word_dim = hp.word_dim;

  index_dataset(train_ds, lex.vocab);
  index_dataset(dev_ds, lex.vocab);
  if (hp.uses_features()) {
    compute_features(train_ds, lex.idf);
    compute_features(dev_ds, lex.idf);
  }

  ModelParams params = init_params(hp, lex.vocab, cfg.seed);
  params.word_emb = lex.embeddings;
  init_oov(params.word_emb, cfg.oov_range, cfg.seed);
  params.stopword_hash = train_ds.stopword_hash;
  params.idf = lex.idf;

  const TrainConfig tc = train_config_of(cfg);
  TrainResult result = train(train_ds, dev_ds, std::move(params), tc);

  fs::create_directories(cfg.output_dir);
  const std::string ckpt_path =
      (fs::path(cfg.output_dir) / "model.rcp").string();
  save_checkpoint(
      {result.best_params, result.best_optimizer, result.history}, ckpt_path);
  const std::string log_path =
      (fs::path(cfg.output_dir) / "train.log").string();
  {
    std::ofstream log(log_path, std::ios::binary);
    if (!log) throw Error("cannot write training log: " + log_path);
    write_training_log(result.history, log);
  }
  const std::string cfg_path =
      (fs::path(cfg.output_dir) / "effective.cfg").string();
  {
    std::ofstream out(cfg_path, std::ios::binary);
    if (!out) throw Error("cannot write config: " + cfg_path);
    save_run_config(cfg, out);
  }

  const RankedRun run = score_dataset(dev_ds, result.best_params, cfg.run_name);
  const Metrics m =
      evaluate(run, qrels_from_dataset(dev_ds), FilterPolicy::uniform);
  std::cout << "best dev MAP: " << format_fixed4(m.map) << '\n';
  std::cout << "best dev MRR: " << format_fixed4(m.mrr) << '\n';
  std::cout << "stop reason: " << result.history.stop_reason << '\n';
  std::cout << "wrote " << ckpt_path << '\n';
  std::cout << "wrote " << log_path << '\n';
  std::cout << "wrote " << cfg_path << '\n';
  return 0;
}

int cmd_evaluate(RunConfig& cfg, const std::string& ckpt_path,
                 const std::string& data_path, const std::string& run_file,
                 const std::string& qrels_file,
                 const std::string& lexicon_path) {
  const Checkpoint ckpt = load_checkpoint(ckpt_path);
  Dataset ds = load_preprocessed(data_path);
  if (ds.stopword_hash != ckpt.params.stopword_hash) {
    throw Error(
        "dataset and checkpoint were built with different stopword lists");
  }
  if (!lexicon_path.empty()) {
    const Lexicon lex = load_lexicon(lexicon_path);
    if (lex.vocab.hash() != ckpt.params.vocab.hash()) {
      throw Error("lexicon vocabulary does not match the checkpoint");
    }
  }
  index_dataset(ds, ckpt.params.vocab);
  if (ckpt.params.hp.uses_features()) {
    compute_features(ds, ckpt.params.idf);
  }

  const FilterPolicy policy = filter_policy_from_string(cfg.filter_policy);
  const RankedRun run = score_dataset(ds, ckpt.params, cfg.run_name);
  const Qrels qrels = qrels_from_dataset(ds);
  FilterReport report;
  const Metrics m = evaluate(run, qrels, policy, &report);

  for (const auto& r : report.removed) {
    std::cout << "removed question " << r.question_id << " (" << r.reason
              << ")\n";
  }
  std::cout << "questions evaluated: " << m.question_count << '\n';
  std::cout << "MAP: " << format_fixed4(m.map) << '\n';
  std::cout << "MRR: " << format_fixed4(m.mrr) << '\n';
  std::cout << "P@1: " << format_fixed4(m.p_at_1) << '\n';
  if (!run_file.empty()) {
    write_trec_run(run, run_file);
    std::cout << "wrote " << run_file << '\n';
  }
  if (!qrels_file.empty()) {
    write_qrels(qrels, qrels_file);
    std::cout << "wrote " << qrels_file << '\n';
  }
  return 0;
}

int cmd_rerank(RunConfig& cfg, const std::string& ckpt_path,
               const std::string& input_path) {
  const Checkpoint ckpt = load_checkpoint(ckpt_path);
  const StopwordList stopwords = resolve_stopwords(cfg);
  if (stopwords.hash() != ckpt.params.stopword_hash) {
    throw Error(
        "stopword list does not match the one the model was trained with; "
        "pass the original list via --stopwords");
  }
  const TokenizerOptions opts = tokenizer_options_of(cfg);

  std::vector<std::string> lines;
  {
    std::istream* in = &std::cin;
    std::ifstream file;
    if (!input_path.empty()) {
      file.open(input_path);
      if (!file) throw ParseError("cannot open input file: " + input_path);
      in = &file;
    }
    std::string line;
    while (std::getline(*in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) lines.push_back(line);
    }
  }
  if (lines.size() < 2) {
    throw Error("rerank input needs a question line and at least one candidate");
  }

  const std::vector<std::string> q_tokens = tokenize_normalize(lines[0], opts);
  if (q_tokens.empty()) throw Error("question is empty after normalization");

  struct Ranked {
    double score;
    std::size_t index;
  };
  std::vector<Ranked> ranked;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::vector<std::string> a_tokens =
        tokenize_normalize(lines[i], opts);
    if (a_tokens.empty()) {
      throw Error("candidate " + std::to_string(i) +
                  " is empty after normalization");
    }
    AnnotatedSentence q = make_annotated(q_tokens, ckpt.params.vocab);
    AnnotatedSentence a = make_annotated(a_tokens, ckpt.params.vocab);
    annotate_overlap(q, a, stopwords);
    std::optional<std::vector<double>> feat;
    if (ckpt.params.hp.uses_features()) {
      const auto f = overlap_count_features(q, a, ckpt.params.idf);
      feat = std::vector<double>(f.begin(), f.end());
    }
    ranked.push_back({score(q, a, ckpt.params, feat), i});
  }
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const Ranked& a, const Ranked& b) {
                     if (a.score != b.score) return a.score > b.score;
                     return a.index < b.index;
                   });
  for (const Ranked& r : ranked) {
    std::cout << format_double(r.score) << '\t' << lines[r.index] << '\n';
  }
  return 0;
}

// Small deterministic corpus with planted question/answer overlap so every
// gradient path, including the overlap rows, carries signal.
std::vector<LabeledPair> gradcheck_pairs(const HyperParams& hp,
                                         const Vocabulary& vocab,
                                         std::uint64_t seed) {
  const std::vector<std::string> pool = vocab.tokens();
  Rng rng(seed);
  StopwordList stopwords = StopwordList::from_tokens({pool[1]});
  std::vector<LabeledPair> pairs;
  for (int k = 0; k < 3; ++k) {
    const std::size_t qlen = 4 + rng.index(6);  // lengths 4..9
    const std::size_t alen = 4 + rng.index(6);
    std::vector<std::string> q_tokens, a_tokens;
    for (std::size_t i = 0; i < qlen; ++i) {
      q_tokens.push_back(pool[1 + rng.index(pool.size() - 1)]);
    }
    for (std::size_t i = 0; i < alen; ++i) {
      a_tokens.push_back(pool[1 + rng.index(pool.size() - 1)]);
    }
    // guaranteed flagged overlap: shared token, never the stopword pool[1]
    q_tokens[0] = pool[2 + rng.index(pool.size() - 2)];
    a_tokens[0] = q_tokens[0];
    LabeledPair p;
    p.question = make_annotated(q_tokens, vocab);
    p.answer = make_annotated(a_tokens, vocab);
    annotate_overlap(p.question, p.answer, stopwords);
    p.label = k % 2;
    if (hp.uses_features()) {
      std::vector<double> f(hp.feature_count);
      for (double& v : f) v = rng.uniform(0.0, 2.0);
      p.features = std::move(f);
    }
    pairs.push_back(std::move(p));
  }
  return pairs;
}

int cmd_gradcheck(const std::string& mode, const std::string& conv,
                  std::uint64_t seed, double epsilon, double tolerance) {
  std::vector<std::string> modes;
  if (mode == "all") {
    modes = {"none", "fvec", "emb", "both"};
  } else {
    modes = {mode};
  }
  Vocabulary vocab;
  for (const char* t : {"alpha", "bravo", "charlie", "delta", "echo",
                        "foxtrot", "golf", "hotel"}) {
    vocab.add(t);
  }

  bool all_pass = true;
  for (const std::string& m : modes) {
    HyperParams hp;
    hp.word_dim = 6;
    hp.overlap_dim = 2;
    hp.num_filters = 4;
    hp.filter_width = 3;
    hp.conv_mode = conv_mode_from_string(conv);
    hp.relation = relation_mode_from_string(m);
    hp.feature_count = 4;
    hp.freeze_embeddings = false;  // cover the word matrix path too

    ModelParams params = init_params(hp, vocab, seed);
    const std::vector<LabeledPair> pairs = gradcheck_pairs(hp, vocab, seed);
    const GradCheckReport report =
        check_model_gradients(params, pairs, epsilon, tolerance);

    std::cout << "mode " << m << " (conv " << conv << "):\n";
    for (const auto& b : report.blocks) {
      std::cout << "  " << b.name << " max rel err "
                << format_double(b.max_rel_error) << '\n';
    }
    std::cout << "  overall " << format_double(report.max_rel_error)
              << (report.pass ? " PASS" : " FAIL") << '\n';
    if (!report.note.empty()) std::cout << "  " << report.note << '\n';
    all_pass = all_pass && report.pass;
  }
  return all_pass ? 0 : kExitCheck;
}

std::string preparse_config_path(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--config" && i + 1 < argc) return argv[i + 1];
    if (arg.rfind("--config=", 0) == 0) return arg.substr(9);
  }
  return {};
}

}  // namespace

int main(int argc, char** argv) {
  RunConfig cfg;
  try {
    const std::string config_path = preparse_config_path(argc, argv);
    if (!config_path.empty()) cfg = load_run_config(config_path);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  CLI::App app{"Question/answer sentence reranker"};
  app.require_subcommand(1);
  std::string config_dummy;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_dummy,
                    "config file applied before any flags");
    sub->add_option("--out-dir", cfg.output_dir, "output directory");
    sub->add_option("--run-name", cfg.run_name, "name stamped into run files");
  };

  // preprocess
  auto* pre = app.add_subcommand("preprocess",
                                 "parse raw TSV data into binary containers");
  std::string pre_format = "canonical";
  std::string pre_filter = "none";
  bool no_stopwords = false;
  add_common(pre);
  pre->add_option("--train", cfg.train_data, "training TSV")->required();
  pre->add_option("--dev", cfg.dev_data, "dev TSV");
  pre->add_option("--test", cfg.test_data, "test TSV");
  pre->add_option("--format", pre_format, "canonical or wikiqa");
  pre->add_option("--filter", pre_filter,
                  "drop questions at ingestion: none, no-positive, "
                  "all-positive-or-all-negative");
  pre->add_option("--embeddings", cfg.embeddings_path, "word2vec file");
  pre->add_option("--embeddings-format", cfg.embeddings_format,
                  "word2vec-text or word2vec-binary");
  pre->add_option("--word-dim", cfg.word_dim,
                  "embedding width when no file is given");
  pre->add_option("--stopwords", cfg.stopwords_path, "stopword file");
  pre->add_flag("--no-stopwords", no_stopwords,
                "disable stopword exclusion in overlap flags");
  pre->add_flag("--collapse-digits", cfg.collapse_digits,
                "collapse digit runs to one 0");

  // train
  auto* tr = app.add_subcommand("train", "train a model on preprocessed data");
  std::string lexicon_path;
  add_common(tr);
  tr->add_option("--train", cfg.train_data, "preprocessed training set");
  tr->add_option("--dev", cfg.dev_data, "preprocessed dev set");
  tr->add_option("--lexicon", lexicon_path, "lexicon container")->required();
  tr->add_option("--mode", cfg.relation,
                 "relational information: none, fvec, emb, both");
  tr->add_option("--conv-mode", cfg.conv_mode, "wide or narrow");
  tr->add_option("--overlap-dim", cfg.overlap_dim, "overlap embedding width");
  tr->add_option("--filters", cfg.num_filters, "convolution feature maps");
  tr->add_option("--filter-width", cfg.filter_width, "convolution width");
  tr->add_option("--batch-size", cfg.batch_size, "examples per batch");
  tr->add_option("--epochs", cfg.max_epochs, "maximum epochs");
  tr->add_option("--patience", cfg.patience,
                 "epochs without dev improvement before stopping");
  tr->add_option("--eval-interval", cfg.eval_interval,
                 "batches between dev evaluations");
  tr->add_option("--seed", cfg.seed, "random seed");
  tr->add_option("--rho", cfg.rho, "adadelta decay");
  tr->add_option("--adadelta-epsilon", cfg.adadelta_epsilon,
                 "adadelta epsilon");
  tr->add_option("--oov-range", cfg.oov_range,
                 "uniform init half-width for unseen words");
  tr->add_option("--freeze-embeddings", cfg.freeze_embeddings,
                 "keep word vectors fixed (true/false)");

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "score a test set and report metrics");
  std::string ev_ckpt, ev_data, ev_run_file, ev_qrels_file, ev_lexicon;
  add_common(ev);
  ev->add_option("--checkpoint", ev_ckpt, "model checkpoint")->required();
  ev->add_option("--data", ev_data, "preprocessed dataset")->required();
  ev->add_option("--filter", cfg.filter_policy,
                 "question filtering: all-positive-or-all-negative, "
                 "no-positive, none");
  ev->add_option("--run-file", ev_run_file, "write rankings in trec format");
  ev->add_option("--qrels-file", ev_qrels_file, "write judgements in trec format");
  ev->add_option("--lexicon", ev_lexicon,
                 "cross-check the vocabulary against this lexicon");

  // rerank
  auto* rr = app.add_subcommand(
      "rerank", "rank candidate lines against a question line");
  std::string rr_ckpt, rr_input;
  add_common(rr);
  rr->add_option("--checkpoint", rr_ckpt, "model checkpoint")->required();
  rr->add_option("--input", rr_input,
                 "input file (first line question); default standard input");
  rr->add_option("--stopwords", cfg.stopwords_path, "stopword file");
  rr->add_flag("--no-stopwords", no_stopwords,
               "disable stopword exclusion in overlap flags");
  rr->add_flag("--collapse-digits", cfg.collapse_digits,
               "collapse digit runs to one 0");

  // gradcheck
  auto* gc = app.add_subcommand(
      "gradcheck", "finite-difference check of all analytic gradients");
  std::string gc_mode = "all";
  std::string gc_conv = "wide";
  std::uint64_t gc_seed = 7;
  double gc_epsilon = 1e-5;
  double gc_tolerance = 1e-4;
  gc->add_option("--mode", gc_mode, "none, fvec, emb, both, or all");
  gc->add_option("--conv-mode", gc_conv, "wide or narrow");
  gc->add_option("--seed", gc_seed, "random seed");
  gc->add_option("--epsilon", gc_epsilon, "finite-difference step");
  gc->add_option("--tolerance", gc_tolerance, "max relative error allowed");

  try {
    app.parse(argc, argv);
    if (no_stopwords) cfg.use_stopwords = false;
    if (pre->parsed()) {
      return cmd_preprocess(cfg, pre_format, pre_filter,
                            pre->count("--word-dim") > 0);
    }
    if (tr->parsed()) return cmd_train(cfg, lexicon_path);
    if (ev->parsed()) {
      return cmd_evaluate(cfg, ev_ckpt, ev_data, ev_run_file, ev_qrels_file,
                          ev_lexicon);
    }
    if (rr->parsed()) return cmd_rerank(cfg, rr_ckpt, rr_input);
    if (gc->parsed()) {
      return cmd_gradcheck(gc_mode, gc_conv, gc_seed, gc_epsilon, gc_tolerance);
    }
    std::cerr << "error: no subcommand\n";
    return kExitUsage;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
}
