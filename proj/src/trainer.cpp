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

#include "rcnqa/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace rcnqa {

void TrainConfig::validate() const {
  if (batch_size == 0) throw ConfigError("batch size must be at least 1");
  if (max_epochs == 0) throw ConfigError("max epochs must be at least 1");
  if (patience == 0) throw ConfigError("patience must be at least 1");
  if (eval_interval == 0) throw ConfigError("eval interval must be at least 1");
  if (!(rho > 0.0 && rho < 1.0)) throw ConfigError("rho must lie in (0, 1)");
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
}

AdadeltaState make_adadelta_state(ModelParams& params, double rho,
                                  double epsilon) {
  AdadeltaState st;
  st.rho = rho;
  st.epsilon = epsilon;
  for (const ParamBlockView& b : trainable_blocks(params)) {
    AdadeltaBlockState& block = st.blocks[b.name];
    block.grad_sq.assign(b.values.size(), 0.0);
    block.update_sq.assign(b.values.size(), 0.0);
  }
  return st;
}

void adadelta_update(std::span<double> values, std::span<const double> grad,
                     AdadeltaBlockState& state, double rho, double epsilon,
                     const std::string& block_name) {
  if (values.size() != grad.size() || values.size() != state.grad_sq.size() ||
      values.size() != state.update_sq.size()) {
    throw DimensionError("optimizer state size mismatch for block '" +
                         block_name + "'");
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double g = grad[i];
    if (!std::isfinite(g)) {
      throw Error("non-finite gradient in block '" + block_name +
                  "' at index " + std::to_string(i));
    }
    state.grad_sq[i] = rho * state.grad_sq[i] + (1.0 - rho) * g * g;
    const double dx = -std::sqrt(state.update_sq[i] + epsilon) /
                      std::sqrt(state.grad_sq[i] + epsilon) * g;
    state.update_sq[i] = rho * state.update_sq[i] + (1.0 - rho) * dx * dx;
    values[i] += dx;
  }
}

void apply_gradients(ModelParams& params, const Gradients& grads,
                     AdadeltaState& state) {
  const std::vector<ParamBlockView> pviews = trainable_blocks(params);
  const std::vector<GradBlockView> gviews = gradient_views(grads, params);
  if (pviews.size() != gviews.size()) {
    throw DimensionError("parameter and gradient block lists disagree");
  }
  for (std::size_t i = 0; i < pviews.size(); ++i) {
    auto it = state.blocks.find(pviews[i].name);
    if (it == state.blocks.end()) {
      throw DimensionError("no optimizer state for block '" + pviews[i].name +
                           "'");
    }
    adadelta_update(pviews[i].values, gviews[i].values, it->second, state.rho,
                    state.epsilon, pviews[i].name);
  }
  ++params.revision;
}

RankedRun score_dataset(const Dataset& ds, const ModelParams& params,
                        const std::string& run_name) {
  RankedRun run(run_name);
  const bool with_features = params.hp.uses_features();
  for (const QuestionGroup& g : ds.questions) {
    for (const QAPair& p : g.candidates) {
      std::optional<std::vector<double>> feat;
      if (with_features) feat = p.features;
      run.add(g.id, p.candidate_id, score(p.question, p.answer, params, feat));
    }
  }
  return run;
}

double dev_map(const Dataset& dev, const ModelParams& params) {
  const RankedRun run = score_dataset(dev, params, "dev");
  const Qrels qrels = qrels_from_dataset(dev);
  return evaluate(run, qrels, FilterPolicy::uniform).map;
}

TrainResult train(const Dataset& train_set, const Dataset& dev_set,
                  ModelParams params, const TrainConfig& cfg) {
  cfg.validate();
  const std::vector<LabeledPair> pairs =
      labeled_pairs(train_set, params.hp.uses_features());
  if (pairs.empty()) throw ConfigError("training set has no pairs");
  // Fails fast when the dev set cannot produce a MAP at all.
  {
    const Qrels dev_qrels =
        filter_questions(qrels_from_dataset(dev_set), FilterPolicy::uniform);
    if (dev_qrels.judgements().empty()) {
      throw ConfigError(
          "dev set has no question with both positive and negative "
          "candidates; dev MAP is undefined");
    }
  }

  AdadeltaState opt = make_adadelta_state(params, cfg.rho, cfg.epsilon);

  TrainResult result;
  TrainHistory& hist = result.history;
  bool have_best = false;

  auto run_eval = [&](std::size_t step) {
    const double map_now = dev_map(dev_set, params);
    const bool best = !have_best || map_now > hist.best_dev_map;
    hist.evals.push_back({step, map_now, best});
    if (best) {
      have_best = true;
      hist.best_dev_map = map_now;
      hist.best_step = step;
      result.best_params = params;
      result.best_optimizer = opt;
    }
    return best;
  };

  std::vector<std::size_t> order(pairs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  Rng shuffle_rng(cfg.seed);
  std::size_t step = 0;
  std::size_t stale_epochs = 0;

  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    bool improved_this_epoch = false;

    for (std::size_t begin = 0; begin < order.size();
         begin += cfg.batch_size) {
      const std::size_t end = std::min(begin + cfg.batch_size, order.size());
      std::vector<LabeledPair> batch;
      batch.reserve(end - begin);
      for (std::size_t k = begin; k < end; ++k) batch.push_back(pairs[order[k]]);

      const Gradients grads = batch_gradients(batch, params);
      apply_gradients(params, grads, opt);
      ++step;
      hist.batches.push_back({step, epoch, grads.loss});

      if (step % cfg.eval_interval == 0) {
        if (run_eval(step)) improved_this_epoch = true;
      }
    }

    if (improved_this_epoch) {
      stale_epochs = 0;
    } else {
      ++stale_epochs;
    }
    if (stale_epochs >= cfg.patience) {
      hist.stop_reason = "no dev MAP improvement for " +
                         std::to_string(cfg.patience) + " epochs (stopped at epoch " +
                         std::to_string(epoch) + ")";
      break;
    }
  }
  if (hist.stop_reason.empty()) {
    hist.stop_reason = "reached max epochs (" + std::to_string(cfg.max_epochs) + ")";
  }
  // Guarantee at least one evaluation so a best snapshot always exists.
  if (!have_best) run_eval(step);
  return result;
}

void write_training_log(const TrainHistory& history, std::ostream& out) {
  std::size_t next_eval = 0;
  for (const TrainHistory::BatchRecord& b : history.batches) {
    out << b.step << '\t' << b.epoch << '\t' << format_double(b.loss) << '\n';
    while (next_eval < history.evals.size() &&
           history.evals[next_eval].step <= b.step) {
      const TrainHistory::EvalRecord& e = history.evals[next_eval];
      out << e.step << '\t' << format_double(e.dev_map) << '\t'
          << (e.best ? 1 : 0) << '\n';
      ++next_eval;
    }
  }
  for (; next_eval < history.evals.size(); ++next_eval) {
    const TrainHistory::EvalRecord& e = history.evals[next_eval];
    out << e.step << '\t' << format_double(e.dev_map) << '\t'
        << (e.best ? 1 : 0) << '\n';
  }
}

}  // namespace rcnqa
