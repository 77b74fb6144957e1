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

#ifndef RCNQA_TRAINER_HPP
#define RCNQA_TRAINER_HPP

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "rcnqa/data.hpp"
#include "rcnqa/metrics.hpp"
#include "rcnqa/model.hpp"

namespace rcnqa {

struct TrainConfig {
  std::size_t batch_size = 50;
  std::size_t max_epochs = 25;
  std::size_t patience = 5;      // epochs without a new best dev MAP
  std::size_t eval_interval = 10;  // dev evaluation every this many batches
  std::uint64_t seed = 1;
  double rho = 0.95;
  double epsilon = 1e-6;

  void validate() const;
};

struct AdadeltaBlockState {
  std::vector<double> grad_sq;    // decayed E[g^2]
  std::vector<double> update_sq;  // decayed E[dx^2]
};

struct AdadeltaState {
  std::map<std::string, AdadeltaBlockState> blocks;
  double rho = 0.95;
  double epsilon = 1e-6;
};

AdadeltaState make_adadelta_state(ModelParams& params, double rho,
                                  double epsilon);

// One Adadelta step on a parameter block:
//   E[g^2]  <- rho E[g^2] + (1-rho) g^2
//   dx      <- -sqrt(E[dx^2] + eps) / sqrt(E[g^2] + eps) * g
//   E[dx^2] <- rho E[dx^2] + (1-rho) dx^2
//   values  <- values + dx
// Aborts on a non-finite gradient, naming the block.
void adadelta_update(std::span<double> values, std::span<const double> grad,
                     AdadeltaBlockState& state, double rho, double epsilon,
                     const std::string& block_name);

// Applies one update across every trainable block and bumps the revision.
void apply_gradients(ModelParams& params, const Gradients& grads,
                     AdadeltaState& state);

struct TrainHistory {
  struct BatchRecord {
    std::size_t step = 0;
    std::size_t epoch = 0;
    double loss = 0.0;
  };
  struct EvalRecord {
    std::size_t step = 0;
    double dev_map = 0.0;
    bool best = false;
  };
  std::vector<BatchRecord> batches;
  std::vector<EvalRecord> evals;
  double best_dev_map = 0.0;
  std::size_t best_step = 0;
  std::string stop_reason;
};

struct TrainResult {
  ModelParams best_params;
  AdadeltaState best_optimizer;
  TrainHistory history;
};

// Scores every pair of a judged dataset with the model.
RankedRun score_dataset(const Dataset& ds, const ModelParams& params,
                        const std::string& run_name);

// Dev MAP under the all-positive-or-all-negative filtering policy.
double dev_map(const Dataset& dev, const ModelParams& params);

// Mini-batch training with per-epoch shuffling, periodic dev evaluation, a
// parameter snapshot on every strict dev-MAP improvement, and early stopping
// after `patience` epochs without a new best. Returns the best snapshot, not
// the final state. Fully deterministic under the seed.
TrainResult train(const Dataset& train_set, const Dataset& dev_set,
                  ModelParams params, const TrainConfig& cfg);

// One line per batch "step<TAB>epoch<TAB>loss" and per evaluation
// "step<TAB>dev_map<TAB>best_flag", in step order.
void write_training_log(const TrainHistory& history, std::ostream& out);

}  // namespace rcnqa

#endif  // RCNQA_TRAINER_HPP
