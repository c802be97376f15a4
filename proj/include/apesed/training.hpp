/*
 * Copyright 2026 The apesed Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef APESED_TRAINING_HPP_
#define APESED_TRAINING_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "apesed/checkpoint.hpp"
#include "apesed/dataset.hpp"
#include "apesed/metrics.hpp"
#include "apesed/model.hpp"

namespace apesed {

struct TrainConfig {
  size_t batch_size = 1;
  double dropout = 0.4;
  size_t max_epochs = 200;
  size_t patience = 20;
  double learning_rate = 1e-4;
  uint64_t seed = 0;
  bool balance_weights = true;
  bool binary = false;
  double clip_norm = 5.0;
};

void validate(const TrainConfig& config);

struct EpochRecord {
  size_t epoch = 0;
  double train_loss = 0.0;
  double val_accuracy = 0.0;
  double val_weighted_f1 = 0.0;
  size_t clipped_steps = 0;

  friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

struct TrainLog {
  std::vector<EpochRecord> epochs;
  size_t best_epoch = 0;
  double best_val_f1 = -1.0;
  // Validation F1 of the checkpoint a resumed run started from.
  std::optional<double> resumed_val_f1;
  std::string stopped_reason;  // "max_epochs" or "patience"
};

// Adam (beta1 0.9, beta2 0.999, eps 1e-8). After every step parameters are
// rounded to float32 so that a checkpoint holds exactly the trained model.
class Adam {
 public:
  explicit Adam(double learning_rate, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void step(ParamMap& params, const ParamMap& grads);
  size_t steps() const { return t_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  size_t t_ = 0;
  ParamMap m_, v_;
};

// Scales grads so their global L2 norm is at most max_norm. Returns true if
// clipping happened.
bool clip_global_norm(ParamMap& grads, double max_norm);

// Everything the loop needs besides the model: inputs already converted to
// matrices and the per-class loss weights.
struct TrainingData {
  std::vector<std::string> ids;
  std::vector<Matrix> features;
  std::vector<std::vector<uint16_t>> labels;
};
TrainingData to_training_data(const std::vector<Example>& examples);

struct TrainHooks {
  // Replaces validation scoring (returns the weighted F1 for an epoch).
  std::function<double(const SequenceModel&, size_t epoch)> val_score;
  std::function<void(const EpochRecord&)> on_epoch;
};

struct TrainResult {
  SequenceModel model;  // the best-validation model
  TrainLog log;
  std::vector<double> class_weights;
};

// Runs epochs start_epoch + 1 .. max_epochs from `model`.
TrainResult train_model(SequenceModel model, const TrainingData& train, const TrainingData& val,
                        const std::vector<double>& class_weights, const TrainConfig& config,
                        size_t start_epoch = 0, const TrainHooks& hooks = {});

// Loss weights for a training set: reciprocal counts, or all ones when
// balancing is off.
std::vector<double> loss_weights(const std::vector<Example>& train, size_t num_classes, bool balance);

struct CorpusRun {
  Checkpoint checkpoint;
  TrainLog log;
  std::vector<double> class_weights;
};

// Loads the split's training and validation pairs and trains from scratch.
CorpusRun train(const Corpus& corpus, const Split& split, ModelConfig model_config,
                const TrainConfig& train_config, const TrainHooks& hooks = {});

// Continues from a checkpoint with fresh optimizer state; epochs resume at
// checkpoint.epoch + 1.
CorpusRun resume(const std::filesystem::path& checkpoint_path, const Corpus& corpus, const Split& split,
                 const TrainConfig& train_config, const TrainHooks& hooks = {});

// Inference over many clips (dropout off).
std::vector<PosteriorMatrix> predict(const SequenceModel& model, const std::vector<Matrix>& features);

// Frame metrics of `model` on `examples`.
EvalReport evaluate_model(const SequenceModel& model, const std::vector<Example>& examples);

// JSON-lines: one object per epoch, then a summary line.
void write_train_log(const std::filesystem::path& path, const TrainLog& log);

}  // namespace apesed

#endif  // APESED_TRAINING_HPP_
