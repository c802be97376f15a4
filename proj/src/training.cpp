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

#include "apesed/training.hpp"

#include <cmath>
#include <fstream>
#include <numeric>

#include "apesed/error.hpp"
#include "apesed/rng.hpp"
#include "json.hpp"

namespace apesed {

namespace {

EvalReport score(const SequenceModel& model, const TrainingData& data) {
  const auto posts = predict(model, data.features);
  std::vector<LabelTrack> golds(data.labels.size());
  for (size_t i = 0; i < golds.size(); ++i) {
    golds[i].clip_id = data.ids[i];
    golds[i].labels = data.labels[i];
  }
  return evaluate(posts, golds);
}

void check_compatible(const ModelConfig& config, const TrainingData& data) {
  for (size_t i = 0; i < data.features.size(); ++i) {
    if (data.features[i].cols != config.input_dim)
      throw Error(ErrorKind::kDimMismatch, "clip " + data.ids[i] + ": feature dim " +
                                               std::to_string(data.features[i].cols) + ", model expects " +
                                               std::to_string(config.input_dim));
    for (auto l : data.labels[i])
      if (l >= config.num_class)
        throw Error(ErrorKind::kClassArityMismatch, "clip " + data.ids[i] + ": label " + std::to_string(l) +
                                                        " exceeds the model's " +
                                                        std::to_string(config.num_class) + " classes");
  }
}

}  // namespace

void validate(const TrainConfig& c) {
  auto fail = [](const std::string& m) { throw Error(ErrorKind::kBadConfig, m); };
  if (c.batch_size < 1) fail("batch_size must be at least 1");
  if (c.max_epochs < 1) fail("max_epochs must be at least 1");
  if (c.patience < 1) fail("patience must be at least 1");
  if (!(c.learning_rate >= 0.0)) fail("learning rate must be non-negative");
  if (!(c.dropout >= 0.0 && c.dropout < 1.0)) fail("dropout must be in [0, 1)");
}

void Adam::step(ParamMap& params, const ParamMap& grads) {
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (auto& [name, p] : params) {
    const auto g_it = grads.find(name);
    if (g_it == grads.end()) continue;
    const Matrix& g = g_it->second;
    auto [m_it, m_new] = m_.try_emplace(name, p.rows, p.cols);
    auto [v_it, v_new] = v_.try_emplace(name, p.rows, p.cols);
    Matrix& m = m_it->second;
    Matrix& v = v_it->second;
    for (size_t i = 0; i < p.data.size(); ++i) {
      m.data[i] = beta1_ * m.data[i] + (1.0 - beta1_) * g.data[i];
      v.data[i] = beta2_ * v.data[i] + (1.0 - beta2_) * g.data[i] * g.data[i];
      const double update = lr_ * (m.data[i] / bc1) / (std::sqrt(v.data[i] / bc2) + eps_);
      p.data[i] = static_cast<float>(p.data[i] - update);
    }
  }
}

bool clip_global_norm(ParamMap& grads, double max_norm) {
  double sq = 0.0;
  for (const auto& [name, g] : grads)
    for (double v : g.data) sq += v * v;
  const double norm = std::sqrt(sq);
  if (!(norm > max_norm)) return false;
  const double s = max_norm / norm;
  for (auto& [name, g] : grads)
    for (auto& v : g.data) v *= s;
  return true;
}

TrainingData to_training_data(const std::vector<Example>& examples) {
  TrainingData d;
  for (const auto& ex : examples) {
    d.ids.push_back(ex.features.clip_id);
    d.features.push_back(to_matrix(ex.features));
    d.labels.push_back(ex.labels.labels);
  }
  return d;
}

std::vector<double> loss_weights(const std::vector<Example>& train, size_t num_classes, bool balance) {
  if (!balance) return std::vector<double>(num_classes, 1.0);
  const auto counts = class_occurrences(train, num_classes);
  return class_weights(counts);
}

std::vector<PosteriorMatrix> predict(const SequenceModel& model, const std::vector<Matrix>& features) {
  std::vector<PosteriorMatrix> out(features.size());
  std::vector<std::string> errors(features.size());
#pragma omp parallel for schedule(dynamic)
  for (size_t i = 0; i < features.size(); ++i) {
    try {
      out[i] = model.forward(features[i]);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  }
  for (const auto& e : errors)
    if (!e.empty()) throw Error(ErrorKind::kDimMismatch, e);
  return out;
}

EvalReport evaluate_model(const SequenceModel& model, const std::vector<Example>& examples) {
  std::vector<Matrix> features;
  std::vector<LabelTrack> golds;
  for (const auto& ex : examples) {
    features.push_back(to_matrix(ex.features));
    golds.push_back(ex.labels);
  }
  const auto posts = predict(model, features);
  return evaluate(posts, golds);
}

TrainResult train_model(SequenceModel model, const TrainingData& train, const TrainingData& val,
                        const std::vector<double>& weights, const TrainConfig& config, size_t start_epoch,
                        const TrainHooks& hooks) {
  validate(config);
  if (train.features.empty()) throw Error(ErrorKind::kEmptySplit, "training partition is empty");
  if (val.features.empty() && !hooks.val_score) throw Error(ErrorKind::kEmptySplit, "validation partition is empty");
  check_compatible(model.config(), train);
  check_compatible(model.config(), val);
  if (weights.size() != model.config().num_class)
    throw Error(ErrorKind::kDimMismatch, "class weight vector does not match the model");

  auto val_f1 = [&](const SequenceModel& m, size_t epoch, EpochRecord* rec) {
    if (hooks.val_score) {
      const double f1 = hooks.val_score(m, epoch);
      if (rec) rec->val_weighted_f1 = f1;
      return f1;
    }
    const EvalReport r = score(m, val);
    if (rec) {
      rec->val_accuracy = r.accuracy;
      rec->val_weighted_f1 = r.weighted_f1;
    }
    return r.weighted_f1;
  };

  TrainResult result{model, {}, weights};
  TrainLog& log = result.log;
  if (start_epoch >= config.max_epochs) {
    log.best_epoch = start_epoch;
    log.stopped_reason = "max_epochs";
    return result;
  }
  if (start_epoch > 0) {
    log.resumed_val_f1 = val_f1(model, start_epoch, nullptr);
    log.best_epoch = start_epoch;
    log.best_val_f1 = *log.resumed_val_f1;
  }

  Adam adam(config.learning_rate);
  const size_t n = train.features.size();
  size_t since_best = 0;
  log.stopped_reason = "max_epochs";
  for (size_t epoch = start_epoch + 1; epoch <= config.max_epochs; ++epoch) {
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(derive_seed(config.seed, epoch));
    rng.shuffle(std::span<size_t>(order));

    EpochRecord rec;
    rec.epoch = epoch;
    double loss_sum = 0.0;
    size_t steps = 0;
    for (size_t b = 0; b < n; b += config.batch_size) {
      const size_t bsize = std::min(config.batch_size, n - b);
      std::vector<ParamMap> grads(bsize);
      std::vector<WeightedSum> sums(bsize);
      std::vector<std::string> errors(bsize);
#pragma omp parallel for schedule(dynamic) if (bsize > 1)
      for (size_t i = 0; i < bsize; ++i) {
        const size_t clip = order[b + i];
        ForwardOptions opts;
        opts.train_mode = true;
        opts.dropout_seed = derive_seed(config.seed, epoch, b + i + 1);
        try {
          sums[i] = accumulate_gradients(model, train.features[clip], train.labels[clip], weights, opts, grads[i]);
        } catch (const std::exception& e) {
          errors[i] = e.what();
        }
      }
      for (const auto& e : errors)
        if (!e.empty()) throw Error(ErrorKind::kDimMismatch, e);

      // Fixed-order reduction keeps batches deterministic.
      double num = 0.0, den = 0.0;
      for (size_t i = 0; i < bsize; ++i) {
        num += sums[i].value;
        den += sums[i].weight;
      }
      if (den == 0.0) continue;
      const double batch_loss = num / den;
      if (!std::isfinite(batch_loss))
        throw Error(ErrorKind::kDivergence, "non-finite loss at epoch " + std::to_string(epoch) + ", clip " +
                                                train.ids[order[b]]);
      ParamMap& total = grads[0];
      for (size_t i = 1; i < bsize; ++i)
        for (auto& [name, g] : total) {
          const Matrix& other = grads[i].at(name);
          for (size_t j = 0; j < g.data.size(); ++j) g.data[j] += other.data[j];
        }
      for (auto& [name, g] : total)
        for (auto& v : g.data) v /= den;
      if (clip_global_norm(total, config.clip_norm)) ++rec.clipped_steps;
      adam.step(model.mutable_params(), total);
      loss_sum += batch_loss;
      ++steps;
    }
    rec.train_loss = steps ? loss_sum / static_cast<double>(steps) : 0.0;

    const double f1 = val_f1(model, epoch, &rec);
    log.epochs.push_back(rec);
    if (hooks.on_epoch) hooks.on_epoch(rec);
    if (f1 > log.best_val_f1) {
      log.best_val_f1 = f1;
      log.best_epoch = epoch;
      result.model = model;
      since_best = 0;
    } else if (++since_best >= config.patience) {
      log.stopped_reason = "patience";
      break;
    }
  }
  return result;
}

CorpusRun train(const Corpus& corpus, const Split& split, ModelConfig model_config, const TrainConfig& train_config,
                const TrainHooks& hooks) {
  validate(train_config);
  if (split.train.empty()) throw Error(ErrorKind::kEmptySplit, "training partition is empty");
  const auto train_set = load_pairs(corpus, split.train, train_config.binary);
  const auto val_set = load_pairs(corpus, split.val, train_config.binary);
  const ClassVocab vocab = train_config.binary ? binary_vocab() : corpus.vocab;
  model_config.num_class = vocab.num_classes();
  model_config.input_dim = feature_dim(corpus.feature_kind);
  model_config.dropout = train_config.dropout;
  const auto weights = loss_weights(train_set, model_config.num_class, train_config.balance_weights);

  auto result = train_model(SequenceModel::init(model_config, train_config.seed), to_training_data(train_set),
                            to_training_data(val_set), weights, train_config, 0, hooks);
  CorpusRun run{Checkpoint{std::move(result.model), vocab, corpus.feature_kind}, std::move(result.log),
                std::move(result.class_weights)};
  run.checkpoint.binary = train_config.binary;
  run.checkpoint.train_seed = train_config.seed;
  run.checkpoint.epoch = run.log.best_epoch;
  run.checkpoint.val_f1 = run.log.best_val_f1;
  return run;
}

CorpusRun resume(const std::filesystem::path& checkpoint_path, const Corpus& corpus, const Split& split,
                 const TrainConfig& train_config, const TrainHooks& hooks) {
  Checkpoint ckpt = load_checkpoint(checkpoint_path);
  const ModelConfig& mc = ckpt.model.config();
  const size_t classes = train_config.binary ? 2 : corpus.vocab.num_classes();
  if (mc.num_class != classes)
    throw Error(ErrorKind::kIncompatibleCheckpoint, "checkpoint has " + std::to_string(mc.num_class) +
                                                        " classes, corpus needs " + std::to_string(classes));
  if (ckpt.feature_kind != corpus.feature_kind || mc.input_dim != feature_dim(corpus.feature_kind))
    throw Error(ErrorKind::kIncompatibleCheckpoint, "checkpoint was trained on " +
                                                        std::string(to_string(ckpt.feature_kind)) + " features");
  if (ckpt.binary != train_config.binary)
    throw Error(ErrorKind::kIncompatibleCheckpoint, "binary setting differs from the checkpoint");

  const auto train_set = load_pairs(corpus, split.train, train_config.binary);
  const auto val_set = load_pairs(corpus, split.val, train_config.binary);
  const auto weights = loss_weights(train_set, mc.num_class, train_config.balance_weights);
  const size_t start = ckpt.epoch;
  auto result = train_model(ckpt.model, to_training_data(train_set), to_training_data(val_set), weights,
                            train_config, start, hooks);
  if (result.log.epochs.empty()) result.log.best_val_f1 = ckpt.val_f1;  // nothing left to run
  CorpusRun run{std::move(ckpt), std::move(result.log), std::move(result.class_weights)};
  if (run.log.best_epoch != start) {
    run.checkpoint.model = std::move(result.model);
    run.checkpoint.epoch = run.log.best_epoch;
    run.checkpoint.val_f1 = run.log.best_val_f1;
  }
  return run;
}

void write_train_log(const std::filesystem::path& path, const TrainLog& log) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  for (const auto& r : log.epochs) {
    nlohmann::ordered_json j;
    j["epoch"] = r.epoch;
    j["train_loss"] = r.train_loss;
    j["val_accuracy"] = r.val_accuracy;
    j["val_weighted_f1"] = r.val_weighted_f1;
    j["clipped_steps"] = r.clipped_steps;
    out << j.dump() << "\n";
  }
  nlohmann::ordered_json s;
  s["best_epoch"] = log.best_epoch;
  s["best_val_f1"] = log.best_val_f1;
  if (log.resumed_val_f1) s["resumed_val_f1"] = *log.resumed_val_f1;
  s["stopped_reason"] = log.stopped_reason;
  out << s.dump() << "\n";
}

}  // namespace apesed
