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

#ifndef APESED_MODEL_HPP_
#define APESED_MODEL_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "apesed/features.hpp"
#include "apesed/matrix.hpp"

namespace apesed {

enum class Arch { kLstm, kBlstm, kTransformer, kArLstm, kArBlstm };

std::string_view to_string(Arch arch);
std::optional<Arch> parse_arch(std::string_view name);
inline bool is_autoregressive(Arch a) { return a == Arch::kArLstm || a == Arch::kArBlstm; }

struct ModelConfig {
  Arch arch = Arch::kLstm;
  size_t input_dim = 0;
  size_t hidden_size = 1024;
  size_t heads = 8;
  size_t layers = 6;
  size_t num_class = 2;
  double dropout = 0.4;
  // Test hook: the transformer adds sinusoidal position encodings unless off.
  bool positional_encoding = true;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

// Width of H: 2 * hidden_size for the bidirectional archs, hidden_size
// otherwise (the transformer's model dimension is hidden_size).
size_t hidden_dim(const ModelConfig& config);

// Throws BadConfig.
void validate(const ModelConfig& config);

// Named parameter tensors; biases and gains are 1 x n.
using ParamMap = std::map<std::string, Matrix>;

// P (softmax rows), D (dense outputs) and H (hidden sequence) for one clip.
struct PosteriorMatrix {
  Matrix probs;
  Matrix logits;
  Matrix hidden;

  size_t num_frames() const { return probs.rows; }
};

struct ForwardOptions {
  bool train_mode = false;
  // Seeds the dropout masks when train_mode is on.
  uint64_t dropout_seed = 0;
};

class SequenceModel {
 public:
  SequenceModel(ModelConfig config, ParamMap params);

  // Xavier-uniform weights, zero biases, unit layer-norm gains and an LSTM
  // forget-gate bias of +1. Deterministic per seed.
  static SequenceModel init(const ModelConfig& config, uint64_t seed);

  const ModelConfig& config() const { return config_; }
  const ParamMap& params() const { return params_; }
  ParamMap& mutable_params() { return params_; }

  PosteriorMatrix forward(const Matrix& features, const ForwardOptions& options = {}) const;
  PosteriorMatrix forward(const FrameMatrix& features, bool train_mode = false) const;

  // Shapes every parameter must have for `config`.
  static std::map<std::string, std::pair<size_t, size_t>> parameter_shapes(const ModelConfig& config);

 private:
  ModelConfig config_;
  ParamMap params_;
};

Matrix to_matrix(const FrameMatrix& features);

// Weight-normalized mean: sum_t w[L_t] * -log P_t[L_t] / sum_t w[L_t], with
// log clamped at 1e-12. Zero when every frame carries zero weight.
double loss(const PosteriorMatrix& posterior, std::span<const uint16_t> labels,
            std::span<const double> weights);

// w[k] = 1 / counts[k]; classes absent from training get weight 0.
std::vector<double> class_weights(std::span<const size_t> counts);

struct LossGradient {
  double loss = 0.0;
  ParamMap grads;
};

// Exact gradient of loss(forward(features)) w.r.t. every parameter.
LossGradient backward(const SequenceModel& model, const Matrix& features,
                      std::span<const uint16_t> labels, std::span<const double> weights,
                      const ForwardOptions& options = {});

// Building block for batches: adds d/dtheta of the unnormalized sum
// sum_t w[L_t] * nll_t into `grads` (allocating entries as needed) and
// returns {sum, sum of weights}.
struct WeightedSum {
  double value = 0.0;
  double weight = 0.0;
};
WeightedSum accumulate_gradients(const SequenceModel& model, const Matrix& features,
                                 std::span<const uint16_t> labels, std::span<const double> weights,
                                 const ForwardOptions& options, ParamMap& grads);

}  // namespace apesed

#endif  // APESED_MODEL_HPP_
