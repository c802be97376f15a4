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

#include "apesed/model.hpp"

#include <algorithm>
#include <cmath>

#include "apesed/autodiff.hpp"
#include "apesed/error.hpp"
#include "apesed/rng.hpp"

namespace apesed {

namespace {

enum class Init { kXavier, kZero, kOne, kLstmBias };

struct ParamSpec {
  std::string name;
  size_t rows;
  size_t cols;
  Init init;
};

void add_lstm_specs(std::vector<ParamSpec>& specs, const std::string& prefix, size_t in, size_t h) {
  specs.push_back({prefix + ".w_x", in, 4 * h, Init::kXavier});
  specs.push_back({prefix + ".w_h", h, 4 * h, Init::kXavier});
  specs.push_back({prefix + ".b", 1, 4 * h, Init::kLstmBias});
}

void add_dense_specs(std::vector<ParamSpec>& specs, const std::string& prefix, size_t in, size_t out) {
  specs.push_back({prefix + ".w", in, out, Init::kXavier});
  specs.push_back({prefix + ".b", 1, out, Init::kZero});
}

std::vector<ParamSpec> parameter_specs(const ModelConfig& c) {
  std::vector<ParamSpec> specs;
  const size_t h = c.hidden_size;
  switch (c.arch) {
    case Arch::kLstm:
      add_lstm_specs(specs, "lstm.fwd", c.input_dim, h);
      add_dense_specs(specs, "dense", h, c.num_class);
      break;
    case Arch::kBlstm:
      add_lstm_specs(specs, "lstm.fwd", c.input_dim, h);
      add_lstm_specs(specs, "lstm.bwd", c.input_dim, h);
      add_dense_specs(specs, "dense", 2 * h, c.num_class);
      break;
    case Arch::kArBlstm:
      add_lstm_specs(specs, "ar.bwd", c.input_dim + c.num_class, h);
      add_dense_specs(specs, "ar.bwd.dense", h, c.num_class);
      [[fallthrough]];
    case Arch::kArLstm:
      add_lstm_specs(specs, "ar.fwd", c.input_dim + c.num_class, h);
      add_dense_specs(specs, "ar.fwd.dense", h, c.num_class);
      break;
    case Arch::kTransformer: {
      const size_t ff = 2 * h;
      add_dense_specs(specs, "tf.in", c.input_dim, h);
      for (size_t l = 0; l < c.layers; ++l) {
        const std::string p = "tf.layer" + std::to_string(l);
        specs.push_back({p + ".ln1.gain", 1, h, Init::kOne});
        specs.push_back({p + ".ln1.bias", 1, h, Init::kZero});
        add_dense_specs(specs, p + ".attn.q", h, h);
        add_dense_specs(specs, p + ".attn.k", h, h);
        add_dense_specs(specs, p + ".attn.v", h, h);
        add_dense_specs(specs, p + ".attn.out", h, h);
        specs.push_back({p + ".ln2.gain", 1, h, Init::kOne});
        specs.push_back({p + ".ln2.bias", 1, h, Init::kZero});
        add_dense_specs(specs, p + ".ff1", h, ff);
        add_dense_specs(specs, p + ".ff2", ff, h);
      }
      specs.push_back({"tf.ln.gain", 1, h, Init::kOne});
      specs.push_back({"tf.ln.bias", 1, h, Init::kZero});
      add_dense_specs(specs, "dense", h, c.num_class);
      break;
    }
  }
  return specs;
}

Matrix sinusoidal_encoding(size_t frames, size_t dim) {
  Matrix pe(frames, dim);
  for (size_t t = 0; t < frames; ++t)
    for (size_t i = 0; i < dim; i += 2) {
      const double angle = static_cast<double>(t) / std::pow(10000.0, static_cast<double>(i) / dim);
      pe(t, i) = std::sin(angle);
      if (i + 1 < dim) pe(t, i + 1) = std::cos(angle);
    }
  return pe;
}

// Builds one forward pass on a tape.
class Graph {
 public:
  Graph(ad::Tape& tape, const SequenceModel& model, bool with_grads, const ForwardOptions& options)
      : tape_(tape),
        model_(model),
        config_(model.config()),
        with_grads_(with_grads),
        train_(options.train_mode && model.config().dropout > 0.0),
        dropout_rng_(options.dropout_seed) {}

  ad::Var param(const std::string& name) {
    if (auto it = leaves_.find(name); it != leaves_.end()) return it->second;
    const Matrix& value = model_.params().at(name);
    ad::Var v = with_grads_ ? tape_.variable(value) : tape_.constant(value);
    leaves_.emplace(name, v);
    return v;
  }

  const std::map<std::string, ad::Var>& leaves() const { return leaves_; }

  ad::Var dropout(ad::Var x) {
    if (!train_) return x;
    const double keep = 1.0 - config_.dropout;
    Matrix m(x.rows(), x.cols());
    for (auto& v : m.data) v = dropout_rng_.uniform() < keep ? 1.0 / keep : 0.0;
    return ad::mask(x, m);
  }

  ad::Var dense(ad::Var x, const std::string& prefix) {
    return ad::add_row(ad::matmul(x, param(prefix + ".w")), param(prefix + ".b"));
  }

  // Plain LSTM over the whole sequence; returns H (T x hidden_size).
  ad::Var lstm(ad::Var x, const std::string& prefix, bool reverse) {
    const size_t frames = x.rows();
    const size_t h = config_.hidden_size;
    const ad::Var xp = dense_lstm_input(x, param(prefix + ".w_x"), prefix);
    const ad::Var wh = param(prefix + ".w_h");
    std::vector<ad::Var> hs(frames);
    std::optional<ad::Var> hid, cell;
    for (size_t s = 0; s < frames; ++s) {
      const size_t t = reverse ? frames - 1 - s : s;
      ad::Var gates = ad::slice_rows(xp, t, t + 1);
      if (hid) gates = ad::add(gates, ad::matmul(*hid, wh));
      const ad::Var hc = ad::lstm_cell(gates, cell);
      hid = ad::slice_cols(hc, 0, h);
      cell = ad::slice_cols(hc, h, 2 * h);
      hs[t] = *hid;
    }
    return ad::concat_rows(hs);
  }

  struct ArResult {
    ad::Var hidden;  // T x hidden_size
    ad::Var logits;  // T x num_class
  };

  // Autoregressive LSTM: the step input is [I_t, D_prev], where D_prev is the
  // dense output of the previous step in the direction of travel (zero at the
  // first step).
  ArResult ar_lstm(ad::Var x, const std::string& prefix, bool reverse) {
    const size_t frames = x.rows();
    const size_t h = config_.hidden_size;
    const size_t in = config_.input_dim;
    const ad::Var w_x = param(prefix + ".w_x");
    const ad::Var w_in = ad::slice_rows(w_x, 0, in);
    const ad::Var w_fb = ad::slice_rows(w_x, in, in + config_.num_class);
    const ad::Var xp = dense_lstm_input(x, w_in, prefix);
    const ad::Var wh = param(prefix + ".w_h");
    const ad::Var wd = param(prefix + ".dense.w");
    const ad::Var bd = param(prefix + ".dense.b");
    std::vector<ad::Var> hs(frames), ds(frames);
    std::optional<ad::Var> hid, cell, prev;
    for (size_t s = 0; s < frames; ++s) {
      const size_t t = reverse ? frames - 1 - s : s;
      ad::Var gates = ad::slice_rows(xp, t, t + 1);
      if (hid) gates = ad::add(gates, ad::matmul(*hid, wh));
      if (prev) gates = ad::add(gates, ad::matmul(*prev, w_fb));
      const ad::Var hc = ad::lstm_cell(gates, cell);
      hid = ad::slice_cols(hc, 0, h);
      cell = ad::slice_cols(hc, h, 2 * h);
      prev = ad::add_row(ad::matmul(dropout(*hid), wd), bd);
      hs[t] = *hid;
      ds[t] = *prev;
    }
    return {ad::concat_rows(hs), ad::concat_rows(ds)};
  }

  ad::Var transformer(ad::Var x) {
    const size_t h = config_.hidden_size;
    const size_t dh = h / config_.heads;
    const double att_scale = 1.0 / std::sqrt(static_cast<double>(dh));
    ad::Var z = dense(x, "tf.in");
    if (config_.positional_encoding) z = ad::add(z, tape_.constant(sinusoidal_encoding(x.rows(), h)));
    for (size_t l = 0; l < config_.layers; ++l) {
      const std::string p = "tf.layer" + std::to_string(l);
      const ad::Var a = ad::layer_norm(z, param(p + ".ln1.gain"), param(p + ".ln1.bias"));
      const ad::Var q = dense(a, p + ".attn.q");
      const ad::Var k = dense(a, p + ".attn.k");
      const ad::Var v = dense(a, p + ".attn.v");
      std::vector<ad::Var> heads;
      heads.reserve(config_.heads);
      for (size_t hh = 0; hh < config_.heads; ++hh) {
        const size_t lo = hh * dh, hi = lo + dh;
        const ad::Var scores =
            ad::scale(ad::matmul_nt(ad::slice_cols(q, lo, hi), ad::slice_cols(k, lo, hi)), att_scale);
        heads.push_back(ad::matmul(ad::softmax_rows(scores), ad::slice_cols(v, lo, hi)));
      }
      const ad::Var attended = dense(ad::concat_cols(heads), p + ".attn.out");
      z = ad::add(z, dropout(attended));
      const ad::Var b = ad::layer_norm(z, param(p + ".ln2.gain"), param(p + ".ln2.bias"));
      const ad::Var ff = dense(ad::relu(dense(b, p + ".ff1")), p + ".ff2");
      z = ad::add(z, dropout(ff));
    }
    return ad::layer_norm(z, param("tf.ln.gain"), param("tf.ln.bias"));
  }

  struct Output {
    ad::Var hidden;
    ad::Var logits;
  };

  Output run(const Matrix& features) {
    const ad::Var x = tape_.constant(features);
    switch (config_.arch) {
      case Arch::kLstm: {
        const ad::Var hid = lstm(x, "lstm.fwd", false);
        return {hid, dense(dropout(hid), "dense")};
      }
      case Arch::kBlstm: {
        const ad::Var parts[] = {lstm(x, "lstm.fwd", false), lstm(x, "lstm.bwd", true)};
        const ad::Var hid = ad::concat_cols(parts);
        return {hid, dense(dropout(hid), "dense")};
      }
      case Arch::kTransformer: {
        const ad::Var hid = transformer(x);
        return {hid, dense(dropout(hid), "dense")};
      }
      case Arch::kArLstm: {
        const ArResult fwd = ar_lstm(x, "ar.fwd", false);
        return {fwd.hidden, fwd.logits};
      }
      case Arch::kArBlstm: {
        const ArResult fwd = ar_lstm(x, "ar.fwd", false);
        const ArResult bwd = ar_lstm(x, "ar.bwd", true);
        const ad::Var parts[] = {fwd.hidden, bwd.hidden};
        return {ad::concat_cols(parts), ad::add(fwd.logits, bwd.logits)};
      }
    }
    throw Error(ErrorKind::kBadConfig, "unknown architecture");
  }

 private:
  ad::Var dense_lstm_input(ad::Var x, ad::Var w_in, const std::string& prefix) {
    return ad::add_row(ad::matmul(x, w_in), param(prefix + ".b"));
  }

  ad::Tape& tape_;
  const SequenceModel& model_;
  const ModelConfig& config_;
  bool with_grads_;
  bool train_;
  Rng dropout_rng_;
  std::map<std::string, ad::Var> leaves_;
};

Matrix softmax_rows(const Matrix& logits) {
  Matrix p = logits;
  for (size_t r = 0; r < p.rows; ++r) {
    auto row = p.row(r);
    const double mx = *std::max_element(row.begin(), row.end());
    double sum = 0.0;
    for (auto& v : row) sum += (v = std::exp(v - mx));
    for (auto& v : row) v /= sum;
  }
  return p;
}

void check_input(const ModelConfig& config, const Matrix& features) {
  if (features.cols != config.input_dim)
    throw Error(ErrorKind::kDimMismatch, "features have dim " + std::to_string(features.cols) +
                                             ", model expects " + std::to_string(config.input_dim));
  if (features.rows == 0) throw Error(ErrorKind::kDimMismatch, "empty feature sequence");
}

}  // namespace

std::string_view to_string(Arch arch) {
  switch (arch) {
    case Arch::kLstm: return "lstm";
    case Arch::kBlstm: return "blstm";
    case Arch::kTransformer: return "transformer";
    case Arch::kArLstm: return "ar_lstm";
    case Arch::kArBlstm: return "ar_blstm";
  }
  return "unknown";
}

std::optional<Arch> parse_arch(std::string_view name) {
  for (Arch a : {Arch::kLstm, Arch::kBlstm, Arch::kTransformer, Arch::kArLstm, Arch::kArBlstm})
    if (to_string(a) == name) return a;
  return std::nullopt;
}

size_t hidden_dim(const ModelConfig& config) {
  switch (config.arch) {
    case Arch::kBlstm:
    case Arch::kArBlstm:
      return 2 * config.hidden_size;
    default:
      return config.hidden_size;
  }
}

void validate(const ModelConfig& c) {
  auto fail = [](const std::string& m) { throw Error(ErrorKind::kBadConfig, m); };
  if (c.input_dim == 0) fail("input_dim must be positive");
  if (c.hidden_size == 0) fail("hidden_size must be positive");
  if (c.num_class < 2) fail("num_class must be at least 2");
  if (!(c.dropout >= 0.0 && c.dropout < 1.0)) fail("dropout must be in [0, 1)");
  if (c.arch == Arch::kTransformer) {
    if (c.heads == 0 || c.hidden_size % c.heads != 0)
      fail("hidden size " + std::to_string(c.hidden_size) + " not divisible by " +
           std::to_string(c.heads) + " heads");
    if (c.layers == 0) fail("transformer needs at least one layer");
  }
}

std::map<std::string, std::pair<size_t, size_t>> SequenceModel::parameter_shapes(const ModelConfig& config) {
  std::map<std::string, std::pair<size_t, size_t>> out;
  for (const auto& s : parameter_specs(config)) out[s.name] = {s.rows, s.cols};
  return out;
}

SequenceModel::SequenceModel(ModelConfig config, ParamMap params)
    : config_(config), params_(std::move(params)) {
  validate(config_);
  const auto shapes = parameter_shapes(config_);
  if (shapes.size() != params_.size())
    throw Error(ErrorKind::kIncompatibleCheckpoint, "parameter set does not match the architecture");
  for (const auto& [name, shape] : shapes) {
    const auto it = params_.find(name);
    if (it == params_.end() || it->second.rows != shape.first || it->second.cols != shape.second)
      throw Error(ErrorKind::kIncompatibleCheckpoint, "parameter " + name + " missing or misshapen");
  }
}

SequenceModel SequenceModel::init(const ModelConfig& config, uint64_t seed) {
  validate(config);
  Rng rng(seed);
  ParamMap params;
  auto specs = parameter_specs(config);
  std::sort(specs.begin(), specs.end(), [](const ParamSpec& a, const ParamSpec& b) { return a.name < b.name; });
  for (const auto& s : specs) {
    Matrix m(s.rows, s.cols);
    switch (s.init) {
      case Init::kXavier: {
        const double bound = std::sqrt(6.0 / static_cast<double>(s.rows + s.cols));
        // Parameters are kept float32-representable (see the optimizer).
        for (auto& v : m.data) v = static_cast<float>(rng.uniform(-bound, bound));
        break;
      }
      case Init::kZero:
        break;
      case Init::kOne:
        std::fill(m.data.begin(), m.data.end(), 1.0);
        break;
      case Init::kLstmBias: {
        const size_t h = s.cols / 4;
        std::fill(m.data.begin() + static_cast<long>(h), m.data.begin() + static_cast<long>(2 * h), 1.0);
        break;
      }
    }
    params.emplace(s.name, std::move(m));
  }
  return SequenceModel(config, std::move(params));
}

PosteriorMatrix SequenceModel::forward(const Matrix& features, const ForwardOptions& options) const {
  check_input(config_, features);
  ad::Tape tape;
  Graph graph(tape, *this, false, options);
  const auto out = graph.run(features);
  PosteriorMatrix post;
  post.logits = out.logits.value();
  post.hidden = out.hidden.value();
  post.probs = softmax_rows(post.logits);
  return post;
}

Matrix to_matrix(const FrameMatrix& features) {
  Matrix m(features.num_frames, features.dim);
  std::copy(features.values.begin(), features.values.end(), m.data.begin());
  return m;
}

PosteriorMatrix SequenceModel::forward(const FrameMatrix& features, bool train_mode) const {
  ForwardOptions options;
  options.train_mode = train_mode;
  return forward(to_matrix(features), options);
}

double loss(const PosteriorMatrix& posterior, std::span<const uint16_t> labels,
            std::span<const double> weights) {
  if (labels.size() != posterior.probs.rows)
    throw Error(ErrorKind::kLengthMismatch, "loss: label count differs from frame count");
  if (weights.size() != posterior.probs.cols)
    throw Error(ErrorKind::kDimMismatch, "loss: weight vector length differs from class count");
  double num = 0.0, den = 0.0;
  for (size_t t = 0; t < labels.size(); ++t) {
    const double w = weights[labels[t]];
    num += w * -std::log(std::max(posterior.probs(t, labels[t]), ad::kMinProbability));
    den += w;
  }
  return den > 0.0 ? num / den : 0.0;
}

std::vector<double> class_weights(std::span<const size_t> counts) {
  std::vector<double> w(counts.size());
  for (size_t k = 0; k < counts.size(); ++k) w[k] = counts[k] == 0 ? 0.0 : 1.0 / static_cast<double>(counts[k]);
  return w;
}

WeightedSum accumulate_gradients(const SequenceModel& model, const Matrix& features,
                                 std::span<const uint16_t> labels, std::span<const double> weights,
                                 const ForwardOptions& options, ParamMap& grads) {
  check_input(model.config(), features);
  if (labels.size() != features.rows)
    throw Error(ErrorKind::kLengthMismatch, "labels and features differ in length");
  if (weights.size() != model.config().num_class)
    throw Error(ErrorKind::kDimMismatch, "weight vector length differs from class count");
  for (const auto& [name, value] : model.params())
    if (!grads.contains(name)) grads.emplace(name, Matrix(value.rows, value.cols));

  ad::Tape tape;
  Graph graph(tape, model, true, options);
  const auto out = graph.run(features);
  const ad::Var total = ad::weighted_nll(out.logits, labels, weights);
  WeightedSum result;
  result.value = total.value().data[0];
  for (auto l : labels) result.weight += weights[l];
  if (result.weight == 0.0) return result;

  tape.backward(total);
  for (const auto& [name, leaf] : graph.leaves()) {
    const Matrix& g = tape.grad(leaf);
    if (g.empty()) continue;
    Matrix& dst = grads.at(name);
    for (size_t i = 0; i < g.data.size(); ++i) dst.data[i] += g.data[i];
  }
  return result;
}

LossGradient backward(const SequenceModel& model, const Matrix& features, std::span<const uint16_t> labels,
                      std::span<const double> weights, const ForwardOptions& options) {
  LossGradient out;
  const WeightedSum sum = accumulate_gradients(model, features, labels, weights, options, out.grads);
  if (sum.weight > 0.0) {
    out.loss = sum.value / sum.weight;
    const double inv = 1.0 / sum.weight;
    for (auto& [name, g] : out.grads)
      for (auto& v : g.data) v *= inv;
  }
  return out;
}

}  // namespace apesed
