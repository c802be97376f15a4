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

#include "apesed/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "apesed/error.hpp"
#include "json.hpp"

namespace apesed {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr uint32_t kFormatVersion = 1;

ordered_json config_json(const ModelConfig& c) {
  ordered_json j;
  j["arch"] = std::string(to_string(c.arch));
  j["input_dim"] = c.input_dim;
  j["hidden_size"] = c.hidden_size;
  j["heads"] = c.heads;
  j["layers"] = c.layers;
  j["num_class"] = c.num_class;
  j["dropout"] = c.dropout;
  j["positional_encoding"] = c.positional_encoding;
  return j;
}

ModelConfig config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  const auto arch = parse_arch(j.at("arch").get<std::string>());
  if (!arch) throw Error(ErrorKind::kIncompatibleCheckpoint, "unknown architecture in checkpoint");
  c.arch = *arch;
  c.input_dim = j.at("input_dim").get<size_t>();
  c.hidden_size = j.at("hidden_size").get<size_t>();
  c.heads = j.at("heads").get<size_t>();
  c.layers = j.at("layers").get<size_t>();
  c.num_class = j.at("num_class").get<size_t>();
  c.dropout = j.at("dropout").get<double>();
  c.positional_encoding = j.value("positional_encoding", true);
  return c;
}

template <typename T>
void put(std::string& out, T v) {
  out.append(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T take(const std::string& in, size_t& pos, const fs::path& path) {
  if (pos + sizeof(T) > in.size()) throw Error(ErrorKind::kCorruptFile, path.string() + ": truncated checkpoint");
  T v;
  std::memcpy(&v, in.data() + pos, sizeof v);
  pos += sizeof v;
  return v;
}

}  // namespace

std::string config_to_json(const ModelConfig& config) { return config_json(config).dump(); }

void save_checkpoint(const fs::path& path, const Checkpoint& ckpt) {
  ordered_json meta;
  meta["format_version"] = kFormatVersion;
  meta["config"] = config_json(ckpt.model.config());
  meta["vocab"] = ordered_json::parse(vocab_to_json(ckpt.vocab));
  meta["feature_kind"] = std::string(to_string(ckpt.feature_kind));
  meta["binary"] = ckpt.binary;
  meta["train_seed"] = ckpt.train_seed;
  meta["epoch"] = ckpt.epoch;
  meta["val_f1"] = ckpt.val_f1;
  const std::string meta_text = meta.dump();

  std::string out = "APCK";
  put<uint32_t>(out, kFormatVersion);
  put<uint64_t>(out, meta_text.size());
  out += meta_text;
  put<uint32_t>(out, static_cast<uint32_t>(ckpt.model.params().size()));
  for (const auto& [name, m] : ckpt.model.params()) {
    put<uint32_t>(out, static_cast<uint32_t>(name.size()));
    out += name;
    put<uint32_t>(out, static_cast<uint32_t>(m.rows));
    put<uint32_t>(out, static_cast<uint32_t>(m.cols));
    for (double v : m.data) put<float>(out, static_cast<float>(v));
  }

  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw Error(ErrorKind::kIo, "cannot write " + tmp.string());
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw Error(ErrorKind::kIo, "short write to " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Error(ErrorKind::kIo, "cannot move checkpoint into place: " + ec.message());
}

Checkpoint load_checkpoint(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::kIo, "cannot open checkpoint " + path.string());
  const std::string in((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  if (in.size() < 4 || in.compare(0, 4, "APCK") != 0)
    throw Error(ErrorKind::kBadMagic, path.string() + ": not a checkpoint");
  size_t pos = 4;
  const auto version = take<uint32_t>(in, pos, path);
  if (version != kFormatVersion)
    throw Error(ErrorKind::kIncompatibleCheckpoint, path.string() + ": format version " + std::to_string(version));
  const auto meta_len = take<uint64_t>(in, pos, path);
  if (pos + meta_len > in.size()) throw Error(ErrorKind::kCorruptFile, path.string() + ": truncated metadata");
  nlohmann::json meta;
  ModelConfig config;
  ClassVocab vocab;
  FeatureKind kind{};
  try {
    meta = nlohmann::json::parse(in.substr(pos, meta_len));
    config = config_from_json(meta.at("config"));
    vocab = vocab_from_json(meta.at("vocab").dump());
    const auto k = parse_feature_kind(meta.at("feature_kind").get<std::string>());
    if (!k) throw Error(ErrorKind::kIncompatibleCheckpoint, "unknown feature kind in checkpoint");
    kind = *k;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kCorruptFile, path.string() + ": bad metadata: " + e.what());
  }
  pos += meta_len;

  ParamMap params;
  const auto count = take<uint32_t>(in, pos, path);
  for (uint32_t i = 0; i < count; ++i) {
    const auto name_len = take<uint32_t>(in, pos, path);
    if (pos + name_len > in.size()) throw Error(ErrorKind::kCorruptFile, path.string() + ": truncated name");
    std::string name = in.substr(pos, name_len);
    pos += name_len;
    const auto rows = take<uint32_t>(in, pos, path);
    const auto cols = take<uint32_t>(in, pos, path);
    Matrix m(rows, cols);
    for (auto& v : m.data) v = take<float>(in, pos, path);
    params.emplace(std::move(name), std::move(m));
  }

  Checkpoint ckpt{SequenceModel(config, std::move(params)), std::move(vocab), kind};
  ckpt.binary = meta.value("binary", false);
  ckpt.train_seed = meta.value("train_seed", uint64_t{0});
  ckpt.epoch = meta.value("epoch", size_t{0});
  ckpt.val_f1 = meta.value("val_f1", 0.0);
  return ckpt;
}

}  // namespace apesed
