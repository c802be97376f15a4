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

#ifndef APESED_CHECKPOINT_HPP_
#define APESED_CHECKPOINT_HPP_

#include <cstdint>
#include <filesystem>
#include <string>

#include "apesed/annotations.hpp"
#include "apesed/features.hpp"
#include "apesed/model.hpp"

namespace apesed {

struct Checkpoint {
  SequenceModel model;
  ClassVocab vocab;
  FeatureKind feature_kind = FeatureKind::kSpectrogram;
  bool binary = false;
  uint64_t train_seed = 0;
  size_t epoch = 0;
  double val_f1 = 0.0;
};

// Layout: "APCK", u32 format version, u64 metadata length, metadata JSON,
// u32 tensor count, then per tensor: u32 name length, name, u32 rows,
// u32 cols, rows * cols float32 values. Written to a temp file and renamed.
//
// Parameters are stored as float32; a model whose parameters are already
// float32-representable round-trips bit-exactly.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

std::string config_to_json(const ModelConfig& config);

}  // namespace apesed

#endif  // APESED_CHECKPOINT_HPP_
