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

#ifndef APESED_DATASET_HPP_
#define APESED_DATASET_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "apesed/annotations.hpp"
#include "apesed/features.hpp"

namespace apesed {

struct ClipEntry {
  std::string id;
  std::filesystem::path wav;
  std::filesystem::path apef;
  std::filesystem::path apel;
};

struct Corpus {
  std::string name;
  FeatureKind feature_kind = FeatureKind::kSpectrogram;
  std::filesystem::path vocab_path;
  ClassVocab vocab;
  std::vector<ClipEntry> clips;

  const ClipEntry& clip(const std::string& id) const;
};

// Manifest JSON: {name, feature_kind, vocab_path, clips: [{id, wav, apef, apel}]}.
// Relative paths resolve against the manifest's directory. The vocabulary
// file is loaded eagerly.
Corpus load_manifest(const std::filesystem::path& path);
// Paths are written relative to the manifest directory when possible.
void write_manifest(const std::filesystem::path& path, const Corpus& corpus);

struct Split {
  uint64_t seed = 0;
  std::vector<std::string> train;
  std::vector<std::string> val;
  std::vector<std::string> test;

  friend bool operator==(const Split&, const Split&) = default;
};

// Sorts clip ids, shuffles them with Fisher-Yates driven by Rng(seed) and cuts
// floor(0.8 N) train, floor(0.1 N) validation, remainder test.
Split make_split(std::vector<std::string> clip_ids, uint64_t seed);
Split make_split(const Corpus& corpus, uint64_t seed);

void write_split(const std::filesystem::path& path, const Split& split);
Split read_split(const std::filesystem::path& path);

enum class Partition { kTrain, kVal, kTest };
const std::vector<std::string>& partition_ids(const Split& split, Partition p);

struct Example {
  FrameMatrix features;
  LabelTrack labels;
};

// Loads aligned feature/label pairs. External features may differ from the
// label length by up to two rows (aligned by featurize rules); any other
// mismatch is an AlignmentError. With `binary`, labels are collapsed.
std::vector<Example> load_pairs(const Corpus& corpus, const std::vector<std::string>& ids,
                                bool binary = false);

// count[k] = frames labelled k, for k in [0, num_classes).
std::vector<size_t> class_occurrences(const std::vector<Example>& examples, size_t num_classes);

}  // namespace apesed

#endif  // APESED_DATASET_HPP_
