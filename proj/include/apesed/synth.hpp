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

#ifndef APESED_SYNTH_HPP_
#define APESED_SYNTH_HPP_

#include <cstdint>
#include <filesystem>
#include <vector>

#include "apesed/annotations.hpp"
#include "apesed/audio.hpp"

namespace apesed {

// Synthetic stand-in for a field corpus: clips of 3-10 s of low-level noise
// with inserted calls. Class k is an amplitude-modulated tone at
// 500 + 700 k Hz.
struct SynthConfig {
  uint64_t seed = 1;
  size_t num_clips = 20;
  size_t num_classes = 2;
  // Each annotated boundary is moved by up to this many seconds (a multiple
  // of 20 ms) away from the rendered call; 0 gives exact annotations.
  double boundary_noise = 0.0;
  int sample_rate = kSampleRate;
};

struct SynthCorpus {
  std::vector<AudioClip> clips;
  std::vector<AnnotationUnit> rendered;     // where the calls really are
  std::vector<AnnotationUnit> annotations;  // what the TSV says
};

// Throws BadConfig unless num_classes is in [1, 8] and num_clips >= 5.
SynthCorpus generate_synthetic(const SynthConfig& config);

// Writes <dir>/wav/<id>.wav (16-bit), <dir>/annotations.tsv and a manifest
// <dir>/manifest.json pointing at <dir>/features/<id>.apef,
// <dir>/labels/<id>.apel and <dir>/labels/vocab.json (produced later by the
// featurize and annotate steps).
void write_synthetic(const std::filesystem::path& dir, const SynthCorpus& corpus,
                     const std::string& feature_kind = "spectrogram");

void write_annotations(const std::filesystem::path& path, const std::vector<AnnotationUnit>& units);

}  // namespace apesed

#endif  // APESED_SYNTH_HPP_
