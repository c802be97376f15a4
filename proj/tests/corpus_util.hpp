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

// Builds a ready-to-train synthetic corpus on disk (WAVs, features, labels,
// manifest) through the same directory steps the command line uses.

#ifndef APESED_TESTS_CORPUS_UTIL_HPP_
#define APESED_TESTS_CORPUS_UTIL_HPP_

#include <filesystem>

#include "apesed/dataset.hpp"
#include "apesed/pipeline.hpp"
#include "apesed/synth.hpp"

namespace testutil {

inline apesed::Corpus build_corpus(const std::filesystem::path& dir, const apesed::SynthConfig& cfg,
                                   apesed::FeatureKind kind = apesed::FeatureKind::kSpectrogram,
                                   apesed::SynthCorpus* out = nullptr) {
  const apesed::SynthCorpus synth = apesed::generate_synthetic(cfg);
  apesed::write_synthetic(dir, synth, std::string(apesed::to_string(kind)));
  apesed::featurize_directory(kind, dir / "wav", dir / "features");
  apesed::annotate_directory(dir / "annotations.tsv", dir / "wav", dir / "labels");
  if (out) *out = synth;
  return apesed::load_manifest(dir / "manifest.json");
}

}  // namespace testutil

#endif  // APESED_TESTS_CORPUS_UTIL_HPP_
