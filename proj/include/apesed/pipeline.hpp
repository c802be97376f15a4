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

#ifndef APESED_PIPELINE_HPP_
#define APESED_PIPELINE_HPP_

#include <filesystem>
#include <optional>
#include <vector>

#include "apesed/features.hpp"

namespace apesed {

// Directory-level steps behind the prep / featurize / annotate commands. Each
// returns the files it wrote, in sorted order.
using PathList = std::vector<std::filesystem::path>;

// Every *.wav under in_dir (sorted, non-recursive) becomes a 16 kHz mono
// float32 WAV of the same name in out_dir.
PathList prep_directory(const std::filesystem::path& in_dir, const std::filesystem::path& out_dir);

// Writes <out_dir>/<stem>.apef for every canonical WAV in wav_dir. For the
// external kind the APEF files must already exist in external_dir (default:
// out_dir); they are validated against the frame grid and re-written aligned.
PathList featurize_directory(FeatureKind kind, const std::filesystem::path& wav_dir,
                             const std::filesystem::path& out_dir,
                             const std::optional<std::filesystem::path>& external_dir = std::nullopt);

// The exporter command that produces the external features featurize expects.
std::string exporter_hint(const std::filesystem::path& wav_dir, const std::filesystem::path& out_dir);

// Rasterizes the TSV against the WAVs in wav_dir; writes <stem>.apel per WAV
// plus vocab.json into out_dir. Clips without annotations are all non-call.
PathList annotate_directory(const std::filesystem::path& tsv, const std::filesystem::path& wav_dir,
                            const std::filesystem::path& out_dir);

PathList list_wavs(const std::filesystem::path& dir);

}  // namespace apesed

#endif  // APESED_PIPELINE_HPP_
