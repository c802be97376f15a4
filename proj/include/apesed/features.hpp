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

#ifndef APESED_FEATURES_HPP_
#define APESED_FEATURES_HPP_

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "apesed/audio.hpp"

namespace apesed {

enum class FeatureKind : uint8_t { kWaveform = 0, kSpectrogram = 1, kExternal = 2 };

size_t feature_dim(FeatureKind kind);
std::string_view to_string(FeatureKind kind);
std::optional<FeatureKind> parse_feature_kind(std::string_view name);

// T x D per-frame features, row t = frame t.
struct FrameMatrix {
  std::string clip_id;
  FeatureKind kind = FeatureKind::kWaveform;
  size_t num_frames = 0;
  size_t dim = 0;
  std::vector<float> values;

  std::span<const float> row(size_t t) const { return {values.data() + t * dim, dim}; }
};

// Row t holds samples [320t, 320t + 320), zero padded in the last row.
FrameMatrix waveform_features(const AudioClip& clip, const FrameGrid& grid);

inline constexpr size_t kFftSize = 400;
inline constexpr size_t kSpectrogramBins = kFftSize / 2 + 1;

// Power spectrogram: Hann window (periodic), n_fft 400, hop 320, reflect
// padded and centered, magnitude squared, no log. Columns are truncated or
// edge-replicated to exactly grid.num_frames rows.
FrameMatrix spectrogram_features(const AudioClip& clip, const FrameGrid& grid);

// |FFT(x)|^2 for one 400-sample segment (no window applied here).
std::vector<double> power_spectrum(std::span<const double> segment);

// Periodic Hann window of length n.
std::vector<double> hann_window(size_t n);

// Reads an exported 768-dim APEF file and aligns it to the grid: up to two
// missing rows are filled by repeating the last row, extra rows are dropped.
FrameMatrix load_external_features(const std::filesystem::path& path, const FrameGrid& grid);

// Maximum |rows - T| tolerated when aligning external features.
inline constexpr size_t kExternalFrameTolerance = 2;

// Truncates or edge-replicates rows to `frames`; throws FrameCountMismatch if
// more than `tolerance` rows would have to change.
FrameMatrix align_rows(FrameMatrix features, size_t frames, size_t tolerance);

// APEF container (little-endian): "APEF", u32 version = 1, u8 kind,
// 3 reserved bytes, u32 num_frames, u32 dim, then float32 rows.
void write_apef(const std::filesystem::path& path, const FrameMatrix& features);
FrameMatrix read_apef(const std::filesystem::path& path);

}  // namespace apesed

#endif  // APESED_FEATURES_HPP_
