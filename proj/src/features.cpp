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

#include "apesed/features.hpp"

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <mutex>
#include <numbers>

#include "apesed/error.hpp"

namespace apesed {

static_assert(std::endian::native == std::endian::little,
              "binary containers are written in host order");

namespace {

constexpr uint32_t kApefVersion = 1;

// FFTW planning is not thread safe; execution with new arrays is.
class RealFft {
 public:
  explicit RealFft(size_t n) : n_(n) {
    std::lock_guard lock(planner_mutex());
    std::vector<double> in(n);
    std::vector<fftw_complex> out(n / 2 + 1);
    plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), in.data(), out.data(),
                                 FFTW_ESTIMATE | FFTW_UNALIGNED);
  }
  ~RealFft() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan_);
  }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  void power(std::span<const double> in, std::span<double> out) const {
    std::vector<double> buf(in.begin(), in.end());
    std::vector<fftw_complex> spec(n_ / 2 + 1);
    fftw_execute_dft_r2c(plan_, buf.data(), spec.data());
    for (size_t k = 0; k < spec.size(); ++k)
      out[k] = spec[k][0] * spec[k][0] + spec[k][1] * spec[k][1];
  }

 private:
  static std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
  }
  size_t n_;
  fftw_plan plan_;
};

const RealFft& fft400() {
  static const RealFft fft(kFftSize);
  return fft;
}

// Reflection without repeating the edge sample; handles pads longer than the
// signal by bouncing back and forth.
long reflect_index(long i, long n) {
  if (n == 1) return 0;
  const long period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

void put_u32(std::ofstream& out, uint32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); }

}  // namespace

size_t feature_dim(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::kWaveform: return kFrameLen;
    case FeatureKind::kSpectrogram: return kSpectrogramBins;
    case FeatureKind::kExternal: return 768;
  }
  return 0;
}

std::string_view to_string(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::kWaveform: return "waveform";
    case FeatureKind::kSpectrogram: return "spectrogram";
    case FeatureKind::kExternal: return "external";
  }
  return "unknown";
}

std::optional<FeatureKind> parse_feature_kind(std::string_view name) {
  if (name == "waveform") return FeatureKind::kWaveform;
  if (name == "spectrogram") return FeatureKind::kSpectrogram;
  if (name == "external" || name == "wav2vec2") return FeatureKind::kExternal;
  return std::nullopt;
}

FrameMatrix waveform_features(const AudioClip& clip, const FrameGrid& grid) {
  FrameMatrix out;
  out.clip_id = clip.clip_id;
  out.kind = FeatureKind::kWaveform;
  out.num_frames = grid.num_frames;
  out.dim = kFrameLen;
  out.values.assign(grid.num_frames * kFrameLen, 0.0f);
  const size_t n = std::min(clip.samples.size(), out.values.size());
  std::copy_n(clip.samples.begin(), n, out.values.begin());
  return out;
}

std::vector<double> hann_window(size_t n) {
  std::vector<double> w(n);
  for (size_t i = 0; i < n; ++i)
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));
  return w;
}

std::vector<double> power_spectrum(std::span<const double> segment) {
  if (segment.size() != kFftSize)
    throw Error(ErrorKind::kDimMismatch, "power_spectrum expects 400 samples");
  std::vector<double> out(kSpectrogramBins);
  fft400().power(segment, out);
  return out;
}

FrameMatrix spectrogram_features(const AudioClip& clip, const FrameGrid& grid) {
  static const std::vector<double> window = hann_window(kFftSize);
  const long len = static_cast<long>(clip.samples.size());
  const long half = static_cast<long>(kFftSize / 2);
  const size_t columns = static_cast<size_t>(len) / kFrameLen + 1;
  const size_t computed = std::min(columns, grid.num_frames);

  FrameMatrix out;
  out.clip_id = clip.clip_id;
  out.kind = FeatureKind::kSpectrogram;
  out.num_frames = grid.num_frames;
  out.dim = kSpectrogramBins;
  out.values.assign(grid.num_frames * kSpectrogramBins, 0.0f);

  const RealFft& fft = fft400();
#pragma omp parallel
  {
    std::vector<double> segment(kFftSize);
    std::vector<double> power(kSpectrogramBins);
#pragma omp for schedule(static)
    for (size_t col = 0; col < computed; ++col) {
      const long start = static_cast<long>(col * kFrameLen) - half;
      for (size_t i = 0; i < kFftSize; ++i)
        segment[i] = window[i] * clip.samples[reflect_index(start + static_cast<long>(i), len)];
      fft.power(segment, power);
      float* dst = out.values.data() + col * kSpectrogramBins;
      for (size_t k = 0; k < kSpectrogramBins; ++k) dst[k] = static_cast<float>(power[k]);
    }
  }
  for (size_t t = computed; t < grid.num_frames; ++t)
    std::copy_n(out.values.begin() + (computed - 1) * kSpectrogramBins, kSpectrogramBins,
                out.values.begin() + t * kSpectrogramBins);
  return out;
}

FrameMatrix align_rows(FrameMatrix features, size_t frames, size_t tolerance) {
  const size_t have = features.num_frames;
  const size_t diff = have > frames ? have - frames : frames - have;
  if (diff > tolerance || have == 0)
    throw Error(ErrorKind::kFrameCountMismatch,
                features.clip_id + ": " + std::to_string(have) + " feature rows for " +
                    std::to_string(frames) + " frames");
  if (have > frames) {
    features.values.resize(frames * features.dim);
  } else {
    const std::vector<float> last(features.values.end() - static_cast<long>(features.dim),
                                  features.values.end());
    for (size_t t = have; t < frames; ++t)
      features.values.insert(features.values.end(), last.begin(), last.end());
  }
  features.num_frames = frames;
  return features;
}

FrameMatrix load_external_features(const std::filesystem::path& path, const FrameGrid& grid) {
  FrameMatrix features = read_apef(path);
  if (features.dim != feature_dim(FeatureKind::kExternal))
    throw Error(ErrorKind::kDimMismatch,
                path.string() + ": dim " + std::to_string(features.dim) + ", expected 768");
  features.kind = FeatureKind::kExternal;
  features.clip_id = grid.clip_id;
  return align_rows(std::move(features), grid.num_frames, kExternalFrameTolerance);
}

void write_apef(const std::filesystem::path& path, const FrameMatrix& features) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  out.write("APEF", 4);
  put_u32(out, kApefVersion);
  const char kind_and_reserved[4] = {static_cast<char>(features.kind), 0, 0, 0};
  out.write(kind_and_reserved, 4);
  put_u32(out, static_cast<uint32_t>(features.num_frames));
  put_u32(out, static_cast<uint32_t>(features.dim));
  out.write(reinterpret_cast<const char*>(features.values.data()),
            static_cast<std::streamsize>(features.values.size() * sizeof(float)));
  if (!out) throw Error(ErrorKind::kIo, "short write to " + path.string());
}

FrameMatrix read_apef(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kMissingFile, "missing feature file " + path.string());
  char header[20];
  in.read(header, sizeof header);
  if (in.gcount() >= 4 && std::memcmp(header, "APEF", 4) != 0)
    throw Error(ErrorKind::kBadMagic, path.string() + ": not an APEF file");
  if (in.gcount() != sizeof header)
    throw Error(ErrorKind::kCorruptFile, path.string() + ": truncated header");
  uint32_t version, frames, dim;
  std::memcpy(&version, header + 4, 4);
  std::memcpy(&frames, header + 12, 4);
  std::memcpy(&dim, header + 16, 4);
  if (version != kApefVersion)
    throw Error(ErrorKind::kUnsupportedFormat, path.string() + ": APEF version " + std::to_string(version));
  const auto kind = static_cast<uint8_t>(header[8]);
  if (kind > 2) throw Error(ErrorKind::kCorruptFile, path.string() + ": bad feature kind");

  FrameMatrix out;
  out.clip_id = path.stem().string();
  out.kind = static_cast<FeatureKind>(kind);
  out.num_frames = frames;
  out.dim = dim;
  out.values.resize(static_cast<size_t>(frames) * dim);
  in.read(reinterpret_cast<char*>(out.values.data()),
          static_cast<std::streamsize>(out.values.size() * sizeof(float)));
  if (static_cast<size_t>(in.gcount()) != out.values.size() * sizeof(float))
    throw Error(ErrorKind::kCorruptFile, path.string() + ": truncated payload");
  for (float v : out.values)
    if (!std::isfinite(v)) throw Error(ErrorKind::kCorruptFile, path.string() + ": non-finite value");
  return out;
}

}  // namespace apesed
