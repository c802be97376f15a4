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

#ifndef APESED_AUDIO_HPP_
#define APESED_AUDIO_HPP_

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

namespace apesed {

inline constexpr int kSampleRate = 16000;
inline constexpr size_t kFrameLen = 320;  // 20 ms at 16 kHz
inline constexpr double kFrameSeconds = 0.02;

// Mono PCM signal. Amplitudes are in [-1, 1] and finite.
struct AudioClip {
  std::string clip_id;
  int sample_rate = kSampleRate;
  std::vector<float> samples;
  std::string source_path;
};

// Non-overlapping 20 ms frame layout of a canonical clip. The final frame is
// implicitly zero padded up to frame_len; the padding is never stored.
struct FrameGrid {
  std::string clip_id;
  size_t num_frames = 0;
  size_t frame_len = kFrameLen;
  size_t hop = kFrameLen;
  size_t num_samples = 0;

  double duration_seconds() const {
    return static_cast<double>(num_samples) / kSampleRate;
  }
};

// Reads a PCM WAV (8/16/24/32-bit int or 32-bit float, 1 or 2 channels).
// Channels are averaged; integers are scaled by 2^(bits-1). The clip id is
// the file stem.
AudioClip load_wav(const std::filesystem::path& path);

enum class WavEncoding { kPcm16, kFloat32 };

// Writes a mono WAV. Samples are clamped to [-1, 1] before encoding.
void write_wav(const std::filesystem::path& path, const AudioClip& clip,
               WavEncoding encoding = WavEncoding::kPcm16);

// Band-limited resampling with a Kaiser-windowed sinc (64 zero crossings,
// beta 14.77). Output length is round(len * target / source). Returns the
// input unchanged when the rates already match.
AudioClip resample(const AudioClip& clip, int target_rate);

inline AudioClip canonicalize(const AudioClip& clip) {
  return resample(clip, kSampleRate);
}

// T = ceil(len / 320), and at least one frame.
FrameGrid frame_grid(const AudioClip& clip);

namespace detail {
// Direct-evaluation resampler (no polyphase table); the reference the
// tabulated path is tested against.
std::vector<float> resample_direct(const std::vector<float>& in, int source_rate,
                                   int target_rate);
}  // namespace detail

}  // namespace apesed

#endif  // APESED_AUDIO_HPP_
