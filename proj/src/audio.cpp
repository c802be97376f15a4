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

#include "apesed/audio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <span>
#include <fstream>
#include <iterator>
#include <numeric>

#include "apesed/error.hpp"

namespace apesed {

namespace {

constexpr uint16_t kFormatPcm = 1;
constexpr uint16_t kFormatFloat = 3;
constexpr uint16_t kFormatExtensible = 0xFFFE;

uint16_t read_u16(const uint8_t* p) { return static_cast<uint16_t>(p[0] | (p[1] << 8)); }
uint32_t read_u32(const uint8_t* p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
         (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}

void put_u16(std::vector<uint8_t>& out, uint16_t v) {
  out.push_back(static_cast<uint8_t>(v & 0xff));
  out.push_back(static_cast<uint8_t>(v >> 8));
}
void put_u32(std::vector<uint8_t>& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>((v >> (8 * i)) & 0xff));
}
void put_tag(std::vector<uint8_t>& out, const char* tag) { out.insert(out.end(), tag, tag + 4); }

struct WavFormat {
  uint16_t tag = 0;
  uint16_t channels = 0;
  uint32_t sample_rate = 0;
  uint16_t bits = 0;
};

double decode_sample(const uint8_t* p, const WavFormat& fmt) {
  if (fmt.tag == kFormatFloat) {
    float v;
    std::memcpy(&v, p, sizeof v);
    return v;
  }
  switch (fmt.bits) {
    case 8:
      return (static_cast<int>(p[0]) - 128) / 128.0;
    case 16:
      return static_cast<int16_t>(read_u16(p)) / 32768.0;
    case 24: {
      int32_t v = p[0] | (p[1] << 8) | (p[2] << 16);
      if (v & 0x800000) v -= 0x1000000;
      return v / 8388608.0;
    }
    default:
      return static_cast<int32_t>(read_u32(p)) / 2147483648.0;
  }
}

// Kaiser-windowed sinc low-pass. Parameters follow the common "best"
// quality preset of band-limited audio resamplers.
constexpr double kZeroCrossings = 64.0;
constexpr double kKaiserBeta = 14.769656459379492;
constexpr double kRolloff = 0.9475937167399596;
constexpr uint64_t kMaxPhases = 4096;

struct SincFilter {
  double cutoff;      // normalized to the source Nyquist
  double half_width;  // in source samples
  long taps_per_side;
  double i0_beta;

  SincFilter(int source_rate, int target_rate) {
    cutoff = std::min(1.0, static_cast<double>(target_rate) / source_rate) * kRolloff;
    half_width = kZeroCrossings / cutoff;
    taps_per_side = static_cast<long>(std::ceil(half_width));
    i0_beta = std::cyl_bessel_i(0.0, kKaiserBeta);
  }

  double operator()(double x) const {
    const double r = x / half_width;
    if (r <= -1.0 || r >= 1.0) return 0.0;
    const double arg = cutoff * x;
    const double sinc =
        arg == 0.0 ? 1.0 : std::sin(M_PI * arg) / (M_PI * arg);
    const double window = std::cyl_bessel_i(0.0, kKaiserBeta * std::sqrt(1.0 - r * r)) / i0_beta;
    return cutoff * sinc * window;
  }

  // Taps for an output instant at fractional offset `frac` past source sample
  // `base`; tap k multiplies source sample base - taps_per_side + 1 + k.
  void fill(double frac, std::span<double> taps) const {
    for (size_t k = 0; k < taps.size(); ++k)
      taps[k] = (*this)(frac + static_cast<double>(taps_per_side) - 1.0 - static_cast<double>(k));
  }
};

uint64_t output_length(size_t len, int source_rate, int target_rate) {
  const uint64_t num = static_cast<uint64_t>(len) * static_cast<uint64_t>(target_rate);
  const uint64_t out = (2 * num + static_cast<uint64_t>(source_rate)) / (2 * static_cast<uint64_t>(source_rate));
  return std::max<uint64_t>(out, 1);
}

float apply_taps(const std::vector<float>& in, long base, long taps_per_side,
                 std::span<const double> taps) {
  const long first = base - taps_per_side + 1;
  const long n = static_cast<long>(in.size());
  const long k0 = std::max<long>(0, -first);
  const long k1 = std::min<long>(static_cast<long>(taps.size()), n - first);
  double acc = 0.0;
  for (long k = k0; k < k1; ++k) acc += taps[k] * in[first + k];
  return static_cast<float>(std::clamp(acc, -1.0, 1.0));
}

}  // namespace

AudioClip load_wav(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  const std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(file)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw Error(ErrorKind::kCorruptFile, path.string() + ": missing RIFF/WAVE header");
  }

  WavFormat fmt;
  bool have_fmt = false;
  const uint8_t* data = nullptr;
  size_t data_size = 0;
  size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const uint8_t* chunk = bytes.data() + pos;
    const uint32_t size = read_u32(chunk + 4);
    const size_t body = pos + 8;
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16 || body + size > bytes.size())
        throw Error(ErrorKind::kCorruptFile, path.string() + ": truncated fmt chunk");
      fmt.tag = read_u16(bytes.data() + body);
      fmt.channels = read_u16(bytes.data() + body + 2);
      fmt.sample_rate = read_u32(bytes.data() + body + 4);
      fmt.bits = read_u16(bytes.data() + body + 14);
      if (fmt.tag == kFormatExtensible) {
        if (size < 40) throw Error(ErrorKind::kCorruptFile, path.string() + ": short extensible fmt");
        fmt.tag = read_u16(bytes.data() + body + 24);
      }
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      if (body + size > bytes.size())
        throw Error(ErrorKind::kCorruptFile, path.string() + ": truncated data chunk");
      data = bytes.data() + body;
      data_size = size;
      break;
    }
    pos = body + size + (size & 1u);
  }
  if (!have_fmt) throw Error(ErrorKind::kCorruptFile, path.string() + ": no fmt chunk");
  if (data == nullptr) throw Error(ErrorKind::kCorruptFile, path.string() + ": no data chunk");

  const bool pcm_ok = fmt.tag == kFormatPcm &&
                      (fmt.bits == 8 || fmt.bits == 16 || fmt.bits == 24 || fmt.bits == 32);
  const bool float_ok = fmt.tag == kFormatFloat && fmt.bits == 32;
  if (!pcm_ok && !float_ok)
    throw Error(ErrorKind::kUnsupportedFormat,
                path.string() + ": format tag " + std::to_string(fmt.tag) + " with " +
                    std::to_string(fmt.bits) + " bits");
  if (fmt.channels < 1 || fmt.channels > 2)
    throw Error(ErrorKind::kUnsupportedFormat,
                path.string() + ": " + std::to_string(fmt.channels) + " channels");
  if (fmt.sample_rate == 0) throw Error(ErrorKind::kCorruptFile, path.string() + ": zero sample rate");

  const size_t frame_bytes = static_cast<size_t>(fmt.bits / 8) * fmt.channels;
  const size_t num_frames = data_size / frame_bytes;
  if (num_frames == 0) throw Error(ErrorKind::kEmptyAudio, path.string() + ": no samples");

  AudioClip clip;
  clip.clip_id = path.stem().string();
  clip.sample_rate = static_cast<int>(fmt.sample_rate);
  clip.source_path = path.string();
  clip.samples.resize(num_frames);
  const size_t bytes_per_sample = fmt.bits / 8;
  for (size_t i = 0; i < num_frames; ++i) {
    double sum = 0.0;
    for (size_t ch = 0; ch < fmt.channels; ++ch)
      sum += decode_sample(data + i * frame_bytes + ch * bytes_per_sample, fmt);
    const double v = sum / fmt.channels;
    if (!std::isfinite(v)) throw Error(ErrorKind::kCorruptFile, path.string() + ": non-finite sample");
    clip.samples[i] = static_cast<float>(std::clamp(v, -1.0, 1.0));
  }
  return clip;
}

void write_wav(const std::filesystem::path& path, const AudioClip& clip, WavEncoding encoding) {
  const bool is_float = encoding == WavEncoding::kFloat32;
  const uint16_t bits = is_float ? 32 : 16;
  const uint32_t data_size = static_cast<uint32_t>(clip.samples.size() * (bits / 8));

  std::vector<uint8_t> out;
  out.reserve(44 + data_size);
  put_tag(out, "RIFF");
  put_u32(out, 36 + data_size);
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put_u32(out, 16);
  put_u16(out, is_float ? kFormatFloat : kFormatPcm);
  put_u16(out, 1);
  put_u32(out, static_cast<uint32_t>(clip.sample_rate));
  put_u32(out, static_cast<uint32_t>(clip.sample_rate) * (bits / 8));
  put_u16(out, bits / 8);
  put_u16(out, bits);
  put_tag(out, "data");
  put_u32(out, data_size);
  for (float s : clip.samples) {
    const float v = std::clamp(s, -1.0f, 1.0f);
    if (is_float) {
      uint32_t raw;
      std::memcpy(&raw, &v, sizeof raw);
      put_u32(out, raw);
    } else {
      const long q = std::lround(static_cast<double>(v) * 32768.0);
      put_u16(out, static_cast<uint16_t>(static_cast<int16_t>(std::clamp<long>(q, -32768, 32767))));
    }
  }

  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  file.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
  if (!file) throw Error(ErrorKind::kIo, "short write to " + path.string());
}

AudioClip resample(const AudioClip& clip, int target_rate) {
  if (target_rate < 8000) throw Error(ErrorKind::kUsage, "target rate below 8000 Hz");
  if (clip.samples.empty()) throw Error(ErrorKind::kEmptyAudio, clip.clip_id + ": no samples");
  if (clip.sample_rate == target_rate) return clip;

  const int g = std::gcd(clip.sample_rate, target_rate);
  const uint64_t up = static_cast<uint64_t>(target_rate / g);
  const uint64_t down = static_cast<uint64_t>(clip.sample_rate / g);
  const uint64_t out_len = output_length(clip.samples.size(), clip.sample_rate, target_rate);
  const SincFilter filter(clip.sample_rate, target_rate);
  const size_t width = static_cast<size_t>(2 * filter.taps_per_side);

  AudioClip out;
  out.clip_id = clip.clip_id;
  out.sample_rate = target_rate;
  out.source_path = clip.source_path;
  out.samples.resize(out_len);

  if (up > kMaxPhases) {
    out.samples = detail::resample_direct(clip.samples, clip.sample_rate, target_rate);
    return out;
  }

  // Polyphase table: one filter per distinct fractional offset.
  std::vector<double> table(up * width);
  for (uint64_t phase = 0; phase < up; ++phase)
    filter.fill(static_cast<double>(phase) / static_cast<double>(up),
                std::span<double>(table.data() + phase * width, width));

  const std::vector<float>& in = clip.samples;
#pragma omp parallel for schedule(static)
  for (uint64_t n = 0; n < out_len; ++n) {
    const uint64_t pos = n * down;
    const long base = static_cast<long>(pos / up);
    const uint64_t phase = pos % up;
    out.samples[n] = apply_taps(in, base, filter.taps_per_side,
                                std::span<const double>(table.data() + phase * width, width));
  }
  return out;
}

namespace detail {

std::vector<float> resample_direct(const std::vector<float>& in, int source_rate, int target_rate) {
  const uint64_t out_len = output_length(in.size(), source_rate, target_rate);
  const SincFilter filter(source_rate, target_rate);
  const uint64_t up = static_cast<uint64_t>(target_rate);
  const uint64_t down = static_cast<uint64_t>(source_rate);
  std::vector<float> out(out_len);
  std::vector<double> taps(static_cast<size_t>(2 * filter.taps_per_side));
  for (uint64_t n = 0; n < out_len; ++n) {
    const uint64_t pos = n * down;
    filter.fill(static_cast<double>(pos % up) / static_cast<double>(up), taps);
    out[n] = apply_taps(in, static_cast<long>(pos / up), filter.taps_per_side, taps);
  }
  return out;
}

}  // namespace detail

FrameGrid frame_grid(const AudioClip& clip) {
  FrameGrid grid;
  grid.clip_id = clip.clip_id;
  grid.num_samples = clip.samples.size();
  grid.num_frames = std::max<size_t>(1, (clip.samples.size() + kFrameLen - 1) / kFrameLen);
  return grid;
}

}  // namespace apesed
