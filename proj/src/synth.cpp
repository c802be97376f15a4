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

#include "apesed/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include "apesed/dataset.hpp"
#include "apesed/error.hpp"
#include "apesed/rng.hpp"

namespace apesed {

namespace fs = std::filesystem;

namespace {

constexpr long kGridMs = 20;
constexpr double kNoiseSigma = 0.01;
constexpr double kToneAmplitude = 0.3;
constexpr double kModulationHz = 6.0;
constexpr double kFadeSeconds = 0.005;

struct Span {
  long start_ms;
  long end_ms;
  uint16_t cls;
};

std::string clip_name(size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "clip%03zu", i);
  return buf;
}

std::string class_name(size_t k) { return "type" + std::to_string(k); }

double ms_to_s(long ms) { return static_cast<double>(ms) / 1000.0; }

}  // namespace

SynthCorpus generate_synthetic(const SynthConfig& config) {
  if (config.num_classes < 1 || config.num_classes > 8)
    throw Error(ErrorKind::kBadConfig, "num_classes must be in [1, 8]");
  if (config.num_clips < 5) throw Error(ErrorKind::kBadConfig, "num_clips must be at least 5");
  const long noise_frames = std::lround(config.boundary_noise * 1000.0 / kGridMs);

  Rng rng(config.seed);
  SynthCorpus out;
  size_t units_so_far = 0;
  for (size_t c = 0; c < config.num_clips; ++c) {
    const std::string id = clip_name(c);
    const long dur_ms = kGridMs * static_cast<long>(rng.uniform(3000.0, 10000.0) / kGridMs);

    // Calls sit in equal slots with at least 200 ms of margin each side.
    size_t count = 1 + rng.below(4);
    const long slot = dur_ms / static_cast<long>(count);
    std::vector<Span> spans;
    for (size_t u = 0; u < count; ++u) {
      const long slot_start = static_cast<long>(u) * slot;
      const long max_len = std::min<long>(1200, slot - 400);
      if (max_len < 300) break;
      const long len = kGridMs * static_cast<long>(rng.uniform(300.0, static_cast<double>(max_len)) / kGridMs);
      const long free = slot - 400 - len;
      const long offset = 200 + kGridMs * static_cast<long>(rng.uniform(0.0, static_cast<double>(free)) / kGridMs);
      const auto cls = static_cast<uint16_t>(units_so_far < config.num_classes
                                                 ? units_so_far + 1
                                                 : 1 + rng.below(static_cast<uint32_t>(config.num_classes)));
      ++units_so_far;
      spans.push_back({slot_start + offset, slot_start + offset + len, cls});
    }

    AudioClip clip;
    clip.clip_id = id;
    clip.sample_rate = config.sample_rate;
    const size_t n = static_cast<size_t>(std::llround(ms_to_s(dur_ms) * config.sample_rate));
    clip.samples.resize(n);
    for (auto& s : clip.samples) s = static_cast<float>(kNoiseSigma * rng.normal());
    const double phase0 = rng.uniform(0.0, 2.0 * std::numbers::pi);
    for (const auto& sp : spans) {
      const double freq = 500.0 + 700.0 * sp.cls;
      const size_t a = static_cast<size_t>(std::llround(ms_to_s(sp.start_ms) * config.sample_rate));
      const size_t b = std::min(n, static_cast<size_t>(std::llround(ms_to_s(sp.end_ms) * config.sample_rate)));
      const double len_s = static_cast<double>(b - a) / config.sample_rate;
      for (size_t i = a; i < b; ++i) {
        const double t = static_cast<double>(i - a) / config.sample_rate;
        const double edge = std::min({1.0, t / kFadeSeconds, (len_s - t) / kFadeSeconds});
        const double env = kToneAmplitude * (0.75 + 0.25 * std::sin(2.0 * std::numbers::pi * kModulationHz * t)) *
                           std::max(0.0, edge);
        clip.samples[i] += static_cast<float>(env * std::sin(2.0 * std::numbers::pi * freq * t + phase0));
        clip.samples[i] = std::clamp(clip.samples[i], -1.0f, 1.0f);
      }
    }
    for (auto& s : clip.samples) s = std::clamp(s, -1.0f, 1.0f);

    long prev_end = 0;
    for (size_t u = 0; u < spans.size(); ++u) {
      const auto& sp = spans[u];
      out.rendered.push_back({id, ms_to_s(sp.start_ms), ms_to_s(sp.end_ms), class_name(sp.cls)});
      long s = sp.start_ms, e = sp.end_ms;
      if (noise_frames > 0) {
        s += kGridMs * (static_cast<long>(rng.below(static_cast<uint32_t>(2 * noise_frames + 1))) - noise_frames);
        e += kGridMs * (static_cast<long>(rng.below(static_cast<uint32_t>(2 * noise_frames + 1))) - noise_frames);
        const long next_start = u + 1 < spans.size() ? spans[u + 1].start_ms - kGridMs * noise_frames : dur_ms;
        s = std::max(s, prev_end);
        e = std::min(e, std::min(next_start, dur_ms));
        if (e <= s) e = s + kGridMs;
      }
      prev_end = e;
      out.annotations.push_back({id, ms_to_s(s), ms_to_s(e), class_name(sp.cls)});
    }
    out.clips.push_back(std::move(clip));
  }
  return out;
}

void write_annotations(const fs::path& path, const std::vector<AnnotationUnit>& units) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  out << "clip_id\tstart\tend\tlabel\n";
  char buf[64];
  for (const auto& u : units) {
    std::snprintf(buf, sizeof buf, "%.3f\t%.3f", u.start, u.end);
    out << u.clip_id << '\t' << buf << '\t' << u.call_type << '\n';
  }
}

void write_synthetic(const fs::path& dir, const SynthCorpus& corpus, const std::string& feature_kind) {
  const auto kind = parse_feature_kind(feature_kind);
  if (!kind) throw Error(ErrorKind::kUsage, "unknown feature kind " + feature_kind);
  fs::create_directories(dir / "wav");
  Corpus manifest;
  manifest.name = "synthetic";
  manifest.feature_kind = *kind;
  manifest.vocab_path = fs::absolute(dir / "labels" / "vocab.json");
  for (const auto& clip : corpus.clips) {
    const fs::path wav = dir / "wav" / (clip.clip_id + ".wav");
    write_wav(wav, clip, WavEncoding::kPcm16);
    manifest.clips.push_back({clip.clip_id, fs::absolute(wav), fs::absolute(dir / "features" / (clip.clip_id + ".apef")),
                              fs::absolute(dir / "labels" / (clip.clip_id + ".apel"))});
  }
  write_annotations(dir / "annotations.tsv", corpus.annotations);
  write_manifest(dir / "manifest.json", manifest);
}

}  // namespace apesed
