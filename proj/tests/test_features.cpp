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

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "test_util.hpp"

#include "apesed/error.hpp"
#include "apesed/features.hpp"
#include "apesed/rng.hpp"

using namespace apesed;
using testutil::TempDir;

namespace {

AudioClip clip_of(size_t n, uint64_t seed = 1) {
  Rng r(seed);
  AudioClip c;
  c.clip_id = "x";
  c.samples.resize(n);
  for (auto& s : c.samples) s = static_cast<float>(r.uniform(-0.5, 0.5));
  return c;
}

FrameMatrix external_rows(size_t rows, float base = 0.0f) {
  FrameMatrix m;
  m.kind = FeatureKind::kExternal;
  m.num_frames = rows;
  m.dim = 768;
  m.values.resize(rows * 768);
  for (size_t i = 0; i < m.values.size(); ++i) m.values[i] = base + static_cast<float>(i / 768);
  return m;
}

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::kUsage;
}

}  // namespace

TEST_SUITE("features") {

TEST_CASE("waveform rows are the zero-padded frames") {
  const AudioClip c = clip_of(400);
  const FrameMatrix f = waveform_features(c, frame_grid(c));
  CHECK(f.num_frames == 2);
  CHECK(f.dim == 320);
  for (size_t i = 80; i < 320; ++i) CHECK(f.row(1)[i] == 0.0f);
  for (size_t i = 0; i < 400; ++i) CHECK(f.values[i] == c.samples[i]);

  const AudioClip d = clip_of(3200);
  const FrameMatrix g = waveform_features(d, frame_grid(d));
  CHECK(g.values == d.samples);
}

TEST_CASE("spectrogram of silence is zero") {
  AudioClip c;
  c.samples.assign(5000, 0.0f);
  const FrameMatrix f = spectrogram_features(c, frame_grid(c));
  CHECK(f.num_frames == 16);
  CHECK(f.dim == 201);
  CHECK(std::all_of(f.values.begin(), f.values.end(), [](float v) { return v == 0.0f; }));
}

TEST_CASE("power_spectrum equals a direct DFT") {
  Rng r(5);
  std::vector<double> x(400);
  for (auto& v : x) v = r.uniform(-1.0, 1.0);
  const auto fast = power_spectrum(x);
  const auto slow = oracle::dft_power(x);
  REQUIRE(fast.size() == 201);
  for (size_t k = 0; k < 201; ++k) CHECK(fast[k] == doctest::Approx(slow[k]).epsilon(1e-9).scale(1e-6));
}

TEST_CASE("Parseval on one windowed segment") {
  Rng r(6);
  const auto w = hann_window(400);
  std::vector<double> x(400);
  double energy = 0.0;
  for (size_t i = 0; i < 400; ++i) {
    x[i] = w[i] * r.uniform(-1.0, 1.0);
    energy += x[i] * x[i];
  }
  const auto p = power_spectrum(x);
  double sum = p[0] + p[200];
  for (size_t k = 1; k < 200; ++k) sum += 2.0 * p[k];
  CHECK(std::abs(sum / 400.0 - energy) / energy < 1e-3);
}

TEST_CASE("hann window is periodic") {
  const auto w = hann_window(400);
  CHECK(w[0] == 0.0);
  CHECK(w[200] == doctest::Approx(1.0));
  CHECK(w[100] == doctest::Approx(0.5));
  CHECK(w[399] == doctest::Approx(w[1]));
}

TEST_CASE("2 kHz sine peaks at bin 50") {
  AudioClip c;
  c.samples.resize(16000);
  for (size_t i = 0; i < c.samples.size(); ++i)
    c.samples[i] = static_cast<float>(0.5 * std::sin(2.0 * std::numbers::pi * 2000.0 * double(i) / 16000.0));
  const FrameMatrix f = spectrogram_features(c, frame_grid(c));
  CHECK(f.num_frames == 50);
  std::vector<double> mean(201, 0.0);
  for (size_t t = 0; t < f.num_frames; ++t)
    for (size_t k = 0; k < 201; ++k) mean[k] += f.row(t)[k];
  CHECK(std::max_element(mean.begin(), mean.end()) - mean.begin() == 50);

  // One interior column against a windowed direct DFT of the same samples.
  const auto w = hann_window(400);
  std::vector<double> seg(400);
  const size_t t = 10;
  for (size_t i = 0; i < 400; ++i) seg[i] = w[i] * c.samples[320 * t - 200 + i];
  const auto ref = oracle::dft_power(seg);
  for (size_t k = 0; k < 201; ++k) CHECK(f.row(t)[k] == doctest::Approx(ref[k]).epsilon(1e-5).scale(1e-3));
}

TEST_CASE("spectrogram edges use reflection") {
  const AudioClip c = clip_of(1000, 8);
  const FrameMatrix f = spectrogram_features(c, frame_grid(c));
  const auto w = hann_window(400);
  std::vector<double> seg(400);
  for (size_t i = 0; i < 400; ++i) {
    const long j = static_cast<long>(i) - 200;
    seg[i] = w[i] * c.samples[static_cast<size_t>(j < 0 ? -j : j)];
  }
  const auto ref = oracle::dft_power(seg);
  for (size_t k = 0; k < 201; ++k) CHECK(f.row(0)[k] == doctest::Approx(ref[k]).epsilon(1e-5).scale(1e-4));
}

TEST_CASE("all kinds yield T rows, spectrogram non-negative") {
  Rng r(3);
  for (int i = 0; i < 40; ++i) {
    const size_t len = 1 + r.below(20000);
    const AudioClip c = clip_of(len, i);
    const FrameGrid g = frame_grid(c);
    CHECK(waveform_features(c, g).num_frames == g.num_frames);
    const FrameMatrix s = spectrogram_features(c, g);
    CHECK(s.num_frames == g.num_frames);
    CHECK(s.values.size() == g.num_frames * 201);
    CHECK(std::all_of(s.values.begin(), s.values.end(), [](float v) { return v >= 0.0f; }));
  }
}

TEST_CASE("APEF round trip and header errors") {
  TempDir dir("apef");
  FrameMatrix m = external_rows(7);
  write_apef(dir / "a.apef", m);
  const FrameMatrix back = read_apef(dir / "a.apef");
  CHECK(back.values == m.values);
  CHECK(back.num_frames == 7);
  CHECK(back.dim == 768);
  CHECK(back.kind == FeatureKind::kExternal);

  const std::string bytes = testutil::slurp(dir / "a.apef");
  CHECK(bytes.substr(0, 4) == "APEF");
  CHECK(bytes.size() == 20 + 7 * 768 * 4);
  CHECK(bytes[8] == 2);

  testutil::spit(dir / "bad.apef", "NOPE" + bytes.substr(4));
  CHECK(kind_of([&] { read_apef(dir / "bad.apef"); }) == ErrorKind::kBadMagic);
  testutil::spit(dir / "short.apef", bytes.substr(0, bytes.size() - 4));
  CHECK(kind_of([&] { read_apef(dir / "short.apef"); }) == ErrorKind::kCorruptFile);
  testutil::spit(dir / "hdr.apef", bytes.substr(0, 10));
  CHECK(kind_of([&] { read_apef(dir / "hdr.apef"); }) == ErrorKind::kCorruptFile);
  CHECK(kind_of([&] { read_apef(dir / "none.apef"); }) == ErrorKind::kMissingFile);
}

TEST_CASE("external features align within two rows") {
  TempDir dir("ext");
  AudioClip c;
  c.clip_id = "x";
  c.samples.assign(320 * 50, 0.0f);
  const FrameGrid g = frame_grid(c);

  write_apef(dir / "same.apef", external_rows(50));
  const FrameMatrix same = load_external_features(dir / "same.apef", g);
  CHECK(same.values == external_rows(50).values);

  write_apef(dir / "short.apef", external_rows(49));
  const FrameMatrix padded = load_external_features(dir / "short.apef", g);
  CHECK(padded.num_frames == 50);
  CHECK(std::equal(padded.row(49).begin(), padded.row(49).end(), padded.row(48).begin()));
  CHECK(padded.row(48)[0] == 48.0f);

  write_apef(dir / "long.apef", external_rows(52));
  const FrameMatrix cut = load_external_features(dir / "long.apef", g);
  CHECK(cut.num_frames == 50);
  CHECK(cut.row(49)[0] == 49.0f);

  write_apef(dir / "far.apef", external_rows(45));
  CHECK(kind_of([&] { load_external_features(dir / "far.apef", g); }) == ErrorKind::kFrameCountMismatch);
  write_apef(dir / "far2.apef", external_rows(53));
  CHECK(kind_of([&] { load_external_features(dir / "far2.apef", g); }) == ErrorKind::kFrameCountMismatch);

  FrameMatrix narrow = external_rows(50);
  narrow.dim = 512;
  narrow.values.resize(50 * 512);
  write_apef(dir / "narrow.apef", narrow);
  CHECK(kind_of([&] { load_external_features(dir / "narrow.apef", g); }) == ErrorKind::kDimMismatch);
}

TEST_CASE("feature kind names") {
  CHECK(feature_dim(FeatureKind::kWaveform) == 320);
  CHECK(feature_dim(FeatureKind::kSpectrogram) == 201);
  CHECK(feature_dim(FeatureKind::kExternal) == 768);
  CHECK(parse_feature_kind("spectrogram") == FeatureKind::kSpectrogram);
  CHECK(parse_feature_kind("wav2vec2") == FeatureKind::kExternal);
  CHECK_FALSE(parse_feature_kind("mfcc"));
}

}  // TEST_SUITE
