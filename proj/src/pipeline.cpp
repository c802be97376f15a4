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

#include "apesed/pipeline.hpp"

#include <algorithm>
#include <set>

#include "apesed/annotations.hpp"
#include "apesed/audio.hpp"
#include "apesed/error.hpp"

namespace apesed {

namespace fs = std::filesystem;

PathList list_wavs(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(ErrorKind::kMissingFile, "no such directory " + dir.string());
  PathList out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    auto ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".wav") out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

PathList prep_directory(const fs::path& in_dir, const fs::path& out_dir) {
  const PathList wavs = list_wavs(in_dir);
  fs::create_directories(out_dir);
  PathList written;
  for (const auto& path : wavs) {
    const AudioClip clip = canonicalize(load_wav(path));
    const fs::path dst = out_dir / (path.stem().string() + ".wav");
    write_wav(dst, clip, WavEncoding::kFloat32);
    written.push_back(dst);
  }
  return written;
}

std::string exporter_hint(const fs::path& wav_dir, const fs::path& out_dir) {
  return "export_wav2vec --in " + wav_dir.string() + " --out " + out_dir.string();
}

PathList featurize_directory(FeatureKind kind, const fs::path& wav_dir, const fs::path& out_dir,
                             const std::optional<fs::path>& external_dir) {
  const PathList wavs = list_wavs(wav_dir);
  fs::create_directories(out_dir);
  const fs::path ext_dir = external_dir.value_or(out_dir);
  if (kind == FeatureKind::kExternal) {
    for (const auto& wav : wavs) {
      const fs::path apef = ext_dir / (wav.stem().string() + ".apef");
      if (!fs::exists(apef))
        throw Error(ErrorKind::kMissingFile,
                    "missing external features " + apef.string() + "; run: " + exporter_hint(wav_dir, ext_dir));
    }
  }
  PathList written;
  for (const auto& wav : wavs) {
    const AudioClip raw = load_wav(wav);
    if (raw.sample_rate != kSampleRate)
      throw Error(ErrorKind::kUnsupportedFormat, wav.string() + ": not canonical 16 kHz (run prep first)");
    AudioClip clip = raw;
    clip.clip_id = wav.stem().string();
    const FrameGrid grid = frame_grid(clip);
    FrameMatrix features;
    switch (kind) {
      case FeatureKind::kWaveform: features = waveform_features(clip, grid); break;
      case FeatureKind::kSpectrogram: features = spectrogram_features(clip, grid); break;
      case FeatureKind::kExternal:
        features = load_external_features(ext_dir / (clip.clip_id + ".apef"), grid);
        break;
    }
    const fs::path dst = out_dir / (clip.clip_id + ".apef");
    write_apef(dst, features);
    written.push_back(dst);
  }
  return written;
}

PathList annotate_directory(const fs::path& tsv, const fs::path& wav_dir, const fs::path& out_dir) {
  const auto units = parse_annotations(tsv);
  const ClassVocab vocab = build_vocab(units);
  const auto by_clip = group_by_clip(units);
  const PathList wavs = list_wavs(wav_dir);

  std::set<std::string> known;
  for (const auto& w : wavs) known.insert(w.stem().string());
  for (const auto& [id, _] : by_clip)
    if (!known.count(id)) throw Error(ErrorKind::kMissingFile, "annotated clip " + id + " has no WAV in " + wav_dir.string());

  fs::create_directories(out_dir);
  PathList written;
  for (const auto& wav : wavs) {
    AudioClip clip = canonicalize(load_wav(wav));
    clip.clip_id = wav.stem().string();
    const FrameGrid grid = frame_grid(clip);
    static const std::vector<AnnotationUnit> kNone;
    const auto it = by_clip.find(clip.clip_id);
    const LabelTrack track = rasterize(it == by_clip.end() ? kNone : it->second, grid, vocab);
    const fs::path dst = out_dir / (clip.clip_id + ".apel");
    write_apel(dst, track);
    written.push_back(dst);
  }
  write_vocab(out_dir / "vocab.json", vocab);
  written.push_back(out_dir / "vocab.json");
  return written;
}

}  // namespace apesed
