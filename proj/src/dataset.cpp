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

#include "apesed/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "apesed/error.hpp"
#include "apesed/rng.hpp"
#include "json.hpp"

namespace apesed {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json read_json(const fs::path& path, const char* what) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, std::string("cannot open ") + what + " " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kParseError, path.string() + ": " + e.what());
  }
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

std::string relative_to(const fs::path& base, const fs::path& p) {
  if (p.empty()) return {};
  if (!p.is_absolute()) return p.generic_string();
  const auto rel = p.lexically_relative(base);
  return rel.empty() ? p.generic_string() : rel.generic_string();
}

}  // namespace

const ClipEntry& Corpus::clip(const std::string& id) const {
  const auto it = std::find_if(clips.begin(), clips.end(), [&](const ClipEntry& c) { return c.id == id; });
  if (it == clips.end()) throw Error(ErrorKind::kMissingFile, "clip " + id + " not in corpus " + name);
  return *it;
}

Corpus load_manifest(const fs::path& path) {
  const json j = read_json(path, "manifest");
  const fs::path base = fs::absolute(path).parent_path();
  Corpus corpus;
  try {
    corpus.name = j.at("name").get<std::string>();
    const auto kind = parse_feature_kind(j.at("feature_kind").get<std::string>());
    if (!kind) throw Error(ErrorKind::kParseError, path.string() + ": unknown feature_kind");
    corpus.feature_kind = *kind;
    corpus.vocab_path = resolve(base, j.at("vocab_path").get<std::string>());
    std::set<std::string> seen;
    for (const auto& c : j.at("clips")) {
      ClipEntry entry;
      entry.id = c.at("id").get<std::string>();
      if (!seen.insert(entry.id).second)
        throw Error(ErrorKind::kParseError, path.string() + ": duplicate clip id " + entry.id);
      entry.wav = resolve(base, c.value("wav", std::string()));
      entry.apef = resolve(base, c.at("apef").get<std::string>());
      entry.apel = resolve(base, c.at("apel").get<std::string>());
      corpus.clips.push_back(std::move(entry));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kParseError, path.string() + ": " + e.what());
  }
  corpus.vocab = read_vocab(corpus.vocab_path);
  return corpus;
}

void write_manifest(const fs::path& path, const Corpus& corpus) {
  const fs::path base = fs::absolute(path).parent_path();
  nlohmann::ordered_json j;
  j["name"] = corpus.name;
  j["feature_kind"] = std::string(to_string(corpus.feature_kind));
  j["vocab_path"] = relative_to(base, fs::absolute(corpus.vocab_path));
  j["clips"] = nlohmann::ordered_json::array();
  for (const auto& c : corpus.clips) {
    nlohmann::ordered_json e;
    e["id"] = c.id;
    e["wav"] = relative_to(base, c.wav.empty() ? c.wav : fs::absolute(c.wav));
    e["apef"] = relative_to(base, fs::absolute(c.apef));
    e["apel"] = relative_to(base, fs::absolute(c.apel));
    j["clips"].push_back(std::move(e));
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  out << j.dump(2) << "\n";
}

Split make_split(std::vector<std::string> clip_ids, uint64_t seed) {
  const size_t n = clip_ids.size();
  if (n < 3) throw Error(ErrorKind::kTooFewClips, "need at least 3 clips, have " + std::to_string(n));
  std::sort(clip_ids.begin(), clip_ids.end());
  Rng rng(seed);
  rng.shuffle(std::span<std::string>(clip_ids));
  const size_t n_train = n * 8 / 10;
  const size_t n_val = n / 10;
  Split split;
  split.seed = seed;
  split.train.assign(clip_ids.begin(), clip_ids.begin() + static_cast<long>(n_train));
  split.val.assign(clip_ids.begin() + static_cast<long>(n_train),
                   clip_ids.begin() + static_cast<long>(n_train + n_val));
  split.test.assign(clip_ids.begin() + static_cast<long>(n_train + n_val), clip_ids.end());
  return split;
}

Split make_split(const Corpus& corpus, uint64_t seed) {
  std::vector<std::string> ids;
  ids.reserve(corpus.clips.size());
  for (const auto& c : corpus.clips) ids.push_back(c.id);
  return make_split(std::move(ids), seed);
}

void write_split(const fs::path& path, const Split& split) {
  nlohmann::ordered_json j;
  j["seed"] = split.seed;
  j["train"] = split.train;
  j["val"] = split.val;
  j["test"] = split.test;
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  out << j.dump(2) << "\n";
}

Split read_split(const fs::path& path) {
  const json j = read_json(path, "split");
  Split split;
  try {
    split.seed = j.at("seed").get<uint64_t>();
    split.train = j.at("train").get<std::vector<std::string>>();
    split.val = j.at("val").get<std::vector<std::string>>();
    split.test = j.at("test").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kParseError, path.string() + ": " + e.what());
  }
  return split;
}

const std::vector<std::string>& partition_ids(const Split& split, Partition p) {
  switch (p) {
    case Partition::kTrain: return split.train;
    case Partition::kVal: return split.val;
    case Partition::kTest: return split.test;
  }
  return split.test;
}

std::vector<Example> load_pairs(const Corpus& corpus, const std::vector<std::string>& ids, bool binary) {
  std::vector<Example> out;
  out.reserve(ids.size());
  for (const auto& id : ids) {
    const ClipEntry& entry = corpus.clip(id);
    if (!fs::exists(entry.apef))
      throw Error(ErrorKind::kMissingFile, "clip " + id + ": missing feature file " + entry.apef.string());
    if (!fs::exists(entry.apel))
      throw Error(ErrorKind::kMissingFile, "clip " + id + ": missing label file " + entry.apel.string());
    Example ex;
    ex.features = read_apef(entry.apef);
    ex.features.clip_id = id;
    ex.labels = read_apel(entry.apel, corpus.vocab);
    ex.labels.clip_id = id;
    if (ex.features.kind != corpus.feature_kind || ex.features.dim != feature_dim(corpus.feature_kind))
      throw Error(ErrorKind::kAlignmentError,
                  "clip " + id + ": feature file holds " + std::string(to_string(ex.features.kind)) +
                      " features of dim " + std::to_string(ex.features.dim));
    const size_t frames = ex.labels.labels.size();
    if (const size_t rows = ex.features.num_frames; rows != frames) {
      const size_t tolerance = corpus.feature_kind == FeatureKind::kExternal ? kExternalFrameTolerance : 0;
      try {
        ex.features = align_rows(std::move(ex.features), frames, tolerance);
      } catch (const Error&) {
        throw Error(ErrorKind::kAlignmentError,
                    "clip " + id + ": " + std::to_string(rows) + " feature rows vs " +
                        std::to_string(frames) + " label frames");
      }
    }
    if (binary) ex.labels = to_binary(std::move(ex.labels));
    out.push_back(std::move(ex));
  }
  return out;
}

std::vector<size_t> class_occurrences(const std::vector<Example>& examples, size_t num_classes) {
  std::vector<size_t> counts(num_classes, 0);
  for (const auto& ex : examples)
    for (auto l : ex.labels.labels) {
      if (l >= num_classes) throw Error(ErrorKind::kDimMismatch, "label exceeds class count");
      ++counts[l];
    }
  return counts;
}

}  // namespace apesed
