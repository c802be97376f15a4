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
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "test_util.hpp"

#include "apesed/dataset.hpp"
#include "apesed/error.hpp"
#include "apesed/rng.hpp"

using namespace apesed;
using testutil::TempDir;

namespace {

std::vector<std::string> ids(size_t n) {
  std::vector<std::string> v;
  for (size_t i = 0; i < n; ++i) v.push_back("c" + std::to_string(1000 + i));
  return v;
}

ErrorKind kind_of(auto&& fn, std::string* message = nullptr) {
  try {
    fn();
  } catch (const Error& e) {
    if (message) *message = e.what();
    return e.kind();
  }
  return ErrorKind::kUsage;
}

// Small on-disk corpus: clip i has 10 + i frames, label = t % 3.
Corpus make_corpus(const TempDir& dir, size_t n, FeatureKind kind = FeatureKind::kWaveform) {
  Corpus c;
  c.name = "toy";
  c.feature_kind = kind;
  c.vocab = ClassVocab({"a", "b"});
  c.vocab_path = dir / "vocab.json";
  write_vocab(c.vocab_path, c.vocab);
  for (size_t i = 0; i < n; ++i) {
    const std::string id = "clip" + std::to_string(i);
    const size_t frames = 10 + i;
    FrameMatrix f;
    f.kind = kind;
    f.num_frames = frames;
    f.dim = feature_dim(kind);
    f.values.assign(frames * f.dim, static_cast<float>(i));
    write_apef(dir / (id + ".apef"), f);
    LabelTrack t;
    t.vocab = c.vocab;
    for (size_t k = 0; k < frames; ++k) t.labels.push_back(static_cast<uint16_t>(k % 3));
    write_apel(dir / (id + ".apel"), t);
    c.clips.push_back({id, dir / (id + ".wav"), dir / (id + ".apef"), dir / (id + ".apel")});
  }
  return c;
}

}  // namespace

TEST_SUITE("dataset") {

TEST_CASE("split sizes follow the floor rule") {
  auto sizes = [](const Split& s) { return std::vector<size_t>{s.train.size(), s.val.size(), s.test.size()}; };
  CHECK(sizes(make_split(ids(10), 0)) == std::vector<size_t>{8, 1, 1});
  CHECK(sizes(make_split(ids(10), 1234)) == std::vector<size_t>{8, 1, 1});
  CHECK(sizes(make_split(ids(235), 42)) == std::vector<size_t>{188, 23, 24});
  CHECK(sizes(make_split(ids(3), 0)) == std::vector<size_t>{2, 0, 1});
  CHECK(kind_of([] { make_split(ids(2), 0); }) == ErrorKind::kTooFewClips);
}

TEST_CASE("split is a deterministic partition independent of input order") {
  const Split a = make_split(ids(50), 0), b = make_split(ids(50), 42);
  CHECK(a == make_split(ids(50), 0));
  CHECK(a.train != b.train);
  auto rev = ids(50);
  std::reverse(rev.begin(), rev.end());
  CHECK(make_split(rev, 42) == b);

  Rng r(17);
  for (int i = 0; i < 100; ++i) {
    const size_t n = 3 + r.below(400);
    const Split s = make_split(ids(n), r.next_u64());
    CHECK(s.train.size() == n * 8 / 10);
    CHECK(s.val.size() == n / 10);
    std::set<std::string> all;
    for (const auto* part : {&s.train, &s.val, &s.test}) all.insert(part->begin(), part->end());
    CHECK(all.size() == n);
    const auto expected = ids(n);
    CHECK(std::equal(all.begin(), all.end(), expected.begin()));
  }
}

TEST_CASE("split file round trip") {
  TempDir dir("split");
  const Split s = make_split(ids(20), 3407);
  write_split(dir / "s.json", s);
  CHECK(read_split(dir / "s.json") == s);
  CHECK(kind_of([&] { read_split(dir / "missing.json"); }) == ErrorKind::kIo);
  testutil::spit(dir / "broken.json", "{\"seed\": 1");
  CHECK(kind_of([&] { read_split(dir / "broken.json"); }) == ErrorKind::kParseError);
}

TEST_CASE("manifest round trip keeps paths") {
  TempDir dir("manifest");
  const Corpus c = make_corpus(dir, 4);
  write_manifest(dir / "m.json", c);
  CHECK(testutil::slurp(dir / "m.json").find(dir.path().string()) == std::string::npos);
  const Corpus back = load_manifest(dir / "m.json");
  CHECK(back.name == "toy");
  CHECK(back.vocab == c.vocab);
  REQUIRE(back.clips.size() == 4);
  CHECK(back.clips[2].apef == c.clips[2].apef);
  CHECK(back.feature_kind == FeatureKind::kWaveform);
  CHECK(back.clip("clip3").apel == c.clips[3].apel);
  CHECK(kind_of([&] { back.clip("zzz"); }) == ErrorKind::kMissingFile);
}

TEST_CASE("load_pairs aligns and validates") {
  TempDir dir("pairs");
  Corpus c = make_corpus(dir, 5);
  const auto pairs = load_pairs(c, {"clip0", "clip4"});
  REQUIRE(pairs.size() == 2);
  CHECK(pairs[1].features.num_frames == 14);
  CHECK(pairs[1].labels.labels.size() == 14);
  CHECK(pairs[1].features.clip_id == "clip4");

  const auto binary = load_pairs(c, {"clip1"}, true);
  CHECK(*std::max_element(binary[0].labels.labels.begin(), binary[0].labels.labels.end()) == 1);

  std::string msg;
  std::filesystem::remove(dir / "clip2.apef");
  CHECK(kind_of([&] { load_pairs(c, {"clip2"}); }, &msg) == ErrorKind::kMissingFile);
  CHECK(msg.find("clip2") != std::string::npos);

  // 50 rows against 48 label frames.
  LabelTrack t;
  t.vocab = c.vocab;
  t.labels.assign(48, 0);
  write_apel(dir / "clip3.apel", t);
  FrameMatrix f;
  f.kind = FeatureKind::kWaveform;
  f.num_frames = 50;
  f.dim = 320;
  f.values.assign(50 * 320, 0.0f);
  write_apef(dir / "clip3.apef", f);
  CHECK(kind_of([&] { load_pairs(c, {"clip3"}); }) == ErrorKind::kAlignmentError);
}

TEST_CASE("external features tolerate two rows") {
  TempDir dir("pairs_ext");
  Corpus c = make_corpus(dir, 2, FeatureKind::kExternal);
  LabelTrack t;
  t.vocab = c.vocab;
  t.labels.assign(12, 1);
  write_apel(dir / "clip0.apel", t);  // 10 feature rows
  const auto pairs = load_pairs(c, {"clip0"});
  CHECK(pairs[0].features.num_frames == 12);
  t.labels.assign(13, 1);
  write_apel(dir / "clip0.apel", t);
  CHECK(kind_of([&] { load_pairs(c, {"clip0"}); }) == ErrorKind::kAlignmentError);
}

TEST_CASE("class occurrences count frames") {
  std::vector<Example> ex(2);
  ex[0].labels.labels = {0, 1, 1};
  ex[1].labels.labels = {2};
  CHECK(class_occurrences(ex, 3) == std::vector<size_t>{1, 2, 1});
  ex[0].labels.labels = {0, 0, 0};
  ex[1].labels.labels = {0};
  CHECK(class_occurrences(ex, 3) == std::vector<size_t>{4, 0, 0});
}

}  // TEST_SUITE
