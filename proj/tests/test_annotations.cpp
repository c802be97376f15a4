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
#include <string>
#include <vector>

#include "doctest.h"
#include "test_util.hpp"

#include "apesed/annotations.hpp"
#include "apesed/error.hpp"
#include "apesed/rng.hpp"

using namespace apesed;
using testutil::TempDir;

namespace {

const std::string kHeader = "clip_id\tstart\tend\tlabel\n";

FrameGrid grid_of(const std::string& id, size_t frames) {
  FrameGrid g;
  g.clip_id = id;
  g.num_frames = frames;
  g.num_samples = frames * kFrameLen;
  return g;
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

}  // namespace

TEST_SUITE("annotations") {

TEST_CASE("parse rows in file order with trimmed labels") {
  const auto units = parse_annotations_text(kHeader + "c1\t0.50\t1.00\t intro \nc1\t0.1\t0.2\tclimax\n");
  REQUIRE(units.size() == 2);
  CHECK(units[0] == AnnotationUnit{"c1", 0.5, 1.0, "intro"});
  CHECK(units[1].call_type == "climax");
}

TEST_CASE("parse errors") {
  std::string msg;
  CHECK(kind_of([&] { parse_annotations_text(kHeader + "c1\t1.0\t0.5\tx\n"); }) == ErrorKind::kNegativeSpan);
  CHECK(kind_of([&] { parse_annotations_text(kHeader + "c1\t0.5\t0.5\tx\n"); }) == ErrorKind::kNegativeSpan);
  CHECK(kind_of([&] { parse_annotations_text(kHeader + "c1\t0.0\t1.0\tx\nc1\t0.5\t1.5\ty\n"); }) ==
        ErrorKind::kOverlapError);
  CHECK(kind_of([&] { parse_annotations_text(kHeader + "c1\t0.0\t1.0\tx\nc1\tabc\t1.5\ty\n"); }, &msg) ==
        ErrorKind::kParseError);
  CHECK(msg.find("line 3") != std::string::npos);
  CHECK(kind_of([&] { parse_annotations_text(kHeader + "c1\t0.0\t1.0\n"); }) == ErrorKind::kParseError);
  CHECK(kind_of([&] { parse_annotations_text("a\tb\tc\td\n"); }) == ErrorKind::kParseError);
  // Touching spans and overlaps across clips are fine.
  CHECK(parse_annotations_text(kHeader + "c1\t0.0\t1.0\tx\nc1\t1.0\t2.0\tx\nc2\t0.5\t1.5\tx\n").size() == 3);
  CHECK(kind_of([&] { parse_annotations("/nonexistent/a.tsv"); }) == ErrorKind::kIo);
}

TEST_CASE("vocabulary is lexicographic") {
  std::vector<AnnotationUnit> u;
  for (const char* t : {"intro", "climax", "build-up", "let-down", "intro"}) u.push_back({"c", 0, 1, t});
  const ClassVocab v = build_vocab(u);
  CHECK(v.num_calls() == 4);
  CHECK(v.num_classes() == 5);
  CHECK(v.index_of("build-up") == 1);
  CHECK(v.index_of("climax") == 2);
  CHECK(v.index_of("intro") == 3);
  CHECK(v.index_of("let-down") == 4);
  CHECK(v.name_of(0) == "none");
  CHECK(build_vocab({{"c", 0, 1, "longcall"}}).names() == std::vector<std::string>{"longcall"});

  auto shuffled = u;
  std::reverse(shuffled.begin(), shuffled.end());
  CHECK(build_vocab(shuffled) == v);
}

TEST_CASE("vocab JSON round trip") {
  const ClassVocab v({"a", "b", "c"});
  const std::string j = vocab_to_json(v);
  CHECK(j.find("\"none\": 0") != std::string::npos);
  CHECK(vocab_from_json(j) == v);
  CHECK(vocab_from_json(R"({"b": 2, "none": 0, "a": 1})") == ClassVocab({"a", "b"}));
  CHECK(kind_of([] { vocab_from_json(R"({"a": 1})"); }) == ErrorKind::kParseError);
  CHECK(kind_of([] { vocab_from_json(R"({"none": 0, "a": 2})"); }) == ErrorKind::kParseError);
}

TEST_CASE("rasterize by frame midpoints") {
  const ClassVocab v({"a", "b"});
  const LabelTrack t = rasterize({{"c", 0.50, 1.00, "b"}}, grid_of("c", 100), v);
  REQUIRE(t.labels.size() == 100);
  for (size_t i = 0; i < 100; ++i) CHECK(t.labels[i] == (i >= 25 && i <= 49 ? 2 : 0));

  const LabelTrack none = rasterize({}, grid_of("c", 30), v);
  CHECK(std::all_of(none.labels.begin(), none.labels.end(), [](uint16_t l) { return l == 0; }));

  const LabelTrack full = rasterize({{"c", 0.0, 0.6, "a"}}, grid_of("c", 30), v);
  CHECK(std::all_of(full.labels.begin(), full.labels.end(), [](uint16_t l) { return l == 1; }));

  // Partial frames: only those whose midpoint is covered.
  const LabelTrack part = rasterize({{"c", 0.015, 0.031, "a"}}, grid_of("c", 5), v);
  CHECK(part.labels == std::vector<uint16_t>{0, 1, 0, 0, 0});
}

TEST_CASE("rasterize bounds") {
  const ClassVocab v({"a"});
  CHECK(rasterize({{"c", 0.5, 1.019, "a"}}, grid_of("c", 50), v).labels.back() == 1);
  CHECK(kind_of([&] { rasterize({{"c", 0.5, 1.05, "a"}}, grid_of("c", 50), v); }) == ErrorKind::kSpanPastEnd);
}

TEST_CASE("rasterize invariants on random spans") {
  Rng r(21);
  const ClassVocab v({"a", "b", "c"});
  for (int trial = 0; trial < 200; ++trial) {
    const size_t frames = 1 + r.below(300);
    const double dur = frames * kFrameSeconds;
    std::vector<AnnotationUnit> units;
    double cursor = 0.0;
    while (true) {
      const double s = cursor + r.uniform(0.0, 0.5);
      const double e = s + r.uniform(0.001, 0.8);
      if (e > dur) break;
      units.push_back({"c", s, e, v.names()[r.below(3)]});
      cursor = e;
    }
    const FrameGrid g = grid_of("c", frames);
    const LabelTrack t = rasterize(units, g, v);
    CHECK(t.labels.size() == frames);

    // Per-class counts sum to T.
    std::vector<size_t> counts(4, 0);
    for (auto l : t.labels) ++counts.at(l);
    CHECK(counts[0] + counts[1] + counts[2] + counts[3] == frames);

    // Binarization commutes with rasterization.
    CHECK(to_binary(t).labels == rasterize(to_binary(units), g, binary_vocab()).labels);

    // Enlarging a span never unmarks a frame.
    if (!units.empty()) {
      auto grown = units;
      const size_t k = r.below(static_cast<uint32_t>(units.size()));
      grown[k].start = std::max(k ? grown[k - 1].end : 0.0, grown[k].start - 0.05);
      grown[k].end = std::min(k + 1 < grown.size() ? grown[k + 1].start : dur, grown[k].end + 0.05);
      const LabelTrack t2 = rasterize(grown, g, v);
      for (size_t i = 0; i < frames; ++i)
        if (t.labels[i] != 0) CHECK(t2.labels[i] == t.labels[i]);
    }
  }
}

TEST_CASE("to_binary collapses call types") {
  LabelTrack t;
  t.labels = {0, 3, 2, 0};
  t.vocab = ClassVocab({"a", "b", "c"});
  const LabelTrack b = to_binary(t);
  CHECK(b.labels == std::vector<uint16_t>{0, 1, 1, 0});
  CHECK(b.vocab.num_calls() == 1);
  t.labels = {0, 0};
  CHECK(to_binary(t).labels == std::vector<uint16_t>{0, 0});
  std::vector<std::string> many;
  for (int i = 0; i < 18; ++i) many.push_back("t" + std::to_string(100 + i));
  t.vocab = ClassVocab(many);
  CHECK(to_binary(t).vocab.num_calls() == 1);
}

TEST_CASE("APEL round trip") {
  TempDir dir("apel");
  LabelTrack t;
  t.clip_id = "k";
  t.vocab = ClassVocab({"a", "b"});
  t.labels = {0, 1, 2, 2, 0};
  write_apel(dir / "k.apel", t);
  const std::string bytes = testutil::slurp(dir / "k.apel");
  CHECK(bytes.substr(0, 4) == "APEL");
  CHECK(bytes.size() == 16 + 10);
  const LabelTrack back = read_apel(dir / "k.apel", t.vocab);
  CHECK(back.labels == t.labels);
  CHECK(back.clip_id == "k");
  CHECK(kind_of([&] { read_apel(dir / "k.apel", ClassVocab({"a"})); }) == ErrorKind::kDimMismatch);
  testutil::spit(dir / "bad.apel", "XXXX" + bytes.substr(4));
  CHECK(kind_of([&] { read_apel(dir / "bad.apel", t.vocab); }) == ErrorKind::kBadMagic);
}

}  // TEST_SUITE
