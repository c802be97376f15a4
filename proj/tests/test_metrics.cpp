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
#include <numeric>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "test_util.hpp"

#include "apesed/error.hpp"
#include "apesed/metrics.hpp"
#include "apesed/rng.hpp"

using namespace apesed;

namespace {

// One-hot-ish posteriors whose argmax is `pred`.
PosteriorMatrix from_labels(const std::vector<int>& pred, size_t k) {
  PosteriorMatrix p;
  p.probs = Matrix(pred.size(), k, 0.1 / double(k));
  for (size_t t = 0; t < pred.size(); ++t) p.probs(t, pred[t]) += 0.9;
  return p;
}

LabelTrack track(const std::vector<int>& gold, const std::string& id = "c") {
  LabelTrack t;
  t.clip_id = id;
  for (int g : gold) t.labels.push_back(static_cast<uint16_t>(g));
  return t;
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("hand-computed confusion example") {
  const std::vector<PosteriorMatrix> p{from_labels({0, 1, 1, 1}, 2)};
  const std::vector<LabelTrack> g{track({0, 0, 1, 1})};
  const EvalReport r = evaluate(p, g);
  CHECK(r.accuracy == 0.75);
  CHECK(r.per_class_f1[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(r.per_class_f1[1] == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(r.weighted_f1 == doctest::Approx(0.5 * 2.0 / 3.0 + 0.5 * 0.8).epsilon(1e-12));
  CHECK(r.confusion == Confusion{{1, 1}, {0, 2}});
  CHECK(r.num_frames == 4);
  CHECK(r.support == std::vector<size_t>{2, 2});
}

TEST_CASE("perfect predictions") {
  const std::vector<int> gold{0, 2, 2, 1, 0};
  const EvalReport r = evaluate(std::vector{from_labels(gold, 3)}, std::vector{track(gold)});
  CHECK(r.accuracy == 1.0);
  CHECK(r.weighted_f1 == 1.0);
}

TEST_CASE("argmax ties go to the lowest index") {
  Matrix m(2, 3, 1.0 / 3.0);
  m(1, 1) = 0.4;
  m(1, 2) = 0.4;
  m(1, 0) = 0.2;
  CHECK(argmax_labels(m) == std::vector<uint16_t>{0, 1});
}

TEST_CASE("length mismatch") {
  CHECK_THROWS_AS(evaluate(std::vector{from_labels({0, 1}, 2)}, std::vector{track({0, 1, 1})}), Error);
  try {
    evaluate(std::vector{from_labels({0}, 2)}, std::vector<LabelTrack>{});
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kLengthMismatch);
  }
}

TEST_CASE("random instances match the brute-force oracle") {
  Rng r(31);
  for (int trial = 0; trial < 100; ++trial) {
    const size_t k = 2 + r.below(5);
    const size_t clips = 1 + r.below(3);
    std::vector<PosteriorMatrix> preds;
    std::vector<LabelTrack> golds;
    std::vector<int> all_gold, all_pred;
    for (size_t c = 0; c < clips; ++c) {
      const size_t n = 1 + r.below(200 / clips);
      PosteriorMatrix p;
      p.probs = Matrix(n, k);
      std::vector<int> g(n);
      for (size_t t = 0; t < n; ++t) {
        g[t] = static_cast<int>(r.below(static_cast<uint32_t>(k)));
        double s = 0.0;
        for (size_t j = 0; j < k; ++j) s += p.probs(t, j) = std::floor(r.uniform() * 4.0) + 0.01;
        for (size_t j = 0; j < k; ++j) p.probs(t, j) /= s;
        // Oracle argmax with explicit first-wins scan.
        int best = 0;
        for (size_t j = 1; j < k; ++j)
          if (p.probs(t, j) > p.probs(t, best)) best = static_cast<int>(j);
        all_pred.push_back(best);
      }
      all_gold.insert(all_gold.end(), g.begin(), g.end());
      preds.push_back(p);
      golds.push_back(track(g));
    }
    const EvalReport rep = evaluate(preds, golds);
    const oracle::Metrics o = oracle::frame_metrics(all_gold, all_pred, static_cast<int>(k));
    CHECK(std::abs(rep.accuracy - o.accuracy) < 1e-9);
    CHECK(std::abs(rep.weighted_f1 - o.weighted_f1) < 1e-9);
    for (size_t j = 0; j < k; ++j) CHECK(std::abs(rep.per_class_f1[j] - o.f1[j]) < 1e-9);
  }
}

TEST_CASE("AUCPR cases and oracle") {
  const std::vector<double> sep{0.9, 0.8, 0.2, 0.1};
  const std::vector<uint8_t> pos{1, 1, 0, 0};
  CHECK(aucpr(sep, pos) == 1.0);
  const std::vector<double> flat(10, 0.5);
  const std::vector<uint8_t> three{1, 0, 0, 1, 0, 0, 1, 0, 0, 0};
  CHECK(aucpr(flat, three) == doctest::Approx(0.3).epsilon(1e-15));
  try {
    aucpr(flat, std::vector<uint8_t>(10, 0));
    FAIL("expected NoPositives");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kNoPositives);
  }

  Rng r(32);
  for (int trial = 0; trial < 20; ++trial) {
    const size_t n = 1 + r.below(200);
    std::vector<double> s(n);
    std::vector<uint8_t> p(n);
    std::vector<int> pi(n);
    for (size_t i = 0; i < n; ++i) {
      s[i] = trial % 2 ? std::round(r.uniform() * 10.0) / 10.0 : r.uniform();
      pi[i] = p[i] = r.below(3) == 0;
    }
    if (std::find(p.begin(), p.end(), 1) == p.end()) {
      p[0] = 1;
      pi[0] = 1;
    }
    CHECK(std::abs(aucpr(s, p) - oracle::average_precision(s, pi)) < 1e-9);

    // Strictly monotone transforms leave AUCPR unchanged.
    std::vector<double> t(n);
    for (size_t i = 0; i < n; ++i) t[i] = std::exp(3.0 * s[i]) - 7.0;
    CHECK(aucpr(t, p) == aucpr(s, p));
  }
}

TEST_CASE("binary evaluation fills AUCPR") {
  const EvalReport r = evaluate(std::vector{from_labels({0, 1, 1, 1}, 2)}, std::vector{track({0, 0, 1, 1})});
  REQUIRE(r.aucpr);
  const EvalReport multi = evaluate(std::vector{from_labels({0, 2, 1}, 3)}, std::vector{track({0, 2, 1})});
  CHECK_FALSE(multi.aucpr);
}

TEST_CASE("collapse to binary equals evaluating binarized labels") {
  Rng r(33);
  for (int trial = 0; trial < 20; ++trial) {
    const size_t n = 50;
    std::vector<int> g(n), p(n), gb(n), pb(n);
    for (size_t i = 0; i < n; ++i) {
      g[i] = static_cast<int>(r.below(4));
      p[i] = static_cast<int>(r.below(4));
      gb[i] = g[i] > 0;
      pb[i] = p[i] > 0;
    }
    const EvalReport multi = evaluate(std::vector{from_labels(p, 4)}, std::vector{track(g)});
    const EvalReport direct = evaluate(std::vector{from_labels(pb, 2)}, std::vector{track(gb)});
    const EvalReport collapsed = report_from_confusion(collapse_to_binary(multi.confusion));
    CHECK(collapsed.confusion == direct.confusion);
    CHECK(collapsed.weighted_f1 == direct.weighted_f1);
    CHECK(collapsed.accuracy == direct.accuracy);
  }
}

TEST_CASE("evaluate is permutation invariant over clips") {
  const std::vector<PosteriorMatrix> p{from_labels({0, 1, 1}, 2), from_labels({1, 1}, 2), from_labels({0}, 2)};
  const std::vector<LabelTrack> g{track({0, 0, 1}), track({1, 0}), track({1})};
  const EvalReport a = evaluate(p, g);
  const EvalReport b = evaluate(std::vector{p[2], p[0], p[1]}, std::vector{g[2], g[0], g[1]});
  CHECK(a.confusion == b.confusion);
  CHECK(a.weighted_f1 == b.weighted_f1);
  CHECK(*a.aucpr == doctest::Approx(*b.aucpr).epsilon(1e-15));
}

TEST_CASE("weighted F1 with a single supported class") {
  const EvalReport r = evaluate(std::vector{from_labels({1, 0, 1, 1}, 3)}, std::vector{track({1, 1, 1, 1})});
  CHECK(r.weighted_f1 == r.per_class_f1[1]);
  CHECK(r.per_class_f1[2] == 0.0);
}

TEST_CASE("segments") {
  const auto segs = to_segments(from_labels({0, 1, 1, 1, 0}, 2), 0.0, "c");
  REQUIRE(segs.size() == 1);
  CHECK(segs[0].start == doctest::Approx(0.02));
  CHECK(segs[0].end == doctest::Approx(0.08));
  CHECK(segs[0].label == 1);
  CHECK(segs[0].confidence == doctest::Approx(0.95));
  CHECK(to_segments(from_labels({0, 0, 0}, 2), 0.0).empty());
  CHECK(to_segments(from_labels({0, 1, 0}, 2), 0.05).empty());
  CHECK(to_segments(from_labels({2, 2, 1, 0, 1}, 3), 0.0).size() == 3);
  CHECK(to_segments(from_labels({1, 1, 1, 0}, 2), 0.06).size() == 1);
}

TEST_CASE("report and segment files") {
  testutil::TempDir dir("metrics");
  const EvalReport r = evaluate(std::vector{from_labels({0, 1, 1, 1}, 2)}, std::vector{track({0, 0, 1, 1})});
  const ClassVocab v = binary_vocab();
  write_report(dir / "r.json", r, &v);
  const std::string text = testutil::slurp(dir / "r.json");
  CHECK(text.find("\"weighted_f1\"") != std::string::npos);
  CHECK(text.find("\"call\"") != std::string::npos);
  const auto segs = to_segments(from_labels({0, 1, 1, 1, 0}, 2), 0.0, "c");
  write_segments(dir / "s.tsv", segs, &v);
  CHECK(testutil::slurp(dir / "s.tsv") == "clip_id\tstart\tend\tlabel\tconfidence\nc\t0.02\t0.08\tcall\t0.9500\n");
}

}  // TEST_SUITE
