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

// Independent reference implementations used only by the tests. Nothing
// here calls into the library's code paths for the quantity being checked.

#ifndef APESED_TESTS_ORACLES_HPP_
#define APESED_TESTS_ORACLES_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <set>
#include <vector>

namespace oracle {

struct Metrics {
  double accuracy = 0.0;
  std::vector<double> f1;
  double weighted_f1 = 0.0;
};

// Per-class precision and recall counted frame by frame, then F1 from them.
inline Metrics frame_metrics(const std::vector<int>& gold, const std::vector<int>& pred, int k) {
  Metrics m;
  const size_t n = gold.size();
  size_t hits = 0;
  for (size_t i = 0; i < n; ++i) hits += gold[i] == pred[i];
  m.accuracy = n ? double(hits) / double(n) : 0.0;
  double wsum = 0.0, wtot = 0.0;
  for (int c = 0; c < k; ++c) {
    size_t tp = 0, fp = 0, fn = 0;
    for (size_t i = 0; i < n; ++i) {
      if (pred[i] == c && gold[i] == c) ++tp;
      if (pred[i] == c && gold[i] != c) ++fp;
      if (pred[i] != c && gold[i] == c) ++fn;
    }
    double f = 0.0;
    if (tp > 0) {
      const double p = double(tp) / double(tp + fp);
      const double r = double(tp) / double(tp + fn);
      f = 2.0 * p * r / (p + r);
    }
    m.f1.push_back(f);
    const double support = double(tp + fn);
    if (support > 0) {
      wsum += support * f;
      wtot += support;
    }
  }
  m.weighted_f1 = wtot > 0 ? wsum / wtot : 0.0;
  return m;
}

// O(n^2) precision/recall sweep: for each distinct threshold (descending)
// count everything scoring at or above it from scratch.
inline double average_precision(const std::vector<double>& scores, const std::vector<int>& pos) {
  std::set<double, std::greater<>> thresholds(scores.begin(), scores.end());
  double total = 0.0;
  for (int p : pos) total += p;
  double ap = 0.0, prev_r = 0.0;
  for (double th : thresholds) {
    double tp = 0.0, sel = 0.0;
    for (size_t i = 0; i < scores.size(); ++i)
      if (scores[i] >= th) {
        sel += 1.0;
        tp += pos[i];
      }
    const double r = tp / total;
    ap += (r - prev_r) * (tp / sel);
    prev_r = r;
  }
  return ap;
}

// |X_k|^2 of a direct DFT, k = 0..n/2.
inline std::vector<double> dft_power(const std::vector<double>& x) {
  const size_t n = x.size();
  std::vector<double> out(n / 2 + 1);
  for (size_t k = 0; k <= n / 2; ++k) {
    long double re = 0.0L, im = 0.0L;
    for (size_t t = 0; t < n; ++t) {
      const long double ang = -2.0L * std::numbers::pi_v<long double> * (long double)((k * t) % n) / (long double)n;
      re += x[t] * std::cos(ang);
      im += x[t] * std::sin(ang);
    }
    out[k] = double(re * re + im * im);
  }
  return out;
}

inline double ncc(const std::vector<double>& a, const std::vector<double>& b) {
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (size_t i = 0; i < std::min(a.size(), b.size()); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  return ab / std::sqrt(aa * bb);
}

// Weighted cross-entropy written straight from its definition.
inline double weighted_ce(const std::vector<std::vector<double>>& probs, const std::vector<int>& labels,
                          const std::vector<double>& w) {
  double num = 0.0, den = 0.0;
  for (size_t t = 0; t < labels.size(); ++t) {
    num += w[labels[t]] * -std::log(std::max(probs[t][labels[t]], 1e-12));
    den += w[labels[t]];
  }
  return den > 0 ? num / den : 0.0;
}

}  // namespace oracle

#endif  // APESED_TESTS_ORACLES_HPP_
