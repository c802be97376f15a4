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

#include "apesed/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "apesed/error.hpp"
#include "json.hpp"

namespace apesed {

std::vector<uint16_t> argmax_labels(const Matrix& probs) {
  std::vector<uint16_t> out(probs.rows);
  for (size_t t = 0; t < probs.rows; ++t) {
    const auto row = probs.row(t);
    out[t] = static_cast<uint16_t>(std::max_element(row.begin(), row.end()) - row.begin());
  }
  return out;
}

EvalReport report_from_confusion(Confusion confusion) {
  const size_t k = confusion.size();
  EvalReport r;
  r.per_class_f1.assign(k, 0.0);
  r.support.assign(k, 0);
  std::vector<size_t> predicted(k, 0);
  size_t correct = 0;
  for (size_t g = 0; g < k; ++g)
    for (size_t p = 0; p < k; ++p) {
      r.num_frames += confusion[g][p];
      r.support[g] += confusion[g][p];
      predicted[p] += confusion[g][p];
      if (g == p) correct += confusion[g][p];
    }
  r.accuracy = r.num_frames ? static_cast<double>(correct) / static_cast<double>(r.num_frames) : 0.0;
  double weighted = 0.0;
  size_t total_support = 0;
  for (size_t c = 0; c < k; ++c) {
    const double tp = static_cast<double>(confusion[c][c]);
    const double denom = static_cast<double>(r.support[c] + predicted[c]);
    r.per_class_f1[c] = denom > 0.0 ? 2.0 * tp / denom : 0.0;
    if (r.support[c] > 0) {
      weighted += static_cast<double>(r.support[c]) * r.per_class_f1[c];
      total_support += r.support[c];
    }
  }
  r.weighted_f1 = total_support ? weighted / static_cast<double>(total_support) : 0.0;
  r.confusion = std::move(confusion);
  return r;
}

EvalReport evaluate(std::span<const PosteriorMatrix> predictions, std::span<const LabelTrack> golds) {
  if (predictions.size() != golds.size())
    throw Error(ErrorKind::kLengthMismatch, "evaluate: " + std::to_string(predictions.size()) +
                                                " predictions for " + std::to_string(golds.size()) + " clips");
  if (predictions.empty()) throw Error(ErrorKind::kLengthMismatch, "evaluate: no clips");
  const size_t k = predictions[0].probs.cols;
  Confusion confusion(k, std::vector<size_t>(k, 0));
  std::vector<double> scores;
  std::vector<uint8_t> positives;
  for (size_t i = 0; i < predictions.size(); ++i) {
    const Matrix& probs = predictions[i].probs;
    const auto& gold = golds[i].labels;
    if (probs.rows != gold.size() || probs.cols != k)
      throw Error(ErrorKind::kLengthMismatch, "evaluate: clip " + golds[i].clip_id + " has " +
                                                  std::to_string(probs.rows) + " predicted frames, " +
                                                  std::to_string(gold.size()) + " gold frames");
    const auto pred = argmax_labels(probs);
    for (size_t t = 0; t < gold.size(); ++t) {
      if (gold[t] >= k) throw Error(ErrorKind::kClassArityMismatch, "evaluate: gold label exceeds model classes");
      ++confusion[gold[t]][pred[t]];
      if (k == 2) {
        scores.push_back(probs(t, 1));
        positives.push_back(gold[t] > 0 ? 1 : 0);
      }
    }
  }
  EvalReport report = report_from_confusion(std::move(confusion));
  if (k == 2 && std::find(positives.begin(), positives.end(), 1) != positives.end())
    report.aucpr = aucpr(scores, positives);
  return report;
}

Confusion collapse_to_binary(const Confusion& confusion) {
  Confusion out(2, std::vector<size_t>(2, 0));
  for (size_t g = 0; g < confusion.size(); ++g)
    for (size_t p = 0; p < confusion.size(); ++p) out[g > 0][p > 0] += confusion[g][p];
  return out;
}

double aucpr(std::span<const double> scores, std::span<const uint8_t> positives) {
  if (scores.size() != positives.size()) throw Error(ErrorKind::kLengthMismatch, "aucpr: length mismatch");
  const size_t total_pos = static_cast<size_t>(std::count_if(positives.begin(), positives.end(), [](uint8_t p) { return p != 0; }));
  if (total_pos == 0) throw Error(ErrorKind::kNoPositives, "aucpr: no positive frames");

  std::vector<size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) { return scores[a] > scores[b]; });

  double ap = 0.0, prev_recall = 0.0;
  size_t tp = 0, seen = 0;
  for (size_t i = 0; i < order.size();) {
    const double s = scores[order[i]];
    for (; i < order.size() && scores[order[i]] == s; ++i) {
      ++seen;
      if (positives[order[i]]) ++tp;
    }
    const double recall = static_cast<double>(tp) / static_cast<double>(total_pos);
    const double precision = static_cast<double>(tp) / static_cast<double>(seen);
    ap += (recall - prev_recall) * precision;
    prev_recall = recall;
  }
  return ap;
}

std::vector<CallSegment> to_segments(const PosteriorMatrix& posterior, double min_dur, const std::string& clip_id) {
  if (min_dur < 0.0) throw Error(ErrorKind::kUsage, "min_dur must be non-negative");
  const auto labels = argmax_labels(posterior.probs);
  std::vector<CallSegment> out;
  for (size_t t = 0; t < labels.size();) {
    size_t end = t + 1;
    while (end < labels.size() && labels[end] == labels[t]) ++end;
    const double duration = static_cast<double>(end - t) * kFrameSeconds;
    if (labels[t] > 0 && duration + 1e-9 >= min_dur) {
      double mean = 0.0;
      for (size_t i = t; i < end; ++i) mean += posterior.probs(i, labels[t]);
      out.push_back({clip_id, static_cast<double>(t) * kFrameSeconds, static_cast<double>(end) * kFrameSeconds,
                     labels[t], mean / static_cast<double>(end - t)});
    }
    t = end;
  }
  return out;
}

std::string report_to_json(const EvalReport& r, const ClassVocab* vocab) {
  nlohmann::ordered_json j;
  j["num_frames"] = r.num_frames;
  j["accuracy"] = r.accuracy;
  j["weighted_f1"] = r.weighted_f1;
  if (r.aucpr) j["aucpr"] = *r.aucpr;
  j["per_class_f1"] = r.per_class_f1;
  j["support"] = r.support;
  j["confusion"] = r.confusion;
  if (vocab) {
    std::vector<std::string> names;
    for (size_t k = 0; k < r.per_class_f1.size(); ++k)
      names.push_back(k <= vocab->num_calls() ? vocab->name_of(k) : std::to_string(k));
    j["classes"] = names;
  }
  return j.dump(2);
}

void write_report(const std::filesystem::path& path, const EvalReport& report, const ClassVocab* vocab) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  out << report_to_json(report, vocab) << "\n";
}

void write_segments(const std::filesystem::path& path, std::span<const CallSegment> segments,
                    const ClassVocab* vocab) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  out << "clip_id\tstart\tend\tlabel\tconfidence\n";
  char buf[64];
  for (const auto& s : segments) {
    const std::string label =
        vocab && s.label <= vocab->num_calls() ? vocab->name_of(s.label) : std::to_string(s.label);
    std::snprintf(buf, sizeof buf, "%.2f\t%.2f\t", s.start, s.end);
    out << s.clip_id << '\t' << buf << label << '\t';
    std::snprintf(buf, sizeof buf, "%.4f", s.confidence);
    out << buf << '\n';
  }
}

}  // namespace apesed
