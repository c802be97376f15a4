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

#ifndef APESED_METRICS_HPP_
#define APESED_METRICS_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "apesed/annotations.hpp"
#include "apesed/model.hpp"

namespace apesed {

using Confusion = std::vector<std::vector<size_t>>;  // [gold][predicted]

struct EvalReport {
  Confusion confusion;
  size_t num_frames = 0;
  double accuracy = 0.0;
  std::vector<double> per_class_f1;
  std::vector<size_t> support;
  double weighted_f1 = 0.0;
  std::optional<double> aucpr;

  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

// Per-row argmax, ties to the lowest class index.
std::vector<uint16_t> argmax_labels(const Matrix& probs);

// Accuracy, per-class F1 (0/0 taken as 0) and the support-weighted F1 over
// classes with at least one gold frame.
EvalReport report_from_confusion(Confusion confusion);

// Frame-level metrics over all clips. When the model is binary (two
// columns) and some gold frame is positive, aucpr is filled from P[:, 1].
EvalReport evaluate(std::span<const PosteriorMatrix> predictions, std::span<const LabelTrack> golds);

// Merges every positive class into class 1.
Confusion collapse_to_binary(const Confusion& confusion);

// Average precision: sum_n (R_n - R_{n-1}) P_n over descending score
// thresholds, with equal scores forming a single threshold.
double aucpr(std::span<const double> scores, std::span<const uint8_t> positives);

struct CallSegment {
  std::string clip_id;
  double start = 0.0;
  double end = 0.0;
  uint16_t label = 0;
  double confidence = 0.0;  // mean posterior of `label` over the run
};

// Maximal runs of one positive predicted label lasting at least min_dur.
std::vector<CallSegment> to_segments(const PosteriorMatrix& posterior, double min_dur,
                                     const std::string& clip_id = {});

std::string report_to_json(const EvalReport& report, const ClassVocab* vocab = nullptr);
void write_report(const std::filesystem::path& path, const EvalReport& report, const ClassVocab* vocab = nullptr);

// clip_id, start, end, label, confidence; labels are written by name when a
// vocabulary is given.
void write_segments(const std::filesystem::path& path, std::span<const CallSegment> segments,
                    const ClassVocab* vocab = nullptr);

}  // namespace apesed

#endif  // APESED_METRICS_HPP_
