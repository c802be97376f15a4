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

#ifndef APESED_ANNOTATIONS_HPP_
#define APESED_ANNOTATIONS_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "apesed/audio.hpp"

namespace apesed {

struct AnnotationUnit {
  std::string clip_id;
  double start = 0.0;  // seconds
  double end = 0.0;    // seconds, > start
  std::string call_type;

  friend bool operator==(const AnnotationUnit&, const AnnotationUnit&) = default;
};

// Call type -> class index 1..C. Index 0 is the implicit non-call class.
class ClassVocab {
 public:
  ClassVocab() = default;
  // `names[i]` becomes class i + 1.
  explicit ClassVocab(std::vector<std::string> names);

  size_t num_calls() const { return names_.size(); }
  size_t num_classes() const { return names_.size() + 1; }
  std::optional<uint16_t> index_of(const std::string& call_type) const;
  const std::string& name_of(size_t index) const;
  const std::vector<std::string>& names() const { return names_; }

  friend bool operator==(const ClassVocab&, const ClassVocab&) = default;

 private:
  std::vector<std::string> names_;
};

inline constexpr const char* kNonCallName = "none";

// {"call": 1}
ClassVocab binary_vocab();

struct LabelTrack {
  std::string clip_id;
  std::vector<uint16_t> labels;
  ClassVocab vocab;
};

// Reads a TSV with header `clip_id\tstart\tend\tlabel`. Units come back in
// file order; labels are whitespace-trimmed. Overlapping spans on one clip
// are rejected (touching spans are fine).
std::vector<AnnotationUnit> parse_annotations(const std::filesystem::path& path);
std::vector<AnnotationUnit> parse_annotations_text(const std::string& text);

// Lexicographically sorted call types, numbered from 1.
ClassVocab build_vocab(const std::vector<AnnotationUnit>& units);

// Frame t takes the class of the unit whose [start, end) contains the frame
// midpoint (t + 0.5) * 20 ms; every other frame is 0.
LabelTrack rasterize(const std::vector<AnnotationUnit>& units, const FrameGrid& grid,
                     const ClassVocab& vocab);

// Maps every positive class to 1 and replaces the vocabulary by {call: 1}.
LabelTrack to_binary(LabelTrack track);

// Unit-level counterpart of to_binary: every call type becomes "call".
std::vector<AnnotationUnit> to_binary(std::vector<AnnotationUnit> units);

// Groups units by clip id.
std::map<std::string, std::vector<AnnotationUnit>> group_by_clip(
    const std::vector<AnnotationUnit>& units);

// {"none": 0, "<type>": k, ...}
void write_vocab(const std::filesystem::path& path, const ClassVocab& vocab);
ClassVocab read_vocab(const std::filesystem::path& path);
std::string vocab_to_json(const ClassVocab& vocab);
ClassVocab vocab_from_json(const std::string& text);

// APEL container: "APEL", u32 version = 1, u32 num_frames, u32 C, then
// num_frames u16 class indices.
void write_apel(const std::filesystem::path& path, const LabelTrack& track);
// The vocabulary is not stored in the file; the caller supplies it.
LabelTrack read_apel(const std::filesystem::path& path, const ClassVocab& vocab);

}  // namespace apesed

#endif  // APESED_ANNOTATIONS_HPP_
