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

#include "apesed/annotations.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include "apesed/error.hpp"
#include "json.hpp"

namespace apesed {

namespace {

constexpr uint32_t kApelVersion = 1;

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  size_t pos = 0;
  for (;;) {
    const size_t tab = line.find('\t', pos);
    fields.push_back(line.substr(pos, tab == std::string::npos ? std::string::npos : tab - pos));
    if (tab == std::string::npos) break;
    pos = tab + 1;
  }
  return fields;
}

bool parse_seconds(const std::string& field, double& out) {
  const std::string s = trim(field);
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

[[noreturn]] void parse_fail(size_t line_no, const std::string& what) {
  throw Error(ErrorKind::kParseError, "line " + std::to_string(line_no) + ": " + what);
}

}  // namespace

ClassVocab::ClassVocab(std::vector<std::string> names) : names_(std::move(names)) {}

std::optional<uint16_t> ClassVocab::index_of(const std::string& call_type) const {
  const auto it = std::find(names_.begin(), names_.end(), call_type);
  if (it == names_.end()) return std::nullopt;
  return static_cast<uint16_t>(it - names_.begin() + 1);
}

const std::string& ClassVocab::name_of(size_t index) const {
  static const std::string none = kNonCallName;
  if (index == 0) return none;
  return names_.at(index - 1);
}

ClassVocab binary_vocab() { return ClassVocab({"call"}); }

std::vector<AnnotationUnit> parse_annotations_text(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  size_t line_no = 0;
  bool saw_header = false;
  std::vector<AnnotationUnit> units;
  std::vector<size_t> unit_lines;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto fields = split_tabs(line);
    if (!saw_header) {
      if (fields.size() != 4 || trim(fields[0]) != "clip_id" || trim(fields[1]) != "start" ||
          trim(fields[2]) != "end" || trim(fields[3]) != "label")
        parse_fail(line_no, "expected header clip_id<TAB>start<TAB>end<TAB>label");
      saw_header = true;
      continue;
    }
    if (fields.size() != 4) parse_fail(line_no, "expected 4 tab-separated fields");
    AnnotationUnit unit;
    unit.clip_id = trim(fields[0]);
    unit.call_type = trim(fields[3]);
    if (unit.clip_id.empty()) parse_fail(line_no, "empty clip id");
    if (unit.call_type.empty()) parse_fail(line_no, "empty label");
    if (!parse_seconds(fields[1], unit.start) || unit.start < 0.0) parse_fail(line_no, "bad start time");
    if (!parse_seconds(fields[2], unit.end)) parse_fail(line_no, "bad end time");
    if (unit.end <= unit.start)
      throw Error(ErrorKind::kNegativeSpan, "line " + std::to_string(line_no) + ": end <= start");
    units.push_back(std::move(unit));
    unit_lines.push_back(line_no);
  }
  if (!saw_header) throw Error(ErrorKind::kParseError, "annotation file is empty");

  // Overlap check per clip on start-sorted spans.
  std::vector<size_t> order(units.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    if (units[a].clip_id != units[b].clip_id) return units[a].clip_id < units[b].clip_id;
    return units[a].start < units[b].start;
  });
  for (size_t i = 1; i < order.size(); ++i) {
    const auto& prev = units[order[i - 1]];
    const auto& cur = units[order[i]];
    if (prev.clip_id == cur.clip_id && cur.start < prev.end)
      throw Error(ErrorKind::kOverlapError,
                  "lines " + std::to_string(unit_lines[order[i - 1]]) + " and " +
                      std::to_string(unit_lines[order[i]]) + ": overlapping spans on " + cur.clip_id);
  }
  return units;
}

std::vector<AnnotationUnit> parse_annotations(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_annotations_text(buf.str());
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

ClassVocab build_vocab(const std::vector<AnnotationUnit>& units) {
  std::set<std::string> types;
  for (const auto& u : units) types.insert(u.call_type);
  return ClassVocab(std::vector<std::string>(types.begin(), types.end()));
}

LabelTrack rasterize(const std::vector<AnnotationUnit>& units, const FrameGrid& grid,
                     const ClassVocab& vocab) {
  LabelTrack track;
  track.clip_id = grid.clip_id;
  track.vocab = vocab;
  track.labels.assign(grid.num_frames, 0);
  const double limit = grid.duration_seconds() + kFrameSeconds + 1e-9;
  for (const auto& unit : units) {
    if (unit.clip_id != grid.clip_id)
      throw Error(ErrorKind::kUsage, "unit for " + unit.clip_id + " rasterized on " + grid.clip_id);
    const auto cls = vocab.index_of(unit.call_type);
    if (!cls) throw Error(ErrorKind::kParseError, "call type '" + unit.call_type + "' not in vocabulary");
    if (unit.end > limit)
      throw Error(ErrorKind::kSpanPastEnd, grid.clip_id + ": span ends at " + std::to_string(unit.end) +
                                               " s, clip lasts " +
                                               std::to_string(grid.duration_seconds()) + " s");
    // Candidate frames, then the exact midpoint test.
    const double first = std::max(0.0, std::floor(unit.start / kFrameSeconds - 0.5) - 1.0);
    for (size_t t = static_cast<size_t>(first); t < grid.num_frames; ++t) {
      const double mid = (static_cast<double>(t) + 0.5) * kFrameSeconds;
      if (mid >= unit.end) break;
      if (mid >= unit.start) track.labels[t] = *cls;
    }
  }
  return track;
}

LabelTrack to_binary(LabelTrack track) {
  for (auto& l : track.labels) l = l > 0 ? 1 : 0;
  track.vocab = binary_vocab();
  return track;
}

std::vector<AnnotationUnit> to_binary(std::vector<AnnotationUnit> units) {
  for (auto& u : units) u.call_type = "call";
  return units;
}

std::map<std::string, std::vector<AnnotationUnit>> group_by_clip(
    const std::vector<AnnotationUnit>& units) {
  std::map<std::string, std::vector<AnnotationUnit>> out;
  for (const auto& u : units) out[u.clip_id].push_back(u);
  return out;
}

std::string vocab_to_json(const ClassVocab& vocab) {
  nlohmann::ordered_json j;
  j[kNonCallName] = 0;
  for (size_t k = 0; k < vocab.num_calls(); ++k) j[vocab.names()[k]] = k + 1;
  return j.dump(2);
}

ClassVocab vocab_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kParseError, std::string("vocab: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorKind::kParseError, "vocab: expected an object");
  std::vector<std::string> names(j.size() > 0 ? j.size() - 1 : 0);
  std::vector<bool> seen(names.size(), false);
  bool has_none = false;
  for (const auto& [name, value] : j.items()) {
    if (!value.is_number_integer()) throw Error(ErrorKind::kParseError, "vocab: non-integer index");
    const long index = value.get<long>();
    if (index == 0) {
      if (name != kNonCallName) throw Error(ErrorKind::kParseError, "vocab: index 0 is reserved for none");
      has_none = true;
      continue;
    }
    if (index < 1 || static_cast<size_t>(index) > names.size() || seen[index - 1])
      throw Error(ErrorKind::kParseError, "vocab: indices must be contiguous from 1");
    names[index - 1] = name;
    seen[index - 1] = true;
  }
  if (!has_none) throw Error(ErrorKind::kParseError, "vocab: missing \"none\": 0");
  return ClassVocab(std::move(names));
}

void write_vocab(const std::filesystem::path& path, const ClassVocab& vocab) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  out << vocab_to_json(vocab) << "\n";
}

ClassVocab read_vocab(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kMissingFile, "missing vocab file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return vocab_from_json(buf.str());
}

void write_apel(const std::filesystem::path& path, const LabelTrack& track) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  const uint32_t header[3] = {kApelVersion, static_cast<uint32_t>(track.labels.size()),
                              static_cast<uint32_t>(track.vocab.num_calls())};
  out.write("APEL", 4);
  out.write(reinterpret_cast<const char*>(header), sizeof header);
  out.write(reinterpret_cast<const char*>(track.labels.data()),
            static_cast<std::streamsize>(track.labels.size() * sizeof(uint16_t)));
  if (!out) throw Error(ErrorKind::kIo, "short write to " + path.string());
}

LabelTrack read_apel(const std::filesystem::path& path, const ClassVocab& vocab) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kMissingFile, "missing label file " + path.string());
  char header[16];
  in.read(header, sizeof header);
  if (in.gcount() >= 4 && std::memcmp(header, "APEL", 4) != 0)
    throw Error(ErrorKind::kBadMagic, path.string() + ": not an APEL file");
  if (in.gcount() != sizeof header) throw Error(ErrorKind::kCorruptFile, path.string() + ": truncated header");
  uint32_t version, frames, num_calls;
  std::memcpy(&version, header + 4, 4);
  std::memcpy(&frames, header + 8, 4);
  std::memcpy(&num_calls, header + 12, 4);
  if (version != kApelVersion)
    throw Error(ErrorKind::kUnsupportedFormat, path.string() + ": APEL version " + std::to_string(version));
  if (num_calls != vocab.num_calls())
    throw Error(ErrorKind::kDimMismatch, path.string() + ": " + std::to_string(num_calls) +
                                             " call classes, vocabulary has " +
                                             std::to_string(vocab.num_calls()));
  LabelTrack track;
  track.clip_id = path.stem().string();
  track.vocab = vocab;
  track.labels.resize(frames);
  in.read(reinterpret_cast<char*>(track.labels.data()),
          static_cast<std::streamsize>(frames * sizeof(uint16_t)));
  if (static_cast<size_t>(in.gcount()) != frames * sizeof(uint16_t))
    throw Error(ErrorKind::kCorruptFile, path.string() + ": truncated labels");
  for (auto l : track.labels)
    if (l > num_calls) throw Error(ErrorKind::kCorruptFile, path.string() + ": label out of range");
  return track;
}

}  // namespace apesed
