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

#ifndef APESED_ERROR_HPP_
#define APESED_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace apesed {

// Every failure the toolkit reports carries one of these kinds. The CLI maps
// the kind onto a process exit code (see exit_code()).
enum class ErrorKind {
  kUsage,
  // Audio input.
  kUnsupportedFormat,
  kCorruptFile,
  kEmptyAudio,
  // Feature files.
  kBadMagic,
  kDimMismatch,
  kFrameCountMismatch,
  // Annotations.
  kParseError,
  kNegativeSpan,
  kOverlapError,
  kSpanPastEnd,
  // Corpus.
  kTooFewClips,
  kMissingFile,
  kAlignmentError,
  kEmptySplit,
  // Model.
  kBadConfig,
  kIncompatibleCheckpoint,
  kDivergence,
  // Evaluation.
  kLengthMismatch,
  kNoPositives,
  kFeatureKindMismatch,
  kClassArityMismatch,
  kIo,
};

std::string_view to_string(ErrorKind kind);

// 2 usage, 3 data error, 4 numeric divergence, 5 I/O.
int exit_code(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace apesed

#endif  // APESED_ERROR_HPP_
