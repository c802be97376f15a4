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

#include "apesed/error.hpp"

namespace apesed {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kUsage: return "Usage";
    case ErrorKind::kUnsupportedFormat: return "UnsupportedFormat";
    case ErrorKind::kCorruptFile: return "CorruptFile";
    case ErrorKind::kEmptyAudio: return "EmptyAudio";
    case ErrorKind::kBadMagic: return "BadMagic";
    case ErrorKind::kDimMismatch: return "DimMismatch";
    case ErrorKind::kFrameCountMismatch: return "FrameCountMismatch";
    case ErrorKind::kParseError: return "ParseError";
    case ErrorKind::kNegativeSpan: return "NegativeSpan";
    case ErrorKind::kOverlapError: return "OverlapError";
    case ErrorKind::kSpanPastEnd: return "SpanPastEnd";
    case ErrorKind::kTooFewClips: return "TooFewClips";
    case ErrorKind::kMissingFile: return "MissingFile";
    case ErrorKind::kAlignmentError: return "AlignmentError";
    case ErrorKind::kEmptySplit: return "EmptySplit";
    case ErrorKind::kBadConfig: return "BadConfig";
    case ErrorKind::kIncompatibleCheckpoint: return "IncompatibleCheckpoint";
    case ErrorKind::kDivergence: return "DivergenceError";
    case ErrorKind::kLengthMismatch: return "LengthMismatch";
    case ErrorKind::kNoPositives: return "NoPositives";
    case ErrorKind::kFeatureKindMismatch: return "FeatureKindMismatch";
    case ErrorKind::kClassArityMismatch: return "ClassArityMismatch";
    case ErrorKind::kIo: return "IoError";
  }
  return "Unknown";
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kUsage:
    case ErrorKind::kBadConfig:
      return 2;
    case ErrorKind::kDivergence:
      return 4;
    case ErrorKind::kIo:
    case ErrorKind::kMissingFile:
      return 5;
    default:
      return 3;
  }
}

}  // namespace apesed
