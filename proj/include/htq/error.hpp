// Copyright 2026 The HTQ Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace htq {

enum class ErrorCode {
  kNonPowerOfTwo,
  kOrderTooLarge,
  kWidthTooSmall,
  kAlphaNegative,
  kZeroGain,
  kEmptyDataset,
  kBitsOutOfRange,
  kCodeOverflow,
  kBadMagic,
  kTruncatedPayload,
  kHeaderFieldOutOfRange,
  kDimensionMismatch,
  kImageTooSmall,
  kBackendBitsNegative,
  kInvalidArgument,
  kIo,
  kUnsupportedFormat,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNonPowerOfTwo: return "NonPowerOfTwo";
    case ErrorCode::kOrderTooLarge: return "OrderTooLarge";
    case ErrorCode::kWidthTooSmall: return "WidthTooSmall";
    case ErrorCode::kAlphaNegative: return "AlphaNegative";
    case ErrorCode::kZeroGain: return "ZeroGain";
    case ErrorCode::kEmptyDataset: return "EmptyDataset";
    case ErrorCode::kBitsOutOfRange: return "BitsOutOfRange";
    case ErrorCode::kCodeOverflow: return "CodeOverflow";
    case ErrorCode::kBadMagic: return "BadMagic";
    case ErrorCode::kTruncatedPayload: return "TruncatedPayload";
    case ErrorCode::kHeaderFieldOutOfRange: return "HeaderFieldOutOfRange";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kImageTooSmall: return "ImageTooSmall";
    case ErrorCode::kBackendBitsNegative: return "BackendBitsNegative";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kIo: return "Io";
    case ErrorCode::kUnsupportedFormat: return "UnsupportedFormat";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above so
/// callers (the CLI in particular) can map it without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace htq
