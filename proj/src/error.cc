/*
 * Copyright 2026 The RetainEX Workbench Authors.
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

#include "retainex/error.h"

namespace retainex {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kArgument:
      return "invalid_argument";
    case ErrorCode::kState:
      return "invalid_state";
    case ErrorCode::kData:
      return "invalid_data";
    case ErrorCode::kParse:
      return "parse_error";
    case ErrorCode::kNumeric:
      return "numeric_error";
    case ErrorCode::kEdit:
      return "edit_error";
    case ErrorCode::kTraining:
      return "training_error";
    case ErrorCode::kUnsupported:
      return "unsupported";
    case ErrorCode::kNotFound:
      return "not_found";
    case ErrorCode::kConflict:
      return "conflict";
    case ErrorCode::kIo:
      return "io_error";
  }
  return "unknown";
}

}  // namespace retainex
