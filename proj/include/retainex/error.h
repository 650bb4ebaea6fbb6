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

#ifndef RETAINEX_ERROR_H_
#define RETAINEX_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace retainex {

// Machine-readable category of every failure raised by the library. The
// service maps each code to exactly one HTTP status.
enum class ErrorCode {
  kArgument,
  kState,
  kData,
  kParse,
  kNumeric,
  kEdit,
  kTraining,
  kUnsupported,
  kNotFound,
  kConflict,
  kIo,
};

std::string_view ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

#define RETAINEX_DEFINE_ERROR(Name, Code)                                  \
  class Name : public Error {                                              \
   public:                                                                 \
    explicit Name(const std::string& message) : Error(Code, message) {}    \
  };

RETAINEX_DEFINE_ERROR(ArgumentError, ErrorCode::kArgument)
RETAINEX_DEFINE_ERROR(StateError, ErrorCode::kState)
RETAINEX_DEFINE_ERROR(DataError, ErrorCode::kData)
RETAINEX_DEFINE_ERROR(ParseError, ErrorCode::kParse)
RETAINEX_DEFINE_ERROR(NumericError, ErrorCode::kNumeric)
RETAINEX_DEFINE_ERROR(EditError, ErrorCode::kEdit)
RETAINEX_DEFINE_ERROR(TrainingError, ErrorCode::kTraining)
RETAINEX_DEFINE_ERROR(UnsupportedError, ErrorCode::kUnsupported)
RETAINEX_DEFINE_ERROR(NotFoundError, ErrorCode::kNotFound)
RETAINEX_DEFINE_ERROR(ConflictError, ErrorCode::kConflict)
RETAINEX_DEFINE_ERROR(IoError, ErrorCode::kIo)

#undef RETAINEX_DEFINE_ERROR

}  // namespace retainex

#endif  // RETAINEX_ERROR_H_
