/**
 * Copyright 2026 The EvG Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#ifndef EVG_ERROR_HPP_
#define EVG_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace evg {

// Mirrors evg_status in evg.h; the numeric values are part of the C ABI.
enum class ErrorCode : int {
  kInvalidArgument = 1,
  kIo = 2,
  kFormat = 3,
  kDomain = 4,
  kProtocol = 5,
  kNumeric = 6,
  kConfig = 7,
  kRuntime = 8,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string &message)
      : std::runtime_error(message), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

#define EVG_DEFINE_ERROR(Name, Code)                                  \
  class Name : public Error {                                         \
   public:                                                            \
    explicit Name(const std::string &message) : Error(Code, message) {} \
  };

EVG_DEFINE_ERROR(InvalidArgument, ErrorCode::kInvalidArgument)
EVG_DEFINE_ERROR(IoError, ErrorCode::kIo)
EVG_DEFINE_ERROR(FormatError, ErrorCode::kFormat)
EVG_DEFINE_ERROR(DomainError, ErrorCode::kDomain)
EVG_DEFINE_ERROR(ProtocolError, ErrorCode::kProtocol)
EVG_DEFINE_ERROR(NumericError, ErrorCode::kNumeric)
EVG_DEFINE_ERROR(ConfigError, ErrorCode::kConfig)
EVG_DEFINE_ERROR(RuntimeError, ErrorCode::kRuntime)

#undef EVG_DEFINE_ERROR

}  // namespace evg

#endif  // EVG_ERROR_HPP_
