// Copyright 2026 The rrlab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef RRLAB_ERROR_HPP_
#define RRLAB_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace rrlab {

// Error families surfaced across the C boundary. Values mirror rrlab_status.
enum class ErrorCode {
  kInvalidArgument = 1,
  kIo = 2,
  kSchema = 3,
  kConfig = 4,
  kGeneration = 5,
  kVersionMismatch = 6,
  kCorrupt = 7,
  kShapeMismatch = 8,
  kStaleCache = 9,
  kNonFinite = 10,
  kUnknownId = 11,
  kInternal = 99,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace rrlab

#endif  // RRLAB_ERROR_HPP_
