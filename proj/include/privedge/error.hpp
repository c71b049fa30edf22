// Copyright 2026 The PrivEdge Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace privedge {

// Machine-readable error classes. The CLI prints kind names verbatim and maps
// them onto exit codes.
enum class ErrorKind {
  kOverflow,
  kRandomness,
  kShapeMismatch,
  kSessionMismatch,
  kParamsMismatch,
  kTripleExhausted,
  kChannel,
  kSequenceGap,
  kDecode,
  kOtProtocol,
  kGarbledTable,
  kMalformedSpec,
  kVersionMismatch,
  kManifestMismatch,
  kUsage,
  kIo,
  kAborted,
};

std::string_view error_kind_name(ErrorKind kind);
std::optional<ErrorKind> error_kind_from_name(std::string_view name);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

inline void require(bool cond, ErrorKind kind, const std::string& what) {
  if (!cond) fail(kind, what);
}

}  // namespace privedge
