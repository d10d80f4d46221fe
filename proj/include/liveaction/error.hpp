// Copyright 2026 The LiVeAction Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lva {

enum class ErrorCode {
  Shape,
  Config,
  Domain,
  Decode,
  ParamMismatch,
  Io,
  NotFound,
  InvalidArgument,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Raised while parsing a container; `offset` is the byte position at which
/// the problem was detected.
class DecodeError : public Error {
 public:
  DecodeError(std::size_t offset, const std::string& what)
      : Error(ErrorCode::Decode,
              what + " (at byte offset " + std::to_string(offset) + ")"),
        offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

}  // namespace lva
