// Copyright 2026 The innet Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef INNET_ERROR_HPP_
#define INNET_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace innet {

enum class ErrorCode {
  kParse,
  kInvalidModel,
  kInvalidArgument,
  kUnsupported,
  kDepthExceeded,
  kLeafIdOverflow,
  kBudgetExceeded,
  kAccumulatorOverflow,
  kCapacityExceeded,
  kUnknownTable,
  kMalformedPacket,
  kUnknownRoute,
  kFieldOverflow,
  kInfeasible,
  kDisconnected,
  kLengthMismatch,
  kInvariant,
};

std::string_view to_string(ErrorCode code);

// All library failures surface as innet::Error; `code()` lets callers branch
// without parsing the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace innet

#endif  // INNET_ERROR_HPP_
