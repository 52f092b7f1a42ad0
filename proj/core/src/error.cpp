// Copyright 2026 The innet Authors
// SPDX-License-Identifier: Apache-2.0

#include "innet/error.hpp"

#include <fstream>
#include <sstream>

#include "json_util.hpp"

namespace innet {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kParse: return "parse";
    case ErrorCode::kInvalidModel: return "invalid-model";
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kUnsupported: return "unsupported";
    case ErrorCode::kDepthExceeded: return "depth-exceeded";
    case ErrorCode::kLeafIdOverflow: return "leaf-id-overflow";
    case ErrorCode::kBudgetExceeded: return "budget-exceeded";
    case ErrorCode::kAccumulatorOverflow: return "accumulator-overflow";
    case ErrorCode::kCapacityExceeded: return "capacity-exceeded";
    case ErrorCode::kUnknownTable: return "unknown-table";
    case ErrorCode::kMalformedPacket: return "malformed-packet";
    case ErrorCode::kUnknownRoute: return "unknown-route";
    case ErrorCode::kFieldOverflow: return "field-overflow";
    case ErrorCode::kInfeasible: return "infeasible";
    case ErrorCode::kDisconnected: return "disconnected";
    case ErrorCode::kLengthMismatch: return "length-mismatch";
    case ErrorCode::kInvariant: return "invariant";
  }
  return "unknown";
}

namespace detail {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kParse, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kInvalidArgument, "cannot write " + path.string());
  out << text;
}

}  // namespace detail
}  // namespace innet
