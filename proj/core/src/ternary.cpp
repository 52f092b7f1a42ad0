// Copyright 2026 The innet Authors
// SPDX-License-Identifier: Apache-2.0

#include "innet/ternary.hpp"

#include <sstream>

#include "innet/error.hpp"

namespace innet {

bool TernaryKey::is_prefix() const {
  const std::uint64_t m = mask & width_mask(width);
  const std::uint64_t holes = ~m & width_mask(width);
  // holes must be a contiguous run of low bits: holes + 1 is a power of two
  return (holes & (holes + 1)) == 0;
}

TernaryKey exact_key(std::uint64_t value, int width) {
  return TernaryKey{value & width_mask(width), width_mask(width), width};
}

TernaryKey wildcard_key(int width) { return TernaryKey{0, 0, width}; }

std::vector<TernaryKey> range_to_ternary(std::uint64_t lo, std::uint64_t hi,
                                         int width) {
  if (width < 1 || width > 64) {
    throw Error(ErrorCode::kInvalidArgument, "range_to_ternary: width must be in [1, 64]");
  }
  if (lo > hi || hi > width_mask(width)) {
    std::ostringstream msg;
    msg << "range_to_ternary: invalid range [" << lo << ", " << hi << "] for width "
        << width;
    throw Error(ErrorCode::kInvalidArgument, msg.str());
  }

  std::vector<TernaryKey> keys;
  std::uint64_t cur = lo;
  while (true) {
    // Largest aligned block starting at cur that stays inside [cur, hi].
    int bits = 0;
    while (bits < width) {
      const std::uint64_t next_span = width_mask(bits + 1);
      if ((cur & next_span) != 0) break;
      if (hi - cur < next_span) break;
      ++bits;
    }
    const std::uint64_t span = width_mask(bits);
    keys.push_back(TernaryKey{cur, width_mask(width) & ~span, width});
    const std::uint64_t last = cur + span;
    if (last >= hi) break;
    cur = last + 1;
  }
  return keys;
}

}  // namespace innet
