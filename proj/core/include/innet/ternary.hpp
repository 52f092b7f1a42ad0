// Copyright 2026 The innet Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef INNET_TERNARY_HPP_
#define INNET_TERNARY_HPP_

#include <cstdint>
#include <vector>

namespace innet {

constexpr std::uint64_t width_mask(int width) {
  return width >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << width) - 1;
}

// A (value, mask) match key over `width` bits. Bits cleared in `mask` are
// wildcards; `value` bits under the wildcard are ignored.
struct TernaryKey {
  std::uint64_t value = 0;
  std::uint64_t mask = 0;
  int width = 0;

  bool matches(std::uint64_t input) const {
    return (input & mask) == (value & mask);
  }

  bool is_exact() const { return (mask & width_mask(width)) == width_mask(width); }

  // True when the mask is a run of ones followed by a run of zeros.
  bool is_prefix() const;

  // Bounds of the matched block; only meaningful for prefix keys.
  std::uint64_t low() const { return value & mask & width_mask(width); }
  std::uint64_t high() const { return low() | (~mask & width_mask(width)); }

  friend bool operator==(const TernaryKey&, const TernaryKey&) = default;
};

inline bool matches(const TernaryKey& key, std::uint64_t input) {
  return key.matches(input);
}

TernaryKey exact_key(std::uint64_t value, int width);
TernaryKey wildcard_key(int width);

// Minimal prefix cover of [lo, hi]. Keys are disjoint, emitted in ascending
// order of the values they match. Throws kInvalidArgument when lo > hi or
// hi does not fit in `width` bits.
std::vector<TernaryKey> range_to_ternary(std::uint64_t lo, std::uint64_t hi,
                                         int width);

}  // namespace innet

#endif  // INNET_TERNARY_HPP_
