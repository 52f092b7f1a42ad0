// Copyright 2026 The innet Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef INNET_PACKET_HPP_
#define INNET_PACKET_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <variant>
#include <vector>

namespace innet {

enum class PacketType : std::uint8_t { kRequest = 0, kResponse = 1 };

// 32-bit basic header, MSB first:
//   packet_id:12 | type:4 | mid:4 | vid:4 | rslt:4 | rid:4
struct Header {
  std::uint16_t packet_id = 0;
  PacketType type = PacketType::kRequest;
  std::uint8_t mid = 0;
  std::uint8_t vid = 0;
  std::uint8_t rslt = 0;
  std::uint8_t rid = 0;

  friend bool operator==(const Header&, const Header&) = default;
};

enum class IntermediateKind { kNone, kTree, kSvm };

// Section widths for one (mid, vid). Travels out of band; the wire carries
// only the header fields that select it.
struct PacketLayout {
  static constexpr std::size_t kHeaderBytes = 4;

  int feature_count = 0;
  int value_bits = 16;
  IntermediateKind kind = IntermediateKind::kNone;
  int code_bits = 34;
  int tree_slots = 0;
  int slot_bits = 4;
  int hyperplanes = 0;
  int acc_bits = 32;

  std::size_t feature_bits() const;
  std::size_t intermediate_bits() const;
  std::size_t feature_bytes() const { return (feature_bits() + 7) / 8; }
  std::size_t intermediate_bytes() const { return (intermediate_bits() + 7) / 8; }
  std::size_t request_bytes() const {
    return kHeaderBytes + feature_bytes() + intermediate_bytes();
  }
  std::size_t response_bytes() const { return kHeaderBytes; }

  friend bool operator==(const PacketLayout&, const PacketLayout&) = default;
};

struct TreeIntermediates {
  std::uint64_t code0 = 0;
  std::uint64_t code1 = 0;
  std::uint32_t f0 = 0;
  std::uint32_t f1 = 0;
  std::vector<std::uint8_t> slots;

  friend bool operator==(const TreeIntermediates&, const TreeIntermediates&) = default;
};

struct SvmIntermediates {
  std::vector<std::int64_t> accumulators;

  friend bool operator==(const SvmIntermediates&, const SvmIntermediates&) = default;
};

using Intermediates = std::variant<std::monostate, TreeIntermediates, SvmIntermediates>;

// Requests carry raw features and intermediates; responses are header only.
struct Packet {
  Header header;
  std::vector<std::uint32_t> features;
  Intermediates intermediates;

  friend bool operator==(const Packet&, const Packet&) = default;
};

// Throws kFieldOverflow naming the first field that does not fit its width.
std::vector<std::uint8_t> encode(const Packet& packet, const PacketLayout& layout);
// Throws kMalformedPacket on truncated/oversized buffers or an unknown type.
Packet decode(std::span<const std::uint8_t> bytes, const PacketLayout& layout);

void encode_header(const Header& header, std::span<std::uint8_t, 4> out);
Header decode_header(std::span<const std::uint8_t> bytes);

// Zero-initialised intermediates of the right shape for `layout`.
Intermediates empty_intermediates(const PacketLayout& layout);

}  // namespace innet

#endif  // INNET_PACKET_HPP_
