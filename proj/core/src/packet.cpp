// Copyright 2026 The innet Authors
// SPDX-License-Identifier: Apache-2.0

#include "innet/packet.hpp"

#include <sstream>
#include <string>

#include "innet/error.hpp"
#include "innet/ternary.hpp"

namespace innet {
namespace {

class BitWriter {
 public:
  explicit BitWriter(std::vector<std::uint8_t>& out) : out_(out) {}

  void put(std::uint64_t value, int bits) {
    for (int b = bits - 1; b >= 0; --b) {
      if (used_ == 0) out_.push_back(0);
      if ((value >> b) & 1u) out_.back() |= static_cast<std::uint8_t>(0x80u >> used_);
      used_ = (used_ + 1) % 8;
    }
  }

  void align() { used_ = 0; }

 private:
  std::vector<std::uint8_t>& out_;
  int used_ = 0;
};

class BitReader {
 public:
  explicit BitReader(std::span<const std::uint8_t> in) : in_(in) {}

  std::uint64_t get(int bits) {
    std::uint64_t v = 0;
    for (int b = 0; b < bits; ++b) {
      const std::size_t byte = pos_ / 8;
      const int bit = 7 - static_cast<int>(pos_ % 8);
      v = (v << 1) | ((in_[byte] >> bit) & 1u);
      ++pos_;
    }
    return v;
  }

  void align() { pos_ = (pos_ + 7) / 8 * 8; }

 private:
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

void check_width(std::uint64_t value, int bits, const std::string& field) {
  if (value > width_mask(bits)) {
    std::ostringstream msg;
    msg << "field '" << field << "' value " << value << " exceeds " << bits << " bits";
    throw Error(ErrorCode::kFieldOverflow, msg.str());
  }
}

void check_signed(std::int64_t value, int bits, const std::string& field) {
  if (bits >= 64) return;
  const std::int64_t lo = -(std::int64_t{1} << (bits - 1));
  const std::int64_t hi = (std::int64_t{1} << (bits - 1)) - 1;
  if (value < lo || value > hi) {
    std::ostringstream msg;
    msg << "field '" << field << "' value " << value << " exceeds " << bits
        << "-bit two's complement";
    throw Error(ErrorCode::kFieldOverflow, msg.str());
  }
}

std::int64_t sign_extend(std::uint64_t raw, int bits) {
  if (bits >= 64) return static_cast<std::int64_t>(raw);
  if (raw & (std::uint64_t{1} << (bits - 1))) raw |= ~width_mask(bits);
  return static_cast<std::int64_t>(raw);
}

}  // namespace

std::size_t PacketLayout::feature_bits() const {
  return static_cast<std::size_t>(feature_count) * static_cast<std::size_t>(value_bits);
}

std::size_t PacketLayout::intermediate_bits() const {
  switch (kind) {
    case IntermediateKind::kNone: return 0;
    case IntermediateKind::kTree:
      return static_cast<std::size_t>(2 * code_bits + 2 * value_bits + tree_slots * slot_bits);
    case IntermediateKind::kSvm:
      return static_cast<std::size_t>(hyperplanes) * static_cast<std::size_t>(acc_bits);
  }
  return 0;
}

Intermediates empty_intermediates(const PacketLayout& layout) {
  switch (layout.kind) {
    case IntermediateKind::kNone: return std::monostate{};
    case IntermediateKind::kTree: {
      TreeIntermediates t;
      t.slots.assign(static_cast<std::size_t>(layout.tree_slots), 0);
      return t;
    }
    case IntermediateKind::kSvm: {
      SvmIntermediates s;
      s.accumulators.assign(static_cast<std::size_t>(layout.hyperplanes), 0);
      return s;
    }
  }
  return std::monostate{};
}

void encode_header(const Header& h, std::span<std::uint8_t, 4> out) {
  check_width(h.packet_id, 12, "packet_id");
  check_width(static_cast<std::uint8_t>(h.type), 4, "type");
  check_width(h.mid, 4, "mid");
  check_width(h.vid, 4, "vid");
  check_width(h.rslt, 4, "rslt");
  check_width(h.rid, 4, "rid");
  const std::uint32_t word = (std::uint32_t{h.packet_id} << 20) |
                             (std::uint32_t{static_cast<std::uint8_t>(h.type)} << 16) |
                             (std::uint32_t{h.mid} << 12) | (std::uint32_t{h.vid} << 8) |
                             (std::uint32_t{h.rslt} << 4) | std::uint32_t{h.rid};
  out[0] = static_cast<std::uint8_t>(word >> 24);
  out[1] = static_cast<std::uint8_t>(word >> 16);
  out[2] = static_cast<std::uint8_t>(word >> 8);
  out[3] = static_cast<std::uint8_t>(word);
}

Header decode_header(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < PacketLayout::kHeaderBytes) {
    throw Error(ErrorCode::kMalformedPacket, "truncated header: expected 4 bytes, got " +
                                                 std::to_string(bytes.size()));
  }
  const std::uint32_t word = (std::uint32_t{bytes[0]} << 24) | (std::uint32_t{bytes[1]} << 16) |
                             (std::uint32_t{bytes[2]} << 8) | std::uint32_t{bytes[3]};
  const auto type = static_cast<std::uint8_t>((word >> 16) & 0xF);
  if (type > 1) {
    throw Error(ErrorCode::kMalformedPacket, "unknown packet type " + std::to_string(type));
  }
  Header h;
  h.packet_id = static_cast<std::uint16_t>(word >> 20);
  h.type = static_cast<PacketType>(type);
  h.mid = static_cast<std::uint8_t>((word >> 12) & 0xF);
  h.vid = static_cast<std::uint8_t>((word >> 8) & 0xF);
  h.rslt = static_cast<std::uint8_t>((word >> 4) & 0xF);
  h.rid = static_cast<std::uint8_t>(word & 0xF);
  return h;
}

std::vector<std::uint8_t> encode(const Packet& p, const PacketLayout& layout) {
  std::vector<std::uint8_t> out(PacketLayout::kHeaderBytes);
  encode_header(p.header, std::span<std::uint8_t, 4>(out.data(), 4));
  if (p.header.type == PacketType::kResponse) {
    if (!p.features.empty() || !std::holds_alternative<std::monostate>(p.intermediates)) {
      throw Error(ErrorCode::kInvalidArgument, "response packets carry no feature or intermediate sections");
    }
    return out;
  }

  if (static_cast<int>(p.features.size()) != layout.feature_count) {
    throw Error(ErrorCode::kFieldOverflow,
                "feature section holds " + std::to_string(p.features.size()) +
                    " values, layout expects " + std::to_string(layout.feature_count));
  }
  out.reserve(layout.request_bytes());
  BitWriter w(out);
  for (std::size_t i = 0; i < p.features.size(); ++i) {
    check_width(p.features[i], layout.value_bits, "feature[" + std::to_string(i) + "]");
    w.put(p.features[i], layout.value_bits);
  }
  w.align();

  switch (layout.kind) {
    case IntermediateKind::kNone:
      if (!std::holds_alternative<std::monostate>(p.intermediates)) {
        throw Error(ErrorCode::kFieldOverflow, "layout has no intermediates section");
      }
      break;
    case IntermediateKind::kTree: {
      const auto* t = std::get_if<TreeIntermediates>(&p.intermediates);
      if (t == nullptr || static_cast<int>(t->slots.size()) != layout.tree_slots) {
        throw Error(ErrorCode::kFieldOverflow, "tree intermediates do not match layout");
      }
      check_width(t->code0, layout.code_bits, "code0");
      check_width(t->code1, layout.code_bits, "code1");
      check_width(t->f0, layout.value_bits, "f0");
      check_width(t->f1, layout.value_bits, "f1");
      w.put(t->code0, layout.code_bits);
      w.put(t->code1, layout.code_bits);
      w.put(t->f0, layout.value_bits);
      w.put(t->f1, layout.value_bits);
      for (std::size_t s = 0; s < t->slots.size(); ++s) {
        check_width(t->slots[s], layout.slot_bits, "slot[" + std::to_string(s) + "]");
        w.put(t->slots[s], layout.slot_bits);
      }
      break;
    }
    case IntermediateKind::kSvm: {
      const auto* s = std::get_if<SvmIntermediates>(&p.intermediates);
      if (s == nullptr || static_cast<int>(s->accumulators.size()) != layout.hyperplanes) {
        throw Error(ErrorCode::kFieldOverflow, "svm intermediates do not match layout");
      }
      for (std::size_t h = 0; h < s->accumulators.size(); ++h) {
        check_signed(s->accumulators[h], layout.acc_bits, "acc[" + std::to_string(h) + "]");
        w.put(static_cast<std::uint64_t>(s->accumulators[h]) & width_mask(layout.acc_bits),
              layout.acc_bits);
      }
      break;
    }
  }
  return out;
}

Packet decode(std::span<const std::uint8_t> bytes, const PacketLayout& layout) {
  Packet p;
  p.header = decode_header(bytes);
  const std::size_t expected = p.header.type == PacketType::kResponse ? layout.response_bytes()
                                                                      : layout.request_bytes();
  if (bytes.size() != expected) {
    std::ostringstream msg;
    msg << (bytes.size() < expected ? "truncated" : "oversized")
        << (p.header.type == PacketType::kResponse ? " response" : " request")
        << ": expected " << expected << " bytes, got " << bytes.size();
    throw Error(ErrorCode::kMalformedPacket, msg.str());
  }
  if (p.header.type == PacketType::kResponse) return p;

  BitReader r(bytes.subspan(PacketLayout::kHeaderBytes));
  p.features.resize(static_cast<std::size_t>(layout.feature_count));
  for (auto& f : p.features) f = static_cast<std::uint32_t>(r.get(layout.value_bits));
  r.align();

  switch (layout.kind) {
    case IntermediateKind::kNone: break;
    case IntermediateKind::kTree: {
      TreeIntermediates t;
      t.code0 = r.get(layout.code_bits);
      t.code1 = r.get(layout.code_bits);
      t.f0 = static_cast<std::uint32_t>(r.get(layout.value_bits));
      t.f1 = static_cast<std::uint32_t>(r.get(layout.value_bits));
      t.slots.resize(static_cast<std::size_t>(layout.tree_slots));
      for (auto& s : t.slots) s = static_cast<std::uint8_t>(r.get(layout.slot_bits));
      p.intermediates = std::move(t);
      break;
    }
    case IntermediateKind::kSvm: {
      SvmIntermediates s;
      s.accumulators.resize(static_cast<std::size_t>(layout.hyperplanes));
      for (auto& a : s.accumulators) a = sign_extend(r.get(layout.acc_bits), layout.acc_bits);
      p.intermediates = std::move(s);
      break;
    }
  }
  return p;
}

}  // namespace innet
