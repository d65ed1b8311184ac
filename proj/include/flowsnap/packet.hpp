#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "flowsnap/error.hpp"

namespace flowsnap {

/// Set of TCP header flags. Only the nine named bits may ever be set;
/// constructing from a raw mask with any other bit raises unknown_flag_bit.
class FlagSet {
 public:
  enum Flag : std::uint16_t {
    FIN = 0x001,
    SYN = 0x002,
    RST = 0x004,
    PSH = 0x008,
    ACK = 0x010,
    URG = 0x020,
    ECE = 0x040,
    CWR = 0x080,
    NS = 0x100,
  };

  static constexpr std::uint16_t kAllFlags = 0x1FF;

  constexpr FlagSet() = default;
  constexpr explicit FlagSet(std::initializer_list<Flag> flags) {
    for (Flag f : flags) mask_ |= f;
  }

  static FlagSet from_mask(std::uint32_t raw);

  constexpr bool contains(Flag f) const { return (mask_ & f) != 0; }
  constexpr std::uint16_t mask() const { return mask_; }
  constexpr bool empty() const { return mask_ == 0; }

  friend constexpr bool operator==(FlagSet a, FlagSet b) { return a.mask_ == b.mask_; }

 private:
  std::uint16_t mask_ = 0;
};

/// Accepts either a hex bitmask ("0x0012", as exported by tshark's
/// tcp.flags field) or a separated list of flag names ("SYN,ACK").
FlagSet parse_flags(std::string_view raw);

/// Who sent a packet, relative to the flow initiator.
enum class Direction : std::uint8_t { Client, Server };

/// The 26 event classes: 23 observed flag/direction combinations plus the
/// START, END and OTHERS defaults. Declaration order fixes the index of each
/// class in the adjacency matrix, so it must never be reordered.
enum class EventClass : std::uint8_t {
  SynC = 0,
  AckSynS,
  AckC,
  AckPshC,
  AckPshS,
  AckFinC,
  AckS,
  AckFinS,
  AckRstC,
  AckRstS,
  RstS,
  AckPshFinS,
  RstC,
  CwrEceSynC,
  EceAckSynS,
  NsAckFinS,
  AckPshFinC,
  CwrAckPshC,
  CwrAckC,
  CwrAckS,
  CwrAckPshS,
  CwrAckRstS,
  CwrAckRstC,
  Start,
  End,
  Others,
};

inline constexpr int kNumEventClasses = 26;
inline constexpr int kNumRelations = kNumEventClasses * kNumEventClasses;

constexpr int class_index(EventClass ec) { return static_cast<int>(ec); }

EventClass class_from_index(int index);

/// Canonical rendering, e.g. "000.SYN.|C" or "START". These strings appear
/// verbatim in snapshot metadata.
const std::string& class_name(EventClass ec);

/// Renders the event-class string for an arbitrary flag set: the "000."
/// prefix, each enabled flag name in the order NS CWR ECE URG ACK PSH RST
/// SYN FIN suffixed with ".", then the direction indicator.
std::string render_event_string(FlagSet flags, Direction dir);

/// Maps (flags, direction) onto one of the 23 named classes, or OTHERS for
/// any combination not in the table. Never returns START or END.
EventClass event_class(FlagSet flags, Direction dir);

/// One observed packet with the attributes the preprocessor consumes.
struct PacketRecord {
  std::uint64_t index = 0;  // ordinal in the stream
  double timestamp = 0.0;   // epoch seconds
  std::string src_ip;
  std::uint16_t src_port = 0;
  std::string dst_ip;
  std::uint16_t dst_port = 0;
  FlagSet flags;

  friend bool operator==(const PacketRecord&, const PacketRecord&) = default;
};

}  // namespace flowsnap
