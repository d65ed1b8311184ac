#include "flowsnap/packet.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <utility>

namespace flowsnap {

namespace {

// Rendering order inferred from the observed class strings; URG has a slot
// even though no named class uses it.
constexpr std::array<std::pair<FlagSet::Flag, const char*>, 9> kRenderOrder{{
    {FlagSet::NS, "NS"},
    {FlagSet::CWR, "CWR"},
    {FlagSet::ECE, "ECE"},
    {FlagSet::URG, "URG"},
    {FlagSet::ACK, "ACK"},
    {FlagSet::PSH, "PSH"},
    {FlagSet::RST, "RST"},
    {FlagSet::SYN, "SYN"},
    {FlagSet::FIN, "FIN"},
}};

struct NamedClass {
  EventClass ec;
  std::uint16_t mask;
  Direction dir;
};

constexpr std::array<NamedClass, 23> kNamedClasses{{
    {EventClass::SynC, FlagSet::SYN, Direction::Client},
    {EventClass::AckSynS, FlagSet::ACK | FlagSet::SYN, Direction::Server},
    {EventClass::AckC, FlagSet::ACK, Direction::Client},
    {EventClass::AckPshC, FlagSet::ACK | FlagSet::PSH, Direction::Client},
    {EventClass::AckPshS, FlagSet::ACK | FlagSet::PSH, Direction::Server},
    {EventClass::AckFinC, FlagSet::ACK | FlagSet::FIN, Direction::Client},
    {EventClass::AckS, FlagSet::ACK, Direction::Server},
    {EventClass::AckFinS, FlagSet::ACK | FlagSet::FIN, Direction::Server},
    {EventClass::AckRstC, FlagSet::ACK | FlagSet::RST, Direction::Client},
    {EventClass::AckRstS, FlagSet::ACK | FlagSet::RST, Direction::Server},
    {EventClass::RstS, FlagSet::RST, Direction::Server},
    {EventClass::AckPshFinS, FlagSet::ACK | FlagSet::PSH | FlagSet::FIN, Direction::Server},
    {EventClass::RstC, FlagSet::RST, Direction::Client},
    {EventClass::CwrEceSynC, FlagSet::CWR | FlagSet::ECE | FlagSet::SYN, Direction::Client},
    {EventClass::EceAckSynS, FlagSet::ECE | FlagSet::ACK | FlagSet::SYN, Direction::Server},
    {EventClass::NsAckFinS, FlagSet::NS | FlagSet::ACK | FlagSet::FIN, Direction::Server},
    {EventClass::AckPshFinC, FlagSet::ACK | FlagSet::PSH | FlagSet::FIN, Direction::Client},
    {EventClass::CwrAckPshC, FlagSet::CWR | FlagSet::ACK | FlagSet::PSH, Direction::Client},
    {EventClass::CwrAckC, FlagSet::CWR | FlagSet::ACK, Direction::Client},
    {EventClass::CwrAckS, FlagSet::CWR | FlagSet::ACK, Direction::Server},
    {EventClass::CwrAckPshS, FlagSet::CWR | FlagSet::ACK | FlagSet::PSH, Direction::Server},
    {EventClass::CwrAckRstS, FlagSet::CWR | FlagSet::ACK | FlagSet::RST, Direction::Server},
    {EventClass::CwrAckRstC, FlagSet::CWR | FlagSet::ACK | FlagSet::RST, Direction::Client},
}};

std::size_t lookup_slot(std::uint16_t mask, Direction dir) {
  return static_cast<std::size_t>(mask) | (dir == Direction::Server ? 0x200u : 0u);
}

// (mask, direction) -> class, for all 512 * 2 combinations.
const std::array<EventClass, 1024>& class_lookup() {
  static const std::array<EventClass, 1024> table = [] {
    std::array<EventClass, 1024> t;
    t.fill(EventClass::Others);
    for (const NamedClass& nc : kNamedClasses) {
      t[lookup_slot(nc.mask, nc.dir)] = nc.ec;
    }
    return t;
  }();
  return table;
}

const std::array<std::string, kNumEventClasses>& name_table() {
  static const std::array<std::string, kNumEventClasses> table = [] {
    std::array<std::string, kNumEventClasses> t;
    for (const NamedClass& nc : kNamedClasses) {
      FlagSet fs = FlagSet::from_mask(nc.mask);
      t[class_index(nc.ec)] = render_event_string(fs, nc.dir);
    }
    t[class_index(EventClass::Start)] = "START";
    t[class_index(EventClass::End)] = "END";
    t[class_index(EventClass::Others)] = "OTHERS";
    return t;
  }();
  return table;
}

}  // namespace

FlagSet FlagSet::from_mask(std::uint32_t raw) {
  if ((raw & ~static_cast<std::uint32_t>(kAllFlags)) != 0) {
    char buf[16];
    auto [end, _] = std::to_chars(buf, buf + sizeof buf, raw, 16);
    throw Error(errc::unknown_flag_bit, "tcp flag bitmask 0x" + std::string(buf, end) +
                                            " has bits outside the nine defined flags");
  }
  FlagSet fs;
  fs.mask_ = static_cast<std::uint16_t>(raw);
  return fs;
}

FlagSet parse_flags(std::string_view raw) {
  // Trim surrounding whitespace.
  while (!raw.empty() && std::isspace(static_cast<unsigned char>(raw.front()))) raw.remove_prefix(1);
  while (!raw.empty() && std::isspace(static_cast<unsigned char>(raw.back()))) raw.remove_suffix(1);

  if (raw.size() > 2 && raw[0] == '0' && (raw[1] == 'x' || raw[1] == 'X')) {
    std::uint32_t value = 0;
    auto [ptr, ec] = std::from_chars(raw.data() + 2, raw.data() + raw.size(), value, 16);
    if (ec != std::errc{} || ptr != raw.data() + raw.size()) {
      throw Error(errc::unknown_flag_name, "bad hex flag mask '" + std::string(raw) + "'");
    }
    return FlagSet::from_mask(value);
  }

  std::uint16_t mask = 0;
  std::size_t pos = 0;
  while (pos < raw.size()) {
    while (pos < raw.size() && (raw[pos] == ',' || raw[pos] == ' ' || raw[pos] == '|')) ++pos;
    std::size_t end = pos;
    while (end < raw.size() && raw[end] != ',' && raw[end] != ' ' && raw[end] != '|') ++end;
    if (end == pos) break;
    std::string name(raw.substr(pos, end - pos));
    std::transform(name.begin(), name.end(), name.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    bool found = false;
    for (const auto& [flag, flag_name] : kRenderOrder) {
      if (name == flag_name) {
        mask |= flag;
        found = true;
        break;
      }
    }
    if (!found) {
      throw Error(errc::unknown_flag_name, "unknown tcp flag name '" + name + "'");
    }
    pos = end;
  }
  return FlagSet::from_mask(mask);
}

EventClass class_from_index(int index) {
  if (index < 0 || index >= kNumEventClasses) {
    throw Error(errc::corrupt_state, "event class index " + std::to_string(index) + " out of range");
  }
  return static_cast<EventClass>(index);
}

const std::string& class_name(EventClass ec) { return name_table()[class_index(ec)]; }

std::string render_event_string(FlagSet flags, Direction dir) {
  std::string out = "000.";
  for (const auto& [flag, name] : kRenderOrder) {
    if (flags.contains(flag)) {
      out += name;
      out += '.';
    }
  }
  out += dir == Direction::Client ? "|C" : "|S";
  return out;
}

EventClass event_class(FlagSet flags, Direction dir) {
  return class_lookup()[lookup_slot(flags.mask(), dir)];
}

}  // namespace flowsnap
