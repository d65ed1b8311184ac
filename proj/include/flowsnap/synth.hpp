#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "flowsnap/packet.hpp"

namespace flowsnap {

enum class SynthKind : std::uint8_t {
  Normal,          // handshake, data exchange, FIN teardown
  SynFlood,        // bare SYNs from rotating spoofed sources, no replies
  ShortFlowBurst,  // minimal complete flows fired rapidly from one source
};

/// Deterministic synthetic traffic recipe: same (profile, seed) always
/// yields a bit-identical packet stream.
struct SynthProfile {
  SynthKind kind = SynthKind::Normal;
  std::size_t flow_count = 100;

  // Data packets per Normal flow, drawn uniformly from [min, max].
  int data_packets_min = 0;
  int data_packets_max = 0;

  std::size_t max_active_flows = 32;  // interleaving width
  std::size_t client_pool = 16;       // distinct client addresses
  std::size_t server_pool = 4;        // distinct server addresses

  // /24-style prefixes; host octets are appended.
  std::string client_subnet = "10.0.0";
  std::string server_subnet = "192.168.1";

  double start_time = 1600000000.0;
  double mean_gap = 5e-4;  // seconds between consecutive packets
};

/// Generates the interleaved packet stream for a profile. Indices are
/// 1-based and sequential; timestamps strictly increase.
std::vector<PacketRecord> generate(const SynthProfile& profile, std::uint64_t seed);

/// Random interleave of several streams, preserving per-stream packet order;
/// indices and timestamps are reassigned for the merged sequence.
std::vector<PacketRecord> merge_streams(const std::vector<std::vector<PacketRecord>>& streams,
                                        std::uint64_t seed);

}  // namespace flowsnap
