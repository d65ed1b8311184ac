#include "flowsnap/synth.hpp"

#include <deque>
#include <random>

#include "flowsnap/error.hpp"

namespace flowsnap {

namespace {

// Canonical uniform double in [0, 1), independent of stdlib distribution
// implementations so streams stay identical everywhere.
double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) {
  return rng() % bound;
}

struct Endpoint {
  std::string ip;
  std::uint16_t port;
};

struct ScriptedPacket {
  Direction dir;
  FlagSet flags;
};

struct FlowScript {
  Endpoint client;
  Endpoint server;
  std::vector<ScriptedPacket> packets;
  std::size_t next = 0;
};

std::string pool_ip(const std::string& subnet, std::size_t host) {
  return subnet + "." + std::to_string(1 + host);
}

constexpr std::uint16_t kServerPorts[] = {80, 443, 8080, 22};

FlowScript make_flow(const SynthProfile& p, std::size_t ordinal, std::mt19937_64& rng) {
  FlowScript flow;
  const std::uint16_t client_port = static_cast<std::uint16_t>(1024 + ordinal % 64000);

  switch (p.kind) {
    case SynthKind::SynFlood: {
      // Spoofed rotating sources, one victim, nothing but SYNs.
      flow.client = {"172.16." + std::to_string((ordinal / 250) % 250) + "." +
                         std::to_string(ordinal % 250),
                     client_port};
      flow.server = {pool_ip(p.server_subnet, 0), 80};
      flow.packets = {{Direction::Client, FlagSet{FlagSet::SYN}}};
      return flow;
    }
    case SynthKind::ShortFlowBurst: {
      flow.client = {pool_ip(p.client_subnet, 0), client_port};
      flow.server = {pool_ip(p.server_subnet, ordinal % p.server_pool),
                     kServerPorts[ordinal % 4]};
      flow.packets = {{Direction::Client, FlagSet{FlagSet::SYN}},
                      {Direction::Server, FlagSet{FlagSet::SYN, FlagSet::ACK}},
                      {Direction::Client, FlagSet{FlagSet::ACK}},
                      {Direction::Client, FlagSet{FlagSet::ACK, FlagSet::FIN}}};
      return flow;
    }
    case SynthKind::Normal:
      break;
  }

  flow.client = {pool_ip(p.client_subnet, ordinal % p.client_pool), client_port};
  flow.server = {pool_ip(p.server_subnet, ordinal % p.server_pool), kServerPorts[ordinal % 4]};

  flow.packets = {{Direction::Client, FlagSet{FlagSet::SYN}},
                  {Direction::Server, FlagSet{FlagSet::SYN, FlagSet::ACK}},
                  {Direction::Client, FlagSet{FlagSet::ACK}}};

  int span = p.data_packets_max - p.data_packets_min + 1;
  int data = p.data_packets_min + static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(span)));
  for (int i = 0; i < data; ++i) {
    Direction dir = uniform01(rng) < 0.5 ? Direction::Client : Direction::Server;
    FlagSet flags = uniform01(rng) < 0.5 ? FlagSet{FlagSet::ACK, FlagSet::PSH}
                                         : FlagSet{FlagSet::ACK};
    flow.packets.push_back({dir, flags});
  }

  flow.packets.push_back({Direction::Client, FlagSet{FlagSet::ACK, FlagSet::FIN}});
  return flow;
}

void validate(const SynthProfile& p) {
  if (p.data_packets_min < 0 || p.data_packets_max < p.data_packets_min) {
    throw Error(errc::invalid_profile, "data packet range must satisfy 0 <= min <= max");
  }
  if (p.max_active_flows == 0 || p.client_pool == 0 || p.server_pool == 0) {
    throw Error(errc::invalid_profile, "pool sizes and interleaving width must be positive");
  }
  if (p.mean_gap <= 0.0) {
    throw Error(errc::invalid_profile, "mean packet gap must be positive");
  }
}

}  // namespace

std::vector<PacketRecord> generate(const SynthProfile& profile, std::uint64_t seed) {
  validate(profile);
  std::mt19937_64 rng(seed);

  std::vector<PacketRecord> out;
  std::deque<FlowScript> active;
  std::size_t next_ordinal = 0;

  auto refill = [&] {
    while (active.size() < profile.max_active_flows && next_ordinal < profile.flow_count) {
      active.push_back(make_flow(profile, next_ordinal, rng));
      ++next_ordinal;
    }
  };

  double now = profile.start_time;
  std::uint64_t index = 1;
  refill();
  while (!active.empty()) {
    std::size_t pick = uniform_below(rng, active.size());
    FlowScript& flow = active[pick];
    const ScriptedPacket& sp = flow.packets[flow.next++];

    PacketRecord pkt;
    pkt.index = index++;
    now += profile.mean_gap * (0.5 + uniform01(rng));
    pkt.timestamp = now;
    const Endpoint& src = sp.dir == Direction::Client ? flow.client : flow.server;
    const Endpoint& dst = sp.dir == Direction::Client ? flow.server : flow.client;
    pkt.src_ip = src.ip;
    pkt.src_port = src.port;
    pkt.dst_ip = dst.ip;
    pkt.dst_port = dst.port;
    pkt.flags = sp.flags;
    out.push_back(std::move(pkt));

    if (flow.next == flow.packets.size()) {
      active.erase(active.begin() + static_cast<std::ptrdiff_t>(pick));
      refill();
    }
  }
  return out;
}

std::vector<PacketRecord> merge_streams(const std::vector<std::vector<PacketRecord>>& streams,
                                        std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> cursor(streams.size(), 0);
  std::size_t remaining = 0;
  for (const auto& s : streams) remaining += s.size();

  std::vector<PacketRecord> out;
  out.reserve(remaining);
  double now = streams.empty() || streams[0].empty() ? 1600000000.0 : streams[0][0].timestamp;
  std::uint64_t index = 1;

  while (remaining > 0) {
    // Pick a stream weighted by how many packets it still holds.
    std::uint64_t r = uniform_below(rng, remaining);
    std::size_t chosen = 0;
    for (std::size_t s = 0; s < streams.size(); ++s) {
      std::size_t left = streams[s].size() - cursor[s];
      if (r < left) {
        chosen = s;
        break;
      }
      r -= left;
    }
    PacketRecord pkt = streams[chosen][cursor[chosen]++];
    pkt.index = index++;
    now += 5e-4 * (0.5 + uniform01(rng));
    pkt.timestamp = now;
    out.push_back(std::move(pkt));
    --remaining;
  }
  return out;
}

}  // namespace flowsnap
