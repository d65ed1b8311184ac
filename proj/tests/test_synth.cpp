#include <doctest.h>

#include <set>
#include <sstream>

#include "flowsnap/error.hpp"
#include "flowsnap/io.hpp"
#include "flowsnap/snapshot.hpp"
#include "flowsnap/synth.hpp"

using namespace flowsnap;

TEST_CASE("a minimal normal flow is exactly the four-packet handshake and FIN") {
  SynthProfile profile;
  profile.kind = SynthKind::Normal;
  profile.flow_count = 1;
  auto packets = generate(profile, 1);

  REQUIRE(packets.size() == 4);
  CHECK(packets[0].flags == FlagSet{FlagSet::SYN});
  CHECK(packets[1].flags == FlagSet{FlagSet::SYN, FlagSet::ACK});
  CHECK(packets[2].flags == FlagSet{FlagSet::ACK});
  CHECK(packets[3].flags == FlagSet{FlagSet::ACK, FlagSet::FIN});
  // Replies come from the server endpoint.
  CHECK(packets[1].src_ip == packets[0].dst_ip);
  CHECK(packets[1].src_port == packets[0].dst_port);
  CHECK(packets[3].src_ip == packets[0].src_ip);
  // Indices and timestamps increase.
  for (std::size_t i = 1; i < packets.size(); ++i) {
    CHECK(packets[i].index == packets[i - 1].index + 1);
    CHECK(packets[i].timestamp > packets[i - 1].timestamp);
  }
}

TEST_CASE("a syn flood is all bare SYNs from rotating sources") {
  SynthProfile profile;
  profile.kind = SynthKind::SynFlood;
  profile.flow_count = 100;
  auto packets = generate(profile, 2);

  REQUIRE(packets.size() == 100);
  std::set<std::string> sources;
  for (const PacketRecord& p : packets) {
    CHECK(p.flags == FlagSet{FlagSet::SYN});
    CHECK(event_class(p.flags, Direction::Client) == EventClass::SynC);
    sources.insert(p.src_ip + ":" + std::to_string(p.src_port));
  }
  CHECK(sources.size() == 100);
}

TEST_CASE("same profile and seed give bit-identical streams") {
  SynthProfile profile;
  profile.flow_count = 50;
  profile.data_packets_max = 6;

  auto a = generate(profile, 42);
  auto b = generate(profile, 42);
  CHECK(a == b);

  std::ostringstream csv_a, csv_b;
  write_packets(csv_a, a);
  write_packets(csv_b, b);
  CHECK(csv_a.str() == csv_b.str());

  auto c = generate(profile, 43);
  CHECK(a != c);
}

TEST_CASE("every packet of a normal stream is accepted by the tracker") {
  SynthProfile profile;
  profile.flow_count = 200;
  profile.data_packets_min = 0;
  profile.data_packets_max = 8;
  auto packets = generate(profile, 3);

  FlowStateTable table;
  for (const PacketRecord& p : packets) {
    CHECK(!table.observe(p).ignored());
  }
  CHECK(table.open_flows() == 0);  // every flow tore down
  CHECK(table.flows_opened() == 200);
  CHECK(table.flows_closed() == 200);
}

TEST_CASE("short flow bursts come from a single source address") {
  SynthProfile profile;
  profile.kind = SynthKind::ShortFlowBurst;
  profile.flow_count = 50;
  auto packets = generate(profile, 4);

  REQUIRE(packets.size() == 200);  // four packets per minimal flow
  std::set<std::string> client_ips;
  FlowStateTable table;
  for (const PacketRecord& p : packets) {
    CHECK(!table.observe(p).ignored());
  }
  for (const PacketRecord& p : packets) {
    if (p.flags == FlagSet{FlagSet::SYN}) client_ips.insert(p.src_ip);
  }
  CHECK(client_ips.size() == 1);
}

TEST_CASE("flood fraction drives the START->SYN cell frequency up monotonically") {
  // The attack shifts transition mass into (START, 000.SYN.|C); its mean
  // frequency must grow with the flood share of the stream.
  auto mean_syn_cell = [](double flood_fraction) {
    const std::size_t total = 4000;
    auto flood_count = static_cast<std::size_t>(static_cast<double>(total) * flood_fraction);

    SynthProfile normal;
    normal.flow_count = (total - flood_count) / 5;
    normal.data_packets_min = 1;
    normal.data_packets_max = 1;  // five packets per flow
    SynthProfile flood;
    flood.kind = SynthKind::SynFlood;
    flood.flow_count = flood_count;
    flood.server_subnet = "192.168.9";

    std::vector<std::vector<PacketRecord>> streams;
    streams.push_back(generate(normal, 7));
    if (flood_count > 0) streams.push_back(generate(flood, 8));
    auto stream = merge_streams(streams, 9);

    Preprocessor pre(EngineConfig{.window_size = 200});
    double sum = 0.0;
    std::size_t n = 0;
    for (const PacketRecord& p : stream) {
      if (auto snap = pre.process(p)) {
        sum += snap->at(EventClass::Start, EventClass::SynC);
        ++n;
      }
    }
    REQUIRE(n > 0);
    return sum / static_cast<double>(n);
  };

  double prev = -1.0;
  for (double fraction : {0.0, 0.3, 0.6, 0.9}) {
    double mean = mean_syn_cell(fraction);
    CAPTURE(fraction);
    CHECK(mean > prev);
    prev = mean;
  }
  CHECK(prev > 0.5);  // at 90% flood the cell dominates
}

TEST_CASE("merged streams preserve the relative order of each input") {
  SynthProfile a;
  a.flow_count = 20;
  SynthProfile b;
  b.kind = SynthKind::SynFlood;
  b.flow_count = 30;
  auto sa = generate(a, 1);
  auto sb = generate(b, 2);
  auto merged = merge_streams({sa, sb}, 3);

  REQUIRE(merged.size() == sa.size() + sb.size());
  // Packet indices are re-assigned sequentially.
  for (std::size_t i = 0; i < merged.size(); ++i) {
    CHECK(merged[i].index == i + 1);
    if (i > 0) CHECK(merged[i].timestamp > merged[i - 1].timestamp);
  }
  // The flood packets keep their source order within the merge.
  std::vector<std::string> flood_sources;
  for (const PacketRecord& p : merged) {
    if (p.src_ip.rfind("172.16.", 0) == 0) flood_sources.push_back(p.src_ip);
  }
  std::vector<std::string> expected;
  for (const PacketRecord& p : sb) expected.push_back(p.src_ip);
  CHECK(flood_sources == expected);
}

TEST_CASE("invalid profiles are rejected") {
  SynthProfile negative_range;
  negative_range.data_packets_min = 3;
  negative_range.data_packets_max = 1;
  try {
    generate(negative_range, 1);
    FAIL("expected invalid_profile");
  } catch (const Error& e) {
    CHECK(e.code() == errc::invalid_profile);
  }

  SynthProfile zero_gap;
  zero_gap.mean_gap = 0.0;
  CHECK_THROWS_AS(generate(zero_gap, 1), Error);
}
