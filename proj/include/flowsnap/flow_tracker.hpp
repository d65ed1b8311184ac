#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <unordered_map>

#include "flowsnap/packet.hpp"

namespace flowsnap {

/// Identity of a bidirectional flow. `client` is the endpoint that sent the
/// opening SYN; a packet matches the key in either orientation.
struct FlowKey {
  std::string client_ip;
  std::uint16_t client_port = 0;
  std::string server_ip;
  std::uint16_t server_port = 0;

  friend bool operator==(const FlowKey&, const FlowKey&) = default;
};

struct FlowKeyHash {
  std::size_t operator()(const FlowKey& k) const {
    std::size_t h = std::hash<std::string>{}(k.client_ip);
    h ^= std::hash<std::string>{}(k.server_ip) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    h ^= (static_cast<std::size_t>(k.client_port) << 16 | k.server_port) + (h << 6) + (h >> 2);
    return h;
  }
};

/// An ordered pair of event classes: one directly-follows relation.
struct Transition {
  EventClass from = EventClass::Start;
  EventClass to = EventClass::Others;

  friend bool operator==(const Transition&, const Transition&) = default;
};

/// How a packet related to the tracked flows. `transition` is absent exactly
/// for Ignored packets.
struct TransitionOutcome {
  enum class Kind : std::uint8_t { NewFlow, Continuation, TerminalContinuation, Ignored };

  Kind kind = Kind::Ignored;
  std::optional<Transition> transition;

  bool ignored() const { return kind == Kind::Ignored; }
};

/// Per-flow last-event-class state, maintained across the whole stream so
/// relations can still be mined after the previous packet of a flow has left
/// the snapshot window.
///
/// Order-dependent and single-writer: one stream, one table, one thread.
class FlowStateTable {
 public:
  /// Classifies a packet against the table and updates it:
  ///  - matches an open flow: Continuation (TerminalContinuation when FIN or
  ///    RST is set, removing the flow) with transition (stored, current);
  ///  - SYN without ACK: opens a flow keyed with the packet source as client,
  ///    NewFlow with transition (START, current);
  ///  - anything else: Ignored, no state change.
  TransitionOutcome observe(const PacketRecord& pkt);

  /// Removes flows idle longer than `timeout` seconds as of `now`; returns
  /// how many were dropped. The tracker never does this on its own.
  std::size_t evict_idle(double now, double timeout);

  std::size_t open_flows() const { return flows_.size(); }
  std::uint64_t flows_opened() const { return flows_opened_; }
  std::uint64_t flows_closed() const { return flows_closed_; }

  /// Stored class for a key, if the flow is open. Mostly for tests.
  std::optional<EventClass> lookup(const FlowKey& key) const;

 private:
  struct FlowState {
    EventClass last_class = EventClass::Others;
    double last_activity = 0.0;
  };

  std::unordered_map<FlowKey, FlowState, FlowKeyHash> flows_;
  std::uint64_t flows_opened_ = 0;
  std::uint64_t flows_closed_ = 0;
};

}  // namespace flowsnap
