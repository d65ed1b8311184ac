#include "flowsnap/flow_tracker.hpp"

namespace flowsnap {

namespace {

bool is_terminal(FlagSet flags) {
  return flags.contains(FlagSet::FIN) || flags.contains(FlagSet::RST);
}

}  // namespace

TransitionOutcome FlowStateTable::observe(const PacketRecord& pkt) {
  FlowKey forward{pkt.src_ip, pkt.src_port, pkt.dst_ip, pkt.dst_port};

  auto it = flows_.find(forward);
  Direction dir = Direction::Client;
  if (it == flows_.end()) {
    FlowKey backward{pkt.dst_ip, pkt.dst_port, pkt.src_ip, pkt.src_port};
    it = flows_.find(backward);
    dir = Direction::Server;
  }

  if (it != flows_.end()) {
    EventClass current = event_class(pkt.flags, dir);
    Transition t{it->second.last_class, current};
    if (is_terminal(pkt.flags)) {
      flows_.erase(it);
      ++flows_closed_;
      return {TransitionOutcome::Kind::TerminalContinuation, t};
    }
    it->second.last_class = current;
    it->second.last_activity = pkt.timestamp;
    return {TransitionOutcome::Kind::Continuation, t};
  }

  if (pkt.flags.contains(FlagSet::SYN) && !pkt.flags.contains(FlagSet::ACK)) {
    EventClass current = event_class(pkt.flags, Direction::Client);
    ++flows_opened_;
    // A SYN that also carries FIN/RST opens and terminates the flow at once;
    // the key is never stored.
    if (is_terminal(pkt.flags)) {
      ++flows_closed_;
    } else {
      flows_.emplace(std::move(forward), FlowState{current, pkt.timestamp});
    }
    return {TransitionOutcome::Kind::NewFlow, Transition{EventClass::Start, current}};
  }

  return {TransitionOutcome::Kind::Ignored, std::nullopt};
}

std::size_t FlowStateTable::evict_idle(double now, double timeout) {
  std::size_t evicted = 0;
  for (auto it = flows_.begin(); it != flows_.end();) {
    if (now - it->second.last_activity > timeout) {
      it = flows_.erase(it);
      ++evicted;
      ++flows_closed_;
    } else {
      ++it;
    }
  }
  return evicted;
}

std::optional<EventClass> FlowStateTable::lookup(const FlowKey& key) const {
  auto it = flows_.find(key);
  if (it == flows_.end()) return std::nullopt;
  return it->second.last_class;
}

}  // namespace flowsnap
