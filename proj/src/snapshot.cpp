#include "flowsnap/snapshot.hpp"

#include <numeric>

#include "flowsnap/error.hpp"

namespace flowsnap {

void AttackTable::add(std::string ip, std::string attack_type,
                      std::optional<std::pair<double, double>> time_range) {
  entries_[std::move(ip)].push_back(Entry{std::move(attack_type), time_range});
}

const std::string* AttackTable::match(const std::string& ip, double ts) const {
  auto it = entries_.find(ip);
  if (it == entries_.end()) return nullptr;
  for (const Entry& e : it->second) {
    if (!e.time_range || (ts >= e.time_range->first && ts <= e.time_range->second)) {
      return &e.attack_type;
    }
  }
  return nullptr;
}

const std::string& AttackTable::label_for(const PacketRecord& pkt) const {
  if (const std::string* hit = match(pkt.src_ip, pkt.timestamp)) return *hit;
  if (const std::string* hit = match(pkt.dst_ip, pkt.timestamp)) return *hit;
  return kNormalLabel;
}

std::size_t AttackTable::size() const {
  std::size_t n = 0;
  for (const auto& [ip, v] : entries_) n += v.size();
  return n;
}

std::int64_t AdjacencyMatrix::at(int from, int to) const {
  return at(class_from_index(from), class_from_index(to));
}

void AdjacencyMatrix::decrement(const Transition& t) {
  std::int64_t& c = cells_[cell(t.from, t.to)];
  if (c <= 0) {
    throw Error(errc::corrupt_state, "decrement of empty adjacency cell (" +
                                         class_name(t.from) + ", " + class_name(t.to) + ")");
  }
  --c;
}

std::int64_t AdjacencyMatrix::total() const {
  return std::accumulate(cells_.begin(), cells_.end(), std::int64_t{0});
}

TransitionBuffer::TransitionBuffer(std::size_t capacity) : ring_(capacity) {
  if (capacity == 0) {
    throw std::invalid_argument("window size must be at least 1");
  }
}

std::optional<Transition> TransitionBuffer::push(const Transition& t) {
  std::optional<Transition> evicted;
  if (full()) {
    evicted = ring_[head_];
    ring_[head_] = t;
    head_ = (head_ + 1) % ring_.size();
  } else {
    ring_[(head_ + count_) % ring_.size()] = t;
    ++count_;
  }
  return evicted;
}

AdjacencyMatrix brute_force_recount(const TransitionBuffer& buffer) {
  AdjacencyMatrix m;
  buffer.for_each([&](const Transition& t) { m.increment(t); });
  return m;
}

double Snapshot::sum() const {
  return std::accumulate(cells.begin(), cells.end(), 0.0);
}

SnapshotEngine::SnapshotEngine(EngineConfig config)
    : config_(std::move(config)), buffer_(config_.window_size) {}

std::optional<Snapshot> SnapshotEngine::push_transition(const Transition& t,
                                                        const PacketRecord& pkt) {
  if (t.to == EventClass::End) {
    throw Error(errc::corrupt_state, "transition into END must not reach the window");
  }
  if (std::optional<Transition> evicted = buffer_.push(t)) {
    counts_.decrement(*evicted);
  }
  counts_.increment(t);
  ++accepted_;

  if (!buffer_.full()) return std::nullopt;

  Snapshot snap;
  const double scale = 1.0 / static_cast<double>(config_.window_size);
  for (int from = 0; from < kNumEventClasses; ++from) {
    for (int to = 0; to < kNumEventClasses; ++to) {
      snap.cells[static_cast<std::size_t>(from) * kNumEventClasses + to] =
          static_cast<double>(counts_.at(from, to)) * scale;
    }
  }
  snap.packet_index = pkt.index;
  snap.timestamp = pkt.timestamp;
  snap.label = label_for(pkt);
  ++snapshots_;
  return snap;
}

std::optional<Snapshot> SnapshotEngine::process_packet(FlowStateTable& table,
                                                       const PacketRecord& pkt) {
  ++packets_;
  TransitionOutcome outcome = table.observe(pkt);
  if (outcome.ignored()) {
    ++ignored_;
    return std::nullopt;
  }
  return push_transition(*outcome.transition, pkt);
}

Preprocessor::Preprocessor(EngineConfig config, std::optional<double> evict_timeout)
    : engine_(std::move(config)), evict_timeout_(evict_timeout) {}

std::optional<Snapshot> Preprocessor::process(const PacketRecord& pkt) {
  if (evict_timeout_ && engine_.packets_seen() % kEvictStride == 0) {
    table_.evict_idle(pkt.timestamp, *evict_timeout_);
  }
  return engine_.process_packet(table_, pkt);
}

StreamStats Preprocessor::stats() const {
  StreamStats s;
  s.packets = engine_.packets_seen();
  s.accepted = engine_.accepted();
  s.ignored = engine_.ignored();
  s.flows_opened = table_.flows_opened();
  s.flows_closed = table_.flows_closed();
  s.snapshots = engine_.snapshots_emitted();
  return s;
}

}  // namespace flowsnap
