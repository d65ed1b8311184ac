#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "flowsnap/flow_tracker.hpp"
#include "flowsnap/packet.hpp"

namespace flowsnap {

inline const std::string kNormalLabel = "Normal";

/// Maps IPs (optionally bounded to a time range) to attack-type names, the
/// way dataset ground truth labels attackers by machine and day. A bare IP
/// matches at any time.
class AttackTable {
 public:
  void add(std::string ip, std::string attack_type,
           std::optional<std::pair<double, double>> time_range = std::nullopt);

  /// Attack-type name if src or dst IP matches an entry covering the packet
  /// timestamp; kNormalLabel otherwise. Source matches take precedence.
  const std::string& label_for(const PacketRecord& pkt) const;

  bool empty() const { return entries_.empty(); }
  std::size_t size() const;

 private:
  struct Entry {
    std::string attack_type;
    std::optional<std::pair<double, double>> time_range;
  };

  const std::string* match(const std::string& ip, double ts) const;

  std::unordered_map<std::string, std::vector<Entry>> entries_;
};

/// 26x26 integer transition counts. Rows are the `from` class, columns the
/// `to` class, both in declaration-order index.
class AdjacencyMatrix {
 public:
  std::int64_t at(EventClass from, EventClass to) const { return cells_[cell(from, to)]; }
  std::int64_t at(int from, int to) const;

  void increment(const Transition& t) { ++cells_[cell(t.from, t.to)]; }

  /// Throws corrupt_state if the cell is already zero: an incremental update
  /// got out of sync with the buffer.
  void decrement(const Transition& t);

  std::int64_t total() const;

  friend bool operator==(const AdjacencyMatrix&, const AdjacencyMatrix&) = default;

 private:
  static std::size_t cell(EventClass from, EventClass to) {
    return static_cast<std::size_t>(class_index(from)) * kNumEventClasses +
           static_cast<std::size_t>(class_index(to));
  }

  std::array<std::int64_t, kNumRelations> cells_{};
};

/// FIFO ring holding the last `capacity` transitions of the sliding window.
class TransitionBuffer {
 public:
  explicit TransitionBuffer(std::size_t capacity);

  /// Appends a transition. When the buffer is already full the oldest entry
  /// is popped and returned.
  std::optional<Transition> push(const Transition& t);

  bool full() const { return count_ == ring_.size(); }
  std::size_t size() const { return count_; }
  std::size_t capacity() const { return ring_.size(); }

  /// Entries oldest-to-newest.
  template <typename Fn>
  void for_each(Fn&& fn) const {
    for (std::size_t i = 0; i < count_; ++i) {
      fn(ring_[(head_ + i) % ring_.size()]);
    }
  }

 private:
  std::vector<Transition> ring_;
  std::size_t head_ = 0;   // oldest entry
  std::size_t count_ = 0;
};

/// Recounts the adjacency matrix from the buffer contents alone. Reference
/// path for the incremental two-element updates.
AdjacencyMatrix brute_force_recount(const TransitionBuffer& buffer);

/// One normalized process-model snapshot: the transition frequencies of the
/// last `l` accepted packets, stamped with the most recent packet and its
/// ground-truth label.
struct Snapshot {
  std::array<double, kNumRelations> cells{};
  std::uint64_t packet_index = 0;
  double timestamp = 0.0;
  std::string label = kNormalLabel;

  double at(EventClass from, EventClass to) const {
    return cells[static_cast<std::size_t>(class_index(from)) * kNumEventClasses +
                 static_cast<std::size_t>(class_index(to))];
  }
  double sum() const;

  friend bool operator==(const Snapshot&, const Snapshot&) = default;
};

struct EngineConfig {
  std::size_t window_size = 500;
  AttackTable attack_table;
};

struct StreamStats {
  std::uint64_t packets = 0;
  std::uint64_t accepted = 0;
  std::uint64_t ignored = 0;
  std::uint64_t flows_opened = 0;
  std::uint64_t flows_closed = 0;
  std::uint64_t snapshots = 0;
};

/// Maintains the transition window and adjacency counts; emits one snapshot
/// per accepted packet once the window is full. Integer counts are the
/// source of truth; frequencies are derived at emission.
class SnapshotEngine {
 public:
  explicit SnapshotEngine(EngineConfig config);

  /// Feeds one transition. Pops/decrements the oldest entry first when the
  /// window is full, then appends/increments, then emits iff full.
  std::optional<Snapshot> push_transition(const Transition& t, const PacketRecord& pkt);

  /// Classifies the packet against `table` and feeds any resulting
  /// transition. Ignored packets change nothing and emit nothing.
  std::optional<Snapshot> process_packet(FlowStateTable& table, const PacketRecord& pkt);

  const std::string& label_for(const PacketRecord& pkt) const {
    return config_.attack_table.label_for(pkt);
  }

  const AdjacencyMatrix& counts() const { return counts_; }
  const TransitionBuffer& buffer() const { return buffer_; }
  std::size_t window_size() const { return config_.window_size; }

  std::uint64_t packets_seen() const { return packets_; }
  std::uint64_t accepted() const { return accepted_; }
  std::uint64_t ignored() const { return ignored_; }
  std::uint64_t snapshots_emitted() const { return snapshots_; }

 private:
  EngineConfig config_;
  TransitionBuffer buffer_;
  AdjacencyMatrix counts_;
  std::uint64_t packets_ = 0;
  std::uint64_t accepted_ = 0;
  std::uint64_t ignored_ = 0;
  std::uint64_t snapshots_ = 0;
};

/// Flow table + engine glued together, with optional idle-flow eviction.
/// This is the whole preprocessor: packets in, snapshots out.
class Preprocessor {
 public:
  explicit Preprocessor(EngineConfig config, std::optional<double> evict_timeout = std::nullopt);

  std::optional<Snapshot> process(const PacketRecord& pkt);

  StreamStats stats() const;
  FlowStateTable& table() { return table_; }
  SnapshotEngine& engine() { return engine_; }

 private:
  // Idle eviction sweeps the whole table, so it runs on a stride rather than
  // per packet.
  static constexpr std::uint64_t kEvictStride = 1024;

  SnapshotEngine engine_;
  FlowStateTable table_;
  std::optional<double> evict_timeout_;
};

}  // namespace flowsnap
