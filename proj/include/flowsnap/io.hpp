#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "flowsnap/packet.hpp"
#include "flowsnap/snapshot.hpp"

namespace flowsnap {

inline constexpr const char* kPacketCsvHeader =
    "frame_number,timestamp,src_ip,src_port,dst_ip,dst_port,tcp_flags";

enum class RowErrorPolicy : std::uint8_t {
  Fail,  // throw on the first malformed row
  Skip,  // drop malformed rows and count them
};

/// Streaming reader for packet attribute CSVs (tshark-style export,
/// tcp_flags as a hex mask). Memory use is one row regardless of file size.
class PacketCsvReader {
 public:
  explicit PacketCsvReader(std::istream& in, RowErrorPolicy policy = RowErrorPolicy::Fail);

  /// Next packet, or nullopt at end of input. Throws Error(malformed_row)
  /// or Error(non_monotone_index) under the Fail policy.
  std::optional<PacketRecord> next();

  std::uint64_t rows_skipped() const { return skipped_; }

 private:
  std::istream& in_;
  RowErrorPolicy policy_;
  std::uint64_t line_no_ = 0;  // data rows, header excluded
  std::uint64_t skipped_ = 0;
  std::optional<std::uint64_t> last_index_;
  bool header_checked_ = false;
};

std::vector<PacketRecord> read_packets(std::istream& in,
                                       RowErrorPolicy policy = RowErrorPolicy::Fail);

void write_packets(std::ostream& out, std::span<const PacketRecord> packets);

enum class SnapshotFormat : std::uint8_t {
  Dense,   // CSV, 3 metadata + 676 frequency columns per row
  Sparse,  // NDJSON, one object per snapshot with nonzero cells only
};

/// Streams snapshots to disk in either format. Dense rows render doubles
/// with 17 significant digits so values survive the round trip.
class SnapshotWriter {
 public:
  SnapshotWriter(std::ostream& out, SnapshotFormat format);

  void write(const Snapshot& snap);
  std::uint64_t written() const { return written_; }

 private:
  std::ostream& out_;
  SnapshotFormat format_;
  std::uint64_t written_ = 0;
};

/// Streaming snapshot reader; the format is detected from the first line.
class SnapshotReader {
 public:
  explicit SnapshotReader(std::istream& in);

  std::optional<Snapshot> next();

  std::optional<SnapshotFormat> format() const { return format_; }

 private:
  std::optional<Snapshot> parse_dense(const std::string& line, bool last_line);
  std::optional<Snapshot> parse_sparse(const std::string& line, bool last_line);

  std::istream& in_;
  std::optional<SnapshotFormat> format_;
  std::uint64_t line_no_ = 0;
};

void write_snapshots(std::ostream& out, std::span<const Snapshot> snapshots,
                     SnapshotFormat format);

std::vector<Snapshot> read_snapshots(std::istream& in);

/// Attack table rows are `ip,attack_type` or `ip,attack_type,start_ts,end_ts`;
/// a header row is tolerated.
AttackTable load_attack_table(std::istream& in);

/// Column header of the dense CSV format.
const std::string& dense_csv_header();

}  // namespace flowsnap
