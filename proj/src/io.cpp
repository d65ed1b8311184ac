#include "flowsnap/io.hpp"

#include <charconv>
#include <cstdio>
#include <istream>
#include <ostream>

#include <nlohmann/json.hpp>

#include "flowsnap/error.hpp"

namespace flowsnap {

namespace {

using json = nlohmann::json;

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

std::string format_double(double v) {
  char buf[32];
  int n = std::snprintf(buf, sizeof buf, "%.17g", v);
  return std::string(buf, static_cast<std::size_t>(n));
}

// getline that reports whether the line was terminated by EOF rather than a
// newline, so truncation is distinguishable from a malformed row.
bool get_line(std::istream& in, std::string& line, bool& eof_terminated) {
  if (!std::getline(in, line)) return false;
  eof_terminated = in.eof();
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

}  // namespace

PacketCsvReader::PacketCsvReader(std::istream& in, RowErrorPolicy policy)
    : in_(in), policy_(policy) {}

std::optional<PacketRecord> PacketCsvReader::next() {
  std::string line;
  bool eof_terminated = false;

  if (!header_checked_) {
    header_checked_ = true;
    if (!get_line(in_, line, eof_terminated)) return std::nullopt;  // empty input
    if (line != kPacketCsvHeader) {
      throw Error(errc::malformed_row,
                  "packet csv: bad header, expected '" + std::string(kPacketCsvHeader) + "'");
    }
  }

  while (get_line(in_, line, eof_terminated)) {
    ++line_no_;
    if (line.empty()) continue;
    try {
      auto fields = split_fields(line);
      if (fields.size() != 7) {
        throw Error(errc::malformed_row, "expected 7 fields, got " + std::to_string(fields.size()));
      }
      PacketRecord pkt;
      std::uint32_t src_port = 0, dst_port = 0;
      if (!parse_number(fields[0], pkt.index)) {
        throw Error(errc::malformed_row, "bad frame_number '" + std::string(fields[0]) + "'");
      }
      if (!parse_number(fields[1], pkt.timestamp)) {
        throw Error(errc::malformed_row, "bad timestamp '" + std::string(fields[1]) + "'");
      }
      if (!parse_number(fields[3], src_port) || src_port > 65535) {
        throw Error(errc::malformed_row, "bad src_port '" + std::string(fields[3]) + "'");
      }
      if (!parse_number(fields[5], dst_port) || dst_port > 65535) {
        throw Error(errc::malformed_row, "bad dst_port '" + std::string(fields[5]) + "'");
      }
      pkt.src_ip = std::string(fields[2]);
      pkt.src_port = static_cast<std::uint16_t>(src_port);
      pkt.dst_ip = std::string(fields[4]);
      pkt.dst_port = static_cast<std::uint16_t>(dst_port);
      pkt.flags = parse_flags(fields[6]);

      if (last_index_ && pkt.index <= *last_index_) {
        throw Error(errc::non_monotone_index,
                    "frame_number " + std::to_string(pkt.index) + " does not increase");
      }
      last_index_ = pkt.index;
      return pkt;
    } catch (const Error& e) {
      if (e.code() == errc::non_monotone_index) {
        throw Error(e.code(), "packet csv row " + std::to_string(line_no_) + ": " + e.what());
      }
      if (policy_ == RowErrorPolicy::Fail) {
        throw Error(errc::malformed_row,
                    "packet csv row " + std::to_string(line_no_) + ": " + e.what());
      }
      ++skipped_;
    }
  }
  return std::nullopt;
}

std::vector<PacketRecord> read_packets(std::istream& in, RowErrorPolicy policy) {
  PacketCsvReader reader(in, policy);
  std::vector<PacketRecord> packets;
  while (auto pkt = reader.next()) packets.push_back(std::move(*pkt));
  return packets;
}

void write_packets(std::ostream& out, std::span<const PacketRecord> packets) {
  out << kPacketCsvHeader << '\n';
  char flags[8];
  for (const PacketRecord& p : packets) {
    std::snprintf(flags, sizeof flags, "0x%03x", p.flags.mask());
    out << p.index << ',' << format_double(p.timestamp) << ',' << p.src_ip << ',' << p.src_port
        << ',' << p.dst_ip << ',' << p.dst_port << ',' << flags << '\n';
  }
}

const std::string& dense_csv_header() {
  static const std::string header = [] {
    std::string h = "packet_index,timestamp,label";
    for (int from = 0; from < kNumEventClasses; ++from) {
      for (int to = 0; to < kNumEventClasses; ++to) {
        h += ",c" + std::to_string(from) + "_" + std::to_string(to);
      }
    }
    return h;
  }();
  return header;
}

SnapshotWriter::SnapshotWriter(std::ostream& out, SnapshotFormat format)
    : out_(out), format_(format) {
  if (format_ == SnapshotFormat::Dense) {
    out_ << dense_csv_header() << '\n';
  }
}

void SnapshotWriter::write(const Snapshot& snap) {
  if (format_ == SnapshotFormat::Dense) {
    out_ << snap.packet_index << ',' << format_double(snap.timestamp) << ',' << snap.label;
    for (double v : snap.cells) {
      out_ << ',' << format_double(v);
    }
    out_ << '\n';
  } else {
    json cells = json::object();
    for (int from = 0; from < kNumEventClasses; ++from) {
      for (int to = 0; to < kNumEventClasses; ++to) {
        double v = snap.cells[static_cast<std::size_t>(from) * kNumEventClasses + to];
        if (v != 0.0) {
          cells[std::to_string(from) + "," + std::to_string(to)] = v;
        }
      }
    }
    json obj{{"packet_index", snap.packet_index},
             {"timestamp", snap.timestamp},
             {"label", snap.label},
             {"cells", std::move(cells)}};
    out_ << obj.dump() << '\n';
  }
  ++written_;
}

SnapshotReader::SnapshotReader(std::istream& in) : in_(in) {}

std::optional<Snapshot> SnapshotReader::next() {
  std::string line;
  bool eof_terminated = false;

  if (!format_) {
    if (!get_line(in_, line, eof_terminated)) return std::nullopt;  // empty input
    ++line_no_;
    if (line.rfind("packet_index,", 0) == 0) {
      if (line != dense_csv_header()) {
        throw Error(errc::format_mismatch, "dense snapshot csv: unexpected header");
      }
      format_ = SnapshotFormat::Dense;
    } else if (!line.empty() && line.front() == '{') {
      format_ = SnapshotFormat::Sparse;
      return parse_sparse(line, eof_terminated);
    } else {
      throw Error(errc::format_mismatch, "unrecognized snapshot file format");
    }
  }

  // A line cut off by EOF (no trailing newline) signals a truncated file.
  while (get_line(in_, line, eof_terminated)) {
    ++line_no_;
    if (line.empty()) continue;
    if (format_ == SnapshotFormat::Dense) return parse_dense(line, eof_terminated);
    return parse_sparse(line, eof_terminated);
  }
  return std::nullopt;
}

std::optional<Snapshot> SnapshotReader::parse_dense(const std::string& line, bool truncated_tail) {
  auto fields = split_fields(line);
  if (fields.size() != 3 + kNumRelations) {
    errc code = truncated_tail && fields.size() < 3 + kNumRelations ? errc::truncated_file
                                                                    : errc::format_mismatch;
    throw Error(code, "dense snapshot row " + std::to_string(line_no_) + ": expected " +
                          std::to_string(3 + kNumRelations) + " fields, got " +
                          std::to_string(fields.size()));
  }
  Snapshot snap;
  if (!parse_number(fields[0], snap.packet_index) || !parse_number(fields[1], snap.timestamp)) {
    throw Error(errc::format_mismatch,
                "dense snapshot row " + std::to_string(line_no_) + ": bad metadata");
  }
  snap.label = std::string(fields[2]);
  for (int i = 0; i < kNumRelations; ++i) {
    if (!parse_number(fields[3 + static_cast<std::size_t>(i)], snap.cells[i])) {
      throw Error(errc::format_mismatch, "dense snapshot row " + std::to_string(line_no_) +
                                             ": bad frequency in column " + std::to_string(i));
    }
  }
  return snap;
}

std::optional<Snapshot> SnapshotReader::parse_sparse(const std::string& line, bool truncated_tail) {
  json obj = json::parse(line, nullptr, false);
  if (obj.is_discarded()) {
    throw Error(truncated_tail ? errc::truncated_file : errc::format_mismatch,
                "sparse snapshot line " + std::to_string(line_no_) + ": bad json");
  }
  if (!obj.contains("packet_index") || !obj.contains("timestamp") || !obj.contains("label") ||
      !obj.contains("cells") || !obj["cells"].is_object()) {
    throw Error(errc::format_mismatch,
                "sparse snapshot line " + std::to_string(line_no_) + ": missing fields");
  }
  Snapshot snap;
  snap.packet_index = obj["packet_index"].get<std::uint64_t>();
  snap.timestamp = obj["timestamp"].get<double>();
  snap.label = obj["label"].get<std::string>();
  for (const auto& [key, value] : obj["cells"].items()) {
    int from = -1, to = -1;
    std::size_t comma = key.find(',');
    if (comma == std::string::npos ||
        !parse_number(std::string_view(key).substr(0, comma), from) ||
        !parse_number(std::string_view(key).substr(comma + 1), to) || from < 0 ||
        from >= kNumEventClasses || to < 0 || to >= kNumEventClasses) {
      throw Error(errc::format_mismatch, "sparse snapshot line " + std::to_string(line_no_) +
                                             ": bad cell key '" + key + "'");
    }
    snap.cells[static_cast<std::size_t>(from) * kNumEventClasses + static_cast<std::size_t>(to)] =
        value.get<double>();
  }
  return snap;
}

void write_snapshots(std::ostream& out, std::span<const Snapshot> snapshots,
                     SnapshotFormat format) {
  SnapshotWriter writer(out, format);
  for (const Snapshot& s : snapshots) writer.write(s);
}

std::vector<Snapshot> read_snapshots(std::istream& in) {
  SnapshotReader reader(in);
  std::vector<Snapshot> snaps;
  while (auto s = reader.next()) snaps.push_back(std::move(*s));
  return snaps;
}

AttackTable load_attack_table(std::istream& in) {
  AttackTable table;
  std::string line;
  bool eof_terminated = false;
  std::uint64_t line_no = 0;
  while (get_line(in, line, eof_terminated)) {
    ++line_no;
    if (line.empty()) continue;
    auto fields = split_fields(line);
    if (line_no == 1 && !fields.empty() && fields[0] == "ip") continue;  // header row
    if (fields.size() != 2 && fields.size() != 4) {
      throw Error(errc::malformed_row, "attack table row " + std::to_string(line_no) +
                                           ": expected 2 or 4 fields, got " +
                                           std::to_string(fields.size()));
    }
    std::optional<std::pair<double, double>> range;
    if (fields.size() == 4) {
      double start = 0.0, end = 0.0;
      if (!parse_number(fields[2], start) || !parse_number(fields[3], end) || end < start) {
        throw Error(errc::malformed_row,
                    "attack table row " + std::to_string(line_no) + ": bad time range");
      }
      range = {start, end};
    }
    table.add(std::string(fields[0]), std::string(fields[1]), range);
  }
  return table;
}

}  // namespace flowsnap
