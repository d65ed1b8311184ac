// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Criterion 9 needs the real dataset and is skipped unless
// FLOWSNAP_IDS2018_DIR is set.

#include <fcntl.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "flowsnap/detectors.hpp"
#include "flowsnap/error.hpp"
#include "flowsnap/evaluation.hpp"
#include "flowsnap/io.hpp"
#include "flowsnap/snapshot.hpp"
#include "flowsnap/synth.hpp"

extern char** environ;

namespace fs = std::filesystem;
using namespace flowsnap;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

void report(const std::string& id, bool pass, const std::string& detail) {
  std::cout << id << (pass ? " PASS  " : " FAIL  ") << detail << std::endl;
  if (!pass) ++g_failures;
}

void report_skip(const std::string& id, const std::string& detail) {
  std::cout << id << " SKIPPED  " << detail << std::endl;
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

const fs::path& work_dir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("flowsnap_accept_" + std::to_string(getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

// Mixed-profile stream: normal flows plus a syn flood and a short-flow
// burst, interleaved, with a sprinkle of stray packets that match no flow.
std::vector<PacketRecord> mixed_stream(std::uint64_t seed, std::size_t min_packets) {
  std::mt19937_64 rng(seed);

  SynthProfile normal;
  normal.flow_count = min_packets / 10;  // ~6 packets per flow
  normal.data_packets_min = 1;
  normal.data_packets_max = 3;

  SynthProfile flood;
  flood.kind = SynthKind::SynFlood;
  flood.flow_count = min_packets / 4;
  flood.server_subnet = "192.168.9";

  SynthProfile burst;
  burst.kind = SynthKind::ShortFlowBurst;
  burst.flow_count = min_packets / 20;
  burst.client_subnet = "10.9.9";
  burst.server_subnet = "192.168.5";

  auto stream = merge_streams(
      {generate(normal, rng()), generate(flood, rng()), generate(burst, rng())}, rng());

  // Stray packets from unknown flows exercise the Ignored path.
  std::vector<PacketRecord> out;
  out.reserve(stream.size() + stream.size() / 50);
  std::uint64_t index = 1;
  for (PacketRecord& pkt : stream) {
    if (rng() % 50 == 0) {
      PacketRecord stray;
      stray.index = index++;
      stray.timestamp = pkt.timestamp;
      stray.src_ip = "99.99.0." + std::to_string(rng() % 200);
      stray.src_port = 1234;
      stray.dst_ip = "99.99.1.1";
      stray.dst_port = 80;
      stray.flags = FlagSet{FlagSet::ACK};
      out.push_back(std::move(stray));
    }
    pkt.index = index++;
    out.push_back(std::move(pkt));
  }
  return out;
}

// Criteria 1 and 2 share the randomized streams.
void criteria_oracle_and_normalization() {
  auto start = Clock::now();
  std::mt19937_64 rng(20260809);
  std::uint64_t pushes = 0, snapshots = 0;
  bool oracle_ok = true, norm_ok = true;
  std::string detail;

  for (int s = 0; s < 100 && oracle_ok && norm_ok; ++s) {
    std::size_t l = 2 + rng() % 599;  // window in {2..600}
    auto stream = mixed_stream(rng(), 10000);
    if (stream.size() < 10000) {
      oracle_ok = false;
      detail = "stream shorter than 10000 packets";
      break;
    }
    Preprocessor pre(EngineConfig{.window_size = l});
    for (const PacketRecord& pkt : stream) {
      auto snap = pre.process(pkt);
      ++pushes;
      if (!(pre.engine().counts() == brute_force_recount(pre.engine().buffer()))) {
        oracle_ok = false;
        detail = "incremental counts diverged from recount at packet " +
                 std::to_string(pkt.index) + " of stream " + std::to_string(s);
        break;
      }
      if (snap) {
        ++snapshots;
        if (std::abs(snap->sum() - 1.0) >= 1e-9) {
          norm_ok = false;
          detail = "snapshot sum off by " + std::to_string(snap->sum() - 1.0);
          break;
        }
        for (int i = 0; i < kNumEventClasses && norm_ok; ++i) {
          if (snap->at(EventClass::End, class_from_index(i)) != 0.0 ||
              snap->at(class_from_index(i), EventClass::End) != 0.0) {
            norm_ok = false;
            detail = "END row/column not zero";
          }
        }
        if (!norm_ok) break;
      }
    }
  }

  double elapsed = seconds_since(start);
  bool in_time = elapsed < 60.0;
  report("C1", oracle_ok && in_time,
         "oracle equivalence on 100 mixed streams (" + std::to_string(pushes) + " packets, " +
             std::to_string(elapsed).substr(0, 5) + " s, target < 60 s)" +
             (detail.empty() ? "" : ": " + detail));
  report("C2", norm_ok,
         "normalization and END-zeroing on " + std::to_string(snapshots) + " snapshots" +
             (norm_ok ? "" : ": " + detail));
}

void criterion_count_law() {
  bool ok = true;
  std::string detail;
  int combos = 0;
  std::mt19937_64 rng(7);

  for (std::uint64_t seed : {11ull, 22ull, 33ull, 44ull, 55ull}) {
    auto stream = mixed_stream(seed, 900);
    // Accepted count is stream-dependent; measure it first.
    Preprocessor probe(EngineConfig{.window_size = 1});
    for (const PacketRecord& pkt : stream) probe.process(pkt);
    const std::size_t n = probe.stats().accepted;

    for (std::size_t l : {n, n - 1, n / 2, static_cast<std::size_t>(2 + rng() % 400)}) {
      Preprocessor pre(EngineConfig{.window_size = l});
      std::size_t emitted = 0;
      for (const PacketRecord& pkt : stream) {
        if (pre.process(pkt)) ++emitted;
      }
      ++combos;
      std::size_t expected = n >= l ? n - l + 1 : 0;
      if (emitted != expected) {
        ok = false;
        detail = "n=" + std::to_string(n) + " l=" + std::to_string(l) + " gave " +
                 std::to_string(emitted) + " snapshots, expected " + std::to_string(expected);
      }
    }
  }
  report("C3", ok && combos == 20,
         "snapshot count law over " + std::to_string(combos) + " (n, l) combinations" +
             (detail.empty() ? "" : ": " + detail));
}

struct GoldenRow {
  const char* rendered;
  std::uint16_t mask;
  Direction dir;
};

void criterion_table_fidelity() {
  static const GoldenRow golden[] = {
      {"000.SYN.|C", 0x002, Direction::Client},
      {"000.ACK.SYN.|S", 0x012, Direction::Server},
      {"000.ACK.|C", 0x010, Direction::Client},
      {"000.ACK.PSH.|C", 0x018, Direction::Client},
      {"000.ACK.PSH.|S", 0x018, Direction::Server},
      {"000.ACK.FIN.|C", 0x011, Direction::Client},
      {"000.ACK.|S", 0x010, Direction::Server},
      {"000.ACK.FIN.|S", 0x011, Direction::Server},
      {"000.ACK.RST.|C", 0x014, Direction::Client},
      {"000.ACK.RST.|S", 0x014, Direction::Server},
      {"000.RST.|S", 0x004, Direction::Server},
      {"000.ACK.PSH.FIN.|S", 0x019, Direction::Server},
      {"000.RST.|C", 0x004, Direction::Client},
      {"000.CWR.ECE.SYN.|C", 0x0C2, Direction::Client},
      {"000.ECE.ACK.SYN.|S", 0x052, Direction::Server},
      {"000.NS.ACK.FIN.|S", 0x111, Direction::Server},
      {"000.ACK.PSH.FIN.|C", 0x019, Direction::Client},
      {"000.CWR.ACK.PSH.|C", 0x098, Direction::Client},
      {"000.CWR.ACK.|C", 0x090, Direction::Client},
      {"000.CWR.ACK.|S", 0x090, Direction::Server},
      {"000.CWR.ACK.PSH.|S", 0x098, Direction::Server},
      {"000.CWR.ACK.RST.|S", 0x094, Direction::Server},
      {"000.CWR.ACK.RST.|C", 0x094, Direction::Client},
  };

  bool ok = true;
  std::string detail;
  int idx = 0;
  for (const GoldenRow& row : golden) {
    EventClass ec = event_class(FlagSet::from_mask(row.mask), row.dir);
    if (class_name(ec) != row.rendered || class_index(ec) != idx) {
      ok = false;
      detail = std::string("mismatch at ") + row.rendered;
      break;
    }
    ++idx;
  }
  if (ok && (idx != 23 || kNumEventClasses != 26 || kNumRelations != 676)) {
    ok = false;
    detail = "class/relation counts off";
  }
  if (ok) {
    Snapshot s;
    if (flatten(s).size() != 676) {
      ok = false;
      detail = "flattened dimension is not 676";
    }
  }
  report("C4", ok, "23 class strings byte-exact, 26 classes, 676 dimensions" +
                       (detail.empty() ? "" : ": " + detail));
}

void criterion_interleaving() {
  FlowStateTable table;
  auto mk = [](std::uint64_t i, const char* src, std::uint16_t sp, const char* dst,
               std::uint16_t dp, FlagSet f) {
    PacketRecord p;
    p.index = i;
    p.src_ip = src;
    p.src_port = sp;
    p.dst_ip = dst;
    p.dst_port = dp;
    p.flags = f;
    return p;
  };
  const FlagSet syn{FlagSet::SYN};
  const FlagSet syn_ack{FlagSet::SYN, FlagSet::ACK};
  const FlagSet ack{FlagSet::ACK};

  // t1 = <p1, p3, p5>, t2 = <p2, p6>, arrival order p1 p2 p3 p5 p6.
  auto o1 = table.observe(mk(1, "10.0.0.1", 1000, "10.0.0.2", 80, syn));
  auto o2 = table.observe(mk(2, "10.0.0.3", 2000, "10.0.0.4", 80, syn));
  auto o3 = table.observe(mk(3, "10.0.0.2", 80, "10.0.0.1", 1000, syn_ack));
  auto o5 = table.observe(mk(5, "10.0.0.1", 1000, "10.0.0.2", 80, ack));
  auto o6 = table.observe(mk(6, "10.0.0.4", 80, "10.0.0.3", 2000, syn_ack));

  bool ok = o1.kind == TransitionOutcome::Kind::NewFlow &&
            o2.kind == TransitionOutcome::Kind::NewFlow &&
            o3.transition == Transition{EventClass::SynC, EventClass::AckSynS} &&
            o5.transition == Transition{EventClass::AckSynS, EventClass::AckC} &&
            o6.transition == Transition{EventClass::SynC, EventClass::AckSynS} &&
            o2.transition == Transition{EventClass::Start, EventClass::SynC};
  report("C5", ok, "worked interleaving example yields exactly (p1,p3), (p3,p5), (p2,p6)");
}

std::vector<Snapshot> snapshots_of(const std::vector<PacketRecord>& stream, std::size_t l,
                                   std::size_t limit, const std::string& label) {
  Preprocessor pre(EngineConfig{.window_size = l});
  std::vector<Snapshot> out;
  for (const PacketRecord& pkt : stream) {
    if (auto snap = pre.process(pkt)) {
      if (out.size() < limit) {
        snap->label = label;
        out.push_back(std::move(*snap));
      }
    }
  }
  return out;
}

void criterion_detector_sanity() {
  auto start = Clock::now();
  const std::size_t l = 100;

  SynthProfile normal;
  normal.data_packets_min = 1;
  normal.data_packets_max = 3;

  auto make_normal = [&](std::uint64_t seed, std::size_t flows) {
    SynthProfile p = normal;
    p.flow_count = flows;
    return generate(p, seed);
  };
  SynthProfile flood;
  flood.kind = SynthKind::SynFlood;
  flood.server_subnet = "192.168.9";
  auto make_flood = [&](std::uint64_t seed, std::size_t flows) {
    SynthProfile p = flood;
    p.flow_count = flows;
    return generate(p, seed);
  };

  // 2000 normal-profile training snapshots; 500 + 500 test snapshots.
  auto train_norm = snapshots_of(make_normal(1001, 400), l, 2000, kNormalLabel);
  auto test_norm = snapshots_of(make_normal(1002, 120), l, 500, kNormalLabel);
  auto test_flood = snapshots_of(make_flood(1003, 650), l, 500, kAttackLabel);
  // Labeled attack examples for the classifier's training set.
  auto train_flood = snapshots_of(make_flood(1004, 1150), l, 1000, kAttackLabel);

  bool sizes_ok = train_norm.size() == 2000 && test_norm.size() == 500 &&
                  test_flood.size() == 500 && train_flood.size() == 1000;

  // Signature route: binary knn on labeled snapshots (1000 normal + 1000
  // flood), tested on the held-out mix.
  LabeledDataset train_ds;
  train_ds.label_space = {kNormalLabel, kAttackLabel};
  for (std::size_t i = 0; i < 1000 && i < train_norm.size(); ++i) {
    train_ds.vectors.push_back(flatten(train_norm[i]));
    train_ds.labels.push_back(kNormalLabel);
  }
  for (const Snapshot& s : train_flood) {
    train_ds.vectors.push_back(flatten(s));
    train_ds.labels.push_back(kAttackLabel);
  }

  std::vector<Snapshot> test;
  test.insert(test.end(), test_norm.begin(), test_norm.end());
  test.insert(test.end(), test_flood.begin(), test_flood.end());

  KnnModel knn = KnnModel::fit(train_ds, 5);
  std::vector<std::string> actual, predicted;
  for (const Snapshot& s : test) {
    actual.push_back(s.label);
    predicted.push_back(knn.predict(flatten(s)));
  }
  ConfusionMatrix cm =
      ConfusionMatrix::from(actual, predicted, {kNormalLabel, kAttackLabel});
  auto f1 = f1_score(cm, 1);
  bool knn_ok = f1.has_value() && *f1 >= 0.95;

  // Anomaly route: fit each scorer on the 2000 normal snapshots only.
  std::vector<FeatureVector> train_vectors;
  train_vectors.reserve(train_norm.size());
  for (const Snapshot& s : train_norm) train_vectors.push_back(flatten(s));

  std::vector<int> truth;
  std::vector<FeatureVector> test_vectors;
  for (const Snapshot& s : test) {
    test_vectors.push_back(flatten(s));
    truth.push_back(s.label == kNormalLabel ? 0 : 1);
  }

  MndModel mnd = MndModel::fit(train_vectors, kDefaultMndRidge);
  PcaModel pca = PcaModel::fit_variance(train_vectors, kDefaultPcaVarianceFraction);
  HbosModel hbos = HbosModel::fit(train_vectors, kDefaultHbosBins, kDefaultHbosFloor);

  auto auc_of = [&](auto&& score_fn) {
    std::vector<double> scores;
    scores.reserve(test_vectors.size());
    for (const auto& v : test_vectors) scores.push_back(score_fn(v));
    return roc_curve(scores, truth).auc;
  };
  double mnd_auc = auc_of([&](const FeatureVector& v) { return mnd.score(v); });
  double pca_auc = auc_of([&](const FeatureVector& v) { return pca.score(v); });
  double hbos_auc = auc_of([&](const FeatureVector& v) { return hbos.score(v); });

  double elapsed = seconds_since(start);
  bool ok = sizes_ok && knn_ok && mnd_auc >= 0.90 && pca_auc >= 0.90 && hbos_auc >= 0.90 &&
            elapsed < 120.0;

  std::ostringstream detail;
  detail.precision(4);
  detail << "knn F1=" << (f1 ? *f1 : -1.0) << " (>=0.95), auc mnd=" << mnd_auc
         << " pca=" << pca_auc << " hbos=" << hbos_auc << " (>=0.90), " << elapsed
         << " s (< 120 s)";
  if (!sizes_ok) detail << " [dataset sizes off]";
  report("C6", ok, detail.str());
}

void criterion_metric_crosschecks() {
  std::mt19937_64 rng(4242);
  bool ok = true;
  std::string detail;

  for (int trial = 0; trial < 1000 && ok; ++trial) {
    std::size_t n = 2 + rng() % 300;
    std::vector<double> scores;
    std::vector<int> labels;
    bool pos = false, neg = false;
    for (std::size_t i = 0; i < n; ++i) {
      // Half the trials use coarse scores so ties occur.
      scores.push_back(trial % 2 == 0 ? static_cast<double>(rng() % 25)
                                      : static_cast<double>(rng()) * 0x1.0p-64);
      int lab = static_cast<int>(rng() % 2);
      labels.push_back(lab);
      (lab ? pos : neg) = true;
    }
    if (!pos || !neg) continue;
    double sweep = roc_curve(scores, labels).auc;
    double rank = auc_rank_statistic(scores, labels);
    if (std::abs(sweep - rank) >= 1e-12) {
      ok = false;
      detail = "sweep " + std::to_string(sweep) + " vs rank " + std::to_string(rank);
    }
  }

  // Hand-computed F1 cases.
  if (ok) {
    ConfusionMatrix uniform({"a", "b"});
    uniform.add("a", "a");
    uniform.add("a", "b");
    uniform.add("b", "a");
    uniform.add("b", "b");
    auto fa = f1_score(uniform, 0);
    auto fb = f1_score(uniform, 1);
    ConfusionMatrix ghost({"a", "b"});
    ghost.add("a", "a");
    ok = fa && *fa == 0.5 && fb && *fb == 0.5 && f1_score(ghost, 0) == 1.0 &&
         !f1_score(ghost, 1).has_value();
    if (!ok) detail = "hand-computed F1 cases mismatched";
  }
  report("C7", ok,
         "threshold-sweep auc equals rank statistic within 1e-12 on 1000 sets; F1 hand cases" +
             (detail.empty() ? "" : ": " + detail));
}

struct RunStats {
  double seconds = 0.0;
  long peak_rss_kb = 0;  // child's own VmHWM, reported in its stats line
  int exit_code = -1;
};

// ru_maxrss of a spawned child inherits the parent's copy-on-write footprint
// at fork time, so the child reports its own post-exec high-water mark
// instead; its output is captured and parsed here.
RunStats spawn_and_measure(const std::vector<std::string>& args) {
  std::vector<char*> argv;
  argv.reserve(args.size() + 1);
  for (const std::string& a : args) argv.push_back(const_cast<char*>(a.c_str()));
  argv.push_back(nullptr);

  fs::path log = work_dir() / "child_output.txt";
  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_addopen(&actions, 1, log.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
  posix_spawn_file_actions_adddup2(&actions, 1, 2);

  auto start = Clock::now();
  pid_t pid = 0;
  RunStats stats;
  int rc = posix_spawn(&pid, argv[0], &actions, nullptr, argv.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  if (rc != 0) {
    stats.exit_code = -1;
    return stats;
  }
  int status = 0;
  waitpid(pid, &status, 0);
  stats.seconds = seconds_since(start);
  stats.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;

  std::ifstream in(log);
  std::string line;
  while (std::getline(in, line)) {
    std::size_t pos = line.find("peak_rss_kb=");
    if (pos != std::string::npos) {
      stats.peak_rss_kb = std::strtol(line.c_str() + pos + 12, nullptr, 10);
    }
  }
  return stats;
}

void criterion_online_bound() {
  const fs::path dir = work_dir();

  // Train a small hbos model in-process.
  SynthProfile profile;
  profile.flow_count = 300;
  profile.data_packets_min = 1;
  profile.data_packets_max = 3;
  auto model_snaps = snapshots_of(generate(profile, 50), 500, 800, kNormalLabel);
  std::vector<FeatureVector> vecs;
  for (const Snapshot& s : model_snaps) vecs.push_back(flatten(s));
  HbosModel hbos = HbosModel::fit(vecs, kDefaultHbosBins, kDefaultHbosFloor);
  fs::path model_path = dir / "hbos.json";
  {
    std::ofstream out(model_path);
    save_model(out, DetectorModel(hbos));
  }

  // Two packet files: 1e5 and 1e6 packets of the same traffic shape.
  auto write_stream = [&](std::size_t packets, const fs::path& p) {
    SynthProfile big = profile;
    big.flow_count = packets / 6;  // ~6 packets per flow
    auto stream = generate(big, 60);
    std::ofstream out(p);
    write_packets(out, stream);
    return stream.size();
  };
  fs::path small_csv = dir / "small.csv";
  fs::path large_csv = dir / "large.csv";
  std::size_t small_n = write_stream(100000, small_csv);
  std::size_t large_n = write_stream(1000000, large_csv);

  auto run = [&](const fs::path& input, const fs::path& output) {
    return spawn_and_measure({FLOWSNAP_CLI_PATH, "score", "-m", model_path.string(), "--packets",
                              input.string(), "--window", "500", "-o", output.string()});
  };

  // Best of two per size to damp scheduler and allocator noise.
  auto best_of_two = [&](const fs::path& input, const fs::path& output) {
    RunStats a = run(input, output);
    RunStats b = run(input, output);
    RunStats best;
    best.exit_code = (a.exit_code == 0 && b.exit_code == 0) ? 0 : -1;
    best.seconds = std::min(a.seconds, b.seconds);
    best.peak_rss_kb = std::min(a.peak_rss_kb, b.peak_rss_kb);
    return best;
  };
  RunStats small = best_of_two(small_csv, dir / "scores_small.csv");
  RunStats large = best_of_two(large_csv, dir / "scores_large.csv");

  bool ran = small.exit_code == 0 && large.exit_code == 0 && small.peak_rss_kb > 0 &&
             large.peak_rss_kb > 0;
  double rss_ratio = ran ? static_cast<double>(large.peak_rss_kb) /
                               static_cast<double>(small.peak_rss_kb)
                         : 0.0;
  double packet_ratio = static_cast<double>(large_n) / static_cast<double>(small_n);
  double time_ratio = ran ? large.seconds / std::max(small.seconds, 1e-9) : 0.0;
  double normalized = time_ratio / packet_ratio;

  bool rss_ok = ran && rss_ratio >= 0.90 && rss_ratio <= 1.10;
  bool time_ok = ran && normalized >= 0.85 && normalized <= 1.15;

  std::ostringstream detail;
  detail.precision(3);
  detail << "peak rss " << small.peak_rss_kb << "kB -> " << large.peak_rss_kb << "kB (ratio "
         << rss_ratio << ", within 0.9..1.1); time " << small.seconds << "s -> " << large.seconds
         << "s (x" << time_ratio << " for x" << packet_ratio << " packets, linearity "
         << normalized << " within 0.85..1.15)";
  report("C8", rss_ok && time_ok, detail.str());
}

void criterion_ids2018() {
  const char* dir_env = std::getenv("FLOWSNAP_IDS2018_DIR");
  if (!dir_env) {
    report_skip("C9",
                "full-dataset reproduction (not desk scale): set FLOWSNAP_IDS2018_DIR to a "
                "directory with ids2018_ftp_bruteforce.csv and ids2018_attacks.csv");
    return;
  }
  fs::path dir(dir_env);
  fs::path packets_csv = dir / "ids2018_ftp_bruteforce.csv";
  fs::path attacks_csv = dir / "ids2018_attacks.csv";
  if (!fs::exists(packets_csv) || !fs::exists(attacks_csv)) {
    report("C9", false,
           "FLOWSNAP_IDS2018_DIR is set but " + packets_csv.string() + " or " +
               attacks_csv.string() + " is missing");
    return;
  }

  std::ifstream at(attacks_csv);
  EngineConfig config;
  config.window_size = 500;
  config.attack_table = load_attack_table(at);

  std::ifstream in(packets_csv);
  PacketCsvReader reader(in, RowErrorPolicy::Skip);
  Preprocessor pre(std::move(config));
  std::vector<Snapshot> snaps;
  while (auto pkt = reader.next()) {
    if (auto snap = pre.process(*pkt)) snaps.push_back(std::move(*snap));
  }

  LabeledDataset ds = LabeledDataset::from_snapshots(snaps, true);
  ds = balance(ds, BalanceMode::Undersample, 1);

  // 5-fold cross-validated binary knn, mean F1 of the attack class.
  auto folds = kfold_split(ds, 5, 1);
  double f1_sum = 0.0;
  int f1_count = 0;
  for (const auto& [train_idx, test_idx] : folds) {
    LabeledDataset train;
    train.label_space = ds.label_space;
    for (std::size_t i : train_idx) {
      train.vectors.push_back(ds.vectors[i]);
      train.labels.push_back(ds.labels[i]);
    }
    KnnModel knn = KnnModel::fit(std::move(train), 5);
    std::vector<std::string> actual, predicted;
    for (std::size_t i : test_idx) {
      actual.push_back(ds.labels[i]);
      predicted.push_back(knn.predict(ds.vectors[i]));
    }
    ConfusionMatrix cm = ConfusionMatrix::from(actual, predicted, ds.label_space);
    if (auto f1 = f1_score(cm, 1)) {
      f1_sum += *f1;
      ++f1_count;
    }
  }
  double mean_f1 = f1_count > 0 ? f1_sum / f1_count : 0.0;
  bool ok = std::abs(mean_f1 - 0.9991) <= 0.05;
  report("C9", ok,
         "FTP-BruteForce knn F1 = " + std::to_string(mean_f1) + " (reported 0.9991 +/- 0.05)");
}

}  // namespace

int main() {
  criteria_oracle_and_normalization();
  criterion_count_law();
  criterion_table_fidelity();
  criterion_interleaving();
  criterion_detector_sanity();
  criterion_metric_crosschecks();
  criterion_online_bound();
  criterion_ids2018();

  if (g_failures > 0) {
    std::cout << g_failures << " criterion(s) failed" << std::endl;
    return 1;
  }
  std::cout << "all acceptance criteria passed" << std::endl;
  return 0;
}
