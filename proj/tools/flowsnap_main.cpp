#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "flowsnap/detectors.hpp"
#include "flowsnap/error.hpp"
#include "flowsnap/evaluation.hpp"
#include "flowsnap/io.hpp"
#include "flowsnap/snapshot.hpp"
#include "flowsnap/synth.hpp"

#include <nlohmann/json.hpp>

namespace {

using namespace flowsnap;
using json = nlohmann::json;

constexpr std::uint64_t kDefaultSeed = 1729;

int log_level() {
  // FLOWSNAP_LOG=quiet|info|debug (default info)
  const char* env = std::getenv("FLOWSNAP_LOG");
  if (!env) return 1;
  std::string v(env);
  if (v == "quiet") return 0;
  if (v == "debug") return 2;
  return 1;
}

void info(const std::string& msg) {
  if (log_level() >= 1) std::cerr << msg << '\n';
}

void debug(const std::string& msg) {
  if (log_level() >= 2) std::cerr << "debug: " << msg << '\n';
}

// Resident-set sample in kB; prefers the kernel high-water mark where the
// kernel exposes one, otherwise the current RSS (0 if /proc is unavailable).
long rss_sample_kb() {
  std::ifstream status("/proc/self/status");
  std::string line;
  long best = 0;
  while (std::getline(status, line)) {
    if (line.rfind("VmHWM:", 0) == 0 || line.rfind("VmRSS:", 0) == 0) {
      best = std::max(best, std::strtol(line.c_str() + 6, nullptr, 10));
    }
  }
  return best;
}

// Tracks the peak of periodic RSS samples through a streaming loop.
class RssHighWater {
 public:
  void sample() { peak_ = std::max(peak_, rss_sample_kb()); }
  void sample_every(std::uint64_t counter, std::uint64_t stride) {
    if (counter % stride == 0) sample();
  }
  long peak_kb() const { return peak_; }

 private:
  long peak_ = 0;
};

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in.is_open()) {
    throw std::runtime_error("cannot open input file '" + path + "'");
  }
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out.is_open()) {
    throw std::runtime_error("cannot open output file '" + path + "'");
  }
  return out;
}

void require_exists(const std::string& path, const std::string& what) {
  if (!std::filesystem::exists(path)) {
    throw std::runtime_error(what + " '" + path + "' does not exist");
  }
}

struct SynthOpts {
  std::string profile = "normal";
  std::string output;
  std::size_t flows = 100;
  int data_packets = 0;
  int data_packets_max = -1;  // -1: same as data_packets
  std::uint64_t seed = kDefaultSeed;
  std::string client_subnet;
  std::string server_subnet;
  double mean_gap = 0.0;  // 0: profile default
};

int run_synth(const SynthOpts& o) {
  SynthProfile profile;
  if (o.profile == "normal") {
    profile.kind = SynthKind::Normal;
  } else if (o.profile == "synflood") {
    profile.kind = SynthKind::SynFlood;
    profile.mean_gap = 5e-5;
  } else if (o.profile == "shortburst") {
    profile.kind = SynthKind::ShortFlowBurst;
    profile.mean_gap = 1e-4;
  } else {
    throw Error(errc::invalid_profile, "unknown profile '" + o.profile + "'");
  }
  profile.flow_count = o.flows;
  profile.data_packets_min = o.data_packets;
  profile.data_packets_max = o.data_packets_max < 0 ? o.data_packets : o.data_packets_max;
  if (!o.client_subnet.empty()) profile.client_subnet = o.client_subnet;
  if (!o.server_subnet.empty()) profile.server_subnet = o.server_subnet;
  if (o.mean_gap > 0.0) profile.mean_gap = o.mean_gap;

  std::vector<PacketRecord> packets = generate(profile, o.seed);
  std::ofstream out = open_output(o.output);
  write_packets(out, packets);
  info("wrote " + std::to_string(packets.size()) + " packets to " + o.output);
  return 0;
}

struct PreprocessOpts {
  std::string input;
  std::string output;
  std::size_t window = 500;
  std::string format = "sparse";
  std::string attack_table;
  double evict_timeout = 0.0;
  std::string on_bad_row = "fail";
};

SnapshotFormat parse_format(const std::string& name) {
  if (name == "dense") return SnapshotFormat::Dense;
  if (name == "sparse") return SnapshotFormat::Sparse;
  throw Error(errc::format_mismatch, "unknown snapshot format '" + name + "'");
}

int run_preprocess(const PreprocessOpts& o) {
  require_exists(o.input, "packet file");
  EngineConfig config;
  config.window_size = o.window;
  if (!o.attack_table.empty()) {
    require_exists(o.attack_table, "attack table");
    std::ifstream at = open_input(o.attack_table);
    config.attack_table = load_attack_table(at);
    debug("loaded " + std::to_string(config.attack_table.size()) + " attack table entries");
  }

  std::ifstream in = open_input(o.input);
  std::ofstream out = open_output(o.output);
  PacketCsvReader reader(in, o.on_bad_row == "skip" ? RowErrorPolicy::Skip : RowErrorPolicy::Fail);
  SnapshotWriter writer(out, parse_format(o.format));
  Preprocessor pre(std::move(config),
                   o.evict_timeout > 0.0 ? std::optional<double>(o.evict_timeout) : std::nullopt);

  RssHighWater rss;
  std::uint64_t seen = 0;
  while (auto pkt = reader.next()) {
    if (auto snap = pre.process(*pkt)) {
      writer.write(*snap);
    }
    rss.sample_every(++seen, 1024);
  }
  rss.sample();

  StreamStats s = pre.stats();
  info("packets=" + std::to_string(s.packets) + " accepted=" + std::to_string(s.accepted) +
       " ignored=" + std::to_string(s.ignored) + " flows_opened=" + std::to_string(s.flows_opened) +
       " flows_closed=" + std::to_string(s.flows_closed) +
       " snapshots=" + std::to_string(s.snapshots) +
       " bad_rows=" + std::to_string(reader.rows_skipped()) +
       " peak_rss_kb=" + std::to_string(rss.peak_kb()));
  return 0;
}

struct TrainOpts {
  std::string input;
  std::string model;
  std::string detector = "knn";
  int k = kDefaultKnnK;
  double ridge = kDefaultMndRidge;
  int bins = kDefaultHbosBins;
  double density_floor = kDefaultHbosFloor;
  double variance = kDefaultPcaVarianceFraction;
  int components = 0;  // 0: use variance fraction
  std::string balance_mode = "none";
  std::string classes = "binary";
  std::uint64_t seed = kDefaultSeed;
};

std::vector<FeatureVector> normal_vectors(std::span<const Snapshot> snaps) {
  std::vector<FeatureVector> out;
  for (const Snapshot& s : snaps) {
    if (s.label == kNormalLabel) out.push_back(flatten(s));
  }
  return out;
}

int run_train(const TrainOpts& o) {
  require_exists(o.input, "snapshot file");
  std::ifstream in = open_input(o.input);
  std::vector<Snapshot> snaps = read_snapshots(in);
  info("loaded " + std::to_string(snaps.size()) + " snapshots");

  DetectorModel model = [&]() -> DetectorModel {
    if (o.detector == "knn") {
      LabeledDataset ds = LabeledDataset::from_snapshots(snaps, o.classes == "binary");
      if (o.balance_mode != "none") {
        ds = balance(ds,
                     o.balance_mode == "over" ? BalanceMode::Oversample : BalanceMode::Undersample,
                     o.seed);
        info("balanced to " + std::to_string(ds.size()) + " samples");
      }
      return KnnModel::fit(std::move(ds), o.k);
    }
    // Anomaly detectors train on normal-only data.
    std::vector<FeatureVector> normal = normal_vectors(snaps);
    info("training on " + std::to_string(normal.size()) + " normal snapshots");
    if (o.detector == "mnd") return MndModel::fit(normal, o.ridge);
    if (o.detector == "pca") {
      return o.components > 0 ? PcaModel::fit(normal, o.components)
                              : PcaModel::fit_variance(normal, o.variance);
    }
    if (o.detector == "hbos") return HbosModel::fit(normal, o.bins, o.density_floor);
    throw Error(errc::format_mismatch, "unknown detector '" + o.detector + "'");
  }();

  std::ofstream out = open_output(o.model);
  save_model(out, model);
  info("saved " + std::string(detector_name(model)) + " model to " + o.model);
  return 0;
}

struct EvalOpts {
  std::string input;
  std::string model;
  std::string metrics;
  std::string roc_csv;
};

json f1_report(const ConfusionMatrix& cm) {
  json f1 = json::object();
  for (std::size_t c = 0; c < cm.num_classes(); ++c) {
    auto v = f1_score(cm, c);
    f1[cm.label_space()[c]] = v ? json(*v) : json(nullptr);
  }
  return f1;
}

int run_eval(const EvalOpts& o) {
  require_exists(o.input, "snapshot file");
  require_exists(o.model, "model file");
  std::ifstream min = open_input(o.model);
  DetectorModel model = load_model(min);
  std::ifstream in = open_input(o.input);
  std::vector<Snapshot> snaps = read_snapshots(in);

  json report{{"detector", detector_name(model)}, {"samples", snaps.size()}};

  if (const auto* knn = std::get_if<KnnModel>(&model)) {
    const auto& space = knn->train().label_space;
    bool binary = space.size() == 2 && space[1] == kAttackLabel;
    LabeledDataset ds = LabeledDataset::from_snapshots(snaps, binary);
    std::vector<std::string> predicted;
    predicted.reserve(ds.size());
    for (const FeatureVector& v : ds.vectors) predicted.push_back(knn->predict(v));
    ConfusionMatrix cm = ConfusionMatrix::from(ds.labels, predicted, space);

    json rows = json::array();
    for (std::size_t a = 0; a < cm.num_classes(); ++a) {
      json row = json::array();
      for (std::size_t p = 0; p < cm.num_classes(); ++p) row.push_back(cm.at(a, p));
      rows.push_back(std::move(row));
    }
    report["label_space"] = space;
    report["confusion"] = std::move(rows);
    report["f1"] = f1_report(cm);
  } else {
    std::vector<double> scores;
    std::vector<int> truth;
    scores.reserve(snaps.size());
    for (const Snapshot& s : snaps) {
      FeatureVector v = flatten(s);
      double score = std::visit(
          [&](const auto& m) -> double {
            if constexpr (std::is_same_v<std::decay_t<decltype(m)>, KnnModel>) {
              return 0.0;  // unreachable
            } else {
              return m.score(v);
            }
          },
          model);
      scores.push_back(score);
      truth.push_back(s.label == kNormalLabel ? 0 : 1);
    }
    RocCurve curve = roc_curve(scores, truth);
    report["auc"] = curve.auc;
    report["auc_rank"] = auc_rank_statistic(scores, truth);
    if (!o.roc_csv.empty()) {
      std::ofstream rc = open_output(o.roc_csv);
      rc << "fpr,tpr\n";
      char buf[64];
      for (const auto& [fpr, tpr] : curve.points) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", fpr, tpr);
        rc << buf;
      }
    }
  }

  std::ofstream out = open_output(o.metrics);
  out << report.dump(2) << '\n';
  info("wrote metrics to " + o.metrics);
  return 0;
}

struct ScoreOpts {
  std::string model;
  std::string input;    // snapshot stream
  std::string packets;  // alternative: raw packet csv, preprocessed on the fly
  std::string output;
  std::size_t window = 500;
  std::string attack_table;
};

int run_score(const ScoreOpts& o) {
  require_exists(o.model, "model file");
  std::ifstream min = open_input(o.model);
  DetectorModel model = load_model(min);
  if (std::holds_alternative<KnnModel>(model)) {
    throw Error(errc::format_mismatch, "score needs an outlier model (mnd, pca or hbos); use eval for knn");
  }

  auto score_of = [&](const Snapshot& s) {
    FeatureVector v = flatten(s);
    return std::visit(
        [&](const auto& m) -> double {
          if constexpr (std::is_same_v<std::decay_t<decltype(m)>, KnnModel>) {
            return 0.0;  // unreachable
          } else {
            return m.score(v);
          }
        },
        model);
  };

  std::ofstream out = open_output(o.output);
  out << "packet_index,timestamp,label,score\n";
  char buf[96];
  std::uint64_t emitted = 0;
  RssHighWater rss;

  auto emit = [&](const Snapshot& s) {
    std::snprintf(buf, sizeof buf, "%llu,%.17g,", static_cast<unsigned long long>(s.packet_index),
                  s.timestamp);
    out << buf << s.label;
    std::snprintf(buf, sizeof buf, ",%.17g\n", score_of(s));
    out << buf;
    ++emitted;
  };

  if (!o.packets.empty()) {
    // Online mode: packets in, scores out, one pass, bounded memory.
    require_exists(o.packets, "packet file");
    EngineConfig config;
    config.window_size = o.window;
    if (!o.attack_table.empty()) {
      require_exists(o.attack_table, "attack table");
      std::ifstream at = open_input(o.attack_table);
      config.attack_table = load_attack_table(at);
    }
    std::ifstream in = open_input(o.packets);
    PacketCsvReader reader(in);
    Preprocessor pre(std::move(config));
    std::uint64_t seen = 0;
    while (auto pkt = reader.next()) {
      if (auto snap = pre.process(*pkt)) emit(*snap);
      rss.sample_every(++seen, 1024);
    }
  } else {
    require_exists(o.input, "snapshot file");
    std::ifstream in = open_input(o.input);
    SnapshotReader reader(in);
    while (auto snap = reader.next()) {
      emit(*snap);
      rss.sample_every(emitted, 1024);
    }
  }
  rss.sample();

  info("scored " + std::to_string(emitted) + " snapshots peak_rss_kb=" +
       std::to_string(rss.peak_kb()));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"flowsnap: streaming TCP process-model snapshots for intrusion detection"};
  app.require_subcommand(1);

  SynthOpts synth_opts;
  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic packet stream");
  synth->add_option("--profile", synth_opts.profile, "normal|synflood|shortburst")
      ->default_val("normal");
  synth->add_option("--flows", synth_opts.flows, "number of flows")->default_val(100);
  synth->add_option("--data-packets", synth_opts.data_packets,
                    "data packets per normal flow (min)");
  synth->add_option("--data-packets-max", synth_opts.data_packets_max,
                    "max data packets per normal flow");
  synth->add_option("--seed", synth_opts.seed, "rng seed")->default_val(kDefaultSeed);
  synth->add_option("--client-subnet", synth_opts.client_subnet, "client /24 prefix");
  synth->add_option("--server-subnet", synth_opts.server_subnet, "server /24 prefix");
  synth->add_option("--mean-gap", synth_opts.mean_gap, "mean packet gap in seconds");
  synth->add_option("-o,--output", synth_opts.output, "packet csv path")->required();

  PreprocessOpts pre_opts;
  CLI::App* pre = app.add_subcommand("preprocess", "packets to process-model snapshots");
  pre->add_option("-i,--input", pre_opts.input, "packet csv path")->required();
  pre->add_option("-o,--output", pre_opts.output, "snapshot file path")->required();
  pre->add_option("-l,--window", pre_opts.window, "sliding window size in transitions")
      ->default_val(500);
  pre->add_option("--format", pre_opts.format, "dense|sparse")->default_val("sparse");
  pre->add_option("--attack-table", pre_opts.attack_table, "attack table csv");
  pre->add_option("--evict-timeout", pre_opts.evict_timeout,
                  "drop flows idle longer than this many seconds (default: never)");
  pre->add_option("--on-bad-row", pre_opts.on_bad_row, "fail|skip")->default_val("fail");

  TrainOpts train_opts;
  CLI::App* train = app.add_subcommand("train", "fit a detector on a snapshot file");
  train->add_option("-i,--input", train_opts.input, "snapshot file path")->required();
  train->add_option("-m,--model", train_opts.model, "output model path")->required();
  train->add_option("--detector", train_opts.detector, "knn|mnd|pca|hbos")->default_val("knn");
  train->add_option("--k", train_opts.k, "knn neighbour count")->default_val(kDefaultKnnK);
  train->add_option("--ridge", train_opts.ridge, "mnd covariance ridge")
      ->default_val(kDefaultMndRidge);
  train->add_option("--bins", train_opts.bins, "hbos bins per dimension")
      ->default_val(kDefaultHbosBins);
  train->add_option("--density-floor", train_opts.density_floor, "hbos density floor")
      ->default_val(kDefaultHbosFloor);
  train->add_option("--variance", train_opts.variance, "pca retained variance fraction")
      ->default_val(kDefaultPcaVarianceFraction);
  train->add_option("--components", train_opts.components, "pca fixed component count");
  train->add_option("--balance", train_opts.balance_mode, "over|under|none (binary knn only)")
      ->default_val("none");
  train->add_option("--classes", train_opts.classes, "binary|multi (knn label space)")
      ->default_val("binary");
  train->add_option("--seed", train_opts.seed, "rng seed")->default_val(kDefaultSeed);

  EvalOpts eval_opts;
  CLI::App* eval = app.add_subcommand("eval", "evaluate a model on labeled snapshots");
  eval->add_option("-m,--model", eval_opts.model, "model path")->required();
  eval->add_option("-i,--input", eval_opts.input, "snapshot file path")->required();
  eval->add_option("--metrics", eval_opts.metrics, "metrics json output path")->required();
  eval->add_option("--roc", eval_opts.roc_csv, "roc points csv output path");

  ScoreOpts score_opts;
  CLI::App* score = app.add_subcommand("score", "stream outlier scores for snapshots");
  score->add_option("-m,--model", score_opts.model, "model path")->required();
  score->add_option("-i,--input", score_opts.input, "snapshot file path");
  score->add_option("--packets", score_opts.packets,
                    "raw packet csv; preprocess and score in one streaming pass");
  score->add_option("-o,--output", score_opts.output, "score csv output path")->required();
  score->add_option("-l,--window", score_opts.window, "window size for --packets mode")
      ->default_val(500);
  score->add_option("--attack-table", score_opts.attack_table, "attack table for --packets mode");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  }

  try {
    if (*synth) return run_synth(synth_opts);
    if (*pre) return run_preprocess(pre_opts);
    if (*train) return run_train(train_opts);
    if (*eval) return run_eval(eval_opts);
    if (*score) {
      if (score_opts.input.empty() == score_opts.packets.empty()) {
        std::cerr << "usage error: score needs exactly one of --input or --packets\n";
        return 2;
      }
      return run_score(score_opts);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
