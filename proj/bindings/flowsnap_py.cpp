#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <fstream>
#include <sstream>

#include "flowsnap/detectors.hpp"
#include "flowsnap/error.hpp"
#include "flowsnap/evaluation.hpp"
#include "flowsnap/io.hpp"
#include "flowsnap/snapshot.hpp"
#include "flowsnap/synth.hpp"

namespace py = pybind11;
using namespace flowsnap;

namespace {

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in.is_open()) throw std::runtime_error("cannot open '" + path + "'");
  return in;
}

std::ofstream create_or_throw(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out.is_open()) throw std::runtime_error("cannot open '" + path + "'");
  return out;
}

template <typename Model>
py::list batch_scores(const Model& m, const std::vector<FeatureVector>& vectors) {
  py::list out;
  for (const auto& v : vectors) out.append(m.score(v));
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "flowsnap: streaming TCP process-model snapshots and desk-scale detectors";

  py::register_exception<Error>(m, "FlowsnapError");

  py::enum_<Direction>(m, "Direction")
      .value("Client", Direction::Client)
      .value("Server", Direction::Server);

  py::class_<FlagSet>(m, "FlagSet")
      .def(py::init([](std::uint32_t mask) { return FlagSet::from_mask(mask); }), py::arg("mask"))
      .def_property_readonly("mask", &FlagSet::mask)
      .def("__eq__", [](FlagSet a, FlagSet b) { return a == b; })
      .def("__repr__",
           [](FlagSet f) { return "FlagSet(0x" + std::to_string(f.mask()) + ")"; });

  m.def("parse_flags", [](const std::string& raw) { return parse_flags(raw); },
        "Parse a hex mask like '0x0012' or a flag-name list like 'SYN,ACK'");

  py::enum_<EventClass>(m, "EventClass")
      .value("SynC", EventClass::SynC)
      .value("AckSynS", EventClass::AckSynS)
      .value("AckC", EventClass::AckC)
      .value("AckPshC", EventClass::AckPshC)
      .value("AckPshS", EventClass::AckPshS)
      .value("AckFinC", EventClass::AckFinC)
      .value("AckS", EventClass::AckS)
      .value("AckFinS", EventClass::AckFinS)
      .value("AckRstC", EventClass::AckRstC)
      .value("AckRstS", EventClass::AckRstS)
      .value("RstS", EventClass::RstS)
      .value("AckPshFinS", EventClass::AckPshFinS)
      .value("RstC", EventClass::RstC)
      .value("CwrEceSynC", EventClass::CwrEceSynC)
      .value("EceAckSynS", EventClass::EceAckSynS)
      .value("NsAckFinS", EventClass::NsAckFinS)
      .value("AckPshFinC", EventClass::AckPshFinC)
      .value("CwrAckPshC", EventClass::CwrAckPshC)
      .value("CwrAckC", EventClass::CwrAckC)
      .value("CwrAckS", EventClass::CwrAckS)
      .value("CwrAckPshS", EventClass::CwrAckPshS)
      .value("CwrAckRstS", EventClass::CwrAckRstS)
      .value("CwrAckRstC", EventClass::CwrAckRstC)
      .value("Start", EventClass::Start)
      .value("End", EventClass::End)
      .value("Others", EventClass::Others);

  m.def("event_class", &event_class, py::arg("flags"), py::arg("direction"));
  m.def("class_index", &class_index);
  m.def("class_from_index", &class_from_index);
  m.def("class_name", &class_name, py::return_value_policy::reference);
  m.attr("NUM_EVENT_CLASSES") = kNumEventClasses;
  m.attr("NUM_RELATIONS") = kNumRelations;
  m.attr("NORMAL_LABEL") = kNormalLabel;
  m.attr("ATTACK_LABEL") = kAttackLabel;

  py::class_<PacketRecord>(m, "PacketRecord")
      .def(py::init([](std::uint64_t index, double timestamp, const std::string& src_ip,
                       std::uint16_t src_port, const std::string& dst_ip, std::uint16_t dst_port,
                       FlagSet flags) {
             PacketRecord p;
             p.index = index;
             p.timestamp = timestamp;
             p.src_ip = src_ip;
             p.src_port = src_port;
             p.dst_ip = dst_ip;
             p.dst_port = dst_port;
             p.flags = flags;
             return p;
           }),
           py::arg("index"), py::arg("timestamp"), py::arg("src_ip"), py::arg("src_port"),
           py::arg("dst_ip"), py::arg("dst_port"), py::arg("flags"))
      .def_readwrite("index", &PacketRecord::index)
      .def_readwrite("timestamp", &PacketRecord::timestamp)
      .def_readwrite("src_ip", &PacketRecord::src_ip)
      .def_readwrite("src_port", &PacketRecord::src_port)
      .def_readwrite("dst_ip", &PacketRecord::dst_ip)
      .def_readwrite("dst_port", &PacketRecord::dst_port)
      .def_readwrite("flags", &PacketRecord::flags);

  py::class_<Snapshot>(m, "Snapshot")
      .def_readonly("packet_index", &Snapshot::packet_index)
      .def_readonly("timestamp", &Snapshot::timestamp)
      .def_readonly("label", &Snapshot::label)
      .def("cells", [](const Snapshot& s) {
        return std::vector<double>(s.cells.begin(), s.cells.end());
      })
      .def("at", [](const Snapshot& s, int from, int to) {
        return s.at(class_from_index(from), class_from_index(to));
      })
      .def("sum", &Snapshot::sum);

  py::class_<AttackTable>(m, "AttackTable")
      .def(py::init<>())
      .def("add", &AttackTable::add, py::arg("ip"), py::arg("attack_type"),
           py::arg("time_range") = std::nullopt)
      .def("label_for", &AttackTable::label_for)
      .def("__len__", &AttackTable::size)
      .def_static("load", [](const std::string& path) {
        auto in = open_or_throw(path);
        return load_attack_table(in);
      });

  py::class_<StreamStats>(m, "StreamStats")
      .def_readonly("packets", &StreamStats::packets)
      .def_readonly("accepted", &StreamStats::accepted)
      .def_readonly("ignored", &StreamStats::ignored)
      .def_readonly("flows_opened", &StreamStats::flows_opened)
      .def_readonly("flows_closed", &StreamStats::flows_closed)
      .def_readonly("snapshots", &StreamStats::snapshots);

  py::class_<Preprocessor>(m, "Preprocessor")
      .def(py::init([](std::size_t window, const AttackTable& attacks,
                       std::optional<double> evict_timeout) {
             EngineConfig config;
             config.window_size = window;
             config.attack_table = attacks;
             return Preprocessor(std::move(config), evict_timeout);
           }),
           py::arg("window") = 500, py::arg("attack_table") = AttackTable(),
           py::arg("evict_timeout") = std::nullopt)
      .def("process", &Preprocessor::process, py::arg("packet"),
           "Feed one packet; returns a Snapshot when the window is full")
      .def("stats", &Preprocessor::stats);

  py::enum_<SynthKind>(m, "SynthKind")
      .value("Normal", SynthKind::Normal)
      .value("SynFlood", SynthKind::SynFlood)
      .value("ShortFlowBurst", SynthKind::ShortFlowBurst);

  py::class_<SynthProfile>(m, "SynthProfile")
      .def(py::init<>())
      .def_readwrite("kind", &SynthProfile::kind)
      .def_readwrite("flow_count", &SynthProfile::flow_count)
      .def_readwrite("data_packets_min", &SynthProfile::data_packets_min)
      .def_readwrite("data_packets_max", &SynthProfile::data_packets_max)
      .def_readwrite("max_active_flows", &SynthProfile::max_active_flows)
      .def_readwrite("client_pool", &SynthProfile::client_pool)
      .def_readwrite("server_pool", &SynthProfile::server_pool)
      .def_readwrite("client_subnet", &SynthProfile::client_subnet)
      .def_readwrite("server_subnet", &SynthProfile::server_subnet)
      .def_readwrite("start_time", &SynthProfile::start_time)
      .def_readwrite("mean_gap", &SynthProfile::mean_gap);

  m.def("generate", &generate, py::arg("profile"), py::arg("seed"));
  m.def("merge_streams", &merge_streams, py::arg("streams"), py::arg("seed"));

  m.def("read_packets_file", [](const std::string& path) {
    auto in = open_or_throw(path);
    return read_packets(in);
  });
  m.def("write_packets_file", [](const std::string& path,
                                 const std::vector<PacketRecord>& packets) {
    auto out = create_or_throw(path);
    write_packets(out, packets);
  });
  m.def("read_snapshots_file", [](const std::string& path) {
    auto in = open_or_throw(path);
    return read_snapshots(in);
  });
  m.def("write_snapshots_file",
        [](const std::string& path, const std::vector<Snapshot>& snaps, const std::string& fmt) {
          auto out = create_or_throw(path);
          write_snapshots(out, snaps, fmt == "dense" ? SnapshotFormat::Dense
                                                     : SnapshotFormat::Sparse);
        },
        py::arg("path"), py::arg("snapshots"), py::arg("format") = "sparse");

  m.def("flatten", &flatten);

  py::class_<LabeledDataset>(m, "LabeledDataset")
      .def(py::init<>())
      .def_readwrite("vectors", &LabeledDataset::vectors)
      .def_readwrite("labels", &LabeledDataset::labels)
      .def_readwrite("label_space", &LabeledDataset::label_space)
      .def("__len__", &LabeledDataset::size)
      .def("class_counts", &LabeledDataset::class_counts)
      .def_static("from_snapshots",
                  [](const std::vector<Snapshot>& snaps, bool binary) {
                    return LabeledDataset::from_snapshots(snaps, binary);
                  },
                  py::arg("snapshots"), py::arg("binary") = true);

  py::enum_<BalanceMode>(m, "BalanceMode")
      .value("Oversample", BalanceMode::Oversample)
      .value("Undersample", BalanceMode::Undersample);
  m.def("balance", &balance, py::arg("dataset"), py::arg("mode"), py::arg("seed"));

  py::class_<KnnModel>(m, "KnnModel")
      .def_static("fit", &KnnModel::fit, py::arg("train"), py::arg("k") = kDefaultKnnK)
      .def("predict", &KnnModel::predict, py::return_value_policy::copy)
      .def_property_readonly("k", &KnnModel::k);

  py::class_<MndModel>(m, "MndModel")
      .def_static("fit",
                  [](const std::vector<FeatureVector>& normal, double ridge) {
                    return MndModel::fit(normal, ridge);
                  },
                  py::arg("normal"), py::arg("ridge") = kDefaultMndRidge)
      .def("score", &MndModel::score)
      .def("scores", &batch_scores<MndModel>);

  py::class_<PcaModel>(m, "PcaModel")
      .def_static("fit",
                  [](const std::vector<FeatureVector>& normal, int components) {
                    return PcaModel::fit(normal, components);
                  },
                  py::arg("normal"), py::arg("components"))
      .def_static("fit_variance",
                  [](const std::vector<FeatureVector>& normal, double fraction) {
                    return PcaModel::fit_variance(normal, fraction);
                  },
                  py::arg("normal"), py::arg("fraction") = kDefaultPcaVarianceFraction)
      .def("score", &PcaModel::score)
      .def("scores", &batch_scores<PcaModel>)
      .def_property_readonly("components", &PcaModel::components);

  py::class_<HbosModel>(m, "HbosModel")
      .def_static("fit",
                  [](const std::vector<FeatureVector>& normal, int bins, double floor) {
                    return HbosModel::fit(normal, bins, floor);
                  },
                  py::arg("normal"), py::arg("bins") = kDefaultHbosBins,
                  py::arg("floor") = kDefaultHbosFloor)
      .def("score", &HbosModel::score)
      .def("scores", &batch_scores<HbosModel>);

  m.def("save_model_file", [](const std::string& path, const py::object& model) {
    DetectorModel holder = [&]() -> DetectorModel {
      if (py::isinstance<KnnModel>(model)) return model.cast<KnnModel>();
      if (py::isinstance<MndModel>(model)) return model.cast<MndModel>();
      if (py::isinstance<PcaModel>(model)) return model.cast<PcaModel>();
      if (py::isinstance<HbosModel>(model)) return model.cast<HbosModel>();
      throw std::invalid_argument("expected a KnnModel, MndModel, PcaModel or HbosModel");
    }();
    auto out = create_or_throw(path);
    save_model(out, holder);
  });
  m.def("load_model_file", [](const std::string& path) -> py::object {
    auto in = open_or_throw(path);
    DetectorModel model = load_model(in);
    return std::visit([](auto&& concrete) { return py::cast(std::move(concrete)); },
                      std::move(model));
  });

  py::class_<ConfusionMatrix>(m, "ConfusionMatrix")
      .def(py::init<std::vector<std::string>>())
      .def_static("from_labels",
                  [](const std::vector<std::string>& actual,
                     const std::vector<std::string>& predicted,
                     std::vector<std::string> space) {
                    return ConfusionMatrix::from(actual, predicted, std::move(space));
                  })
      .def("add", &ConfusionMatrix::add)
      .def("at", &ConfusionMatrix::at)
      .def("total", &ConfusionMatrix::total)
      .def_property_readonly("label_space", &ConfusionMatrix::label_space);

  m.def("f1_score", [](const ConfusionMatrix& cm, std::size_t cls) { return f1_score(cm, cls); });

  py::class_<RocCurve>(m, "RocCurve")
      .def_readonly("points", &RocCurve::points)
      .def_readonly("auc", &RocCurve::auc);

  m.def("roc_curve", [](const std::vector<double>& scores, const std::vector<int>& labels) {
    return roc_curve(scores, labels);
  });
  m.def("auc_rank_statistic",
        [](const std::vector<double>& scores, const std::vector<int>& labels) {
          return auc_rank_statistic(scores, labels);
        });
  m.def("kfold_split", &kfold_split, py::arg("dataset"), py::arg("k") = 5, py::arg("seed") = 0);

#ifdef VERSION_INFO
#define FLOWSNAP_STR(x) #x
#define FLOWSNAP_XSTR(x) FLOWSNAP_STR(x)
  m.attr("__version__") = FLOWSNAP_XSTR(VERSION_INFO);
#else
  m.attr("__version__") = "dev";
#endif
}
