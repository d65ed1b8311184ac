#include "flowsnap/detectors.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>

#include <nlohmann/json.hpp>

#include "flowsnap/error.hpp"

namespace flowsnap {

namespace {

using json = nlohmann::json;

Eigen::Map<const Eigen::VectorXd> as_eigen(const FeatureVector& v) {
  return {v.data(), static_cast<Eigen::Index>(v.size())};
}

Eigen::MatrixXd stack_rows(std::span<const FeatureVector> rows) {
  if (rows.empty()) {
    throw Error(errc::empty_training_set, "no training vectors");
  }
  const std::size_t dim = rows.front().size();
  Eigen::MatrixXd X(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != dim) {
      throw std::invalid_argument("training vectors have mixed dimensions");
    }
    X.row(static_cast<Eigen::Index>(i)) = as_eigen(rows[i]);
  }
  return X;
}

void check_dim(std::size_t got, Eigen::Index want) {
  if (static_cast<Eigen::Index>(got) != want) {
    throw std::invalid_argument("query vector dimension " + std::to_string(got) +
                                " does not match model dimension " + std::to_string(want));
  }
}

json vector_to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Eigen::VectorXd vector_from_json(const json& a) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) v[static_cast<Eigen::Index>(i)] = a[i].get<double>();
  return v;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& rows) {
  const Eigen::Index nr = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index nc = nr > 0 ? static_cast<Eigen::Index>(rows[0].size()) : 0;
  Eigen::MatrixXd m(nr, nc);
  for (Eigen::Index r = 0; r < nr; ++r) {
    for (Eigen::Index c = 0; c < nc; ++c) {
      m(r, c) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)].get<double>();
    }
  }
  return m;
}

constexpr int kModelFormatVersion = 1;

}  // namespace

FeatureVector flatten(const Snapshot& snap) {
  return FeatureVector(snap.cells.begin(), snap.cells.end());
}

std::array<double, kNumRelations> unflatten(const FeatureVector& v) {
  if (v.size() != kNumRelations) {
    throw std::invalid_argument("expected a 676-entry vector, got " + std::to_string(v.size()));
  }
  std::array<double, kNumRelations> cells;
  std::copy(v.begin(), v.end(), cells.begin());
  return cells;
}

std::size_t LabeledDataset::label_index(const std::string& label) const {
  for (std::size_t i = 0; i < label_space.size(); ++i) {
    if (label_space[i] == label) return i;
  }
  throw std::invalid_argument("label '" + label + "' not in the declared label space");
}

std::vector<std::int64_t> LabeledDataset::class_counts() const {
  std::vector<std::int64_t> counts(label_space.size(), 0);
  for (const std::string& l : labels) ++counts[label_index(l)];
  return counts;
}

LabeledDataset LabeledDataset::from_snapshots(std::span<const Snapshot> snaps, bool binary) {
  LabeledDataset ds;
  if (binary) {
    ds.label_space = {kNormalLabel, kAttackLabel};
  } else {
    ds.label_space = {kNormalLabel};
  }
  ds.vectors.reserve(snaps.size());
  ds.labels.reserve(snaps.size());
  for (const Snapshot& s : snaps) {
    ds.vectors.push_back(flatten(s));
    if (binary) {
      ds.labels.push_back(s.label == kNormalLabel ? kNormalLabel : kAttackLabel);
    } else {
      if (s.label != kNormalLabel &&
          std::find(ds.label_space.begin(), ds.label_space.end(), s.label) ==
              ds.label_space.end()) {
        ds.label_space.push_back(s.label);
      }
      ds.labels.push_back(s.label);
    }
  }
  return ds;
}

LabeledDataset balance(const LabeledDataset& ds, BalanceMode mode, std::uint64_t seed) {
  if (ds.label_space.size() != 2) {
    throw std::invalid_argument("balance requires a binary label space");
  }
  std::vector<std::size_t> by_class[2];
  for (std::size_t i = 0; i < ds.labels.size(); ++i) {
    by_class[ds.label_index(ds.labels[i])].push_back(i);
  }
  if (by_class[0].empty() || by_class[1].empty()) {
    throw Error(errc::empty_class, "both classes must be present to balance");
  }

  std::mt19937_64 rng(seed);
  std::size_t minority = by_class[0].size() <= by_class[1].size() ? 0 : 1;
  std::size_t majority = 1 - minority;

  std::vector<std::size_t> keep;
  if (mode == BalanceMode::Undersample) {
    // Drop majority rows at random until the counts match.
    std::vector<std::size_t> pool = by_class[majority];
    std::shuffle(pool.begin(), pool.end(), rng);
    pool.resize(by_class[minority].size());
    keep = by_class[minority];
    keep.insert(keep.end(), pool.begin(), pool.end());
    std::sort(keep.begin(), keep.end());
  } else {
    // Duplicate random minority rows until the counts match.
    keep.resize(ds.size());
    std::iota(keep.begin(), keep.end(), 0);
    std::size_t deficit = by_class[majority].size() - by_class[minority].size();
    for (std::size_t i = 0; i < deficit; ++i) {
      keep.push_back(by_class[minority][rng() % by_class[minority].size()]);
    }
  }

  LabeledDataset out;
  out.label_space = ds.label_space;
  out.vectors.reserve(keep.size());
  out.labels.reserve(keep.size());
  for (std::size_t idx : keep) {
    out.vectors.push_back(ds.vectors[idx]);
    out.labels.push_back(ds.labels[idx]);
  }
  return out;
}

KnnModel KnnModel::fit(LabeledDataset train, int k) {
  if (train.size() == 0) {
    throw Error(errc::empty_training_set, "knn training set is empty");
  }
  if (k < 1 || static_cast<std::size_t>(k) > train.size()) {
    throw std::invalid_argument("k must satisfy 1 <= k <= training size");
  }
  KnnModel m;
  m.train_ = std::move(train);
  m.k_ = k;
  return m;
}

const std::string& KnnModel::predict(const FeatureVector& v) const {
  const auto q = as_eigen(v);
  const std::size_t n = train_.size();
  check_dim(v.size(), static_cast<Eigen::Index>(train_.dim()));

  std::vector<std::pair<double, std::size_t>> dist(n);
  for (std::size_t i = 0; i < n; ++i) {
    dist[i] = {(as_eigen(train_.vectors[i]) - q).squaredNorm(), i};
  }
  const std::size_t k = static_cast<std::size_t>(k_);
  std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());

  std::vector<std::int64_t> votes(train_.label_space.size(), 0);
  std::vector<double> summed(train_.label_space.size(), 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t cls = train_.label_index(train_.labels[dist[i].second]);
    ++votes[cls];
    summed[cls] += std::sqrt(dist[i].first);
  }

  std::size_t best = 0;
  bool seen = false;
  for (std::size_t cls = 0; cls < votes.size(); ++cls) {
    if (votes[cls] == 0) continue;
    if (!seen || votes[cls] > votes[best] ||
        (votes[cls] == votes[best] && summed[cls] < summed[best])) {
      best = cls;
      seen = true;
    }
  }
  return train_.label_space[best];
}

MndModel mnd_from_parts(Eigen::VectorXd mean, Eigen::MatrixXd cov, double ridge) {
  MndModel m;
  m.mean_ = std::move(mean);
  m.cov_ = std::move(cov);
  m.ridge_ = ridge;
  m.factorize();
  return m;
}

void MndModel::factorize() {
  llt_.compute(cov_);
  if (llt_.info() != Eigen::Success) {
    throw Error(errc::singular_covariance,
                "regularized covariance is not positive definite; increase the ridge");
  }
}

MndModel MndModel::fit(std::span<const FeatureVector> normal, double ridge) {
  if (normal.size() < 2) {
    throw std::invalid_argument("mnd fit needs at least 2 training vectors");
  }
  if (ridge < 0.0) {
    throw std::invalid_argument("ridge must be nonnegative");
  }
  Eigen::MatrixXd X = stack_rows(normal);
  Eigen::VectorXd mean = X.colwise().mean();
  X.rowwise() -= mean.transpose();
  Eigen::MatrixXd cov = (X.transpose() * X) / static_cast<double>(normal.size() - 1);
  cov.diagonal().array() += ridge;
  return mnd_from_parts(std::move(mean), std::move(cov), ridge);
}

double MndModel::score(const FeatureVector& v) const {
  check_dim(v.size(), mean_.size());
  Eigen::VectorXd diff = as_eigen(v) - mean_;
  return diff.dot(llt_.solve(diff));
}

PcaModel pca_from_parts(Eigen::VectorXd mean, Eigen::MatrixXd basis) {
  PcaModel m;
  m.mean_ = std::move(mean);
  m.basis_ = std::move(basis);
  return m;
}

namespace {

PcaModel pca_fit_impl(std::span<const FeatureVector> normal, int components, double fraction) {
  Eigen::MatrixXd X = stack_rows(normal);
  if (normal.size() < 2) {
    throw std::invalid_argument("pca fit needs at least 2 training vectors");
  }
  const Eigen::Index dim = X.cols();
  Eigen::VectorXd mean = X.colwise().mean();
  X.rowwise() -= mean.transpose();
  Eigen::MatrixXd cov = (X.transpose() * X) / static_cast<double>(normal.size() - 1);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success) {
    throw Error(errc::degenerate_data, "eigendecomposition of the covariance failed");
  }
  Eigen::VectorXd values = eig.eigenvalues();  // ascending
  double total = values.array().max(0.0).sum();
  if (total <= 0.0) {
    throw Error(errc::degenerate_data, "training data has zero variance in every direction");
  }

  int k = components;
  if (k < 0) {
    // Smallest basis whose retained variance reaches the requested fraction;
    // the tiny slack absorbs summation rounding when fraction is 1.
    const double target = fraction * total * (1.0 - 1e-12);
    double cum = 0.0;
    k = 0;
    for (Eigen::Index i = dim - 1; i >= 0 && cum < target; --i) {
      cum += std::max(values[i], 0.0);
      ++k;
    }
    k = std::max(k, 1);
  } else if (k > dim || static_cast<std::size_t>(k) > normal.size()) {
    throw std::invalid_argument("component count must satisfy 1 <= k <= min(dim, n)");
  }

  Eigen::MatrixXd basis(dim, k);
  for (int j = 0; j < k; ++j) {
    basis.col(j) = eig.eigenvectors().col(dim - 1 - j);  // descending eigenvalue order
  }
  return pca_from_parts(std::move(mean), std::move(basis));
}

}  // namespace

PcaModel PcaModel::fit(std::span<const FeatureVector> normal, int components) {
  if (components < 1) {
    throw std::invalid_argument("component count must be at least 1");
  }
  return pca_fit_impl(normal, components, 0.0);
}

PcaModel PcaModel::fit_variance(std::span<const FeatureVector> normal, double fraction) {
  if (fraction <= 0.0 || fraction > 1.0) {
    throw std::invalid_argument("variance fraction must be in (0, 1]");
  }
  return pca_fit_impl(normal, -1, fraction);
}

double PcaModel::score(const FeatureVector& v) const {
  check_dim(v.size(), mean_.size());
  Eigen::VectorXd r = as_eigen(v) - mean_;
  double residual = r.squaredNorm() - (basis_.transpose() * r).squaredNorm();
  return std::max(residual, 0.0);
}

HbosModel hbos_from_parts(std::vector<HbosModel::DimHistogram> dims, int bins, double floor) {
  HbosModel m;
  m.dims_ = std::move(dims);
  m.bins_ = bins;
  m.floor_ = floor;
  m.floor_neg_log_ = -std::log(floor);
  m.bin_neg_log_.reserve(m.dims_.size());
  for (const auto& h : m.dims_) {
    std::vector<double> neg_log(h.density.size());
    for (std::size_t b = 0; b < h.density.size(); ++b) {
      neg_log[b] = -std::log(std::max(h.density[b], floor));
    }
    m.bin_neg_log_.push_back(std::move(neg_log));
  }
  return m;
}

HbosModel HbosModel::fit(std::span<const FeatureVector> normal, int bins, double density_floor) {
  if (bins < 1) {
    throw std::invalid_argument("bin count must be at least 1");
  }
  if (density_floor <= 0.0 || density_floor > 1.0) {
    throw std::invalid_argument("density floor must be in (0, 1]");
  }
  Eigen::MatrixXd X = stack_rows(normal);
  const double n = static_cast<double>(normal.size());

  std::vector<DimHistogram> dims(static_cast<std::size_t>(X.cols()));
  for (Eigen::Index d = 0; d < X.cols(); ++d) {
    DimHistogram& h = dims[static_cast<std::size_t>(d)];
    h.lo = X.col(d).minCoeff();
    h.hi = X.col(d).maxCoeff();
    if (h.lo == h.hi) {
      h.density = {1.0};  // all mass on one value
      continue;
    }
    std::vector<std::int64_t> counts(static_cast<std::size_t>(bins), 0);
    const double width = (h.hi - h.lo) / bins;
    for (Eigen::Index r = 0; r < X.rows(); ++r) {
      auto bin = static_cast<std::size_t>((X(r, d) - h.lo) / width);
      if (bin >= static_cast<std::size_t>(bins)) bin = static_cast<std::size_t>(bins) - 1;
      ++counts[bin];
    }
    h.density.resize(static_cast<std::size_t>(bins));
    for (std::size_t b = 0; b < counts.size(); ++b) {
      h.density[b] = static_cast<double>(counts[b]) / n;
    }
  }
  return hbos_from_parts(std::move(dims), bins, density_floor);
}

double HbosModel::score(const FeatureVector& v) const {
  check_dim(v.size(), static_cast<Eigen::Index>(dims_.size()));
  double score = 0.0;
  for (std::size_t d = 0; d < dims_.size(); ++d) {
    const DimHistogram& h = dims_[d];
    const double x = v[d];
    if (h.lo == h.hi) {
      // Constant training dimension: all mass on the single observed value.
      score += x == h.lo ? bin_neg_log_[d][0] : floor_neg_log_;
    } else if (x >= h.lo && x <= h.hi) {
      const double width = (h.hi - h.lo) / static_cast<double>(h.density.size());
      auto bin = static_cast<std::size_t>((x - h.lo) / width);
      if (bin >= h.density.size()) bin = h.density.size() - 1;
      score += bin_neg_log_[d][bin];
    } else {
      score += floor_neg_log_;
    }
  }
  return score;
}

const char* detector_name(const DetectorModel& model) {
  switch (model.index()) {
    case 0: return "knn";
    case 1: return "mnd";
    case 2: return "pca";
    case 3: return "hbos";
    default: return "unknown";
  }
}

void save_model(std::ostream& out, const DetectorModel& model) {
  json j{{"format_version", kModelFormatVersion}, {"detector", detector_name(model)}};
  if (const auto* knn = std::get_if<KnnModel>(&model)) {
    j["k"] = knn->k();
    j["label_space"] = knn->train().label_space;
    j["labels"] = knn->train().labels;
    json rows = json::array();
    for (const FeatureVector& v : knn->train().vectors) rows.push_back(v);
    j["vectors"] = std::move(rows);
  } else if (const auto* mnd = std::get_if<MndModel>(&model)) {
    j["ridge"] = mnd->ridge();
    j["mean"] = vector_to_json(mnd->mean());
    j["covariance"] = matrix_to_json(mnd->covariance());
  } else if (const auto* pca = std::get_if<PcaModel>(&model)) {
    j["mean"] = vector_to_json(pca->mean());
    j["basis"] = matrix_to_json(pca->basis());
  } else if (const auto* hbos = std::get_if<HbosModel>(&model)) {
    j["bins"] = hbos->bins();
    j["density_floor"] = hbos->density_floor();
    json dims = json::array();
    for (const auto& h : hbos->histograms()) {
      dims.push_back(json{{"lo", h.lo}, {"hi", h.hi}, {"density", h.density}});
    }
    j["dims"] = std::move(dims);
  }
  out << j.dump() << '\n';
}

DetectorModel load_model(std::istream& in) {
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw Error(errc::format_mismatch, "model file is not valid json");
  }
  if (j.value("format_version", -1) != kModelFormatVersion) {
    throw Error(errc::format_mismatch, "unsupported model format version");
  }
  const std::string kind = j.value("detector", "");
  if (kind == "knn") {
    LabeledDataset ds;
    ds.label_space = j.at("label_space").get<std::vector<std::string>>();
    ds.labels = j.at("labels").get<std::vector<std::string>>();
    for (const auto& row : j.at("vectors")) ds.vectors.push_back(row.get<FeatureVector>());
    return KnnModel::fit(std::move(ds), j.at("k").get<int>());
  }
  if (kind == "mnd") {
    return mnd_from_parts(vector_from_json(j.at("mean")), matrix_from_json(j.at("covariance")),
                          j.at("ridge").get<double>());
  }
  if (kind == "pca") {
    return pca_from_parts(vector_from_json(j.at("mean")), matrix_from_json(j.at("basis")));
  }
  if (kind == "hbos") {
    std::vector<HbosModel::DimHistogram> dims;
    for (const auto& d : j.at("dims")) {
      dims.push_back({d.at("lo").get<double>(), d.at("hi").get<double>(),
                      d.at("density").get<std::vector<double>>()});
    }
    return hbos_from_parts(std::move(dims), j.at("bins").get<int>(),
                           j.at("density_floor").get<double>());
  }
  throw Error(errc::format_mismatch, "unknown detector kind '" + kind + "'");
}

}  // namespace flowsnap
