#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "flowsnap/snapshot.hpp"

namespace flowsnap {

/// Row-major flattening of a snapshot matrix; 676 entries for snapshots,
/// though the detectors accept any consistent dimension.
using FeatureVector = std::vector<double>;

inline const std::string kAttackLabel = "Attack";

FeatureVector flatten(const Snapshot& snap);

/// Inverse of flatten for a 676-entry vector.
std::array<double, kNumRelations> unflatten(const FeatureVector& v);

/// Feature vectors with per-sample labels drawn from a declared label space.
/// The label-space order is the tie-break order for classification.
struct LabeledDataset {
  std::vector<FeatureVector> vectors;
  std::vector<std::string> labels;
  std::vector<std::string> label_space;

  std::size_t size() const { return vectors.size(); }
  std::size_t dim() const { return vectors.empty() ? 0 : vectors.front().size(); }

  std::size_t label_index(const std::string& label) const;
  std::vector<std::int64_t> class_counts() const;

  /// Binary mode labels every non-Normal snapshot `Attack`; multi-class mode
  /// keeps attack names, label space ordered Normal first then first
  /// appearance.
  static LabeledDataset from_snapshots(std::span<const Snapshot> snaps, bool binary);
};

enum class BalanceMode : std::uint8_t { Oversample, Undersample };

/// Equalizes the two class counts of a binary dataset by duplicating or
/// dropping pseudo-randomly chosen rows. Deterministic given the seed.
LabeledDataset balance(const LabeledDataset& ds, BalanceMode mode, std::uint64_t seed);

/// k-nearest-neighbours classifier, Euclidean metric. Majority vote of the
/// k closest training rows; vote ties go to the smaller summed distance,
/// then to label-space order.
class KnnModel {
 public:
  static KnnModel fit(LabeledDataset train, int k);

  const std::string& predict(const FeatureVector& v) const;

  int k() const { return k_; }
  const LabeledDataset& train() const { return train_; }

 private:
  KnnModel() = default;

  LabeledDataset train_;
  int k_ = 0;
};

/// Multivariate-normal outlier model: squared Mahalanobis distance against
/// the ridge-regularized sample covariance of the normal training data.
class MndModel {
 public:
  static MndModel fit(std::span<const FeatureVector> normal, double ridge);

  double score(const FeatureVector& v) const;

  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::MatrixXd& covariance() const { return cov_; }
  double ridge() const { return ridge_; }

 private:
  MndModel() = default;
  void factorize();

  Eigen::VectorXd mean_;
  Eigen::MatrixXd cov_;  // already regularized
  Eigen::LLT<Eigen::MatrixXd> llt_;
  double ridge_ = 0.0;

  friend MndModel mnd_from_parts(Eigen::VectorXd mean, Eigen::MatrixXd cov, double ridge);
};

/// PCA reconstruction-error outlier model: squared norm of the component of
/// (v - mean) orthogonal to the retained eigenbasis.
class PcaModel {
 public:
  static PcaModel fit(std::span<const FeatureVector> normal, int components);

  /// Retains the smallest basis explaining at least `fraction` of variance.
  static PcaModel fit_variance(std::span<const FeatureVector> normal, double fraction);

  double score(const FeatureVector& v) const;

  int components() const { return static_cast<int>(basis_.cols()); }
  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::MatrixXd& basis() const { return basis_; }

 private:
  PcaModel() = default;

  Eigen::VectorXd mean_;
  Eigen::MatrixXd basis_;  // dim x k, orthonormal columns

  friend PcaModel pca_from_parts(Eigen::VectorXd mean, Eigen::MatrixXd basis);
};

/// Histogram-based outlier score: per dimension an equal-width histogram
/// over the training range; score sums -log(bin density), with a density
/// floor for empty bins and out-of-range values.
class HbosModel {
 public:
  static HbosModel fit(std::span<const FeatureVector> normal, int bins, double density_floor);

  double score(const FeatureVector& v) const;

  int bins() const { return bins_; }
  double density_floor() const { return floor_; }

  struct DimHistogram {
    double lo = 0.0;
    double hi = 0.0;
    std::vector<double> density;  // relative frequency per bin
  };
  const std::vector<DimHistogram>& histograms() const { return dims_; }

 private:
  HbosModel() = default;

  std::vector<DimHistogram> dims_;
  std::vector<std::vector<double>> bin_neg_log_;  // -log(max(density, floor)), scoring cache
  double floor_neg_log_ = 0.0;
  int bins_ = 0;
  double floor_ = 0.0;

  friend HbosModel hbos_from_parts(std::vector<DimHistogram> dims, int bins, double floor);
};

using DetectorModel = std::variant<KnnModel, MndModel, PcaModel, HbosModel>;

const char* detector_name(const DetectorModel& model);

/// Self-describing JSON blob with a format-version field.
void save_model(std::ostream& out, const DetectorModel& model);
DetectorModel load_model(std::istream& in);

// Documented defaults; the CLI applies them as flag defaults too.
inline constexpr int kDefaultKnnK = 5;
inline constexpr double kDefaultMndRidge = 1e-6;
inline constexpr double kDefaultPcaVarianceFraction = 0.95;
inline constexpr int kDefaultHbosBins = 10;
inline constexpr double kDefaultHbosFloor = 1e-9;

}  // namespace flowsnap
