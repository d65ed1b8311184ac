#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "flowsnap/detectors.hpp"

namespace flowsnap {

/// Square count matrix over a label space; rows are ground truth, columns
/// predictions.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::vector<std::string> label_space);

  static ConfusionMatrix from(std::span<const std::string> actual,
                              std::span<const std::string> predicted,
                              std::vector<std::string> label_space);

  void add(const std::string& actual, const std::string& predicted);

  std::int64_t at(std::size_t actual, std::size_t predicted) const {
    return counts_[actual * labels_.size() + predicted];
  }
  std::int64_t total() const;
  std::size_t num_classes() const { return labels_.size(); }
  const std::vector<std::string>& label_space() const { return labels_; }

 private:
  std::size_t index_of(const std::string& label) const;

  std::vector<std::string> labels_;
  std::vector<std::int64_t> counts_;
};

/// Harmonic mean of precision and recall for one class; nullopt when a
/// denominator is zero or precision and recall are both zero (the cases a
/// result table shows as NaN rather than 0).
std::optional<double> f1_score(const ConfusionMatrix& cm, std::size_t cls);

struct RocCurve {
  std::vector<std::pair<double, double>> points;  // (fpr, tpr), (0,0) .. (1,1)
  double auc = 0.0;
};

/// Threshold sweep over the distinct score values; labels are 0 (negative)
/// and 1 (positive). AUC is the trapezoidal area of the curve.
RocCurve roc_curve(std::span<const double> scores, std::span<const int> labels);

/// AUC as the rank statistic: probability a random positive outranks a
/// random negative, ties counted one half. Independent route cross-checking
/// roc_curve's area.
double auc_rank_statistic(std::span<const double> scores, std::span<const int> labels);

using FoldSplit = std::pair<std::vector<std::size_t>, std::vector<std::size_t>>;  // train, test

/// Stratified k-fold partitions: per label the indices are shuffled and
/// dealt round-robin, so every sample lands in exactly one test fold and
/// per-fold class counts stay within one of each other.
std::vector<FoldSplit> kfold_split(const LabeledDataset& ds, int k, std::uint64_t seed);

}  // namespace flowsnap
