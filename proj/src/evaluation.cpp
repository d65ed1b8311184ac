#include "flowsnap/evaluation.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include "flowsnap/error.hpp"

namespace flowsnap {

ConfusionMatrix::ConfusionMatrix(std::vector<std::string> label_space)
    : labels_(std::move(label_space)), counts_(labels_.size() * labels_.size(), 0) {
  if (labels_.empty()) {
    throw std::invalid_argument("label space must not be empty");
  }
}

ConfusionMatrix ConfusionMatrix::from(std::span<const std::string> actual,
                                      std::span<const std::string> predicted,
                                      std::vector<std::string> label_space) {
  if (actual.size() != predicted.size()) {
    throw std::invalid_argument("actual and predicted label counts differ");
  }
  ConfusionMatrix cm(std::move(label_space));
  for (std::size_t i = 0; i < actual.size(); ++i) cm.add(actual[i], predicted[i]);
  return cm;
}

std::size_t ConfusionMatrix::index_of(const std::string& label) const {
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] == label) return i;
  }
  throw std::invalid_argument("label '" + label + "' not in the confusion matrix label space");
}

void ConfusionMatrix::add(const std::string& actual, const std::string& predicted) {
  ++counts_[index_of(actual) * labels_.size() + index_of(predicted)];
}

std::int64_t ConfusionMatrix::total() const {
  return std::accumulate(counts_.begin(), counts_.end(), std::int64_t{0});
}

std::optional<double> f1_score(const ConfusionMatrix& cm, std::size_t cls) {
  const std::size_t n = cm.num_classes();
  std::int64_t tp = cm.at(cls, cls);
  std::int64_t row = 0, col = 0;
  for (std::size_t i = 0; i < n; ++i) {
    row += cm.at(cls, i);
    col += cm.at(i, cls);
  }
  if (row == 0 || col == 0) return std::nullopt;  // precision or recall undefined
  double precision = static_cast<double>(tp) / static_cast<double>(col);
  double recall = static_cast<double>(tp) / static_cast<double>(row);
  if (precision + recall == 0.0) return std::nullopt;
  return 2.0 * precision * recall / (precision + recall);
}

RocCurve roc_curve(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size() || scores.empty()) {
    throw std::invalid_argument("scores and labels must be equally sized and nonempty");
  }
  std::int64_t positives = 0;
  for (int l : labels) positives += l != 0;
  const std::int64_t negatives = static_cast<std::int64_t>(labels.size()) - positives;
  if (positives == 0 || negatives == 0) {
    throw Error(errc::one_class_only, "roc needs both classes present");
  }

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  RocCurve curve;
  curve.points.emplace_back(0.0, 0.0);
  std::int64_t tp = 0, fp = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    // One threshold per distinct score: everything scoring >= it is positive.
    double threshold = scores[order[i]];
    while (i < order.size() && scores[order[i]] == threshold) {
      if (labels[order[i]] != 0) ++tp; else ++fp;
      ++i;
    }
    curve.points.emplace_back(static_cast<double>(fp) / static_cast<double>(negatives),
                              static_cast<double>(tp) / static_cast<double>(positives));
  }

  double auc = 0.0;
  for (std::size_t p = 1; p < curve.points.size(); ++p) {
    const auto& [x0, y0] = curve.points[p - 1];
    const auto& [x1, y1] = curve.points[p];
    auc += (x1 - x0) * (y0 + y1) * 0.5;
  }
  curve.auc = auc;
  return curve;
}

double auc_rank_statistic(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size() || scores.empty()) {
    throw std::invalid_argument("scores and labels must be equally sized and nonempty");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Midranks over tied score groups, then the Mann-Whitney identity.
  double rank_sum_pos = 0.0;
  std::int64_t positives = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    std::int64_t pos_in_group = 0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      pos_in_group += labels[order[j]] != 0;
      ++j;
    }
    double midrank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));
    rank_sum_pos += midrank * static_cast<double>(pos_in_group);
    positives += pos_in_group;
    i = j;
  }
  const std::int64_t negatives = static_cast<std::int64_t>(labels.size()) - positives;
  if (positives == 0 || negatives == 0) {
    throw Error(errc::one_class_only, "auc needs both classes present");
  }
  double p = static_cast<double>(positives);
  return (rank_sum_pos - p * (p + 1.0) / 2.0) / (p * static_cast<double>(negatives));
}

std::vector<FoldSplit> kfold_split(const LabeledDataset& ds, int k, std::uint64_t seed) {
  if (k < 2) {
    throw std::invalid_argument("k must be at least 2");
  }
  if (ds.size() < static_cast<std::size_t>(k)) {
    throw Error(errc::too_few_samples,
                "need at least " + std::to_string(k) + " samples for " + std::to_string(k) +
                    " folds, got " + std::to_string(ds.size()));
  }

  std::mt19937_64 rng(seed);
  std::vector<std::vector<std::size_t>> test_folds(static_cast<std::size_t>(k));

  // Shuffle within each class, then deal round-robin across folds.
  for (std::size_t cls = 0; cls < ds.label_space.size(); ++cls) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < ds.labels.size(); ++i) {
      if (ds.label_index(ds.labels[i]) == cls) members.push_back(i);
    }
    std::shuffle(members.begin(), members.end(), rng);
    for (std::size_t m = 0; m < members.size(); ++m) {
      test_folds[(m + cls) % static_cast<std::size_t>(k)].push_back(members[m]);
    }
  }

  std::vector<FoldSplit> folds;
  folds.reserve(static_cast<std::size_t>(k));
  for (std::size_t f = 0; f < static_cast<std::size_t>(k); ++f) {
    std::sort(test_folds[f].begin(), test_folds[f].end());
    std::vector<std::size_t> train;
    train.reserve(ds.size() - test_folds[f].size());
    for (std::size_t g = 0; g < static_cast<std::size_t>(k); ++g) {
      if (g == f) continue;
      train.insert(train.end(), test_folds[g].begin(), test_folds[g].end());
    }
    std::sort(train.begin(), train.end());
    folds.emplace_back(std::move(train), test_folds[f]);
  }
  return folds;
}

}  // namespace flowsnap
