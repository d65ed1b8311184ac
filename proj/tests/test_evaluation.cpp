#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>

#include "flowsnap/error.hpp"
#include "flowsnap/evaluation.hpp"

using namespace flowsnap;

TEST_CASE("f1 is one for perfect predictions") {
  std::vector<std::string> actual = {"a", "a", "b", "b", "b"};
  ConfusionMatrix cm = ConfusionMatrix::from(actual, actual, {"a", "b"});
  CHECK(f1_score(cm, 0) == 1.0);
  CHECK(f1_score(cm, 1) == 1.0);
  CHECK(cm.total() == 5);
}

TEST_CASE("f1 on a uniform binary confusion matrix is one half per class") {
  // cm = [[1,1],[1,1]]: precision = recall = 0.5 for each class.
  ConfusionMatrix cm({"a", "b"});
  cm.add("a", "a");
  cm.add("a", "b");
  cm.add("b", "a");
  cm.add("b", "b");
  CHECK(*f1_score(cm, 0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(*f1_score(cm, 1) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("f1 is undefined rather than zero for absent or never-predicted classes") {
  ConfusionMatrix cm({"a", "b", "ghost"});
  cm.add("a", "a");
  cm.add("b", "a");
  // "ghost" never occurs and is never predicted.
  CHECK(!f1_score(cm, 2).has_value());
  // "b" occurs but is never predicted: no precision denominator.
  CHECK(!f1_score(cm, 1).has_value());

  // Diagonal zero with both denominators nonzero: precision = recall = 0.
  ConfusionMatrix swapped({"a", "b"});
  swapped.add("a", "b");
  swapped.add("b", "a");
  CHECK(!f1_score(swapped, 0).has_value());
  CHECK(!f1_score(swapped, 1).has_value());
}

TEST_CASE("f1 is invariant under a consistent relabeling") {
  std::mt19937_64 rng(17);
  std::vector<std::string> space = {"x", "y", "z"};
  std::vector<std::string> actual, predicted;
  for (int i = 0; i < 300; ++i) {
    actual.push_back(space[rng() % 3]);
    predicted.push_back(space[rng() % 3]);
  }
  ConfusionMatrix cm = ConfusionMatrix::from(actual, predicted, space);

  // Apply the permutation x->y->z->x to both sides.
  std::map<std::string, std::string> perm{{"x", "y"}, {"y", "z"}, {"z", "x"}};
  std::vector<std::string> actual2, predicted2;
  for (const auto& s : actual) actual2.push_back(perm[s]);
  for (const auto& s : predicted) predicted2.push_back(perm[s]);
  ConfusionMatrix cm2 = ConfusionMatrix::from(actual2, predicted2, space);

  for (std::size_t c = 0; c < 3; ++c) {
    auto before = f1_score(cm, c);
    auto after = f1_score(cm2, (c + 1) % 3);  // x's scores moved to y, etc.
    CHECK(before.has_value() == after.has_value());
    if (before) CHECK(*before == doctest::Approx(*after).epsilon(1e-15));
  }
}

TEST_CASE("roc of a perfect ranking has auc one") {
  std::vector<double> scores = {0.0, 1.0, 0.0, 1.0, 1.0};
  std::vector<int> labels = {0, 1, 0, 1, 1};
  RocCurve curve = roc_curve(scores, labels);
  CHECK(curve.auc == 1.0);
  CHECK(curve.points.front() == std::pair{0.0, 0.0});
  CHECK(curve.points.back() == std::pair{1.0, 1.0});
  CHECK(auc_rank_statistic(scores, labels) == 1.0);
}

TEST_CASE("all-equal scores give auc one half") {
  std::vector<double> scores(10, 0.5);
  std::vector<int> labels = {1, 0, 1, 0, 1, 0, 1, 0, 1, 0};
  CHECK(roc_curve(scores, labels).auc == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(auc_rank_statistic(scores, labels) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("roc points are monotone from origin to (1,1)") {
  std::mt19937_64 rng(21);
  std::vector<double> scores;
  std::vector<int> labels;
  for (int i = 0; i < 500; ++i) {
    scores.push_back(static_cast<double>(rng() % 100));
    labels.push_back(static_cast<int>(rng() % 2));
  }
  RocCurve curve = roc_curve(scores, labels);
  CHECK(curve.points.front() == std::pair{0.0, 0.0});
  CHECK(curve.points.back() == std::pair{1.0, 1.0});
  for (std::size_t i = 1; i < curve.points.size(); ++i) {
    CHECK(curve.points[i].first >= curve.points[i - 1].first);
    CHECK(curve.points[i].second >= curve.points[i - 1].second);
  }
  CHECK(curve.auc >= 0.0);
  CHECK(curve.auc <= 1.0);
}

TEST_CASE("random scores on balanced labels land near auc one half") {
  std::mt19937_64 rng(1234);
  const int n = 10000;
  std::vector<double> scores;
  std::vector<int> labels;
  for (int i = 0; i < n; ++i) {
    scores.push_back(static_cast<double>(rng()) / 1e19);
    labels.push_back(i % 2);
  }
  double auc = roc_curve(scores, labels).auc;
  CHECK(std::abs(auc - 0.5) < 0.02);
}

TEST_CASE("threshold-sweep auc equals the rank statistic") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 100; ++trial) {
    int n = 2 + static_cast<int>(rng() % 200);
    std::vector<double> scores;
    std::vector<int> labels;
    bool has_pos = false, has_neg = false;
    for (int i = 0; i < n; ++i) {
      // Coarse integer scores so ties actually happen.
      scores.push_back(static_cast<double>(rng() % 20));
      int l = static_cast<int>(rng() % 2);
      labels.push_back(l);
      has_pos |= l == 1;
      has_neg |= l == 0;
    }
    if (!has_pos || !has_neg) continue;
    CHECK(std::abs(roc_curve(scores, labels).auc - auc_rank_statistic(scores, labels)) < 1e-12);
  }
}

TEST_CASE("roc requires both classes") {
  std::vector<double> scores = {1.0, 2.0};
  std::vector<int> one_class = {1, 1};
  try {
    roc_curve(scores, one_class);
    FAIL("expected one_class_only");
  } catch (const Error& e) {
    CHECK(e.code() == errc::one_class_only);
  }
  CHECK_THROWS_AS(auc_rank_statistic(scores, one_class), Error);
}

namespace {

LabeledDataset label_only_dataset(const std::vector<std::string>& labels,
                                  std::vector<std::string> space) {
  LabeledDataset ds;
  ds.label_space = std::move(space);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    ds.vectors.push_back({static_cast<double>(i)});
    ds.labels.push_back(labels[i]);
  }
  return ds;
}

}  // namespace

TEST_CASE("kfold produces disjoint covering stratified folds") {
  std::vector<std::string> labels;
  for (int i = 0; i < 60; ++i) labels.push_back(kNormalLabel);
  for (int i = 0; i < 40; ++i) labels.push_back(kAttackLabel);
  LabeledDataset ds = label_only_dataset(labels, {kNormalLabel, kAttackLabel});

  auto folds = kfold_split(ds, 5, 99);
  REQUIRE(folds.size() == 5);

  std::set<std::size_t> seen;
  for (const auto& [train, test] : folds) {
    CHECK(test.size() == 20);
    CHECK(train.size() == 80);
    for (std::size_t idx : test) {
      CHECK(!seen.count(idx));
      seen.insert(idx);
    }
    // No overlap between train and test.
    std::set<std::size_t> train_set(train.begin(), train.end());
    for (std::size_t idx : test) CHECK(!train_set.count(idx));

    // Stratification: 60/40 split carries into every fold within one sample.
    std::int64_t normal = 0;
    for (std::size_t idx : test) normal += ds.labels[idx] == kNormalLabel;
    CHECK(std::abs(normal - 12) <= 1);
  }
  CHECK(seen.size() == 100);
}

TEST_CASE("kfold is deterministic and sensitive to the seed") {
  std::vector<std::string> labels(50, kNormalLabel);
  LabeledDataset ds = label_only_dataset(labels, {kNormalLabel});
  auto a = kfold_split(ds, 5, 42);
  auto b = kfold_split(ds, 5, 42);
  auto c = kfold_split(ds, 5, 43);
  CHECK(a == b);
  CHECK(a != c);
}

TEST_CASE("kfold rejects undersized datasets") {
  LabeledDataset ds = label_only_dataset({"x", "x", "x"}, {"x"});
  try {
    kfold_split(ds, 5, 1);
    FAIL("expected too_few_samples");
  } catch (const Error& e) {
    CHECK(e.code() == errc::too_few_samples);
  }
  CHECK_THROWS_AS(kfold_split(ds, 1, 1), std::invalid_argument);
}
