#include "glassbox/models.hpp"

#include <gtest/gtest.h>

#include <random>

#include "fixtures.hpp"
#include "glassbox/export.hpp"

namespace glassbox {
namespace {

double mean_log_loss(const Dataset& d, const VectorXd& w, double b) {
  double total = 0;
  for (Index i = 0; i < d.n_rows(); ++i) {
    const double p = 1.0 / (1.0 + std::exp(-(d.values().row(i).dot(w) + b)));
    const int y = d.labels()[static_cast<std::size_t>(i)];
    total += -(y * std::log(p) + (1 - y) * std::log(1 - p));
  }
  return total / static_cast<double>(d.n_rows());
}

Dataset one_d_sign_data() {
  RowMatrixXd x(8, 1);
  x << -4, -3, -2, -1, 1, 2, 3, 4;
  return Dataset::FromDense(x, {0, 0, 0, 0, 1, 1, 1, 1});
}

TEST(Logistic, ZeroIterationsGivesHalfEverywhere) {
  const Dataset d = one_d_sign_data();
  const LogisticModel m = train_logistic(d, 0.1, 0);
  EXPECT_EQ(m.weights(), VectorXd::Zero(1));
  EXPECT_EQ(m.bias(), 0.0);
  for (Index i = 0; i < d.n_rows(); ++i) EXPECT_EQ(m.predict(d.row(i)), 0.5);
}

TEST(Logistic, WeightSignMatchesLossGradient) {
  const Dataset d = one_d_sign_data();
  // Central-difference derivative of the loss at the zero model.
  const double h = 1e-6;
  VectorXd plus(1), minus(1);
  plus << h;
  minus << -h;
  const double slope = (mean_log_loss(d, plus, 0) - mean_log_loss(d, minus, 0)) / (2 * h);
  ASSERT_LT(slope, 0.0);  // descent moves the weight upward

  const LogisticModel m = train_logistic(d, 0.1, 500);
  EXPECT_GT(m.weights()(0), 0.0);
  EXPECT_LT(mean_log_loss(d, m.weights(), m.bias()), mean_log_loss(d, VectorXd::Zero(1), 0));
}

TEST(Logistic, DuplicatedDatasetGivesSameModel) {
  std::mt19937_64 rng(5);
  const Dataset d = testing::random_numeric_dataset(rng, 40, 3);
  RowMatrixXd twice(80, 3);
  std::vector<int> labels;
  for (Index i = 0; i < 40; ++i) {
    twice.row(2 * i) = d.values().row(i);
    twice.row(2 * i + 1) = d.values().row(i);
    labels.push_back(d.labels()[static_cast<std::size_t>(i)]);
    labels.push_back(d.labels()[static_cast<std::size_t>(i)]);
  }
  const LogisticModel a = train_logistic(d, 0.05, 300);
  const LogisticModel b = train_logistic(Dataset::FromDense(twice, labels), 0.05, 300);
  EXPECT_NEAR((a.weights() - b.weights()).cwiseAbs().maxCoeff(), 0.0, 1e-12);
  EXPECT_NEAR(a.bias(), b.bias(), 1e-12);
}

TEST(Logistic, DivergenceIsReportedWithIteration) {
  RowMatrixXd x(2, 1);
  x << -1e200, 1e200;
  const Dataset d = Dataset::FromDense(x, {1, 0});
  try {
    train_logistic(d, 1e200, 10);
    FAIL() << "expected TrainingError";
  } catch (const TrainingError& e) {
    EXPECT_NE(std::string(e.what()).find("iteration"), std::string::npos);
  }
}

TEST(Logistic, RejectsBadConfig) {
  const Dataset d = one_d_sign_data();
  EXPECT_THROW(train_logistic(d, 0.0, 10), InputError);
  EXPECT_THROW(train_logistic(d, 0.1, -1), InputError);
}

TEST(LogisticProperty, MonotoneInPositiveWeightFeatures) {
  std::mt19937_64 rng(9);
  const Dataset d = testing::random_numeric_dataset(rng, 200, 4);
  const LogisticModel m = train_logistic(d, 0.05, 400);
  for (int trial = 0; trial < 500; ++trial) {
    VectorXd x(4);
    for (Index f = 0; f < 4; ++f) x(f) = 6 * uniform01(rng);
    const auto f = static_cast<Index>(rng() % 4);
    VectorXd y = x;
    y(f) += 3 * uniform01(rng);
    if (m.weights()(f) > 0) {
      EXPECT_GE(m.predict(y), m.predict(x));
    } else if (m.weights()(f) < 0) {
      EXPECT_LE(m.predict(y), m.predict(x));
    }
  }
}

TEST(Tree, PureLabelsGiveOneLeaf) {
  RowMatrixXd x(4, 2);
  x << 0, 1, 2, 3, 4, 5, 6, 7;
  const TreeModel t = train_tree(Dataset::FromDense(x, {0, 0, 0, 0}), 3, 1);
  ASSERT_EQ(t.nodes().size(), 1u);
  EXPECT_EQ(t.predict(x.row(2).transpose()), 0.0);
}

// Best accuracy over every tree of depth <= 2 whose splits are axis-aligned
// midpoints of the 4 XOR points.
double best_depth2_xor_accuracy(const RowMatrixXd& x, const std::vector<int>& y) {
  double best = 0;
  for (int root = 0; root < 2; ++root)
    for (int l = 0; l < 2; ++l)
      for (int r = 0; r < 2; ++r)
        for (int leaves = 0; leaves < 16; ++leaves) {
          int correct = 0;
          for (Index i = 0; i < 4; ++i) {
            const bool left = x(i, root) < 0.5;
            const int child_feature = left ? l : r;
            const bool child_left = x(i, child_feature) < 0.5;
            const int leaf = (left ? 0 : 2) + (child_left ? 0 : 1);
            const int predicted = (leaves >> leaf) & 1;
            correct += predicted == y[static_cast<std::size_t>(i)] ? 1 : 0;
          }
          best = std::max(best, correct / 4.0);
        }
  return best;
}

TEST(Tree, LearnsXorAtDepthTwo) {
  RowMatrixXd x(4, 2);
  x << 0, 0, 0, 1, 1, 0, 1, 1;
  const std::vector<int> y = {0, 1, 1, 0};
  ASSERT_EQ(best_depth2_xor_accuracy(x, y), 1.0);

  const TreeModel t = train_tree(Dataset::FromDense(x, y), 2, 1);
  int correct = 0;
  for (Index i = 0; i < 4; ++i) correct += (t.predict(x.row(i).transpose()) >= 0.5 ? 1 : 0) == y[static_cast<std::size_t>(i)];
  EXPECT_EQ(correct, 4);
  EXPECT_LE(t.depth(), 2);
  // Root split ties at zero gain; lowest feature wins.
  EXPECT_EQ(t.nodes()[0].feature, 0);
}

TEST(Tree, StepDataSplitsBetweenTheClasses) {
  RowMatrixXd x(9, 1);
  x << 1, 2, 3, 4, 4.5, 5, 6, 8, 9;
  std::vector<int> y;
  for (Index i = 0; i < 9; ++i) y.push_back(x(i, 0) >= 5 ? 1 : 0);
  const Dataset d = Dataset::FromDense(x, y);

  // Enumerate every midpoint and its impurity decrease.
  auto gini = [](double pos, double n) { return n == 0 ? 0.0 : 2 * (pos / n) * (1 - pos / n); };
  double best_threshold = 0, best_gain = -1;
  for (Index k = 0; k + 1 < 9; ++k) {
    const double t = (x(k, 0) + x(k + 1, 0)) / 2;
    double nl = 0, pl = 0, nr = 0, pr = 0;
    for (Index i = 0; i < 9; ++i) (x(i, 0) < t ? nl : nr) += 1, (x(i, 0) < t ? pl : pr) += y[static_cast<std::size_t>(i)];
    const double gain = gini(4, 9) - nl / 9 * gini(pl, nl) - nr / 9 * gini(pr, nr);
    if (gain > best_gain) best_gain = gain, best_threshold = t;
  }
  const TreeModel t = train_tree(d, 3, 1);
  EXPECT_EQ(t.nodes()[0].feature, 0);
  EXPECT_DOUBLE_EQ(t.nodes()[0].threshold, best_threshold);
  EXPECT_GT(t.nodes()[0].threshold, 4.5);
  EXPECT_LT(t.nodes()[0].threshold, 5.0);
}

TEST(Tree, RespectsDepthAndMinLeaf) {
  std::mt19937_64 rng(21);
  const Dataset d = testing::random_numeric_dataset(rng, 150, 4);
  for (int depth : {1, 2, 4}) {
    const TreeModel t = train_tree(d, depth, 7);
    EXPECT_LE(t.depth(), depth);
    std::vector<int> counts(t.nodes().size(), 0);
    for (Index i = 0; i < d.n_rows(); ++i) ++counts[static_cast<std::size_t>(t.leaf_index(d.row(i)))];
    for (std::size_t n = 0; n < counts.size(); ++n)
      if (t.nodes()[n].is_leaf()) EXPECT_GE(counts[n], 7);
  }
  EXPECT_THROW(train_tree(d, 0, 1), InputError);
  EXPECT_THROW(train_tree(d, 2, 0), InputError);
}

// Leaf regions as boxes [lo, hi) per feature, collected by walking the tree.
struct Box {
  std::vector<double> lo, hi;
  double value;
};

void collect(const TreeModel& t, int node, Box box, std::vector<Box>& out) {
  const auto& n = t.nodes()[static_cast<std::size_t>(node)];
  if (n.is_leaf()) {
    box.value = n.value;
    out.push_back(box);
    return;
  }
  Box left = box, right = box;
  left.hi[static_cast<std::size_t>(n.feature)] = std::min(left.hi[static_cast<std::size_t>(n.feature)], n.threshold);
  right.lo[static_cast<std::size_t>(n.feature)] = std::max(right.lo[static_cast<std::size_t>(n.feature)], n.threshold);
  collect(t, n.left, left, out);
  collect(t, n.right, right, out);
}

TEST(TreeProperty, PredictMatchesLeafPartition) {
  std::mt19937_64 rng(33);
  for (int trial = 0; trial < 20; ++trial) {
    const Dataset d = testing::random_numeric_dataset(rng, 120, 3);
    const TreeModel t = train_tree(d, 4, 2);
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<Box> boxes;
    collect(t, 0, Box{std::vector<double>(3, -inf), std::vector<double>(3, inf), 0}, boxes);
    for (Index i = 0; i < d.n_rows(); ++i) {
      int hits = 0;
      double value = -1;
      for (const auto& b : boxes) {
        bool inside = true;
        for (Index f = 0; f < 3; ++f)
          inside = inside && d.values()(i, f) >= b.lo[static_cast<std::size_t>(f)] && d.values()(i, f) < b.hi[static_cast<std::size_t>(f)];
        if (inside) ++hits, value = b.value;
      }
      ASSERT_EQ(hits, 1);
      EXPECT_EQ(t.predict(d.row(i)), value);
      EXPECT_GE(value, 0.0);
      EXPECT_LE(value, 1.0);
    }
  }
}

TEST(Predict, Examples) {
  VectorXd x(3);
  x << 3, 7, -1;
  EXPECT_EQ(LogisticModel(VectorXd::Zero(3), 0).predict(x), 0.5);
  EXPECT_EQ(TreeModel(3, {TreeModel::Node{.value = 0.25}}).predict(x), 0.25);
  const TreeModel stump(3, {TreeModel::Node{0, 2.0, 1, 2, 0.5}, TreeModel::Node{.value = 0.1},
                            TreeModel::Node{.value = 0.9}});
  EXPECT_EQ(stump.predict(x), 0.9);
  x(0) = 1.5;
  EXPECT_EQ(stump.predict(x), 0.1);
}

TEST(Predict, RejectsWrongLengthAndNonFinite) {
  const ConstantModel m(2, 0.3);
  EXPECT_THROW(m.predict(VectorXd::Zero(3)), InputError);
  VectorXd bad(2);
  bad << 1, std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(m.predict(bad), InputError);
  EXPECT_THROW(m.predict_batch(RowMatrixXd::Zero(2, 3)), InputError);
}

TEST(Predict, ClampsToUnitInterval) {
  const FunctionModel above(1, [](const auto&) { return 3.0; });
  const FunctionModel below(1, [](const auto&) { return -3.0; });
  EXPECT_EQ(above.predict(VectorXd::Zero(1)), 1.0);
  EXPECT_EQ(below.predict(VectorXd::Zero(1)), 0.0);
}

TEST(Tree, RejectsMalformedNodes) {
  EXPECT_THROW(TreeModel(1, {}), InputError);
  EXPECT_THROW(TreeModel(1, {TreeModel::Node{.value = 1.5}}), InputError);
  EXPECT_THROW(TreeModel(1, {TreeModel::Node{0, 1.0, 0, 0, 0.5}}), InputError);
  EXPECT_THROW(TreeModel(1, {TreeModel::Node{3, 1.0, 1, 2, 0.5}, TreeModel::Node{}, TreeModel::Node{}}), InputError);
}

TEST(PredictBatch, EmptyAndSingle) {
  const LogisticModel m(VectorXd::Ones(2), -0.5);
  EXPECT_EQ(m.predict_batch(RowMatrixXd(0, 2)).size(), 0);
  RowMatrixXd one(1, 2);
  one << 0.3, 0.4;
  EXPECT_EQ(m.predict_batch(one)(0), m.predict(one.row(0).transpose()));
}

TEST(PredictBatchProperty, BitwiseEqualToSequentialMap) {
  std::mt19937_64 rng(2);
  const Dataset d = testing::random_numeric_dataset(rng, 3000, 5);
  const LogisticModel lm = train_logistic(d, 0.05, 50);
  const TreeModel tm = train_tree(d, 5, 3);
  for (const Predictor* m : {static_cast<const Predictor*>(&lm), static_cast<const Predictor*>(&tm)}) {
    const VectorXd batch = m->predict_batch(d.values());
    for (Index i = 0; i < d.n_rows(); ++i) ASSERT_EQ(batch(i), m->predict(d.row(i)));
  }
}

TEST(ModelJson, RoundTripPreservesScores) {
  std::mt19937_64 rng(4);
  const Dataset d = testing::random_numeric_dataset(rng, 100, 3);
  const std::vector<std::string> names = {"x0", "x1", "x2"};
  const LogisticModel lm = train_logistic(d, 0.05, 100);
  const TreeModel tm = train_tree(d, 3, 2);
  const ConstantModel cm(3, 0.7);
  for (const Predictor* m : {static_cast<const Predictor*>(&lm), static_cast<const Predictor*>(&tm),
                             static_cast<const Predictor*>(&cm)}) {
    const Json doc = Json::parse(model_to_json(*m, names).dump());
    std::vector<std::string> back_names;
    const PredictorPtr back = model_from_json(doc, &back_names);
    EXPECT_EQ(back_names, names);
    EXPECT_EQ(back->descriptor(), m->descriptor());
    for (Index i = 0; i < d.n_rows(); ++i) ASSERT_EQ(back->predict(d.row(i)), m->predict(d.row(i)));
  }
  EXPECT_THROW(model_from_json(Json::parse(R"({"kind": "forest", "feature_names": []})")), InputError);
  EXPECT_THROW(model_from_json(Json::parse(R"({"kind": "logistic", "feature_names": ["a"], "weights": [1, 2], "bias": 0})")),
               InputError);
}

}  // namespace
}  // namespace glassbox
