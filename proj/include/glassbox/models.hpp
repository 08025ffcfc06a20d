#pragma once

#include "glassbox/common.hpp"
#include "glassbox/dataset.hpp"

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace glassbox {

/// Opaque scoring function: feature vector -> score in [0, 1].
///
/// Explanation code only ever sees this interface. Implementations override
/// score(); callers go through predict() / predict_batch(), which validate
/// the input and clamp the output. Implementations must be pure and safe to
/// call concurrently.
class Predictor {
 public:
  virtual ~Predictor() = default;

  Index n_features() const { return n_features_; }
  virtual std::string descriptor() const = 0;

  /// Throws InputError on a wrong-length or non-finite input.
  double predict(const Eigen::Ref<const VectorXd>& x) const;

  /// Row-wise predict; may evaluate rows concurrently. Bitwise equal to a
  /// sequential map of predict().
  VectorXd predict_batch(const RowMatrixXd& rows) const;

 protected:
  explicit Predictor(Index n_features) : n_features_(n_features) {}
  virtual double score(const Eigen::Ref<const VectorXd>& x) const = 0;

 private:
  Index n_features_;
};

using PredictorPtr = std::shared_ptr<const Predictor>;

class ConstantModel final : public Predictor {
 public:
  ConstantModel(Index n_features, double value) : Predictor(n_features), value_(value) {}
  double value() const { return value_; }
  std::string descriptor() const override;

 protected:
  double score(const Eigen::Ref<const VectorXd>&) const override { return value_; }

 private:
  double value_;
};

/// Wraps an arbitrary callable; convenient for synthetic scorers.
class FunctionModel final : public Predictor {
 public:
  using Fn = std::function<double(const Eigen::Ref<const VectorXd>&)>;
  FunctionModel(Index n_features, Fn fn, std::string name = "function")
      : Predictor(n_features), fn_(std::move(fn)), name_(std::move(name)) {}
  std::string descriptor() const override { return name_; }

 protected:
  double score(const Eigen::Ref<const VectorXd>& x) const override { return fn_(x); }

 private:
  Fn fn_;
  std::string name_;
};

struct LogisticConfig {
  double learning_rate = 0.1;
  int iterations = 500;
};

/// score(x) = sigmoid(w.x + b)
class LogisticModel final : public Predictor {
 public:
  LogisticModel(VectorXd weights, double bias, LogisticConfig config = {});

  const VectorXd& weights() const { return weights_; }
  double bias() const { return bias_; }
  const LogisticConfig& config() const { return config_; }
  double linear_score(const Eigen::Ref<const VectorXd>& x) const { return weights_.dot(x) + bias_; }
  std::string descriptor() const override;

 protected:
  double score(const Eigen::Ref<const VectorXd>& x) const override;

 private:
  VectorXd weights_;
  double bias_;
  LogisticConfig config_;
};

/// Binary decision tree. Internal nodes send x[feature] < threshold left.
class TreeModel final : public Predictor {
 public:
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;  // positive-label fraction of training rows reaching the node

    bool is_leaf() const { return feature < 0; }
  };

  /// nodes[0] is the root. Validates child links and leaf values.
  TreeModel(Index n_features, std::vector<Node> nodes, int max_depth = 0, int min_leaf = 1);

  const std::vector<Node>& nodes() const { return nodes_; }
  int max_depth() const { return max_depth_; }
  int min_leaf() const { return min_leaf_; }
  int depth() const;
  /// Index of the leaf reached by x.
  int leaf_index(const Eigen::Ref<const VectorXd>& x) const;
  std::string descriptor() const override;

 protected:
  double score(const Eigen::Ref<const VectorXd>& x) const override;

 private:
  std::vector<Node> nodes_;
  int max_depth_;
  int min_leaf_;
};

/// Training failed numerically (e.g. diverging loss).
class TrainingError : public Error {
 public:
  using Error::Error;
};

/// Full-batch gradient descent on mean log-loss from zero weights.
LogisticModel train_logistic(const Dataset& d, double learning_rate, int iterations);

/// Greedy CART on gini impurity with midpoint thresholds. Ties between
/// equally good splits go to the lowest feature, then the lowest threshold.
TreeModel train_tree(const Dataset& d, int max_depth, int min_leaf);

double sigmoid(double z);

}  // namespace glassbox
