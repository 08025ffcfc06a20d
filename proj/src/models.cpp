#include "glassbox/models.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

namespace glassbox {
namespace {

double gini(double positives, double n) {
  if (n <= 0) return 0.0;
  const double p = positives / n;
  return 2.0 * p * (1.0 - p);
}

class TreeBuilder {
 public:
  TreeBuilder(const Dataset& d, int max_depth, int min_leaf)
      : d_(d), max_depth_(max_depth), min_leaf_(min_leaf) {}

  std::vector<TreeModel::Node> build() {
    std::vector<Index> all(static_cast<std::size_t>(d_.n_rows()));
    std::iota(all.begin(), all.end(), Index{0});
    grow(all, 0);
    return std::move(nodes_);
  }

 private:
  struct Split {
    int feature = -1;
    double threshold = 0.0;
    double decrease = -1.0;
  };

  int grow(const std::vector<Index>& rows, int depth) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    double pos = 0;
    for (Index i : rows) pos += d_.labels()[static_cast<std::size_t>(i)];
    const auto n = static_cast<double>(rows.size());
    nodes_[static_cast<std::size_t>(id)].value = pos / n;

    const bool pure = pos == 0 || pos == n;
    if (pure || depth >= max_depth_ || rows.size() < 2 * static_cast<std::size_t>(min_leaf_)) return id;

    const Split best = best_split(rows, pos);
    if (best.feature < 0) return id;

    std::vector<Index> left, right;
    for (Index i : rows) (d_.values()(i, best.feature) < best.threshold ? left : right).push_back(i);
    const int l = grow(left, depth + 1);
    const int r = grow(right, depth + 1);
    auto& node = nodes_[static_cast<std::size_t>(id)];
    node.feature = best.feature;
    node.threshold = best.threshold;
    node.left = l;
    node.right = r;
    return id;
  }

  Split best_split(const std::vector<Index>& rows, double pos_total) const {
    const auto n = static_cast<double>(rows.size());
    const double parent = gini(pos_total, n);
    Split best;
    std::vector<std::pair<double, int>> column(rows.size());
    for (Index f = 0; f < d_.n_features(); ++f) {
      for (std::size_t k = 0; k < rows.size(); ++k)
        column[k] = {d_.values()(rows[k], f), d_.labels()[static_cast<std::size_t>(rows[k])]};
      std::sort(column.begin(), column.end());
      double left_pos = 0;
      for (std::size_t k = 0; k + 1 < column.size(); ++k) {
        left_pos += column[k].second;
        const double a = column[k].first;
        const double b = column[k + 1].first;
        if (a == b) continue;
        const auto nl = static_cast<double>(k + 1);
        const double nr = n - nl;
        if (nl < min_leaf_ || nr < min_leaf_) continue;
        const double decrease =
            parent - (nl / n) * gini(left_pos, nl) - (nr / n) * gini(pos_total - left_pos, nr);
        if (decrease > best.decrease + 1e-12) {
          double mid = a + (b - a) / 2.0;
          if (!(a < mid)) mid = b;
          best = {static_cast<int>(f), mid, decrease};
        }
      }
    }
    return best;
  }

  const Dataset& d_;
  int max_depth_;
  int min_leaf_;
  std::vector<TreeModel::Node> nodes_;
};

}  // namespace

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double Predictor::predict(const Eigen::Ref<const VectorXd>& x) const {
  if (x.size() != n_features_)
    throw InputError("feature vector has length " + std::to_string(x.size()) + ", model expects " +
                     std::to_string(n_features_));
  if (!x.allFinite()) throw InputError("feature vector contains non-finite values");
  const double s = score(x);
  if (std::isnan(s)) throw Error("model '" + descriptor() + "' produced NaN");
  return std::clamp(s, 0.0, 1.0);
}

VectorXd Predictor::predict_batch(const RowMatrixXd& rows) const {
  if (rows.rows() > 0 && rows.cols() != n_features_)
    throw InputError("batch has " + std::to_string(rows.cols()) + " columns, model expects " +
                     std::to_string(n_features_));
  VectorXd out(rows.rows());
  parallel_for(static_cast<std::size_t>(rows.rows()), [&](std::size_t i) {
    const auto r = static_cast<Index>(i);
    out(r) = predict(rows.row(r).transpose());
  });
  return out;
}

std::string ConstantModel::descriptor() const {
  std::ostringstream ss;
  ss << "constant(value=" << value_ << ")";
  return ss.str();
}

LogisticModel::LogisticModel(VectorXd weights, double bias, LogisticConfig config)
    : Predictor(weights.size()), weights_(std::move(weights)), bias_(bias), config_(config) {
  if (!weights_.allFinite() || !std::isfinite(bias_))
    throw InputError("logistic model parameters must be finite");
}

double LogisticModel::score(const Eigen::Ref<const VectorXd>& x) const {
  return sigmoid(linear_score(x));
}

std::string LogisticModel::descriptor() const {
  std::ostringstream ss;
  ss << "logistic(lr=" << config_.learning_rate << ", iters=" << config_.iterations << ")";
  return ss.str();
}

TreeModel::TreeModel(Index n_features, std::vector<Node> nodes, int max_depth, int min_leaf)
    : Predictor(n_features), nodes_(std::move(nodes)), max_depth_(max_depth), min_leaf_(min_leaf) {
  if (nodes_.empty()) throw InputError("tree needs at least one node");
  const auto count = static_cast<int>(nodes_.size());
  for (int i = 0; i < count; ++i) {
    const Node& node = nodes_[static_cast<std::size_t>(i)];
    if (node.is_leaf()) {
      if (!(node.value >= 0.0 && node.value <= 1.0)) throw InputError("tree leaf value outside [0,1]");
      continue;
    }
    if (node.feature >= n_features) throw InputError("tree node tests an unknown feature");
    // Children come after their parent, which also rules out cycles.
    if (node.left <= i || node.right <= i || node.left >= count || node.right >= count)
      throw InputError("tree node " + std::to_string(i) + " has invalid children");
    if (!std::isfinite(node.threshold)) throw InputError("tree threshold must be finite");
  }
  if (max_depth_ == 0) max_depth_ = depth();
}

int TreeModel::depth() const {
  std::function<int(int)> walk = [&](int i) -> int {
    const Node& node = nodes_[static_cast<std::size_t>(i)];
    return node.is_leaf() ? 0 : 1 + std::max(walk(node.left), walk(node.right));
  };
  return walk(0);
}

int TreeModel::leaf_index(const Eigen::Ref<const VectorXd>& x) const {
  int i = 0;
  while (!nodes_[static_cast<std::size_t>(i)].is_leaf()) {
    const Node& node = nodes_[static_cast<std::size_t>(i)];
    i = x(node.feature) < node.threshold ? node.left : node.right;
  }
  return i;
}

double TreeModel::score(const Eigen::Ref<const VectorXd>& x) const {
  return nodes_[static_cast<std::size_t>(leaf_index(x))].value;
}

std::string TreeModel::descriptor() const {
  std::ostringstream ss;
  ss << "tree(max_depth=" << max_depth_ << ", min_leaf=" << min_leaf_ << ", nodes=" << nodes_.size() << ")";
  return ss.str();
}

LogisticModel train_logistic(const Dataset& d, double learning_rate, int iterations) {
  if (!(learning_rate > 0)) throw InputError("learning rate must be positive");
  if (iterations < 0) throw InputError("iteration count must be non-negative");
  if (d.has_missing()) throw InputError("train_logistic requires an imputed dataset");

  const RowMatrixXd& x = d.values();
  VectorXd y(d.n_rows());
  for (Index i = 0; i < d.n_rows(); ++i) y(i) = d.labels()[static_cast<std::size_t>(i)];
  const auto n = static_cast<double>(d.n_rows());

  VectorXd w = VectorXd::Zero(d.n_features());
  double b = 0.0;
  for (int it = 0; it < iterations; ++it) {
    const VectorXd z = (x * w).array() + b;
    const VectorXd loss_terms =
        z.unaryExpr([](double v) { return std::max(v, 0.0) + std::log1p(std::exp(-std::abs(v))); }) -
        y.cwiseProduct(z);
    if (!std::isfinite(loss_terms.sum()))
      throw TrainingError("non-finite loss at iteration " + std::to_string(it));
    const VectorXd residual = z.unaryExpr(&sigmoid) - y;
    w -= learning_rate * (x.transpose() * residual) / n;
    b -= learning_rate * residual.sum() / n;
  }
  if (!w.allFinite() || !std::isfinite(b))
    throw TrainingError("non-finite parameters after iteration " + std::to_string(iterations));
  return LogisticModel(std::move(w), b, {learning_rate, iterations});
}

TreeModel train_tree(const Dataset& d, int max_depth, int min_leaf) {
  if (max_depth < 1) throw InputError("max_depth must be at least 1");
  if (min_leaf < 1) throw InputError("min_leaf must be at least 1");
  if (d.has_missing()) throw InputError("train_tree requires an imputed dataset");
  return TreeModel(d.n_features(), TreeBuilder(d, max_depth, min_leaf).build(), max_depth, min_leaf);
}

}  // namespace glassbox
