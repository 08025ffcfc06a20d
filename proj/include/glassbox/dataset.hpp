#pragma once

#include "glassbox/common.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace glassbox {

enum class FeatureKind { kNumeric, kBinary };

const char* to_string(FeatureKind kind);

/// Known-possible values of a feature: either a closed interval or an
/// explicit list. Values outside it are treated as impossible.
struct FeasibleSet {
  std::optional<std::pair<double, double>> interval;
  std::vector<double> values;  // sorted ascending, used when interval is empty

  static FeasibleSet Interval(double lo, double hi);
  static FeasibleSet Values(std::vector<double> values);

  bool is_interval() const { return interval.has_value(); }
  bool contains(double v) const;
};

struct FeatureMeta {
  std::string name;
  int index = 0;
  FeatureKind kind = FeatureKind::kNumeric;
  double observed_min = 0.0;
  double observed_max = 0.0;
  std::optional<FeasibleSet> feasible;
  int grid_size = 25;

  bool is_binary() const { return kind == FeatureKind::kBinary; }
  /// True when v is inside the observed range and the declared feasible set.
  bool is_feasible(double v) const;
};

/// Per-column declarations read from the schema file.
struct ColumnSchema {
  FeatureKind kind = FeatureKind::kNumeric;
  std::optional<FeasibleSet> feasible;
  std::optional<int> grid_size;
};
using Schema = std::map<std::string, ColumnSchema>;

/// Immutable N x F table with missing-cell flags and binary outcome labels.
class Dataset {
 public:
  using MissingMask = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  /// Validates shapes, binary columns and labels, and derives the observed
  /// ranges of each feature from the non-missing cells.
  Dataset(RowMatrixXd values, MissingMask missing, std::vector<int> labels,
          std::vector<FeatureMeta> features);

  /// Fully observed data; feature metadata is derived from the values.
  static Dataset FromDense(RowMatrixXd values, std::vector<int> labels,
                           std::vector<FeatureKind> kinds = {},
                           std::vector<std::string> names = {});

  Index n_rows() const { return values_.rows(); }
  Index n_features() const { return values_.cols(); }

  const RowMatrixXd& values() const { return values_; }
  const MissingMask& missing() const { return missing_; }
  const std::vector<int>& labels() const { return labels_; }
  const std::vector<FeatureMeta>& features() const { return features_; }
  const FeatureMeta& feature(Index f) const { return features_.at(static_cast<std::size_t>(f)); }
  const std::vector<std::optional<double>>& imputed_values() const { return imputed_; }

  Eigen::Ref<const VectorXd> row(Index i) const;
  bool has_missing() const { return missing_.any(); }

  /// Looks a feature up by name; throws InputError when absent.
  int feature_index(const std::string& name) const;
  std::optional<int> find_feature(const std::string& name) const;

  /// FNV-1a over values, missing flags and labels.
  std::uint64_t checksum() const;

 private:
  friend Dataset impute_missing(const Dataset& d);

  RowMatrixXd values_;
  MissingMask missing_;
  std::vector<int> labels_;
  std::vector<FeatureMeta> features_;
  std::vector<std::optional<double>> imputed_;
};

struct Histogram {
  int feature = 0;
  /// Numeric: counts.size() + 1 ascending edges. Binary: the values {0, 1},
  /// one per count.
  std::vector<double> bin_edges;
  std::vector<std::int64_t> counts;
  bool categorical = false;

  double bin_lo(std::size_t b) const { return bin_edges[b]; }
  double bin_hi(std::size_t b) const { return categorical ? bin_edges[b] : bin_edges[b + 1]; }
};

/// Reads a JSON schema file: {"col": {"kind": "numeric"|"binary",
/// "feasible": [lo, hi] | {"values": [...]}, "grid_size": n}}.
Schema load_schema(const std::filesystem::path& path);
Schema parse_schema(const std::string& json_text);

/// Reads a comma-separated file with a header row. Empty cells and the
/// literal NA are missing. Columns absent from the schema are numeric.
Dataset load_csv(const std::filesystem::path& path, const Schema& schema,
                 const std::string& label_column);
Dataset parse_csv(const std::string& text, const Schema& schema, const std::string& label_column);

/// Mean imputation for numeric columns, mode (tie -> 0) for binary ones.
Dataset impute_missing(const Dataset& d);

/// Evenly spaced sweep values over the observed range, restricted to the
/// feasible set when one is declared.
std::vector<double> feature_grid(const FeatureMeta& meta);

/// feature_grid plus the imputed value of the column, if any, so that sweeps
/// always visit the point where missing rows were placed.
std::vector<double> sweep_grid(const Dataset& d, Index f);

/// Nearest feasible value to v (ties -> smaller). Returns v when feasible.
double snap_to_feasible(const FeatureMeta& meta, double v);

Histogram histogram(const Dataset& d, Index f, int bins);

/// Population standard deviation of a column.
double column_std(const Dataset& d, Index f);

}  // namespace glassbox
