#include "glassbox/dataset.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"

namespace glassbox {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      cells.push_back(trim(line.substr(start)));
      break;
    }
    cells.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return cells;
}

bool is_missing_marker(std::string_view cell) { return cell.empty() || cell == "NA"; }

std::optional<double> parse_number(std::string_view cell) {
  double v = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  if (!cell.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Feasible candidate values for a binary feature, in ascending order.
std::vector<double> binary_candidates(const FeatureMeta& meta) {
  std::vector<double> out;
  for (double v : {0.0, 1.0})
    if (!meta.feasible || meta.feasible->contains(v)) out.push_back(v);
  if (out.empty()) out = {0.0, 1.0};
  return out;
}

double nearest_of(const std::vector<double>& sorted, double v) {
  double best = sorted.front();
  for (double c : sorted)
    if (std::abs(c - v) < std::abs(best - v)) best = c;  // strict: ties keep the smaller
  return best;
}

}  // namespace

const char* to_string(FeatureKind kind) {
  return kind == FeatureKind::kBinary ? "binary" : "numeric";
}

FeasibleSet FeasibleSet::Interval(double lo, double hi) {
  if (!(lo <= hi)) throw InputError("feasible interval must satisfy lo <= hi");
  FeasibleSet s;
  s.interval = std::make_pair(lo, hi);
  return s;
}

FeasibleSet FeasibleSet::Values(std::vector<double> values) {
  if (values.empty()) throw InputError("feasible value list must be non-empty");
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  FeasibleSet s;
  s.values = std::move(values);
  return s;
}

bool FeasibleSet::contains(double v) const {
  if (interval) return interval->first <= v && v <= interval->second;
  return std::binary_search(values.begin(), values.end(), v);
}

bool FeatureMeta::is_feasible(double v) const {
  if (!std::isfinite(v)) return false;
  if (is_binary()) {
    if (v != 0.0 && v != 1.0) return false;
  } else if (v < observed_min || v > observed_max) {
    return false;
  }
  return !feasible || feasible->contains(v);
}

Dataset::Dataset(RowMatrixXd values, MissingMask missing, std::vector<int> labels,
                 std::vector<FeatureMeta> features)
    : values_(std::move(values)),
      missing_(std::move(missing)),
      labels_(std::move(labels)),
      features_(std::move(features)) {
  const Index n = values_.rows();
  const Index nf = values_.cols();
  if (n < 1) throw InputError("dataset needs at least one row");
  if (nf < 1) throw InputError("dataset needs at least one feature");
  if (missing_.rows() != n || missing_.cols() != nf)
    throw InputError("missing mask shape does not match the value matrix");
  if (static_cast<Index>(labels_.size()) != n) throw InputError("one label per row is required");
  if (static_cast<Index>(features_.size()) != nf)
    throw InputError("one feature descriptor per column is required");
  for (Index i = 0; i < n; ++i)
    if (labels_[static_cast<std::size_t>(i)] != 0 && labels_[static_cast<std::size_t>(i)] != 1)
      throw InputError("label of row " + std::to_string(i) + " is not in {0,1}");

  imputed_.assign(static_cast<std::size_t>(nf), std::nullopt);
  for (Index f = 0; f < nf; ++f) {
    FeatureMeta& meta = features_[static_cast<std::size_t>(f)];
    meta.index = static_cast<int>(f);
    if (meta.grid_size < 1) throw InputError("grid_size of '" + meta.name + "' must be positive");
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (Index i = 0; i < n; ++i) {
      if (missing_(i, f)) continue;
      const double v = values_(i, f);
      if (!std::isfinite(v))
        throw InputError("non-finite value in column '" + meta.name + "', row " + std::to_string(i));
      if (meta.is_binary() && v != 0.0 && v != 1.0)
        throw InputError("binary column '" + meta.name + "' has value " + std::to_string(v) +
                         " in row " + std::to_string(i));
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (lo > hi) {
      lo = hi = 0.0;  // all missing; impute_missing will reject it
    } else if (meta.feasible && !meta.is_binary()) {
      const auto& fs = *meta.feasible;
      const bool overlaps =
          fs.is_interval()
              ? fs.interval->first <= hi && fs.interval->second >= lo
              : std::any_of(fs.values.begin(), fs.values.end(), [&](double v) { return lo <= v && v <= hi; });
      if (!overlaps)
        throw InputError("feasible set of '" + meta.name + "' does not intersect its observed range");
    }
    meta.observed_min = lo;
    meta.observed_max = hi;
  }
}

Dataset Dataset::FromDense(RowMatrixXd values, std::vector<int> labels,
                           std::vector<FeatureKind> kinds, std::vector<std::string> names) {
  const auto nf = static_cast<std::size_t>(values.cols());
  std::vector<FeatureMeta> features(nf);
  for (std::size_t f = 0; f < nf; ++f) {
    features[f].name = f < names.size() ? names[f] : "x" + std::to_string(f);
    features[f].kind = f < kinds.size() ? kinds[f] : FeatureKind::kNumeric;
  }
  MissingMask missing = MissingMask::Constant(values.rows(), values.cols(), false);
  return Dataset(std::move(values), std::move(missing), std::move(labels), std::move(features));
}

Eigen::Ref<const VectorXd> Dataset::row(Index i) const { return values_.row(i).transpose(); }

std::optional<int> Dataset::find_feature(const std::string& name) const {
  for (const auto& meta : features_)
    if (meta.name == name) return meta.index;
  return std::nullopt;
}

int Dataset::feature_index(const std::string& name) const {
  if (auto idx = find_feature(name)) return *idx;
  throw InputError("unknown feature: " + name);
}

std::uint64_t Dataset::checksum() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](const void* p, std::size_t len) {
    const auto* bytes = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < len; ++i) {
      h ^= bytes[i];
      h *= 0x100000001b3ULL;
    }
  };
  mix(values_.data(), static_cast<std::size_t>(values_.size()) * sizeof(double));
  for (Index i = 0; i < missing_.size(); ++i) {
    const unsigned char b = missing_.data()[i] ? 1 : 0;
    mix(&b, 1);
  }
  mix(labels_.data(), labels_.size() * sizeof(int));
  return h;
}

Schema parse_schema(const std::string& json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("schema is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw InputError("schema must be a JSON object");
  Schema schema;
  for (const auto& [name, entry] : doc.items()) {
    if (!entry.is_object()) throw InputError("schema entry '" + name + "' must be an object");
    ColumnSchema col;
    const std::string kind = entry.value("kind", std::string("numeric"));
    if (kind == "numeric") {
      col.kind = FeatureKind::kNumeric;
    } else if (kind == "binary") {
      col.kind = FeatureKind::kBinary;
    } else {
      throw InputError("schema entry '" + name + "' has unknown kind '" + kind + "'");
    }
    if (entry.contains("feasible")) {
      const auto& fz = entry["feasible"];
      try {
        if (fz.is_array() && fz.size() == 2 && col.kind == FeatureKind::kNumeric) {
          col.feasible = FeasibleSet::Interval(fz[0].get<double>(), fz[1].get<double>());
        } else if (fz.is_array()) {
          col.feasible = FeasibleSet::Values(fz.get<std::vector<double>>());
        } else if (fz.is_object() && fz.contains("values")) {
          col.feasible = FeasibleSet::Values(fz["values"].get<std::vector<double>>());
        } else {
          throw InputError("schema entry '" + name + "' has malformed 'feasible'");
        }
      } catch (const nlohmann::json::exception&) {
        throw InputError("schema entry '" + name + "' has non-numeric 'feasible' values");
      }
    }
    if (entry.contains("grid_size")) {
      if (!entry["grid_size"].is_number_integer() || entry["grid_size"].get<int>() < 1)
        throw InputError("schema entry '" + name + "' grid_size must be a positive integer");
      col.grid_size = entry["grid_size"].get<int>();
    }
    schema.emplace(name, std::move(col));
  }
  return schema;
}

Schema load_schema(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw InputError("schema file not found: " + path.string());
  return parse_schema(read_file(path));
}

Dataset parse_csv(const std::string& text, const Schema& schema, const std::string& label_column) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw InputError("CSV is empty: header row missing");
  const auto header_views = split_commas(line);
  std::vector<std::string> header(header_views.begin(), header_views.end());
  if (!header.empty() && header[0].rfind("\xEF\xBB\xBF", 0) == 0) header[0].erase(0, 3);

  int label_col = -1;
  std::vector<FeatureMeta> features;
  std::vector<int> feature_cols;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == label_column) {
      label_col = static_cast<int>(c);
      continue;
    }
    FeatureMeta meta;
    meta.name = header[c];
    if (auto it = schema.find(meta.name); it != schema.end()) {
      meta.kind = it->second.kind;
      meta.feasible = it->second.feasible;
      if (it->second.grid_size) meta.grid_size = *it->second.grid_size;
    }
    if (meta.is_binary() && meta.feasible && meta.feasible->is_interval()) {
      const auto [lo, hi] = *meta.feasible->interval;
      std::vector<double> vals;
      for (double v : {0.0, 1.0})
        if (lo <= v && v <= hi) vals.push_back(v);
      meta.feasible = FeasibleSet::Values(vals);
    }
    features.push_back(std::move(meta));
    feature_cols.push_back(static_cast<int>(c));
  }
  if (label_col < 0) throw InputError("label column '" + label_column + "' not in CSV header");
  for (const auto& [name, _] : schema)
    if (name != label_column &&
        std::find(header.begin(), header.end(), name) == header.end())
      throw InputError("schema column '" + name + "' not in CSV header");

  std::vector<std::vector<double>> rows;
  std::vector<std::vector<bool>> missing_rows;
  std::vector<int> labels;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::size_t row_idx = rows.size();
    const auto cells = split_commas(line);
    if (cells.size() != header.size())
      throw InputError("ragged row " + std::to_string(row_idx) + " (line " + std::to_string(line_no) +
                       "): expected " + std::to_string(header.size()) + " cells, got " +
                       std::to_string(cells.size()));
    const auto label = parse_number(cells[static_cast<std::size_t>(label_col)]);
    if (!label || (*label != 0.0 && *label != 1.0))
      throw InputError("label in row " + std::to_string(row_idx) + " (line " + std::to_string(line_no) +
                       ") is not 0 or 1");
    labels.push_back(static_cast<int>(*label));

    std::vector<double> vals(features.size(), 0.0);
    std::vector<bool> miss(features.size(), false);
    for (std::size_t f = 0; f < features.size(); ++f) {
      const std::string_view cell = cells[static_cast<std::size_t>(feature_cols[f])];
      if (is_missing_marker(cell)) {
        miss[f] = true;
        continue;
      }
      const auto v = parse_number(cell);
      if (!v)
        throw InputError("non-numeric cell '" + std::string(cell) + "' in column '" + features[f].name +
                         "', row " + std::to_string(row_idx) + " (line " + std::to_string(line_no) + ")");
      if (features[f].is_binary() && *v != 0.0 && *v != 1.0)
        throw InputError("binary column '" + features[f].name + "' has value " + std::string(cell) +
                         " in row " + std::to_string(row_idx) + " (line " + std::to_string(line_no) + ")");
      vals[f] = *v;
    }
    rows.push_back(std::move(vals));
    missing_rows.push_back(std::move(miss));
  }
  if (rows.empty()) throw InputError("CSV has no data rows");
  if (features.empty()) throw InputError("CSV has no feature columns");

  const auto n = static_cast<Index>(rows.size());
  const auto nf = static_cast<Index>(features.size());
  RowMatrixXd values(n, nf);
  Dataset::MissingMask missing(n, nf);
  for (Index i = 0; i < n; ++i)
    for (Index f = 0; f < nf; ++f) {
      values(i, f) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(f)];
      missing(i, f) = missing_rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(f)];
    }
  return Dataset(std::move(values), std::move(missing), std::move(labels), std::move(features));
}

Dataset load_csv(const std::filesystem::path& path, const Schema& schema,
                 const std::string& label_column) {
  if (!std::filesystem::exists(path)) throw InputError("data file not found: " + path.string());
  return parse_csv(read_file(path), schema, label_column);
}

Dataset impute_missing(const Dataset& d) {
  Dataset out = d;
  for (Index f = 0; f < d.n_features(); ++f) {
    const auto col_missing = d.missing_.col(f);
    if (!col_missing.any()) continue;
    const FeatureMeta& meta = d.feature(f);
    std::vector<double> observed;
    for (Index i = 0; i < d.n_rows(); ++i)
      if (!col_missing(i)) observed.push_back(d.values_(i, f));
    if (observed.empty()) throw InputError("feature '" + meta.name + "' has no observed values");

    double fill = 0.0;
    if (meta.is_binary()) {
      const auto ones = std::count(observed.begin(), observed.end(), 1.0);
      const auto zeros = static_cast<std::ptrdiff_t>(observed.size()) - ones;
      fill = ones > zeros ? 1.0 : 0.0;
    } else {
      fill = pairwise_sum(observed.data(), observed.size()) / static_cast<double>(observed.size());
    }
    for (Index i = 0; i < d.n_rows(); ++i)
      if (col_missing(i)) {
        out.values_(i, f) = fill;
        out.missing_(i, f) = false;
      }
    out.imputed_[static_cast<std::size_t>(f)] = fill;
  }
  return out;
}

double snap_to_feasible(const FeatureMeta& meta, double v) {
  if (meta.is_feasible(v)) return v;
  if (meta.is_binary()) return nearest_of(binary_candidates(meta), v);

  const double lo = meta.observed_min;
  const double hi = meta.observed_max;
  if (!meta.feasible) return std::clamp(v, lo, hi);
  if (meta.feasible->is_interval()) {
    // Ingestion guarantees the interval overlaps the observed range.
    const double flo = std::max(lo, meta.feasible->interval->first);
    const double fhi = std::min(hi, meta.feasible->interval->second);
    return flo <= fhi ? std::clamp(v, flo, fhi) : std::clamp(v, lo, hi);
  }
  std::vector<double> in_range;
  for (double c : meta.feasible->values)
    if (lo <= c && c <= hi) in_range.push_back(c);
  return nearest_of(in_range.empty() ? meta.feasible->values : in_range, v);
}

std::vector<double> feature_grid(const FeatureMeta& meta) {
  std::vector<double> grid;
  if (meta.is_binary()) {
    for (double v : {0.0, 1.0})
      if (meta.is_feasible(v)) grid.push_back(v);
  } else if (meta.feasible && !meta.feasible->is_interval()) {
    for (double v : meta.feasible->values)
      if (meta.is_feasible(v)) grid.push_back(v);
  } else {
    const double lo = meta.observed_min;
    const double hi = meta.observed_max;
    const int n = lo == hi ? 1 : meta.grid_size;
    for (int j = 0; j < n; ++j) {
      const double v = j == n - 1 && n > 1 ? hi : lo + (hi - lo) * static_cast<double>(j) / (n - 1);
      if (meta.is_feasible(v)) grid.push_back(v);
    }
  }
  if (grid.empty()) grid.push_back(snap_to_feasible(meta, meta.observed_min));
  return grid;
}

std::vector<double> sweep_grid(const Dataset& d, Index f) {
  const FeatureMeta& meta = d.feature(f);
  std::vector<double> grid = feature_grid(meta);
  if (const auto& imputed = d.imputed_values()[static_cast<std::size_t>(f)];
      imputed && meta.is_feasible(*imputed) &&
      std::find(grid.begin(), grid.end(), *imputed) == grid.end()) {
    grid.insert(std::upper_bound(grid.begin(), grid.end(), *imputed), *imputed);
  }
  return grid;
}

Histogram histogram(const Dataset& d, Index f, int bins) {
  if (bins <= 0) throw InputError("histogram needs at least one bin");
  if (d.missing().col(f).any())
    throw InputError("histogram requires an imputed dataset (column '" + d.feature(f).name + "')");
  const FeatureMeta& meta = d.feature(f);
  Histogram h;
  h.feature = static_cast<int>(f);
  const auto col = d.values().col(f);
  if (meta.is_binary()) {
    h.categorical = true;
    h.bin_edges = {0.0, 1.0};
    const auto ones = static_cast<std::int64_t>((col.array() == 1.0).count());
    h.counts = {static_cast<std::int64_t>(d.n_rows()) - ones, ones};
    return h;
  }
  double lo = meta.observed_min;
  double hi = meta.observed_max;
  if (lo == hi) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double width = (hi - lo) / bins;
  h.bin_edges.resize(static_cast<std::size_t>(bins) + 1);
  for (int b = 0; b <= bins; ++b) h.bin_edges[static_cast<std::size_t>(b)] = lo + width * b;
  h.bin_edges.back() = hi;
  h.counts.assign(static_cast<std::size_t>(bins), 0);
  for (Index i = 0; i < col.size(); ++i) {
    auto b = static_cast<long>(std::floor((col(i) - lo) / width));
    b = std::clamp<long>(b, 0, bins - 1);
    ++h.counts[static_cast<std::size_t>(b)];
  }
  return h;
}

double column_std(const Dataset& d, Index f) {
  const VectorXd col = d.values().col(f);
  const double mean = pairwise_mean(col);
  const VectorXd sq = (col.array() - mean).square();
  return std::sqrt(pairwise_mean(sq));
}

}  // namespace glassbox
