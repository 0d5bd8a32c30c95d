#ifndef DNN_DATA_IO_HPP
#define DNN_DATA_IO_HPP

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dnn/errors.hpp"
#include "dnn/matrix.hpp"
#include "dnn/rng.hpp"

namespace dnn {

/// Features plus class labels. Labels are stored as 0-based class ids in
/// [0, num_classes); `class_names[id]` is the original label string. Files and
/// reports use 1-based class numbers.
struct Dataset {
  Matrix<double> features;  // N x F
  std::vector<int> labels;  // N
  int num_classes = 0;
  std::vector<std::string> class_names;
  std::vector<std::string> feature_names;

  std::size_t size() const noexcept { return labels.size(); }
  std::size_t num_features() const noexcept { return features.cols(); }
  std::span<const double> point(std::size_t i) const noexcept { return features.row(i); }
};

/// Symmetric Euclidean distance table with a zero diagonal.
struct DistanceMatrix {
  Matrix<double> d;

  std::size_t size() const noexcept { return d.rows(); }
  double operator()(std::size_t i, std::size_t j) const noexcept { return d(i, j); }
};

struct Split {
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> test_indices;
};

struct LabelSummary {
  std::vector<double> proportions;
};

/// Per-column affine map (x - mean) / sd.
struct FeatureScaling {
  std::vector<double> means;
  std::vector<double> sds;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline std::optional<double> parse_double(std::string_view s) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

inline std::optional<std::size_t> parse_index(std::string_view s) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

}  // namespace detail

/// Checks the Dataset invariants; throws DataError on the first violation.
inline void validate(const Dataset& data) {
  if (data.size() < 2) throw DataError("dataset needs at least 2 rows");
  if (data.num_features() < 1) throw DataError("dataset needs at least 1 feature column");
  if (data.num_classes < 2) throw DataError("dataset needs at least 2 classes");
  if (data.features.rows() != data.size()) throw DataError("feature/label row count mismatch");
  for (int y : data.labels) {
    if (y < 0 || y >= data.num_classes) throw DataError("label out of range");
  }
  for (double v : data.features.values()) {
    if (!std::isfinite(v)) throw DataError("non-finite feature value");
  }
}

/// Parses a CSV stream with one header row. `label_column` is matched against
/// the header first, then tried as a 0-based column index; empty means the
/// last column. Labels are numbered in order of first appearance.
inline Dataset parse_csv(std::istream& in, std::string_view label_column) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty CSV: no header row");
  const auto header = detail::split_fields(line);

  std::optional<std::size_t> label_idx;
  if (label_column.empty()) label_idx = header.size() - 1;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == label_column) {
      label_idx = c;
      break;
    }
  }
  if (!label_idx && !label_column.empty()) label_idx = detail::parse_index(label_column);
  if (!label_idx || *label_idx >= header.size()) {
    throw DataError("label column '" + std::string(label_column) + "' not found");
  }

  Dataset data;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c != *label_idx) data.feature_names.emplace_back(header[c]);
  }
  const std::size_t num_features = header.size() - 1;

  std::vector<double> values;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto fields = detail::split_fields(line);
    if (fields.size() != header.size()) {
      throw DataError("line " + std::to_string(line_no) + ": expected " +
                      std::to_string(header.size()) + " fields, got " +
                      std::to_string(fields.size()));
    }
    for (std::size_t c = 0; c < fields.size(); ++c) {
      if (c == *label_idx) continue;
      const auto v = detail::parse_double(fields[c]);
      if (!v) {
        throw DataError("line " + std::to_string(line_no) + ": non-numeric feature '" +
                        std::string(fields[c]) + "'");
      }
      if (!std::isfinite(*v)) {
        throw DataError("line " + std::to_string(line_no) + ": non-finite feature value");
      }
      values.push_back(*v);
    }
    const std::string label(fields[*label_idx]);
    auto it = std::find(data.class_names.begin(), data.class_names.end(), label);
    if (it == data.class_names.end()) {
      data.class_names.push_back(label);
      it = data.class_names.end() - 1;
    }
    data.labels.push_back(static_cast<int>(it - data.class_names.begin()));
  }

  if (data.labels.empty()) throw DataError("empty dataset: no data rows");
  if (data.class_names.size() < 2) throw DataError("dataset contains a single class");
  if (num_features == 0) throw DataError("no feature columns");

  data.num_classes = static_cast<int>(data.class_names.size());
  data.features = Matrix<double>(data.labels.size(), num_features);
  std::copy(values.begin(), values.end(), data.features.values().begin());
  validate(data);
  return data;
}

inline Dataset load_csv(const std::string& path, std::string_view label_column) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  return parse_csv(in, label_column);
}

/// Rows `indices` of `data`, keeping the class numbering of the parent.
inline Dataset subset(const Dataset& data, std::span<const std::size_t> indices) {
  Dataset out;
  out.num_classes = data.num_classes;
  out.class_names = data.class_names;
  out.feature_names = data.feature_names;
  out.features = Matrix<double>(indices.size(), data.num_features());
  out.labels.reserve(indices.size());
  for (std::size_t r = 0; r < indices.size(); ++r) {
    const auto src = data.point(indices[r]);
    std::copy(src.begin(), src.end(), out.features.row(r).begin());
    out.labels.push_back(data.labels[indices[r]]);
  }
  return out;
}

/// Column means and sample standard deviations (denominator n-1) over `rows`.
/// A column with zero spread, or a single reference row, gets sd 1.
inline FeatureScaling fit_scaling(const Dataset& data, std::span<const std::size_t> rows) {
  const std::size_t f = data.num_features();
  FeatureScaling s{std::vector<double>(f, 0.0), std::vector<double>(f, 1.0)};
  if (rows.empty()) return s;
  const double n = static_cast<double>(rows.size());
  for (std::size_t c = 0; c < f; ++c) {
    double sum = 0.0;
    for (std::size_t r : rows) sum += data.features(r, c);
    const double mean = sum / n;
    double ss = 0.0;
    for (std::size_t r : rows) {
      const double dev = data.features(r, c) - mean;
      ss += dev * dev;
    }
    s.means[c] = mean;
    const double sd = rows.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    s.sds[c] = sd > 0.0 ? sd : 1.0;
  }
  return s;
}

inline Dataset apply_scaling(Dataset data, const FeatureScaling& s) {
  for (std::size_t r = 0; r < data.size(); ++r) {
    auto row = data.features.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) row[c] = (row[c] - s.means[c]) / s.sds[c];
  }
  return data;
}

/// Standardizes every row with statistics from the training rows of `reference`.
inline Dataset standardize(const Dataset& data, const Split& reference) {
  return apply_scaling(data, fit_scaling(data, reference.train_indices));
}

inline double euclidean(std::span<const double> a, std::span<const double> b) noexcept {
  double ss = 0.0;
  for (std::size_t c = 0; c < a.size(); ++c) {
    const double diff = a[c] - b[c];
    ss += diff * diff;
  }
  return std::sqrt(ss);
}

inline DistanceMatrix pairwise_distances(const Dataset& data) {
  const std::size_t n = data.size();
  DistanceMatrix out{Matrix<double>(n, n, 0.0)};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = euclidean(data.point(i), data.point(j));
      out.d(i, j) = d;
      out.d(j, i) = d;
    }
  }
  return out;
}

/// Distances from each row of `queries` (m x F) to each row of `reference`: m x n.
inline Matrix<double> cross_distances(const Matrix<double>& queries, const Dataset& reference) {
  Matrix<double> out(queries.rows(), reference.size());
  for (std::size_t q = 0; q < queries.rows(); ++q) {
    for (std::size_t j = 0; j < reference.size(); ++j) {
      out(q, j) = euclidean(queries.row(q), reference.point(j));
    }
  }
  return out;
}

inline double median_off_diagonal(const DistanceMatrix& dist) {
  std::vector<double> v;
  const std::size_t n = dist.size();
  v.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) v.push_back(dist(i, j));
  }
  if (v.empty()) return 0.0;
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  if (v.size() % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(v.begin(), mid);
  return 0.5 * (lower + upper);
}

inline bool covers_all_classes(const Dataset& data, std::span<const std::size_t> rows) {
  std::vector<bool> seen(static_cast<std::size_t>(data.num_classes), false);
  for (std::size_t r : rows) seen[static_cast<std::size_t>(data.labels[r])] = true;
  return std::all_of(seen.begin(), seen.end(), [](bool b) { return b; });
}

inline constexpr int kSplitRetryLimit = 1000;

/// Random train/test split with round(train_fraction * N) training rows.
/// Resamples until the training rows cover every class.
inline Split split_dataset(const Dataset& data, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw std::invalid_argument("train_fraction must lie in (0, 1)");
  }
  const std::size_t n = data.size();
  const auto wanted = static_cast<std::size_t>(std::lround(train_fraction * static_cast<double>(n)));
  const std::size_t n_train = std::clamp<std::size_t>(wanted, 1, n - 1);

  Rng rng = Rng::stream(seed, "split");
  std::vector<std::size_t> order(n);
  for (int attempt = 0; attempt < kSplitRetryLimit; ++attempt) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng.engine());
    std::span<const std::size_t> train(order.data(), n_train);
    if (!covers_all_classes(data, train)) continue;
    Split s;
    s.train_indices.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
    s.test_indices.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
    std::sort(s.train_indices.begin(), s.train_indices.end());
    std::sort(s.test_indices.begin(), s.test_indices.end());
    return s;
  }
  throw DataError("could not draw a training split covering all classes after " +
                  std::to_string(kSplitRetryLimit) + " attempts");
}

/// Stratified split: `train_counts[g]` random rows of class g go to training.
inline Split split_by_class_counts(const Dataset& data, std::span<const std::size_t> train_counts,
                                   std::uint64_t seed) {
  if (train_counts.size() != static_cast<std::size_t>(data.num_classes)) {
    throw std::invalid_argument("need one training count per class");
  }
  Rng rng = Rng::stream(seed, "split");
  Split s;
  for (int g = 0; g < data.num_classes; ++g) {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (data.labels[i] == g) rows.push_back(i);
    }
    const std::size_t k = train_counts[static_cast<std::size_t>(g)];
    if (k == 0 || k > rows.size()) {
      throw DataError("class " + std::to_string(g + 1) + ": cannot take " + std::to_string(k) +
                      " training rows from " + std::to_string(rows.size()));
    }
    std::shuffle(rows.begin(), rows.end(), rng.engine());
    s.train_indices.insert(s.train_indices.end(), rows.begin(),
                           rows.begin() + static_cast<std::ptrdiff_t>(k));
    s.test_indices.insert(s.test_indices.end(), rows.begin() + static_cast<std::ptrdiff_t>(k),
                          rows.end());
  }
  std::sort(s.train_indices.begin(), s.train_indices.end());
  std::sort(s.test_indices.begin(), s.test_indices.end());
  return s;
}

/// Class frequencies in `labels`, optionally leaving out position `exclude`.
inline LabelSummary class_proportions(std::span<const int> labels, int num_classes,
                                      std::optional<std::size_t> exclude = std::nullopt) {
  std::vector<double> counts(static_cast<std::size_t>(num_classes), 0.0);
  std::size_t total = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (exclude && *exclude == i) continue;
    counts[static_cast<std::size_t>(labels[i])] += 1.0;
    ++total;
  }
  if (total == 0) throw std::invalid_argument("no labels left after exclusion");
  for (double& c : counts) c /= static_cast<double>(total);
  return {std::move(counts)};
}

}  // namespace dnn

#endif  // DNN_DATA_IO_HPP
