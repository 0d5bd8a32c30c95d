#ifndef DNN_WEIGHTS_HPP
#define DNN_WEIGHTS_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dnn/data_io.hpp"
#include "dnn/matrix.hpp"

namespace dnn {

enum class WeightKind {
  dnn1,  // Gaussian: exp(-d^2 / (2 sigma^2))
  dnn2,  // ball indicator: eps + (1 - eps) * [d < sigma]
  dnn3,  // exponential: exp(-d * sigma)
};

struct WeightModel {
  WeightKind kind = WeightKind::dnn1;
  double epsilon = 1e-10;  // dnn2 only
};

inline std::string_view to_string(WeightKind k) {
  switch (k) {
    case WeightKind::dnn1: return "dnn1";
    case WeightKind::dnn2: return "dnn2";
    case WeightKind::dnn3: return "dnn3";
  }
  return "?";
}

inline std::optional<WeightKind> parse_weight_kind(std::string_view s) {
  if (s == "dnn1") return WeightKind::dnn1;
  if (s == "dnn2") return WeightKind::dnn2;
  if (s == "dnn3") return WeightKind::dnn3;
  return std::nullopt;
}

/// True when `sigma` is in the bandwidth domain of the model: sigma > 0 for
/// dnn1/dnn2, sigma >= 0 for dnn3.
inline bool sigma_in_domain(const WeightModel& model, double sigma) noexcept {
  if (!std::isfinite(sigma)) return false;
  return model.kind == WeightKind::dnn3 ? sigma >= 0.0 : sigma > 0.0;
}

inline void check_model(const WeightModel& model, double sigma) {
  if (model.kind == WeightKind::dnn2 && !(model.epsilon > 0.0 && model.epsilon < 1.0)) {
    throw std::invalid_argument("dnn2 epsilon must lie in (0, 1)");
  }
  if (!sigma_in_domain(model, sigma)) {
    throw std::invalid_argument("sigma " + std::to_string(sigma) + " outside the domain of " +
                                std::string(to_string(model.kind)));
  }
}

/// Log of the unnormalized interaction kernel. No domain check.
inline double log_kernel(const WeightModel& model, double distance, double sigma) noexcept {
  switch (model.kind) {
    case WeightKind::dnn1: return -(distance * distance) / (2.0 * sigma * sigma);
    case WeightKind::dnn2: return distance < sigma ? 0.0 : std::log(model.epsilon);
    case WeightKind::dnn3: return -distance * sigma;
  }
  return 0.0;
}

/// Unnormalized interaction kernel, in (0, 1] (dnn2: in [eps, 1]).
inline double kernel_value(const WeightModel& model, double distance, double sigma) {
  check_model(model, sigma);
  if (model.kind == WeightKind::dnn2) {
    return distance < sigma ? model.epsilon + (1.0 - model.epsilon) : model.epsilon;
  }
  return std::exp(log_kernel(model, distance, sigma));
}

/// Row-normalized influence weights. `w(i, j)` is the weight of point j in the
/// neighbourhood of point i; every row sums to one and the diagonal is zero.
///
/// `coupling(i, j) = w(i, j) + w(j, i)` is the symmetric pair interaction that
/// appears in the full conditional of the joint field; it is kept alongside so
/// the Gibbs sampler can read one contiguous row per site.
struct WeightMatrix {
  Matrix<double> w;
  Matrix<double> coupling;

  std::size_t size() const noexcept { return w.rows(); }
};

namespace detail {

// Turns log-kernels (entries != skip) into weights summing to one. Shifting by
// the maximum keeps rows finite when every raw kernel underflows. Rows whose
// kernels are all equal become exactly uniform.
inline void normalize_log_row(std::span<double> row, std::size_t skip) {
  double top = -std::numeric_limits<double>::infinity();
  bool all_equal = true;
  std::size_t count = 0;
  double first = 0.0;
  for (std::size_t j = 0; j < row.size(); ++j) {
    if (j == skip) continue;
    if (count == 0) first = row[j];
    all_equal = all_equal && row[j] == first;
    top = std::max(top, row[j]);
    ++count;
  }
  if (count == 0 || !std::isfinite(top)) {
    throw std::runtime_error("weight row has no positive mass");
  }
  if (all_equal) {
    const double uniform = 1.0 / static_cast<double>(count);
    for (std::size_t j = 0; j < row.size(); ++j) row[j] = j == skip ? 0.0 : uniform;
    return;
  }
  double sum = 0.0;
  for (std::size_t j = 0; j < row.size(); ++j) {
    if (j == skip) continue;
    row[j] = std::exp(row[j] - top);
    sum += row[j];
  }
  for (std::size_t j = 0; j < row.size(); ++j) row[j] = j == skip ? 0.0 : row[j] / sum;
}

inline constexpr std::size_t kNoSkip = static_cast<std::size_t>(-1);

}  // namespace detail

/// Symmetric table of log-kernels over all pairs; diagonal 0 (unused).
inline Matrix<double> log_kernel_table(const WeightModel& model, const DistanceMatrix& distances,
                                       double sigma) {
  const std::size_t n = distances.size();
  Matrix<double> k(n, n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = log_kernel(model, distances(i, j), sigma);
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return k;
}

inline WeightMatrix weights_from_table(const Matrix<double>& table);

inline WeightMatrix compute_weights(const WeightModel& model, const DistanceMatrix& distances,
                                    double sigma) {
  check_model(model, sigma);
  const std::size_t n = distances.size();
  if (n < 2) throw std::invalid_argument("compute_weights needs at least 2 points");
  Matrix<double> k = log_kernel_table(model, distances, sigma);
  for (std::size_t i = 0; i < n; ++i) detail::normalize_log_row(k.row(i), i);
  return weights_from_table(k);
}

/// Wraps an explicit weight table (diagonal forced to zero). Rows are taken
/// as given; used for hand-made instances.
inline WeightMatrix weights_from_table(const Matrix<double>& table) {
  const std::size_t n = table.rows();
  WeightMatrix out{table, Matrix<double>(n, n, 0.0)};
  for (std::size_t i = 0; i < n; ++i) {
    out.w(i, i) = 0.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double c = table(i, j) + table(j, i);
      out.coupling(i, j) = c;
      out.coupling(j, i) = c;
    }
  }
  return out;
}

/// Normalized weights from one query point to each reference point, given the
/// query's distances to them. Single-row analogue of compute_weights, used for
/// test points.
inline std::vector<double> query_weights(const WeightModel& model, std::span<const double> dists,
                                         double sigma) {
  check_model(model, sigma);
  std::vector<double> w(dists.size());
  for (std::size_t j = 0; j < dists.size(); ++j) w[j] = log_kernel(model, dists[j], sigma);
  detail::normalize_log_row(w, detail::kNoSkip);
  return w;
}

}  // namespace dnn

#endif  // DNN_WEIGHTS_HPP
