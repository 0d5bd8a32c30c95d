#ifndef DNN_KNN_HPP
#define DNN_KNN_HPP

#include <algorithm>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "dnn/data_io.hpp"
#include "dnn/matrix.hpp"

namespace dnn {

struct LoocvResult {
  int k_selected = 1;
  std::vector<double> error_curve;  // error_curve[k - 1] for k = 1..k_max
};

/// Default upper k for LOOCV: half the number of training observations.
inline int default_k_max(std::size_t n_train) {
  return std::max(1, static_cast<int>(n_train / 2));
}

namespace detail {

// Neighbour order by (distance, index); `skip` is left out.
inline std::vector<std::size_t> neighbour_order(std::span<const double> dists, std::size_t skip) {
  std::vector<std::size_t> order;
  order.reserve(dists.size());
  for (std::size_t j = 0; j < dists.size(); ++j) {
    if (j != skip) order.push_back(j);
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return dists[a] < dists[b]; });
  return order;
}

// Majority label among the first k entries of `order`; vote ties go to the
// lowest class.
inline int majority(std::span<const std::size_t> order, std::span<const int> labels,
                    int num_classes, int k) {
  std::vector<int> votes(static_cast<std::size_t>(num_classes), 0);
  for (int r = 0; r < k; ++r) ++votes[static_cast<std::size_t>(labels[order[r]])];
  return static_cast<int>(std::max_element(votes.begin(), votes.end()) - votes.begin());
}

inline constexpr std::size_t kNone = static_cast<std::size_t>(-1);

}  // namespace detail

/// 1-based k at the minimum of an error curve; the smallest k wins ties.
inline int select_smallest_argmin(std::span<const double> error_curve) {
  if (error_curve.empty()) throw std::invalid_argument("empty error curve");
  return static_cast<int>(std::min_element(error_curve.begin(), error_curve.end()) -
                          error_curve.begin()) + 1;
}

/// Most common class among the k nearest training points.
inline int knn_classify(std::span<const double> query, const Dataset& train, int k) {
  if (k < 1 || static_cast<std::size_t>(k) > train.size()) {
    throw std::out_of_range("k must lie in [1, n_train]");
  }
  std::vector<double> d(train.size());
  for (std::size_t j = 0; j < train.size(); ++j) d[j] = euclidean(query, train.point(j));
  const auto order = detail::neighbour_order(d, detail::kNone);
  return detail::majority(order, train.labels, train.num_classes, k);
}

/// Test error of k-nn for each k in 1..k_max, given query->train distances.
inline std::vector<double> knn_error_curve(const Matrix<double>& dists, std::span<const int> truth,
                                           const Dataset& train, int k_max) {
  if (k_max < 1 || static_cast<std::size_t>(k_max) > train.size()) {
    throw std::out_of_range("k_max must lie in [1, n_train]");
  }
  std::vector<double> curve(static_cast<std::size_t>(k_max), 0.0);
  for (std::size_t q = 0; q < dists.rows(); ++q) {
    const auto order = detail::neighbour_order(dists.row(q), detail::kNone);
    for (int k = 1; k <= k_max; ++k) {
      if (detail::majority(order, train.labels, train.num_classes, k) != truth[q]) {
        curve[static_cast<std::size_t>(k - 1)] += 1.0;
      }
    }
  }
  for (double& e : curve) e /= static_cast<double>(dists.rows());
  return curve;
}

/// Leave-one-out error for k = 1..k_max on the training set; the selected k
/// minimizes it, smallest k on ties.
inline LoocvResult loocv_select_k(const Dataset& train, int k_max) {
  const std::size_t n = train.size();
  if (n < 3) throw std::invalid_argument("LOOCV needs at least 3 training points");
  if (k_max < 1 || static_cast<std::size_t>(k_max) >= n) {
    throw std::out_of_range("k_max must lie in [1, n_train - 1]");
  }
  const DistanceMatrix dist = pairwise_distances(train);
  LoocvResult out;
  out.error_curve.assign(static_cast<std::size_t>(k_max), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto order = detail::neighbour_order(dist.d.row(i), i);
    for (int k = 1; k <= k_max; ++k) {
      if (detail::majority(order, train.labels, train.num_classes, k) != train.labels[i]) {
        out.error_curve[static_cast<std::size_t>(k - 1)] += 1.0;
      }
    }
  }
  for (double& e : out.error_curve) e /= static_cast<double>(n);
  out.k_selected = select_smallest_argmin(out.error_curve);
  return out;
}

}  // namespace dnn

#endif  // DNN_KNN_HPP
