#ifndef DNN_PREDICTION_HPP
#define DNN_PREDICTION_HPP

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "dnn/data_io.hpp"
#include "dnn/inference.hpp"
#include "dnn/matrix.hpp"
#include "dnn/mrf.hpp"
#include "dnn/weights.hpp"

namespace dnn {

struct PredictiveResult {
  Matrix<double> probabilities;     // m x G
  std::vector<int> predicted_labels;  // 0-based, row argmax
  std::size_t samples_used = 0;     // J
};

/// Index of the largest entry; ties go to the lowest index.
inline int argmax(std::span<const double> p) {
  return static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
}

/// Class probabilities for a test point given its distances to the training
/// points: one normalized weight row w_j toward the training set, then
/// P(g) proportional to exp(beta * sum_j w_j [y_j == g]).
inline std::vector<double> predict_from_distances(std::span<const double> dists_to_train,
                                                  std::span<const int> train_labels,
                                                  int num_classes, const WeightModel& model,
                                                  MrfParams params) {
  const std::vector<double> w = query_weights(model, dists_to_train, params.sigma);
  std::vector<double> p(static_cast<std::size_t>(num_classes), 0.0);
  for (std::size_t j = 0; j < w.size(); ++j) p[static_cast<std::size_t>(train_labels[j])] += w[j];
  for (double& v : p) v *= params.beta;
  detail::softmax(p);
  return p;
}

inline std::vector<double> predict_point_conditional(std::span<const double> x_test,
                                                     const Dataset& train,
                                                     const WeightModel& model, MrfParams params) {
  std::vector<double> d(train.size());
  for (std::size_t j = 0; j < train.size(); ++j) d[j] = euclidean(x_test, train.point(j));
  return predict_from_distances(d, train.labels, train.num_classes, model, params);
}

/// Ergodic average of the test-point conditionals over every `stride`-th
/// posterior sample (stride 1 uses the full trace). Samples are accumulated
/// in trace order.
inline PredictiveResult predict_ergodic(const Matrix<double>& x_test, const Dataset& train,
                                        const WeightModel& model,
                                        std::span<const MrfParams> samples, std::size_t stride = 10) {
  if (samples.empty()) throw std::invalid_argument("cannot predict from an empty trace");
  if (stride == 0) throw std::invalid_argument("thinning stride must be positive");

  const std::size_t m = x_test.rows();
  const auto g = static_cast<std::size_t>(train.num_classes);
  const Matrix<double> dists = cross_distances(x_test, train);

  PredictiveResult out{Matrix<double>(m, g, 0.0), std::vector<int>(m, 0), 0};
  for (std::size_t s = 0; s < samples.size(); s += stride) {
    for (std::size_t q = 0; q < m; ++q) {
      const auto p = predict_from_distances(dists.row(q), train.labels, train.num_classes, model,
                                            samples[s]);
      auto row = out.probabilities.row(q);
      for (std::size_t c = 0; c < g; ++c) row[c] += p[c];
    }
    ++out.samples_used;
  }
  const double inv = 1.0 / static_cast<double>(out.samples_used);
  for (std::size_t q = 0; q < m; ++q) {
    auto row = out.probabilities.row(q);
    for (double& v : row) v *= inv;
    out.predicted_labels[q] = argmax(row);
  }
  return out;
}

inline PredictiveResult predict_ergodic(const Matrix<double>& x_test, const Dataset& train,
                                        const WeightModel& model, const PosteriorTrace& trace,
                                        std::size_t stride = 10) {
  return predict_ergodic(x_test, train, model, trace.samples, stride);
}

inline double misclassification_rate(std::span<const int> predicted, std::span<const int> truth) {
  if (predicted.size() != truth.size()) throw std::invalid_argument("label vectors differ in length");
  if (predicted.empty()) throw std::invalid_argument("no labels to compare");
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) wrong += predicted[i] != truth[i];
  return static_cast<double>(wrong) / static_cast<double>(predicted.size());
}

}  // namespace dnn

#endif  // DNN_PREDICTION_HPP
