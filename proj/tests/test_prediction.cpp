#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "dnn/prediction.hpp"
#include "properties.hpp"

namespace {

using dnn::Dataset;
using dnn::Matrix;
using dnn::MrfParams;
using dnn::WeightKind;

Dataset line(std::vector<double> xs, std::vector<int> labels, int g = 2) {
  Dataset d;
  d.features = Matrix<double>(xs.size(), 1);
  for (std::size_t i = 0; i < xs.size(); ++i) d.features(i, 0) = xs[i];
  d.labels = std::move(labels);
  d.num_classes = g;
  return d;
}

Matrix<double> points(std::vector<double> xs) {
  Matrix<double> m(xs.size(), 1);
  for (std::size_t i = 0; i < xs.size(); ++i) m(i, 0) = xs[i];
  return m;
}

TEST(PredictPoint, BetaZeroIsUniform) {
  const Dataset train = line({0, 1, 2, 5}, {0, 1, 2, 2}, 3);
  const std::vector<double> x{1.5};
  for (double p : dnn::predict_point_conditional(x, train, {WeightKind::dnn1}, {0.0, 1.0})) {
    EXPECT_DOUBLE_EQ(p, 1.0 / 3.0);
  }
}

TEST(PredictPoint, EquidistantFromTwoLabelsIsHalf) {
  const Dataset train = line({-1, 1}, {0, 1});
  const std::vector<double> x{0.0};
  for (WeightKind k : {WeightKind::dnn1, WeightKind::dnn2, WeightKind::dnn3}) {
    const auto p = dnn::predict_point_conditional(x, train, {k}, {3.0, 0.5});
    EXPECT_DOUBLE_EQ(p[0], 0.5);
    EXPECT_DOUBLE_EQ(p[1], 0.5);
  }
}

TEST(PredictPoint, SoftmaxOfNeighbourWeights) {
  // dnn2 with one neighbour inside sigma gives weights (1, eps)/(1+eps);
  // choose a dnn3 bandwidth instead so the weights are exactly (0.9, 0.1).
  const double sigma = std::log(9.0);  // exp(-1*s)/(exp(-1*s)+exp(0)) = 0.1 for distances (0, 1)
  const std::vector<double> dists{0.0, 1.0};
  const std::vector<int> labels{0, 1};
  const auto w = dnn::query_weights({WeightKind::dnn3}, dists, sigma);
  ASSERT_NEAR(w[0], 0.9, 1e-15);
  ASSERT_NEAR(w[1], 0.1, 1e-15);
  const auto p = dnn::predict_from_distances(dists, labels, 2, {WeightKind::dnn3}, {1.0, sigma});
  EXPECT_NEAR(p[0], 0.68997448112761, 1e-12);
  EXPECT_NEAR(p[1], 0.31002551887239, 1e-12);
  EXPECT_NEAR(p[0], std::exp(0.9) / (std::exp(0.9) + std::exp(0.1)), 1e-15);
}

TEST(PredictErgodic, SingleSampleEqualsPointConditional) {
  const Dataset train = line({0, 0.5, 2, 3}, {0, 0, 1, 1});
  const Matrix<double> test = points({0.2, 2.4, 1.25});
  const std::vector<MrfParams> one{{2.0, 0.7}};
  const auto r = dnn::predict_ergodic(test, train, {WeightKind::dnn1}, one);
  EXPECT_EQ(r.samples_used, 1u);
  for (std::size_t q = 0; q < 3; ++q) {
    const auto p = dnn::predict_point_conditional(test.row(q), train, {WeightKind::dnn1}, one[0]);
    for (std::size_t c = 0; c < 2; ++c) EXPECT_DOUBLE_EQ(r.probabilities(q, c), p[c]);
  }
  EXPECT_EQ(r.predicted_labels, (std::vector<int>{0, 1, 0}));
}

TEST(PredictErgodic, TwoSamplesAverage) {
  const Dataset train = line({0, 0.5, 2, 3}, {0, 0, 1, 1});
  const Matrix<double> test = points({1.1});
  const std::vector<MrfParams> two{{2.0, 0.7}, {-1.0, 2.0}};
  const auto r = dnn::predict_ergodic(test, train, {WeightKind::dnn1}, two, 1);
  const auto p = dnn::predict_point_conditional(test.row(0), train, {WeightKind::dnn1}, two[0]);
  const auto q = dnn::predict_point_conditional(test.row(0), train, {WeightKind::dnn1}, two[1]);
  EXPECT_EQ(r.samples_used, 2u);
  for (std::size_t c = 0; c < 2; ++c) EXPECT_NEAR(r.probabilities(0, c), 0.5 * (p[c] + q[c]), 1e-15);
}

TEST(PredictErgodic, AllBetaZeroGivesUniformRows) {
  const Dataset train = line({0, 1, 2}, {0, 1, 2}, 3);
  const Matrix<double> test = points({0.1, 5.0});
  const std::vector<MrfParams> samples(7, MrfParams{0.0, 0.3});
  const auto r = dnn::predict_ergodic(test, train, {WeightKind::dnn2}, samples, 1);
  for (double v : r.probabilities.values()) EXPECT_NEAR(v, 1.0 / 3.0, 1e-15);
  EXPECT_EQ(r.predicted_labels, (std::vector<int>{0, 0}));
}

TEST(PredictErgodic, ThinningStride) {
  const Dataset train = line({0, 2}, {0, 1});
  const Matrix<double> test = points({0.5});
  std::vector<MrfParams> samples;
  for (int k = 0; k < 25; ++k) samples.push_back({0.1 * k, 1.0});
  const auto r = dnn::predict_ergodic(test, train, {WeightKind::dnn1}, samples);
  EXPECT_EQ(r.samples_used, 3u);  // samples 0, 10, 20
  const std::vector<MrfParams> kept{samples[0], samples[10], samples[20]};
  const auto full = dnn::predict_ergodic(test, train, {WeightKind::dnn1}, kept, 1);
  EXPECT_DOUBLE_EQ(r.probabilities(0, 0), full.probabilities(0, 0));
  EXPECT_THROW(dnn::predict_ergodic(test, train, {WeightKind::dnn1}, samples, 0), std::invalid_argument);
  EXPECT_THROW(dnn::predict_ergodic(test, train, {WeightKind::dnn1}, std::vector<MrfParams>{}),
               std::invalid_argument);
}

TEST(Argmax, LowestIndexOnTies) {
  EXPECT_EQ(dnn::argmax(std::vector<double>{0.25, 0.5, 0.25}), 1);
  EXPECT_EQ(dnn::argmax(std::vector<double>{0.4, 0.2, 0.4}), 0);
  EXPECT_EQ(dnn::argmax(std::vector<double>{0.1, 0.45, 0.45}), 1);
}

TEST(Misclassification, Counting) {
  const std::vector<int> a{0, 1, 2, 1};
  EXPECT_EQ(dnn::misclassification_rate(a, a), 0.0);
  EXPECT_EQ(dnn::misclassification_rate(a, std::vector<int>{1, 0, 0, 0}), 1.0);
  std::vector<int> truth(100, 0), pred(100, 0);
  pred[3] = pred[50] = pred[99] = 1;
  EXPECT_DOUBLE_EQ(dnn::misclassification_rate(pred, truth), 0.03);
  EXPECT_THROW(dnn::misclassification_rate(a, std::vector<int>{0}), std::invalid_argument);
}

TEST(PredictionProperties, RowsAndOrderInvariance) {
  const auto r = dnn::testing::prop_predictive_rows(300, 51);
  EXPECT_TRUE(r.ok) << r.failure;
}

TEST(PredictionProperties, LabelPermutation) {
  const auto r = dnn::testing::prop_predictive_permutation(300, 52);
  EXPECT_TRUE(r.ok) << r.failure;
}

TEST(PredictionProperties, Sharpening) {
  const auto r = dnn::testing::prop_predictive_sharpening(300, 53);
  EXPECT_TRUE(r.ok) << r.failure;
}

}  // namespace
