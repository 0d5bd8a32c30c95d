#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "dnn/data_io.hpp"
#include "properties.hpp"

namespace {

using dnn::Dataset;
using dnn::Matrix;

Dataset column(std::vector<double> values, std::vector<int> labels, int g = 2) {
  Dataset d;
  d.features = Matrix<double>(values.size(), 1);
  for (std::size_t i = 0; i < values.size(); ++i) d.features(i, 0) = values[i];
  d.labels = std::move(labels);
  d.num_classes = g;
  return d;
}

Dataset parse(const std::string& text, const std::string& label = "") {
  std::istringstream in(text);
  return dnn::parse_csv(in, label);
}

Dataset with_class_sizes(const std::vector<std::size_t>& sizes) {
  std::vector<double> x;
  std::vector<int> y;
  for (std::size_t g = 0; g < sizes.size(); ++g) {
    for (std::size_t k = 0; k < sizes[g]; ++k) {
      x.push_back(static_cast<double>(x.size()));
      y.push_back(static_cast<int>(g));
    }
  }
  return column(x, y, static_cast<int>(sizes.size()));
}

TEST(LoadCsv, MinimalTwoRowFile) {
  const Dataset d = parse("x,label\n0,a\n1,b\n");
  EXPECT_EQ(d.size(), 2u);
  EXPECT_EQ(d.num_classes, 2);
  EXPECT_EQ(d.num_features(), 1u);
  EXPECT_EQ(d.labels, (std::vector<int>{0, 1}));
  EXPECT_EQ(d.class_names, (std::vector<std::string>{"a", "b"}));
  EXPECT_DOUBLE_EQ(d.features(1, 0), 1.0);
}

TEST(LoadCsv, LabelColumnByNameOrIndex) {
  const std::string text = "cls,x,y\nb,1,2\na,3,4\nb,5,6\n";
  const Dataset by_name = parse(text, "cls");
  const Dataset by_index = parse(text, "0");
  EXPECT_EQ(by_name.labels, (std::vector<int>{0, 1, 0}));
  EXPECT_EQ(by_name.labels, by_index.labels);
  EXPECT_EQ(by_name.features, by_index.features);
  EXPECT_EQ(by_name.feature_names, (std::vector<std::string>{"x", "y"}));
  EXPECT_DOUBLE_EQ(by_name.features(2, 1), 6.0);
}

TEST(LoadCsv, ClassNamesRoundTrip) {
  const Dataset d = parse("x,s\n1,setosa\n2,virginica\n3,setosa\n4,versicolor\n");
  const std::vector<std::string> raw{"setosa", "virginica", "setosa", "versicolor"};
  for (std::size_t i = 0; i < d.size(); ++i) {
    EXPECT_EQ(d.class_names[static_cast<std::size_t>(d.labels[i])], raw[i]);
  }
}

TEST(LoadCsv, Errors) {
  EXPECT_THROW(parse(""), dnn::DataError);
  EXPECT_THROW(parse("x,label\n"), dnn::DataError);
  EXPECT_THROW(parse("x,label\n1,a\nfoo,b\n"), dnn::DataError);
  EXPECT_THROW(parse("x,label\n1,a\n2,a\n"), dnn::DataError);
  EXPECT_THROW(parse("x,label\n1,a\n2\n"), dnn::DataError);
  EXPECT_THROW(parse("x,label\n1,a\n2,b\n", "missing"), dnn::DataError);
  EXPECT_THROW(parse("x,label\nnan,a\n2,b\n"), dnn::DataError);
  EXPECT_THROW(dnn::load_csv("/nonexistent/file.csv", ""), dnn::DataError);
}

TEST(LoadCsv, BundledIris) {
  const Dataset d = dnn::load_csv(std::string(DNN_DATA_DIR) + "/iris.csv", "class");
  EXPECT_EQ(d.num_classes, 3);
  EXPECT_EQ(d.num_features(), 4u);
  EXPECT_EQ(d.size(), 150u);
}

TEST(LoadCsv, BundledWine) {
  const Dataset d = dnn::load_csv(std::string(DNN_DATA_DIR) + "/wine.csv", "");
  EXPECT_EQ(d.num_classes, 3);
  EXPECT_EQ(d.num_features(), 13u);
  EXPECT_EQ(d.size(), 178u);
}

TEST(Standardize, SimpleColumn) {
  const Dataset d = column({1, 2, 3}, {0, 1, 0});
  const Dataset s = dnn::standardize(d, {{0, 1, 2}, {}});
  EXPECT_NEAR(s.features(0, 0), -1.0, 1e-15);
  EXPECT_NEAR(s.features(1, 0), 0.0, 1e-15);
  EXPECT_NEAR(s.features(2, 0), 1.0, 1e-15);
}

TEST(Standardize, Idempotent) {
  const Dataset d = column({-1, 0, 1}, {0, 1, 0});
  const Dataset s = dnn::standardize(d, {{0, 1, 2}, {}});
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(s.features(i, 0), d.features(i, 0), 1e-12);
}

TEST(Standardize, ConstantColumnBecomesZero) {
  const Dataset s = dnn::standardize(column({5, 5, 5}, {0, 1, 0}), {{0, 1, 2}, {}});
  for (double v : s.features.values()) EXPECT_EQ(v, 0.0);
}

TEST(Standardize, UsesTrainingRowsOnly) {
  // Training rows 0..2 hold (1,2,3); the test row's value must not move the statistics.
  const Dataset d = column({1, 2, 3, 100}, {0, 1, 0, 1});
  const Dataset s = dnn::standardize(d, {{0, 1, 2}, {3}});
  EXPECT_NEAR(s.features(0, 0), -1.0, 1e-15);
  EXPECT_NEAR(s.features(2, 0), 1.0, 1e-15);
  EXPECT_NEAR(s.features(3, 0), 98.0, 1e-12);
}

TEST(Distances, ThreeFourFive) {
  Dataset d;
  d.features = Matrix<double>(2, 2);
  d.features(1, 0) = 3.0;
  d.features(1, 1) = 4.0;
  d.labels = {0, 1};
  d.num_classes = 2;
  const auto dist = dnn::pairwise_distances(d);
  EXPECT_DOUBLE_EQ(dist(0, 1), 5.0);
  EXPECT_DOUBLE_EQ(dist(1, 0), 5.0);
}

TEST(Distances, IdenticalPoints) {
  const auto dist = dnn::pairwise_distances(column({2.5, 2.5}, {0, 1}));
  EXPECT_EQ(dist(0, 1), 0.0);
}

TEST(Distances, Collinear) {
  const auto dist = dnn::pairwise_distances(column({0, 1, 3}, {0, 1, 0}));
  const double want[3][3] = {{0, 1, 3}, {1, 0, 2}, {3, 2, 0}};
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) EXPECT_DOUBLE_EQ(dist(i, j), want[i][j]);
  }
  EXPECT_DOUBLE_EQ(dnn::median_off_diagonal(dist), 2.0);
}

TEST(Distances, CrossDistancesMatchEuclidean) {
  const Dataset train = column({0, 1, 3}, {0, 1, 0});
  Matrix<double> q(2, 1);
  q(0, 0) = 2.0;
  q(1, 0) = -1.0;
  const auto c = dnn::cross_distances(q, train);
  EXPECT_DOUBLE_EQ(c(0, 0), 2.0);
  EXPECT_DOUBLE_EQ(c(0, 2), 1.0);
  EXPECT_DOUBLE_EQ(c(1, 2), 4.0);
}

TEST(Split, SameSeedSameSplit) {
  const Dataset d = with_class_sizes({20, 20, 20});
  EXPECT_EQ(dnn::split_dataset(d, 0.25, 42).train_indices, dnn::split_dataset(d, 0.25, 42).train_indices);
  EXPECT_NE(dnn::split_dataset(d, 0.25, 42).train_indices, dnn::split_dataset(d, 0.25, 43).train_indices);
}

TEST(Split, SizesAndPartition) {
  const Dataset d = with_class_sizes({50, 50, 50});
  const auto s = dnn::split_dataset(d, 0.25, 1);
  EXPECT_EQ(s.train_indices.size(), 38u);  // round(37.5)
  EXPECT_EQ(s.test_indices.size(), 112u);
  std::vector<int> seen(150, 0);
  for (auto i : s.train_indices) ++seen[i];
  for (auto i : s.test_indices) ++seen[i];
  for (int v : seen) EXPECT_EQ(v, 1);
  EXPECT_TRUE(dnn::covers_all_classes(d, s.train_indices));
}

TEST(Split, OliveShapedFraction) {
  const Dataset d = with_class_sizes({25, 22, 18});
  const auto s = dnn::split_dataset(d, 25.0 / 65.0, 3);
  EXPECT_EQ(s.train_indices.size(), 25u);
  EXPECT_EQ(s.test_indices.size(), 40u);
}

TEST(Split, MeatShapedFraction) {
  const Dataset d = with_class_sizes({55, 55, 55, 32, 34});
  const auto s = dnn::split_dataset(d, 60.0 / 231.0, 9);
  EXPECT_EQ(s.train_indices.size(), 60u);
  EXPECT_EQ(s.test_indices.size(), 171u);
}

TEST(Split, PerClassCounts) {
  const Dataset d = with_class_sizes({55, 55, 55, 32, 34});
  const std::vector<std::size_t> counts{15, 20, 13, 11, 11};
  const auto s = dnn::split_by_class_counts(d, counts, 9);
  EXPECT_EQ(s.train_indices.size(), 70u);
  EXPECT_EQ(s.test_indices.size(), 161u);
  std::vector<std::size_t> per_class(5, 0);
  for (auto i : s.train_indices) ++per_class[static_cast<std::size_t>(d.labels[i])];
  EXPECT_EQ(per_class, counts);
  EXPECT_EQ(s.train_indices, dnn::split_by_class_counts(d, counts, 9).train_indices);
  EXPECT_THROW(dnn::split_by_class_counts(d, std::vector<std::size_t>{56, 1, 1, 1, 1}, 9), dnn::DataError);
}

TEST(Split, RejectsBadFraction) {
  const Dataset d = with_class_sizes({5, 5});
  EXPECT_THROW(dnn::split_dataset(d, 0.0, 1), std::invalid_argument);
  EXPECT_THROW(dnn::split_dataset(d, 1.0, 1), std::invalid_argument);
}

TEST(Split, FailsWhenClassesCannotBeCovered) {
  const Dataset d = with_class_sizes({9, 1});
  EXPECT_THROW(dnn::split_dataset(d, 0.1, 1), dnn::DataError);
}

TEST(ClassProportions, Counting) {
  const std::vector<int> y{0, 0, 1};
  const auto all = dnn::class_proportions(y, 2);
  EXPECT_DOUBLE_EQ(all.proportions[0], 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(all.proportions[1], 1.0 / 3.0);
  const auto excl = dnn::class_proportions(y, 2, 0);
  EXPECT_DOUBLE_EQ(excl.proportions[0], 0.5);
  EXPECT_DOUBLE_EQ(excl.proportions[1], 0.5);
  const auto single = dnn::class_proportions(std::vector<int>{0, 0, 0}, 3);
  EXPECT_EQ(single.proportions, (std::vector<double>{1.0, 0.0, 0.0}));
}

TEST(DataProperties, DistanceSymmetry) {
  const auto r = dnn::testing::prop_distance_symmetry(300, 11);
  EXPECT_TRUE(r.ok) << r.failure;
}

TEST(DataProperties, SplitDeterminism) {
  const auto r = dnn::testing::prop_split_deterministic(300, 12);
  EXPECT_TRUE(r.ok) << r.failure;
}

}  // namespace
