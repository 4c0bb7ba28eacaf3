#include <gtest/gtest.h>

#include "emomine/ranksvm.hpp"

using namespace emomine;

namespace {

LabeledVector dense(std::vector<double> x, LabelSet labels) { return {FeatureVector::dense(std::move(x)), std::move(labels)}; }

RankSVMModel random_model(std::size_t labels, std::size_t dim, std::uint64_t seed) {
  RankSVMModel m(labels, dim);
  Rng rng(seed);
  for (auto& w : m.weights) w = rng.normal();
  for (auto& b : m.bias) b = rng.normal();
  return m;
}

double hinge_part(const RankSVMModel& m, std::span<const LabeledVector> data, std::span<const double> costs) {
  double reg = 0.0;
  for (double w : m.weights) reg += w * w;
  return ranksvm_objective(m, data, costs, 1.0) - 0.5 * reg;
}

}  // namespace

TEST(RankSVM, OneDimensionalToyOrdersLabels) {
  const std::vector<LabeledVector> train{dense({1.0}, {0}), dense({-1.0}, {1})};
  const std::vector<double> costs{1.0, 1.0};
  const auto m = train_ranksvm(train, 2, costs, {1.0, 50, 0.0, 3});
  const auto pos = score_labels(m, FeatureVector::dense({1.0}));
  const auto neg = score_labels(m, FeatureVector::dense({-1.0}));
  EXPECT_GT(pos[0], pos[1]);
  EXPECT_GT(neg[1], neg[0]);
  EXPECT_EQ(predict_ranksvm(m, FeatureVector::dense({1.0})), LabelSet{0});
  EXPECT_EQ(predict_ranksvm(m, FeatureVector::dense({-1.0})), LabelSet{1});
}

TEST(RankSVM, CostEqualsReplication) {
  const auto m = random_model(3, 4, 11);
  const auto x = dense({0.3, -1.2, 0.8, 0.1}, {0, 2});
  const auto y = dense({1.0, 0.5, -0.4, 0.0}, {1});
  const std::vector<LabeledVector> weighted{x, y}, replicated{x, x, y};
  const std::vector<double> w_costs{2.0, 1.0}, r_costs{1.0, 1.0, 1.0};
  const auto a = ranksvm_subgradient(m, weighted, w_costs, 0.7);
  const auto b = ranksvm_subgradient(m, replicated, r_costs, 0.7);
  for (std::size_t i = 0; i < a.weights.size(); ++i) EXPECT_NEAR(a.weights[i], b.weights[i], 1e-14);
  for (std::size_t i = 0; i < a.bias.size(); ++i) EXPECT_NEAR(a.bias[i], b.bias[i], 1e-14);
  EXPECT_NEAR(ranksvm_objective(m, weighted, w_costs, 0.7), ranksvm_objective(m, replicated, r_costs, 0.7), 1e-12);
}

TEST(RankSVM, InvalidParameters) {
  const std::vector<LabeledVector> train{dense({1.0}, {0})};
  const std::vector<double> costs{1.0};
  EXPECT_THROW(train_ranksvm(train, 2, costs, {1.0, 0, 0.0, 1}), Error);
  EXPECT_THROW(train_ranksvm(train, 2, costs, {0.0, 5, 0.0, 1}), Error);
  EXPECT_THROW(train_ranksvm(train, 2, std::vector<double>{1.0, 1.0}, {1.0, 5, 0.0, 1}), Error);
}

TEST(RankSVM, AllRelevantInstanceIsSkipped) {
  const std::vector<LabeledVector> train{dense({1.0}, {0}), dense({-1.0}, {1}), dense({0.5}, {0, 1})};
  const auto m = train_ranksvm(train, 2, std::vector<double>(3, 1.0), {1.0, 5, 0.0, 1});
  EXPECT_EQ(m.warnings.size(), 1u);
}

TEST(Scores, LinearForm) {
  RankSVMModel zero(3, 2);
  EXPECT_EQ(score_labels(zero, FeatureVector::dense({4, 5})), (std::vector<double>{0, 0, 0}));
  auto m = random_model(3, 2, 5);
  EXPECT_EQ(score_labels(m, FeatureVector::dense({0, 0})), m.bias);
  std::fill(m.bias.begin(), m.bias.end(), 0.0);
  const auto s = score_labels(m, FeatureVector::dense({0.4, -0.7}));
  const auto t = score_labels(m, FeatureVector::dense({1.2, -2.1}));
  for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(t[k], 3.0 * s[k], 1e-12);
  EXPECT_THROW(score_labels(m, FeatureVector::dense({1.0})), Error);
}

TEST(Threshold, SeparatedScoresPutCutoffBetweenClusters) {
  const std::vector<std::vector<double>> scores{{3.0, 2.5, -1.0}, {-2.0, 1.0, 0.8}, {0.9, -1.0, 1.5}, {2.0, -0.5, -0.7}};
  const std::vector<LabelSet> labels{{0, 1}, {1, 2}, {0, 2}, {0}};
  const auto tm = fit_threshold(scores, labels);
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const double cut = tm.cutoff(scores[i]);
    for (std::size_t k = 0; k < 3; ++k) {
      if (contains_label(labels[i], static_cast<LabelId>(k)))
        EXPECT_GT(scores[i][k], cut);
      else
        EXPECT_LT(scores[i][k], cut);
    }
    EXPECT_EQ(threshold_scores(scores[i], tm), labels[i]);
  }
}

TEST(Threshold, SingleLabelDocumentsPredictArgmax) {
  Rng rng(20);
  std::vector<std::vector<double>> scores;
  std::vector<LabelSet> labels;
  for (int d = 0; d < 20; ++d) {
    std::vector<double> s(5);
    for (auto& v : s) v = rng.normal();
    labels.push_back({static_cast<LabelId>(std::max_element(s.begin(), s.end()) - s.begin())});
    scores.push_back(std::move(s));
  }
  const auto tm = fit_threshold(scores, labels);
  for (std::size_t i = 0; i < scores.size(); ++i) EXPECT_EQ(threshold_scores(scores[i], tm), labels[i]);
}

TEST(Threshold, ConstantScoresFallBackToLowestIndex) {
  const std::vector<double> s{0.4, 0.4, 0.4};
  EXPECT_EQ(threshold_scores(s, ThresholdModel{}), LabelSet{0});
  EXPECT_EQ(threshold_scores(s, ThresholdModel{-3.0, {0.1, 0.1, 0.1}}), LabelSet{0});
  EXPECT_EQ(threshold_scores(s, ThresholdModel{5.0, {}}), LabelSet{0});
  const std::vector<double> t{0.1, 0.9, 0.9};
  EXPECT_EQ(threshold_scores(t, ThresholdModel{5.0, {}}), LabelSet{1});
}

TEST(RankSVM, ObjectiveDecreasesOnSeparableToy) {
  std::vector<LabeledVector> train;
  for (int i = 0; i < 30; ++i) {
    const double u = 0.5 + 0.05 * i;
    train.push_back(dense({u, 0.1}, {0}));
    train.push_back(dense({0.1, u}, {1}));
    train.push_back(dense({-u, -u}, {2}));
  }
  const std::vector<double> costs(train.size(), 1.0);
  const double initial = ranksvm_objective(RankSVMModel(3, 2), train, costs, 1.0);
  std::vector<double> curve;
  train_ranksvm(train, 3, costs, {1.0, 30, 0.0, 8}, &curve);
  ASSERT_EQ(curve.size(), 30u);
  EXPECT_LE(curve.back(), initial);
  EXPECT_LE(curve.back(), curve.front());
}

TEST(RankSVM, RankingLossInvariantToSharedShift) {
  const std::vector<LabeledVector> data{dense({0.2, -1.0, 0.5}, {0}), dense({1.0, 0.3, -0.2}, {1, 2}),
                                        dense({-0.6, 0.9, 0.0}, {2})};
  const std::vector<double> costs{1.0, 0.5, 2.0};
  auto m = random_model(3, 3, 17);
  const double before = hinge_part(m, data, costs);
  const std::vector<double> shift{0.7, -1.3, 2.2};
  for (std::size_t k = 0; k < 3; ++k)
    for (std::size_t j = 0; j < 3; ++j) m.row(k)[j] += shift[j];
  EXPECT_NEAR(hinge_part(m, data, costs), before, 1e-12);
}

TEST(RankSVM, BothKeywordsGiveBothLabels) {
  std::vector<LabeledVector> train;
  for (int i = 0; i < 10; ++i) {
    train.push_back({FeatureVector::bow(3, {0}), {0}});
    train.push_back({FeatureVector::bow(3, {1}), {1}});
    train.push_back({FeatureVector::bow(3, {0, 1}), {0, 1}});
    train.push_back({FeatureVector::bow(3, {2}), {2}});
  }
  const auto m = train_ranksvm(train, 3, std::vector<double>(train.size(), 1.0), {1.0, 50, 0.0, 2});
  EXPECT_EQ(predict_ranksvm(m, FeatureVector::bow(3, {0, 1})), (LabelSet{0, 1}));
  EXPECT_FALSE(predict_ranksvm(m, FeatureVector::bow(3, {})).empty());
}

TEST(RankSVM, DeterministicForSeed) {
  std::vector<LabeledVector> train;
  Rng rng(4);
  for (int i = 0; i < 40; ++i) {
    const auto l = static_cast<LabelId>(rng.index(3));
    train.push_back(dense({rng.normal() + l, rng.normal() - l}, {l}));
  }
  const std::vector<double> costs(train.size(), 1.0);
  const auto a = train_ranksvm(train, 3, costs, {1.0, 10, 0.0, 9});
  const auto b = train_ranksvm(train, 3, costs, {1.0, 10, 0.0, 9});
  EXPECT_EQ(a.weights, b.weights);
  EXPECT_EQ(a.threshold, b.threshold);
}

TEST(DeriveCosts, LpAndPpt) {
  const std::vector<std::pair<std::string, LabelSet>> docs{
      {"a1", {0}}, {"a2", {0}}, {"a3", {0}}, {"a4", {0}}, {"b1", {1}}, {"b2", {1}}, {"ab", {0, 1}}, {"c", {2}}};
  const auto lp = derive_costs(docs, CostMode::kLP, 5);
  EXPECT_EQ(lp.reassigned, 0u);
  EXPECT_GT(lp.costs[7], lp.costs[0]);
  const auto ppt = derive_costs(docs, CostMode::kPPT, 2);
  EXPECT_EQ(ppt.reassigned, 1u);
  EXPECT_FALSE(ppt.keep[7]);
  EXPECT_EQ(ppt.costs[7], 0.0);
  EXPECT_DOUBLE_EQ(ppt.costs[6], ppt.costs[0]);
}

TEST(RankSVM, JsonRoundTrip) {
  const std::vector<LabeledVector> train{dense({1.0, 0.0}, {0}), dense({0.0, 1.0}, {1}), dense({0.5, 0.5}, {0, 1}),
                                         dense({-1.0, -1.0}, {2})};
  auto m = train_ranksvm(train, 3, std::vector<double>(4, 1.0), {10.0, 5, 0.0, 6});
  m.mode = CostMode::kPPT;
  m.min_count = 5;
  const auto back = ranksvm_from_json(nlohmann::json::parse(to_json(m).dump()));
  EXPECT_EQ(to_json(back).dump(), to_json(m).dump());
  EXPECT_EQ(back.weights, m.weights);
  const auto x = FeatureVector::dense({0.3, 0.6});
  EXPECT_EQ(predict_ranksvm(back, x), predict_ranksvm(m, x));
  EXPECT_THROW(ranksvm_from_json(nlohmann::json{{"format", "emomine-nb"}}), Error);
}
