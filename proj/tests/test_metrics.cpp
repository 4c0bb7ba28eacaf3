#include <gtest/gtest.h>

#include "emomine/metrics.hpp"
#include "emomine/report.hpp"

using namespace emomine;

namespace {

using Sets = std::vector<LabelSet>;

struct Row {
  const char* name;
  double base_macro, base_micro, ext_macro, ext_micro;
};

// Published Macro/Micro F-measures of the eight experiments on the 9- and
// 16-emotion datasets.
constexpr Row kTable[] = {
    {"NB-BOW", 0.3915, 0.3920, 0.2602, 0.2608},
    {"NB-WE", 0.3715, 0.3617, 0.2512, 0.2356},
    {"RankSVM-LP-BOW", 0.3882, 0.3940, 0.3523, 0.3568},
    {"RankSVM-LP-WE", 0.4234, 0.4236, 0.3342, 0.3391},
    {"RankSVM-PPT-BOW", 0.4275, 0.4249, 0.3406, 0.3449},
    {"RankSVM-PPT-WE", 0.3930, 0.3920, 0.3432, 0.3469},
    {"LSTM-Att-BOW", 0.4297, 0.4492, 0.3577, 0.3945},
    {"LSTM-Att-WE", 0.4685, 0.4832, 0.4020, 0.4314},
};

std::map<std::pair<std::string, std::string>, long> table_statistics() {
  std::vector<ExperimentRow> rows;
  for (const auto& r : kTable) {
    const std::string name = r.name;
    const auto family = name.substr(0, name.rfind('-'));
    const auto features = name.substr(name.rfind('-') + 1);
    rows.push_back({"nine", name, family, features, {r.base_macro}, {r.base_micro}, {}, {}});
    rows.push_back({"sixteen", name, family, features, {r.ext_macro}, {r.ext_micro}, {}, {}});
  }
  std::map<std::pair<std::string, std::string>, long> out;
  for (const auto& d : derive_statistics(rows, "nine", "sixteen")) out[{d.name, d.measure}] = d.rounded();
  return out;
}

}  // namespace

TEST(FMeasure, HandCountedFixture) {
  const Sets truth{{0}, {0, 1}}, pred{{0, 1}, {1}};
  EXPECT_NEAR(macro_fm(truth, pred, 2), 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(micro_fm(truth, pred, 2), 2.0 / 3.0, 1e-15);
  const auto f = per_label_f(truth, pred, 2);
  EXPECT_NEAR(f[0], 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(f[1], 2.0 / 3.0, 1e-15);
}

TEST(FMeasure, IdentityAndDisjoint) {
  const Sets truth{{0}, {1, 2}, {2}};
  EXPECT_EQ(macro_fm(truth, truth, 3), 1.0);
  EXPECT_EQ(micro_fm(truth, truth, 3), 1.0);
  const Sets wrong{{1}, {0}, {0, 1}};
  EXPECT_EQ(macro_fm(truth, wrong, 3), 0.0);
  EXPECT_EQ(micro_fm(truth, wrong, 3), 0.0);
}

TEST(FMeasure, MacroCountsAbsentLabels) {
  const Sets truth{{0}}, pred{{0}};
  EXPECT_DOUBLE_EQ(macro_fm(truth, pred, 4), 0.25);
  EXPECT_DOUBLE_EQ(micro_fm(truth, pred, 4), 1.0);
}

TEST(FMeasure, MicroExceedsMacroUnderSkew) {
  Sets truth(9, LabelSet{0}), pred(10, LabelSet{0});
  truth.push_back({1});
  EXPECT_GT(micro_fm(truth, pred, 2), macro_fm(truth, pred, 2));
  EXPECT_NEAR(micro_fm(truth, pred, 2), 0.9, 1e-15);
  EXPECT_NEAR(macro_fm(truth, pred, 2), (18.0 / 19.0) / 2.0, 1e-15);
}

TEST(FMeasure, Errors) {
  const Sets one{{0}}, two{{0}, {0}};
  EXPECT_THROW(macro_fm(one, two, 2), Error);
  EXPECT_THROW(micro_fm(one, one, 0), Error);
  const Sets bad{{5}};
  EXPECT_THROW(macro_fm(one, bad, 2), Error);
}

TEST(Confusion, PairProductRule) {
  EXPECT_EQ(confusion_matrix(Sets{{0}}, Sets{{0}}, 2), (Matrix{{1, 0}, {0, 0}}));
  EXPECT_EQ(confusion_matrix(Sets{{0, 1}}, Sets{{0}}, 2), (Matrix{{1, 0}, {1, 0}}));
  const Sets diag{{0}, {1}, {2}};
  EXPECT_EQ(confusion_matrix(diag, diag, 3), (Matrix{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}));
}

TEST(Confusion, RowsSumToOneOrZero) {
  const Sets truth{{0, 2}, {2}, {0}, {0, 2}, {2}}, pred{{1}, {0, 1, 2}, {2}, {0}, {1, 2}};
  for (const auto& row : confusion_matrix(truth, pred, 4)) {
    double s = 0.0;
    for (double v : row) s += v;
    EXPECT_TRUE(std::abs(s - 1.0) <= 1e-9 || s == 0.0);
  }
}

TEST(Evaluate, MacroIsMeanOfPerLabel) {
  const Sets truth{{0, 2}, {2}, {1}, {0, 2}}, pred{{0}, {2, 1}, {1}, {2}};
  const auto r = evaluate(truth, pred, 3);
  double s = 0.0;
  for (double f : r.per_label_f) s += f;
  EXPECT_DOUBLE_EQ(r.macro_fm, s / 3.0);
  EXPECT_DOUBLE_EQ(r.micro_fm, micro_fm(truth, pred, 3));
}

TEST(AverageMatrices, Elementwise) {
  const std::vector<Matrix> ms{{{1, 0}, {0, 1}}, {{0, 1}, {1, 0}}};
  EXPECT_EQ(average_matrices(ms), (Matrix{{0.5, 0.5}, {0.5, 0.5}}));
}

TEST(Comparison, IncreaseOverBaseline) {
  EXPECT_EQ(rounded_percent(fm_increase({0.4685, 0.4020}, {0.3915, 0.2602})), 37);
  EXPECT_EQ(rounded_percent(fm_increase({0.4832, 0.4314}, {0.3920, 0.2608})), 44);
  EXPECT_EQ(fm_increase({0.4, 0.3}, {0.4, 0.3}), 0.0);
  EXPECT_THROW(fm_increase({0.4, 0.3}, {0.0, 0.3}), Error);
}

TEST(Comparison, PerformanceDrop) {
  EXPECT_EQ(rounded_percent(performance_drop(FeatureGrid{0.4297, 0.4685, 0.3577, 0.4020})), 15);
  EXPECT_EQ(rounded_percent(performance_drop(FeatureGrid{0.4492, 0.4832, 0.3945, 0.4314})), 11);
  EXPECT_EQ(performance_drop(FeatureGrid{0.4, 0.5, 0.4, 0.5}), 0.0);
  EXPECT_THROW(performance_drop(FeatureGrid{0.4, std::nullopt, 0.3, 0.3}), Error);
}

// Statistics recomputed from the table with the same formulas; several differ
// from the figures quoted alongside it (18/23, 38/41, 18/17).
TEST(Comparison, TableArithmetic) {
  const auto s = table_statistics();
  EXPECT_EQ(s.at({"increase_vs_baseline", "macro"}), 37);
  EXPECT_EQ(s.at({"increase_vs_baseline", "micro"}), 44);
  EXPECT_EQ(s.at({"increase_vs_best_ranksvm", "macro"}), 12);
  EXPECT_EQ(s.at({"increase_vs_best_ranksvm", "micro"}), 17);
  EXPECT_EQ(s.at({"drop_NB", "macro"}), 33);
  EXPECT_EQ(s.at({"drop_NB", "micro"}), 34);
  EXPECT_EQ(s.at({"drop_RankSVM", "macro"}), 16);
  EXPECT_EQ(s.at({"drop_RankSVM", "micro"}), 15);
  EXPECT_EQ(s.at({"drop_LSTM-Att", "macro"}), 15);
  EXPECT_EQ(s.at({"drop_LSTM-Att", "micro"}), 11);
}
