#pragma once

// Macro/Micro F-measures, multi-label confusion matrices and the derived
// comparison statistics (F-measure increase, performance drop).

#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "emomine/corpus.hpp"
#include "emomine/error.hpp"

namespace emomine {

struct LabelCounts {
  std::vector<std::size_t> truth;      // |Y_i|
  std::vector<std::size_t> predicted;  // |Y'_i|
  std::vector<std::size_t> hits;       // |Y_i n Y'_i|
};

inline LabelCounts count_labels(std::span<const LabelSet> truth, std::span<const LabelSet> pred,
                                std::size_t n_labels) {
  if (truth.size() != pred.size()) {
    throw Error("truth and prediction lists differ in length (" + std::to_string(truth.size()) +
                " vs " + std::to_string(pred.size()) + ")");
  }
  LabelCounts c{std::vector<std::size_t>(n_labels, 0), std::vector<std::size_t>(n_labels, 0),
                std::vector<std::size_t>(n_labels, 0)};
  const auto check = [&](LabelId l) {
    if (l < 0 || static_cast<std::size_t>(l) >= n_labels) throw Error("label index out of range");
    return static_cast<std::size_t>(l);
  };
  for (std::size_t d = 0; d < truth.size(); ++d) {
    for (LabelId l : truth[d]) ++c.truth[check(l)];
    for (LabelId l : pred[d]) {
      ++c.predicted[check(l)];
      if (contains_label(truth[d], l)) ++c.hits[static_cast<std::size_t>(l)];
    }
  }
  return c;
}

/// Per-label F_i = 2|Y n Y'| / (|Y| + |Y'|), 0 when both are empty.
inline std::vector<double> per_label_f(std::span<const LabelSet> truth,
                                       std::span<const LabelSet> pred, std::size_t n_labels) {
  const auto c = count_labels(truth, pred, n_labels);
  std::vector<double> f(n_labels, 0.0);
  for (std::size_t i = 0; i < n_labels; ++i) {
    const auto denom = c.truth[i] + c.predicted[i];
    if (denom) f[i] = 2.0 * static_cast<double>(c.hits[i]) / static_cast<double>(denom);
  }
  return f;
}

/// Mean of per-label F over all n_labels, including labels absent from truth.
inline double macro_fm(std::span<const LabelSet> truth, std::span<const LabelSet> pred,
                       std::size_t n_labels) {
  if (n_labels == 0) return 0.0;
  double s = 0.0;
  for (double f : per_label_f(truth, pred, n_labels)) s += f;
  return s / static_cast<double>(n_labels);
}

inline double micro_fm(std::span<const LabelSet> truth, std::span<const LabelSet> pred,
                       std::size_t n_labels) {
  const auto c = count_labels(truth, pred, n_labels);
  std::size_t hits = 0;
  std::size_t denom = 0;
  for (std::size_t i = 0; i < n_labels; ++i) {
    hits += c.hits[i];
    denom += c.truth[i] + c.predicted[i];
  }
  return denom ? 2.0 * static_cast<double>(hits) / static_cast<double>(denom) : 0.0;
}

using Matrix = std::vector<std::vector<double>>;

/// C[i][j] counts (true i, predicted j) over every true x predicted pair of a
/// sample; rows are normalized to sum 1 (all-zero rows stay zero).
inline Matrix confusion_matrix(std::span<const LabelSet> truth, std::span<const LabelSet> pred,
                               std::size_t n_labels) {
  count_labels(truth, pred, n_labels);  // validates lengths and ranges
  Matrix c(n_labels, std::vector<double>(n_labels, 0.0));
  for (std::size_t d = 0; d < truth.size(); ++d)
    for (LabelId i : truth[d])
      for (LabelId j : pred[d]) c[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] += 1.0;
  for (auto& row : c) {
    double s = 0.0;
    for (double v : row) s += v;
    if (s > 0.0)
      for (auto& v : row) v /= s;
  }
  return c;
}

/// Elementwise mean of equally sized matrices.
inline Matrix average_matrices(std::span<const Matrix> ms) {
  if (ms.empty()) return {};
  Matrix out = ms.front();
  for (auto& row : out)
    for (auto& v : row) v = 0.0;
  for (const auto& m : ms)
    for (std::size_t i = 0; i < out.size(); ++i)
      for (std::size_t j = 0; j < out[i].size(); ++j) out[i][j] += m[i][j];
  for (auto& row : out)
    for (auto& v : row) v /= static_cast<double>(ms.size());
  return out;
}

struct EvalResult {
  double macro_fm = 0.0;
  double micro_fm = 0.0;
  std::vector<double> per_label_f;
  Matrix confusion;
};

inline EvalResult evaluate(std::span<const LabelSet> truth, std::span<const LabelSet> pred,
                           std::size_t n_labels) {
  EvalResult r;
  r.per_label_f = per_label_f(truth, pred, n_labels);
  double s = 0.0;
  for (double f : r.per_label_f) s += f;
  r.macro_fm = n_labels ? s / static_cast<double>(n_labels) : 0.0;
  r.micro_fm = micro_fm(truth, pred, n_labels);
  r.confusion = confusion_matrix(truth, pred, n_labels);
  return r;
}

// ---------------------------------------------------------------------------
// Comparison statistics across a base dataset and an extended (more
// imbalanced) dataset. Values are percentages; display code rounds them.

struct DatasetPair {
  double base = 0.0;      // e.g. 9-emotion data
  double extended = 0.0;  // e.g. 16-emotion data
};

/// AVG((best_ext - ref_ext) / ref_ext, (best_base - ref_base) / ref_base) * 100.
inline double fm_increase(DatasetPair best, DatasetPair reference) {
  if (reference.base == 0.0 || reference.extended == 0.0) {
    throw Error("reference F-measure must be non-zero");
  }
  const double ext = (best.extended - reference.extended) / reference.extended;
  const double base = (best.base - reference.base) / reference.base;
  return (ext + base) / 2.0 * 100.0;
}

/// F-measures of one model on both datasets with both feature sets.
struct FeatureGrid {
  std::optional<double> base_bow, base_we, extended_bow, extended_we;
};

/// (AVG_base(BOW, WE) - AVG_ext(BOW, WE)) / AVG_base(BOW, WE) * 100.
inline double performance_drop(const FeatureGrid& g) {
  if (!g.base_bow || !g.base_we || !g.extended_bow || !g.extended_we) {
    throw Error("performance drop needs BOW and WE values on both datasets");
  }
  const double base = (*g.base_bow + *g.base_we) / 2.0;
  const double ext = (*g.extended_bow + *g.extended_we) / 2.0;
  if (base == 0.0) throw Error("base-dataset F-measure average is zero");
  return (base - ext) / base * 100.0;
}

/// RankSVM family: mean of the per-variant drops.
inline double performance_drop(std::span<const FeatureGrid> variants) {
  if (variants.empty()) throw Error("performance drop needs at least one model");
  double s = 0.0;
  for (const auto& g : variants) s += performance_drop(g);
  return s / static_cast<double>(variants.size());
}

inline long rounded_percent(double pct) { return std::lround(pct); }

}  // namespace emomine
