#pragma once

// Cost-sensitive multi-label RankSVM. Linear per-label scorers are trained
// by stochastic subgradient descent on
//
//   1/2 sum_k |w_k|^2 + C sum_i lambda_i / (|Y_i| |Ybar_i|)
//       sum_{(p,q) in Y_i x Ybar_i} max(0, 1 - (s_p(x_i) - s_q(x_i)))
//
// with s_k(x) = w_k . x + b_k. A label set is read off the scores with a
// learned affine cutoff over the sorted score vector.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "emomine/corpus.hpp"
#include "emomine/error.hpp"
#include "emomine/features.hpp"
#include "emomine/labelsets.hpp"
#include "emomine/rng.hpp"

namespace emomine {

enum class CostMode { kLP, kPPT };

inline std::string to_string(CostMode m) { return m == CostMode::kLP ? "LP" : "PPT"; }

inline CostMode parse_cost_mode(std::string_view s) {
  if (s == "LP") return CostMode::kLP;
  if (s == "PPT") return CostMode::kPPT;
  throw Error("unknown cost mode '" + std::string(s) + "' (expected LP or PPT)");
}

struct RankSVMParams {
  double C = 1.0;
  int epochs = 50;
  double t_decay = 0.0;  // <= 0: number of training instances
  std::uint64_t seed = 0;
};

/// cutoff(s) = intercept + coef . sort_descending(s)
struct ThresholdModel {
  double intercept = 0.0;
  std::vector<double> coef;

  double cutoff(std::span<const double> scores) const {
    std::vector<double> z(scores.begin(), scores.end());
    std::sort(z.begin(), z.end(), std::greater<>());
    double c = intercept;
    for (std::size_t i = 0; i < z.size() && i < coef.size(); ++i) c += coef[i] * z[i];
    return c;
  }

  bool operator==(const ThresholdModel&) const = default;
};

struct RankSVMModel {
  std::size_t n_labels = 0;
  std::size_t dim = 0;
  FeatureKind kind = FeatureKind::kBow;
  std::vector<double> weights;  // n_labels x dim, row-major
  std::vector<double> bias;
  ThresholdModel threshold;
  RankSVMParams params;
  CostMode mode = CostMode::kLP;
  std::size_t min_count = 1;
  std::vector<std::string> warnings;

  RankSVMModel() = default;
  RankSVMModel(std::size_t labels, std::size_t d)
      : n_labels(labels), dim(d), weights(labels * d, 0.0), bias(labels, 0.0) {}

  std::span<const double> row(std::size_t k) const {
    return std::span<const double>(weights).subspan(k * dim, dim);
  }
  std::span<double> row(std::size_t k) { return std::span<double>(weights).subspan(k * dim, dim); }
};

inline std::vector<double> score_labels(const RankSVMModel& m, const FeatureVector& x) {
  if (x.dim != m.dim) {
    throw Error("RankSVM: feature dimension " + std::to_string(x.dim) + " != model dimension " +
                std::to_string(m.dim));
  }
  std::vector<double> s(m.n_labels);
  for (std::size_t k = 0; k < m.n_labels; ++k) s[k] = x.dot(m.row(k)) + m.bias[k];
  return s;
}

// ---------------------------------------------------------------------------
// Objective and full-batch subgradient (used for verification and monitoring)

namespace detail {

inline std::vector<LabelId> complement(const LabelSet& labels, std::size_t n_labels) {
  std::vector<LabelId> out;
  for (std::size_t k = 0; k < n_labels; ++k)
    if (!contains_label(labels, static_cast<LabelId>(k))) out.push_back(static_cast<LabelId>(k));
  return out;
}

}  // namespace detail

inline double ranksvm_objective(const RankSVMModel& m, std::span<const LabeledVector> data,
                                std::span<const double> costs, double C) {
  double reg = 0.0;
  for (double w : m.weights) reg += w * w;
  double loss = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& rel = data[i].labels;
    const auto irr = detail::complement(rel, m.n_labels);
    if (rel.empty() || irr.empty()) continue;
    const auto s = score_labels(m, data[i].x);
    double h = 0.0;
    for (LabelId p : rel)
      for (LabelId q : irr) h += std::max(0.0, 1.0 - (s[static_cast<std::size_t>(p)] -
                                                      s[static_cast<std::size_t>(q)]));
    loss += costs[i] * h / static_cast<double>(rel.size() * irr.size());
  }
  return 0.5 * reg + C * loss;
}

struct RankSVMGradient {
  std::vector<double> weights;
  std::vector<double> bias;
};

/// A subgradient of ranksvm_objective (hinge at exactly 0 margin slack
/// contributes nothing).
inline RankSVMGradient ranksvm_subgradient(const RankSVMModel& m,
                                           std::span<const LabeledVector> data,
                                           std::span<const double> costs, double C) {
  RankSVMGradient g{m.weights, std::vector<double>(m.n_labels, 0.0)};
  std::vector<double> coeff(m.n_labels);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& rel = data[i].labels;
    const auto irr = detail::complement(rel, m.n_labels);
    if (rel.empty() || irr.empty()) continue;
    const auto s = score_labels(m, data[i].x);
    const double c = C * costs[i] / static_cast<double>(rel.size() * irr.size());
    std::fill(coeff.begin(), coeff.end(), 0.0);
    for (LabelId p : rel)
      for (LabelId q : irr)
        if (s[static_cast<std::size_t>(p)] - s[static_cast<std::size_t>(q)] < 1.0) {
          coeff[static_cast<std::size_t>(p)] -= c;
          coeff[static_cast<std::size_t>(q)] += c;
        }
    for (std::size_t k = 0; k < m.n_labels; ++k) {
      if (coeff[k] == 0.0) continue;
      data[i].x.axpy(coeff[k], std::span<double>(g.weights).subspan(k * m.dim, m.dim));
      g.bias[k] += coeff[k];
    }
  }
  return g;
}

// ---------------------------------------------------------------------------
// Training

namespace detail {

/// `UseCosts = false` is the cost-blind reference: the per-instance cost
/// multiplication is absent from the update.
template <bool UseCosts>
RankSVMModel train_ranksvm_impl(std::span<const LabeledVector> train, std::size_t n_labels,
                                std::span<const double> costs, const RankSVMParams& params,
                                std::vector<double>* epoch_objective) {
  if (!(params.C > 0.0)) throw Error("RankSVM: C must be positive");
  if (params.epochs <= 0) throw Error("RankSVM: epochs must be positive");
  if (train.empty()) throw Error("RankSVM: empty training set");
  if (UseCosts && costs.size() != train.size()) {
    throw Error("RankSVM: cost vector length does not match the training set");
  }
  const std::size_t dim = train.front().x.dim;
  RankSVMModel m(n_labels, dim);
  m.kind = train.front().x.kind;
  m.params = params;

  std::vector<std::size_t> usable;
  std::vector<std::vector<LabelId>> irrelevant(train.size());
  for (std::size_t i = 0; i < train.size(); ++i) {
    if (train[i].x.dim != dim) throw Error("RankSVM: inconsistent feature dimensions");
    irrelevant[i] = complement(train[i].labels, n_labels);
    if (train[i].labels.empty() || irrelevant[i].empty()) {
      m.warnings.push_back("instance " + std::to_string(i) +
                           " has no relevant/irrelevant label pair; skipped");
      continue;
    }
    usable.push_back(i);
  }

  const double n = static_cast<double>(train.size());
  const double t_decay = params.t_decay > 0.0 ? params.t_decay : n;
  // W = scale * V keeps the shrinkage step O(1) for sparse inputs.
  std::vector<double> v(n_labels * dim, 0.0);
  double scale = 1.0;
  std::vector<double> coeff(n_labels);
  std::vector<double> s(n_labels);
  Rng rng(params.seed);
  std::uint64_t t = 0;

  const auto materialize = [&] {
    for (auto& w : v) w *= scale;
    scale = 1.0;
  };

  for (int epoch = 0; epoch < params.epochs; ++epoch) {
    std::vector<std::size_t> order = usable;
    rng.shuffle(order);
    for (std::size_t i : order) {
      const double eta = 1.0 / (1.0 + static_cast<double>(t) / t_decay);
      ++t;
      const auto& ex = train[i];
      for (std::size_t k = 0; k < n_labels; ++k) {
        s[k] = scale * ex.x.dot(std::span<const double>(v).subspan(k * dim, dim)) + m.bias[k];
      }
      const auto& rel = ex.labels;
      const auto& irr = irrelevant[i];
      double c = params.C;
      if constexpr (UseCosts) c = c * costs[i];
      c /= static_cast<double>(rel.size() * irr.size());
      std::fill(coeff.begin(), coeff.end(), 0.0);
      for (LabelId p : rel)
        for (LabelId q : irr)
          if (s[static_cast<std::size_t>(p)] - s[static_cast<std::size_t>(q)] < 1.0) {
            coeff[static_cast<std::size_t>(p)] -= c;
            coeff[static_cast<std::size_t>(q)] += c;
          }
      scale *= 1.0 - eta / n;
      if (scale < 1e-9) {
        if (scale <= 0.0) {
          std::fill(v.begin(), v.end(), 0.0);
          scale = 1.0;
        } else {
          materialize();
        }
      }
      for (std::size_t k = 0; k < n_labels; ++k) {
        if (coeff[k] == 0.0) continue;
        ex.x.axpy(-eta * coeff[k] / scale, std::span<double>(v).subspan(k * dim, dim));
        m.bias[k] -= eta * coeff[k];
      }
    }
    if (epoch_objective) {
      RankSVMModel snapshot = m;
      for (std::size_t j = 0; j < v.size(); ++j) snapshot.weights[j] = scale * v[j];
      std::vector<double> ones(train.size(), 1.0);
      epoch_objective->push_back(
          ranksvm_objective(snapshot, train, UseCosts ? costs : std::span<const double>(ones),
                            params.C));
    }
  }
  for (std::size_t j = 0; j < v.size(); ++j) m.weights[j] = scale * v[j];
  return m;
}

}  // namespace detail

/// Least-squares affine cutoff over descending-sorted scores. Targets are the
/// midpoint between the lowest relevant and highest irrelevant score of each
/// training instance, clamped to that instance's score range.
inline ThresholdModel fit_threshold(std::span<const std::vector<double>> scores,
                                    std::span<const LabelSet> labels) {
  if (scores.size() != labels.size()) throw Error("fit_threshold: length mismatch");
  ThresholdModel tm;
  if (scores.empty()) return tm;
  const std::size_t k = scores.front().size();
  tm.coef.assign(k, 0.0);
  std::vector<std::pair<std::vector<double>, double>> rows;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const auto& s = scores[i];
    double lo_rel = HUGE_VAL;
    double hi_irr = -HUGE_VAL;
    for (std::size_t l = 0; l < k; ++l) {
      if (contains_label(labels[i], static_cast<LabelId>(l)))
        lo_rel = std::min(lo_rel, s[l]);
      else
        hi_irr = std::max(hi_irr, s[l]);
    }
    if (!std::isfinite(lo_rel) || !std::isfinite(hi_irr)) continue;
    const auto [mn, mx] = std::minmax_element(s.begin(), s.end());
    const double target = std::clamp((lo_rel + hi_irr) / 2.0, *mn, *mx);
    std::vector<double> z = s;
    std::sort(z.begin(), z.end(), std::greater<>());
    rows.emplace_back(std::move(z), target);
  }
  if (rows.empty()) return tm;
  Eigen::MatrixXd a(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(k + 1));
  Eigen::VectorXd b(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto ri = static_cast<Eigen::Index>(r);
    a(ri, 0) = 1.0;
    for (std::size_t c = 0; c < k; ++c) a(ri, static_cast<Eigen::Index>(c + 1)) = rows[r].first[c];
    b(ri) = rows[r].second;
  }
  const Eigen::VectorXd beta = a.completeOrthogonalDecomposition().solve(b);
  tm.intercept = beta(0);
  for (std::size_t c = 0; c < k; ++c) tm.coef[c] = beta(static_cast<Eigen::Index>(c + 1));
  return tm;
}

/// Labels scoring above the cutoff; the top-scoring label (lowest index on
/// ties) when none does or when all scores are equal.
inline LabelSet threshold_scores(std::span<const double> s, const ThresholdModel& tm) {
  const double cut = tm.cutoff(s);
  const double tol = 1e-9 * std::max(1.0, std::abs(cut));
  LabelSet out;
  const bool flat = !s.empty() && *std::max_element(s.begin(), s.end()) -
                                          *std::min_element(s.begin(), s.end()) <= tol;
  if (!flat)
    for (std::size_t k = 0; k < s.size(); ++k)
      if (s[k] - cut > tol) out.push_back(static_cast<LabelId>(k));
  if (out.empty() && !s.empty()) {
    out.push_back(static_cast<LabelId>(std::max_element(s.begin(), s.end()) - s.begin()));
  }
  return out;
}

inline RankSVMModel train_ranksvm(std::span<const LabeledVector> train, std::size_t n_labels,
                                  std::span<const double> costs, const RankSVMParams& params,
                                  std::vector<double>* epoch_objective = nullptr) {
  auto m = detail::train_ranksvm_impl<true>(train, n_labels, costs, params, epoch_objective);
  std::vector<std::vector<double>> scores;
  std::vector<LabelSet> labels;
  for (const auto& ex : train) {
    scores.push_back(score_labels(m, ex.x));
    labels.push_back(ex.labels);
  }
  m.threshold = fit_threshold(scores, labels);
  return m;
}

inline LabelSet predict_ranksvm(const RankSVMModel& m, const FeatureVector& x) {
  return threshold_scores(score_labels(m, x), m.threshold);
}

// ---------------------------------------------------------------------------
// Cost derivation

struct CostAssignment {
  std::vector<double> costs;  // aligned with the input; 0 for dropped instances
  std::vector<bool> keep;     // false: dropped by pruning
  std::size_t reassigned = 0;
};

/// LP: costs from the raw labelsets. PPT: labelsets rarer than `min_count`
/// are pruned and reassigned first; the costs follow the pruned
/// distribution while ranking targets stay the original label sets.
inline CostAssignment derive_costs(std::span<const std::pair<std::string, LabelSet>> docs,
                                   CostMode mode, std::size_t min_count) {
  auto stats = enumerate_labelsets(std::vector<std::pair<std::string, LabelSet>>(docs.begin(),
                                                                                 docs.end()));
  CostAssignment out;
  out.keep.assign(docs.size(), true);
  if (mode == CostMode::kPPT) {
    auto pruned = prune_labelsets(stats, min_count);
    out.reassigned = pruned.reassigned.size();
    std::unordered_set<std::string> dropped(pruned.dropped.begin(), pruned.dropped.end());
    for (std::size_t i = 0; i < docs.size(); ++i)
      if (dropped.contains(docs[i].first)) out.keep[i] = false;
    stats = std::move(pruned.stats);
  }
  const auto lambda = instance_costs(stats);
  out.costs.assign(docs.size(), 0.0);
  for (std::size_t i = 0; i < docs.size(); ++i)
    if (out.keep[i]) out.costs[i] = lambda.at(docs[i].first);
  return out;
}

// ---------------------------------------------------------------------------

inline constexpr int kRankSvmFormatVersion = 1;

inline nlohmann::ordered_json to_json(const RankSVMModel& m) {
  nlohmann::ordered_json j;
  j["format"] = "emomine-ranksvm";
  j["version"] = kRankSvmFormatVersion;
  j["cost_mode"] = to_string(m.mode);
  j["min_count"] = m.min_count;
  j["C"] = m.params.C;
  j["epochs"] = m.params.epochs;
  j["t_decay"] = m.params.t_decay;
  j["seed"] = m.params.seed;
  j["features"] = to_string(m.kind);
  j["n_labels"] = m.n_labels;
  j["dim"] = m.dim;
  j["weights"] = m.weights;
  j["bias"] = m.bias;
  j["threshold"] = {{"intercept", m.threshold.intercept}, {"coef", m.threshold.coef}};
  return j;
}

inline RankSVMModel ranksvm_from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "emomine-ranksvm" || j.value("version", 0) != kRankSvmFormatVersion) {
    throw Error("not a version-1 RankSVM model file");
  }
  RankSVMModel m(j.at("n_labels").get<std::size_t>(), j.at("dim").get<std::size_t>());
  m.mode = parse_cost_mode(j.at("cost_mode").get<std::string>());
  m.min_count = j.at("min_count").get<std::size_t>();
  m.params.C = j.at("C").get<double>();
  m.params.epochs = j.at("epochs").get<int>();
  m.params.t_decay = j.at("t_decay").get<double>();
  m.params.seed = j.at("seed").get<std::uint64_t>();
  m.kind = parse_feature_kind(j.at("features").get<std::string>());
  m.weights = j.at("weights").get<std::vector<double>>();
  m.bias = j.at("bias").get<std::vector<double>>();
  if (m.weights.size() != m.n_labels * m.dim || m.bias.size() != m.n_labels) {
    throw Error("RankSVM model file: tensor sizes do not match n_labels/dim");
  }
  m.threshold.intercept = j.at("threshold").at("intercept").get<double>();
  m.threshold.coef = j.at("threshold").at("coef").get<std::vector<double>>();
  return m;
}

}  // namespace emomine
