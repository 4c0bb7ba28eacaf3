#pragma once

// One-vs-all multinomial Naive Bayes: one binary classifier per label, each
// trained on the documents carrying the label against (optionally
// downsampled) documents that do not.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "emomine/corpus.hpp"
#include "emomine/error.hpp"
#include "emomine/features.hpp"
#include "emomine/rng.hpp"

namespace emomine {

struct BinaryNB {
  bool degenerate = false;  // no positive training documents: never fires
  std::size_t n_pos = 0;
  std::size_t n_neg = 0;
  double prior_pos = 0.0;
  double prior_neg = 0.0;
  std::vector<double> log_lik_pos;
  std::vector<double> log_lik_neg;

  bool operator==(const BinaryNB&) const = default;
};

struct NBModel {
  double alpha = 1.0;
  bool balanced = true;
  std::uint64_t seed = 0;
  FeatureKind kind = FeatureKind::kBow;
  std::size_t dim = 0;
  std::vector<BinaryNB> classifiers;
  std::vector<std::string> warnings;
};

namespace detail {

inline std::vector<double> smoothed_log_likelihood(std::span<const LabeledVector> data,
                                                   std::span<const std::size_t> members,
                                                   std::size_t dim, double alpha) {
  std::vector<double> mass(dim, 0.0);
  for (std::size_t m : members) {
    data[m].x.for_each([&](std::size_t i, double v) { mass[i] += v; });
  }
  double total = 0.0;
  for (double v : mass) total += v;
  const double denom = total + alpha * static_cast<double>(dim);
  std::vector<double> out(dim);
  for (std::size_t i = 0; i < dim; ++i) out[i] = std::log((mass[i] + alpha) / denom);
  return out;
}

}  // namespace detail

inline NBModel train_nb_ova(std::span<const LabeledVector> train, std::size_t n_labels,
                            double alpha = 1.0, bool balanced = true, std::uint64_t seed = 0) {
  if (train.empty()) throw Error("NB: empty training set");
  if (!(alpha > 0.0)) throw Error("NB: smoothing alpha must be positive");
  NBModel model;
  model.alpha = alpha;
  model.balanced = balanced;
  model.seed = seed;
  model.kind = train.front().x.kind;
  model.dim = train.front().x.dim;
  for (const auto& ex : train) {
    if (ex.x.dim != model.dim) throw Error("NB: inconsistent feature dimensions");
    bool negative = false;
    ex.x.for_each([&](std::size_t, double v) { negative |= v < 0.0; });
    if (negative) throw Error("NB: feature values must be non-negative");
  }

  for (std::size_t label = 0; label < n_labels; ++label) {
    std::vector<std::size_t> pos;
    std::vector<std::size_t> neg;
    for (std::size_t i = 0; i < train.size(); ++i) {
      (contains_label(train[i].labels, static_cast<LabelId>(label)) ? pos : neg).push_back(i);
    }
    BinaryNB c;
    if (pos.empty()) {
      c.degenerate = true;
      c.n_neg = neg.size();
      c.prior_neg = 1.0;
      c.log_lik_pos.assign(model.dim, 0.0);
      c.log_lik_neg.assign(model.dim, 0.0);
      model.warnings.push_back("label " + std::to_string(label) +
                               " has no positive training documents; classifier disabled");
      model.classifiers.push_back(std::move(c));
      continue;
    }
    if (balanced && neg.size() > pos.size()) {
      Rng rng(mix_seed(seed, label));
      rng.shuffle(neg);
      neg.resize(pos.size());
      std::sort(neg.begin(), neg.end());
    }
    c.n_pos = pos.size();
    c.n_neg = neg.size();
    const double n = static_cast<double>(pos.size() + neg.size());
    c.prior_pos = static_cast<double>(pos.size()) / n;
    c.prior_neg = static_cast<double>(neg.size()) / n;
    c.log_lik_pos = detail::smoothed_log_likelihood(train, pos, model.dim, alpha);
    c.log_lik_neg = detail::smoothed_log_likelihood(train, neg, model.dim, alpha);
    model.classifiers.push_back(std::move(c));
  }
  return model;
}

/// log P(pos | x) - log P(neg | x), up to the shared evidence term.
inline double nb_log_odds(const NBModel& model, std::size_t label, const FeatureVector& x) {
  if (x.dim != model.dim) {
    throw Error("NB: feature dimension " + std::to_string(x.dim) + " != model dimension " +
                std::to_string(model.dim));
  }
  const auto& c = model.classifiers.at(label);
  if (c.degenerate) return -std::numeric_limits<double>::infinity();
  double lp = std::log(c.prior_pos);
  double ln = std::log(c.prior_neg);
  x.for_each([&](std::size_t i, double v) {
    lp += v * c.log_lik_pos[i];
    ln += v * c.log_lik_neg[i];
  });
  if (std::isinf(ln)) return std::numeric_limits<double>::infinity();
  const double diff = lp - ln;
  // Equal posteriors can differ in the last bits after summation; treat as a tie.
  const double tol = 1e-10 * std::max({1.0, std::abs(lp), std::abs(ln)});
  return std::abs(diff) <= tol ? 0.0 : diff;
}

/// Labels whose positive posterior strictly exceeds the negative one.
inline LabelSet predict_nb(const NBModel& model, const FeatureVector& x) {
  LabelSet out;
  for (std::size_t l = 0; l < model.classifiers.size(); ++l) {
    if (nb_log_odds(model, l, x) > 0.0) out.push_back(static_cast<LabelId>(l));
  }
  return out;
}

inline constexpr int kNbFormatVersion = 1;

inline nlohmann::ordered_json to_json(const NBModel& m) {
  nlohmann::ordered_json j;
  j["format"] = "emomine-nb";
  j["version"] = kNbFormatVersion;
  j["alpha"] = m.alpha;
  j["balanced"] = m.balanced;
  j["seed"] = m.seed;
  j["features"] = to_string(m.kind);
  j["dim"] = m.dim;
  auto& cs = j["classifiers"] = nlohmann::ordered_json::array();
  for (const auto& c : m.classifiers) {
    cs.push_back({{"degenerate", c.degenerate},
                  {"n_pos", c.n_pos},
                  {"n_neg", c.n_neg},
                  {"prior_pos", c.prior_pos},
                  {"prior_neg", c.prior_neg},
                  {"log_lik_pos", c.log_lik_pos},
                  {"log_lik_neg", c.log_lik_neg}});
  }
  return j;
}

inline NBModel nb_from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "emomine-nb" || j.value("version", 0) != kNbFormatVersion) {
    throw Error("not a version-1 NB model file");
  }
  NBModel m;
  m.alpha = j.at("alpha").get<double>();
  m.balanced = j.at("balanced").get<bool>();
  m.seed = j.at("seed").get<std::uint64_t>();
  m.kind = parse_feature_kind(j.at("features").get<std::string>());
  m.dim = j.at("dim").get<std::size_t>();
  for (const auto& c : j.at("classifiers")) {
    BinaryNB b;
    b.degenerate = c.at("degenerate").get<bool>();
    b.n_pos = c.at("n_pos").get<std::size_t>();
    b.n_neg = c.at("n_neg").get<std::size_t>();
    b.prior_pos = c.at("prior_pos").get<double>();
    b.prior_neg = c.at("prior_neg").get<double>();
    b.log_lik_pos = c.at("log_lik_pos").get<std::vector<double>>();
    b.log_lik_neg = c.at("log_lik_neg").get<std::vector<double>>();
    m.classifiers.push_back(std::move(b));
  }
  return m;
}

}  // namespace emomine
