#pragma once

// Labelset (label powerset) statistics: enumeration, pruning of rare
// labelsets, per-instance misclassification costs and the kurtosis-style
// imbalance statistic.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "emomine/corpus.hpp"
#include "emomine/error.hpp"

namespace emomine {

struct LabelsetStats {
  std::map<LabelSet, std::size_t> counts;
  /// (document id, labelset) in training order.
  std::vector<std::pair<std::string, LabelSet>> assignments;

  std::size_t distinct() const { return counts.size(); }

  std::size_t max_count() const {
    std::size_t m = 0;
    for (const auto& [_, c] : counts) m = std::max(m, c);
    return m;
  }

  std::size_t documents() const { return assignments.size(); }
};

inline LabelsetStats enumerate_labelsets(std::vector<std::pair<std::string, LabelSet>> assignments) {
  if (assignments.empty()) throw Error("cannot enumerate labelsets of an empty training set");
  LabelsetStats s;
  for (auto& [id, set] : assignments) {
    if (set.empty()) throw Error("document '" + id + "' has no labels");
    ++s.counts[set];
  }
  s.assignments = std::move(assignments);
  return s;
}

template <typename DocRange>
LabelsetStats enumerate_labelsets(const DocRange& docs) {
  std::vector<std::pair<std::string, LabelSet>> a;
  for (const Document& d : docs) a.emplace_back(d.id, d.labels);
  return enumerate_labelsets(std::move(a));
}

struct PruneResult {
  LabelsetStats stats;
  std::map<std::string, LabelSet> reassigned;  // only documents whose labelset changed
  std::vector<std::string> dropped;
};

/// Removes labelsets seen fewer than `min_count` times. A document of a
/// removed labelset moves to its largest surviving proper subset (ties: more
/// frequent, then lexicographically smaller), else to the surviving singleton
/// of its most frequent member label, else it is dropped.
inline PruneResult prune_labelsets(const LabelsetStats& stats, std::size_t min_count) {
  if (min_count < 1) throw Error("min_count must be at least 1");
  if (min_count > stats.documents()) {
    throw Error("min_count " + std::to_string(min_count) + " exceeds the training set size");
  }
  std::map<LabelId, std::size_t> label_freq;
  for (const auto& [_, set] : stats.assignments)
    for (LabelId l : set) ++label_freq[l];

  std::vector<std::pair<LabelSet, std::size_t>> survivors;
  for (const auto& [set, c] : stats.counts)
    if (c >= min_count) survivors.emplace_back(set, c);

  const auto is_proper_subset = [](const LabelSet& sub, const LabelSet& super) {
    return sub.size() < super.size() &&
           std::includes(super.begin(), super.end(), sub.begin(), sub.end());
  };

  std::map<LabelSet, std::optional<LabelSet>> target_of;
  for (const auto& [set, c] : stats.counts) {
    if (c >= min_count) continue;
    const std::pair<LabelSet, std::size_t>* best = nullptr;
    for (const auto& cand : survivors) {
      if (!is_proper_subset(cand.first, set)) continue;
      if (!best || cand.first.size() > best->first.size() ||
          (cand.first.size() == best->first.size() &&
           (cand.second > best->second ||
            (cand.second == best->second && cand.first < best->first)))) {
        best = &cand;
      }
    }
    if (best) {
      target_of[set] = best->first;
      continue;
    }
    LabelId top = set.front();
    for (LabelId l : set)
      if (label_freq[l] > label_freq[top]) top = l;
    auto it = stats.counts.find(LabelSet{top});
    if (it != stats.counts.end() && it->second >= min_count) {
      target_of[set] = LabelSet{top};
    } else {
      target_of[set] = std::nullopt;
    }
  }

  PruneResult r;
  std::vector<std::pair<std::string, LabelSet>> kept;
  for (const auto& [id, set] : stats.assignments) {
    auto t = target_of.find(set);
    if (t == target_of.end()) {
      kept.emplace_back(id, set);
    } else if (t->second) {
      kept.emplace_back(id, *t->second);
      r.reassigned.emplace(id, *t->second);
    } else {
      r.dropped.push_back(id);
    }
  }
  if (kept.empty()) throw Error("pruning removed every training document");
  r.stats = enumerate_labelsets(std::move(kept));
  return r;
}

/// lambda_i = L_max / L_{s(i)}, rescaled to mean 1 over the training documents.
inline std::unordered_map<std::string, double> instance_costs(const LabelsetStats& stats) {
  const double lmax = static_cast<double>(stats.max_count());
  std::vector<double> raw;
  raw.reserve(stats.documents());
  double sum = 0.0;
  for (const auto& [_, set] : stats.assignments) {
    raw.push_back(lmax / static_cast<double>(stats.counts.at(set)));
    sum += raw.back();
  }
  const double mean = sum / static_cast<double>(raw.size());
  std::unordered_map<std::string, double> costs;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    costs.emplace(stats.assignments[i].first, raw[i] / mean);
  }
  return costs;
}

struct ImbalanceResult {
  double value = 0.0;
  bool degenerate = false;
};

/// sum_i (L_i - L_max)^4 / ((l - 1) s^4) with s^2 = (1/l) sum_i (L_i - L_max)^2.
/// One class or all-equal counts yield 0 flagged as degenerate.
inline ImbalanceResult imbalance_statistic(std::span<const std::size_t> counts) {
  const std::size_t l = counts.size();
  if (l < 2) return {0.0, true};
  const double lmax = static_cast<double>(*std::max_element(counts.begin(), counts.end()));
  double sq = 0.0;
  double quad = 0.0;
  for (std::size_t c : counts) {
    const double d = static_cast<double>(c) - lmax;
    sq += d * d;
    quad += d * d * d * d;
  }
  const double s2 = sq / static_cast<double>(l);
  if (s2 == 0.0) return {0.0, true};
  return {quad / (static_cast<double>(l - 1) * s2 * s2), false};
}

inline ImbalanceResult labelset_imbalance(const LabelsetStats& stats) {
  std::vector<std::size_t> counts;
  for (const auto& [_, c] : stats.counts) counts.push_back(c);
  return imbalance_statistic(counts);
}

/// Same statistic over per-label counts; a document increments each of its labels.
inline ImbalanceResult label_imbalance(std::span<const std::size_t> label_counts) {
  return imbalance_statistic(label_counts);
}

template <typename DocRange>
std::vector<std::size_t> label_counts(const DocRange& docs, std::size_t n_labels) {
  std::vector<std::size_t> counts(n_labels, 0);
  for (const Document& d : docs)
    for (LabelId l : d.labels) ++counts.at(static_cast<std::size_t>(l));
  return counts;
}

/// Labelsets by descending count (ties lexicographic), for histogram plots.
inline std::vector<std::pair<LabelSet, std::size_t>> labelset_histogram(const LabelsetStats& stats) {
  std::vector<std::pair<LabelSet, std::size_t>> rows(stats.counts.begin(), stats.counts.end());
  std::stable_sort(rows.begin(), rows.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  return rows;
}

}  // namespace emomine
