#pragma once

// Bag-of-words vocabulary and vectors, pre-trained embedding tables,
// embedding-average document vectors and min-max normalization.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "emomine/corpus.hpp"
#include "emomine/error.hpp"
#include "emomine/rng.hpp"

namespace emomine {

enum class FeatureKind { kBow, kEmb };

inline std::string to_string(FeatureKind k) { return k == FeatureKind::kBow ? "BOW" : "WE"; }

inline FeatureKind parse_feature_kind(std::string_view s) {
  if (s == "BOW") return FeatureKind::kBow;
  if (s == "WE" || s == "EMB") return FeatureKind::kEmb;
  throw Error("unknown feature kind '" + std::string(s) + "' (expected BOW or WE)");
}

/// Sparse binary vector (kBow: `indices` ascending, every value 1) or dense
/// real vector (kEmb: `values` of length `dim`).
struct FeatureVector {
  FeatureKind kind = FeatureKind::kBow;
  std::size_t dim = 0;
  std::vector<std::uint32_t> indices;
  std::vector<double> values;

  static FeatureVector bow(std::size_t dim, std::vector<std::uint32_t> indices) {
    std::sort(indices.begin(), indices.end());
    indices.erase(std::unique(indices.begin(), indices.end()), indices.end());
    return {FeatureKind::kBow, dim, std::move(indices), {}};
  }

  static FeatureVector dense(std::vector<double> values) {
    const auto d = values.size();
    return {FeatureKind::kEmb, d, {}, std::move(values)};
  }

  double at(std::size_t i) const {
    if (kind == FeatureKind::kEmb) return values[i];
    return std::binary_search(indices.begin(), indices.end(), static_cast<std::uint32_t>(i)) ? 1.0
                                                                                             : 0.0;
  }

  /// Calls f(index, value) for every stored component.
  template <typename F>
  void for_each(F&& f) const {
    if (kind == FeatureKind::kBow) {
      for (auto i : indices) f(static_cast<std::size_t>(i), 1.0);
    } else {
      for (std::size_t i = 0; i < values.size(); ++i) f(i, values[i]);
    }
  }

  double dot(std::span<const double> w) const {
    double s = 0.0;
    for_each([&](std::size_t i, double v) { s += w[i] * v; });
    return s;
  }

  /// w += a * x
  void axpy(double a, std::span<double> w) const {
    for_each([&](std::size_t i, double v) { w[i] += a * v; });
  }

  std::vector<double> to_dense() const {
    if (kind == FeatureKind::kEmb) return values;
    std::vector<double> out(dim, 0.0);
    for (auto i : indices) out[i] = 1.0;
    return out;
  }

  bool operator==(const FeatureVector&) const = default;
};

/// A feature vector with its ground-truth label set.
struct LabeledVector {
  FeatureVector x;
  LabelSet labels;
};

// ---------------------------------------------------------------------------

struct Vocabulary {
  std::vector<std::string> terms;
  std::vector<std::size_t> frequencies;  // total occurrences, aligned with terms
  std::unordered_map<std::string, std::uint32_t> index;
  std::size_t max_size = 5000;
  std::size_t min_df = 3;

  std::size_t size() const { return terms.size(); }

  std::optional<std::uint32_t> find(const std::string& term) const {
    auto it = index.find(term);
    if (it == index.end()) return std::nullopt;
    return it->second;
  }

  bool operator==(const Vocabulary& o) const {
    return terms == o.terms && frequencies == o.frequencies && max_size == o.max_size &&
           min_df == o.min_df;
  }
};

inline Vocabulary make_vocabulary(std::vector<std::string> terms, std::vector<std::size_t> freqs,
                                  std::size_t max_size, std::size_t min_df) {
  Vocabulary v;
  v.terms = std::move(terms);
  v.frequencies = std::move(freqs);
  v.frequencies.resize(v.terms.size(), 0);
  v.max_size = max_size;
  v.min_df = min_df;
  for (std::size_t i = 0; i < v.terms.size(); ++i) {
    v.index.emplace(v.terms[i], static_cast<std::uint32_t>(i));
  }
  return v;
}

/// Terms with document frequency >= min_df, ordered by total occurrence count
/// (descending, ties lexicographic), truncated to max_size.
template <typename DocRange>
Vocabulary build_vocabulary(const DocRange& train_docs, std::size_t max_size = 5000,
                            std::size_t min_df = 3) {
  std::map<std::string, std::pair<std::size_t, std::size_t>> stats;  // term -> (freq, df)
  std::size_t n_docs = 0;
  for (const Document& doc : train_docs) {
    ++n_docs;
    std::unordered_set<std::string_view> seen;
    for (const auto& t : doc.tokens) {
      auto& s = stats[t];
      ++s.first;
      if (seen.insert(t).second) ++s.second;
    }
  }
  if (n_docs == 0) throw Error("cannot build a vocabulary from an empty corpus");
  std::vector<std::pair<std::string, std::size_t>> kept;
  for (auto& [term, s] : stats) {
    if (s.second >= min_df) kept.emplace_back(term, s.first);
  }
  std::stable_sort(kept.begin(), kept.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  if (kept.size() > max_size) kept.resize(max_size);
  std::vector<std::string> terms;
  std::vector<std::size_t> freqs;
  for (auto& [t, f] : kept) {
    terms.push_back(t);
    freqs.push_back(f);
  }
  return make_vocabulary(std::move(terms), std::move(freqs), max_size, min_df);
}

/// "term<TAB>frequency" per line.
inline void write_vocabulary(std::ostream& out, const Vocabulary& v) {
  for (std::size_t i = 0; i < v.size(); ++i) out << v.terms[i] << '\t' << v.frequencies[i] << '\n';
}

inline FeatureVector vectorize_bow(const Document& doc, const Vocabulary& vocab) {
  std::vector<std::uint32_t> idx;
  for (const auto& t : doc.tokens) {
    if (auto i = vocab.find(t)) idx.push_back(*i);
  }
  return FeatureVector::bow(vocab.size(), std::move(idx));
}

// ---------------------------------------------------------------------------

struct EmbeddingTable {
  std::size_t dim = 200;
  std::unordered_map<std::string, std::vector<double>> vectors;

  const std::vector<double>* find(const std::string& word) const {
    auto it = vectors.find(word);
    return it == vectors.end() ? nullptr : &it->second;
  }
};

/// Text format "word v1 ... v_dim", single spaces. Duplicate words keep the
/// first occurrence.
inline EmbeddingTable load_embeddings(std::istream& in, std::size_t dim) {
  EmbeddingTable table;
  table.dim = dim;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string_view> fields;
    std::string_view rest(line);
    while (!rest.empty()) {
      const auto sp = rest.find(' ');
      const auto field = rest.substr(0, sp);
      if (!field.empty()) fields.push_back(field);
      if (sp == std::string_view::npos) break;
      rest.remove_prefix(sp + 1);
    }
    if (fields.size() != dim + 1) {
      throw ParseError("expected " + std::to_string(dim + 1) + " fields, found " +
                           std::to_string(fields.size()),
                       line_no);
    }
    std::vector<double> vec(dim);
    for (std::size_t i = 0; i < dim; ++i) {
      const auto f = fields[i + 1];
      auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), vec[i]);
      if (ec != std::errc() || ptr != f.data() + f.size() || !std::isfinite(vec[i])) {
        throw ParseError("non-numeric component '" + std::string(f) + "'", line_no);
      }
    }
    table.vectors.emplace(std::string(fields[0]), std::move(vec));
  }
  return table;
}

/// Mean of the embeddings of in-table tokens (duplicates counted); zero
/// vector when no token is in the table.
inline FeatureVector embed_average(const Document& doc, const EmbeddingTable& table) {
  std::vector<double> sum(table.dim, 0.0);
  std::size_t hits = 0;
  for (const auto& t : doc.tokens) {
    if (const auto* v = table.find(t)) {
      for (std::size_t i = 0; i < table.dim; ++i) sum[i] += (*v)[i];
      ++hits;
    }
  }
  if (hits) {
    for (auto& x : sum) x /= static_cast<double>(hits);
  }
  return FeatureVector::dense(std::move(sum));
}

/// Word vectors for a synthetic corpus: each label has a random centroid,
/// its keywords scatter around it and noise words sit near the origin.
inline EmbeddingTable synthetic_embeddings(const SynthSpec& spec, std::size_t dim,
                                           std::uint64_t seed, double keyword_spread = 0.3,
                                           double noise_scale = 0.5) {
  EmbeddingTable table;
  table.dim = dim;
  Rng rng(seed);
  for (const auto& words : spec.lexicon) {
    std::vector<double> centroid(dim);
    for (auto& c : centroid) c = rng.normal();
    for (const auto& w : words) {
      std::vector<double> v(dim);
      for (std::size_t i = 0; i < dim; ++i) v[i] = centroid[i] + keyword_spread * rng.normal();
      table.vectors.emplace(w, std::move(v));
    }
  }
  for (std::size_t j = 0; j < spec.noise_vocabulary; ++j) {
    std::vector<double> v(dim);
    for (auto& x : v) x = noise_scale * rng.normal();
    table.vectors.emplace(noise_word(j), std::move(v));
  }
  return table;
}

inline void write_embeddings(std::ostream& out, const EmbeddingTable& table) {
  std::vector<std::string> words;
  for (const auto& [w, _] : table.vectors) words.push_back(w);
  std::sort(words.begin(), words.end());
  char buf[32];
  for (const auto& w : words) {
    out << w;
    for (double x : table.vectors.at(w)) {
      auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
      out << ' ' << std::string_view(buf, static_cast<std::size_t>(end - buf));
    }
    out << '\n';
  }
}

// ---------------------------------------------------------------------------

struct MinMaxNormalizer {
  std::vector<double> min;
  std::vector<double> max;

  std::size_t dim() const { return min.size(); }
  bool operator==(const MinMaxNormalizer&) const = default;
};

inline MinMaxNormalizer minmax_fit(std::span<const FeatureVector> train) {
  if (train.empty()) throw Error("cannot fit a min-max normalizer on an empty set");
  const std::size_t d = train.front().dim;
  MinMaxNormalizer n{std::vector<double>(d, 0.0), std::vector<double>(d, 0.0)};
  for (std::size_t i = 0; i < d; ++i) n.min[i] = n.max[i] = train.front().at(i);
  for (const auto& x : train) {
    if (x.dim != d) throw Error("min-max fit: inconsistent dimensions");
    for (std::size_t i = 0; i < d; ++i) {
      const double v = x.at(i);
      n.min[i] = std::min(n.min[i], v);
      n.max[i] = std::max(n.max[i], v);
    }
  }
  return n;
}

/// (x - min) / (max - min) clamped to [0, 1]; constant dimensions map to 0.
inline FeatureVector minmax_apply(const MinMaxNormalizer& n, const FeatureVector& x) {
  if (x.dim != n.dim()) throw Error("min-max apply: dimension mismatch");
  std::vector<double> out(x.dim);
  for (std::size_t i = 0; i < x.dim; ++i) {
    const double range = n.max[i] - n.min[i];
    out[i] = range > 0.0 ? std::clamp((x.at(i) - n.min[i]) / range, 0.0, 1.0) : 0.0;
  }
  return FeatureVector::dense(std::move(out));
}

inline nlohmann::ordered_json to_json(const MinMaxNormalizer& n) {
  return {{"min", n.min}, {"max", n.max}};
}

inline MinMaxNormalizer minmax_from_json(const nlohmann::json& j) {
  return {j.at("min").get<std::vector<double>>(), j.at("max").get<std::vector<double>>()};
}

}  // namespace emomine
