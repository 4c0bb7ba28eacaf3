#pragma once

// Experiment report: per-experiment fold results, dataset imbalance
// summaries, derived comparison statistics, and writers for JSON/CSV output.

#include <cctype>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "emomine/corpus.hpp"
#include "emomine/error.hpp"
#include "emomine/labelsets.hpp"
#include "emomine/metrics.hpp"

namespace emomine {

struct ExperimentRow {
  std::string dataset;
  std::string experiment;  // e.g. "RankSVM-LP-BOW"
  std::string family;      // "NB", "RankSVM-LP", "RankSVM-PPT", "LSTM-Att"
  std::string features;    // "BOW" or "WE"
  std::vector<double> fold_macro;
  std::vector<double> fold_micro;
  std::vector<nlohmann::ordered_json> fold_params;
  Matrix confusion;  // averaged over folds

  double macro_mean() const { return mean(fold_macro); }
  double micro_mean() const { return mean(fold_micro); }
  double macro_std() const { return stddev(fold_macro); }
  double micro_std() const { return stddev(fold_micro); }

  static double mean(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  }

  /// Sample standard deviation (n - 1); 0 for fewer than two values.
  static double stddev(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
  }
};

struct DatasetSummary {
  std::string name;
  std::size_t documents = 0;
  std::vector<std::string> labels;
  std::vector<std::pair<LabelSet, std::size_t>> labelset_histogram;
  std::vector<std::size_t> label_counts;
  ImbalanceResult labelset_imbalance;
  ImbalanceResult label_imbalance;
  PrepareStats prepare;
};

template <typename DocRange>
DatasetSummary summarize_dataset(const std::string& name, const LabelVocabulary& vocab,
                                 const DocRange& docs, PrepareStats prepare = {}) {
  DatasetSummary s;
  s.name = name;
  s.labels = vocab.names();
  const auto stats = enumerate_labelsets(docs);
  s.documents = stats.documents();
  s.labelset_histogram = labelset_histogram(stats);
  s.label_counts = label_counts(docs, vocab.size());
  s.labelset_imbalance = labelset_imbalance(stats);
  s.label_imbalance = label_imbalance(s.label_counts);
  s.prepare = prepare;
  return s;
}

inline std::string labelset_name(const LabelSet& set, const std::vector<std::string>& names) {
  std::string out;
  for (LabelId l : set) {
    if (!out.empty()) out += '+';
    out += names.at(static_cast<std::size_t>(l));
  }
  return out;
}

struct DerivedStatistic {
  std::string name;
  std::string measure;  // "macro" or "micro"
  double value = 0.0;
  std::optional<double> reference;  // expected rounded percentage, if configured
  long rounded() const { return rounded_percent(value); }
  std::optional<bool> matches() const {
    if (!reference) return std::nullopt;
    return static_cast<double>(rounded()) == std::round(*reference);
  }
};

/// Derived statistics over the first two datasets (base, extended):
/// increase of the best experiment over the NB-BOW baseline and over the
/// best RankSVM, and the performance drop of each model family.
/// `references` maps statistic name -> {"macro": v, "micro": v}.
inline std::vector<DerivedStatistic> derive_statistics(const std::vector<ExperimentRow>& rows,
                                                       const std::string& base,
                                                       const std::string& extended,
                                                       const nlohmann::json& references = {}) {
  std::vector<DerivedStatistic> out;
  const auto find = [&](const std::string& ds, const std::string& exp) -> const ExperimentRow* {
    for (const auto& r : rows)
      if (r.dataset == ds && r.experiment == exp) return &r;
    return nullptr;
  };
  const auto best_of = [&](const std::string& ds, bool macro,
                           const std::string& family_prefix) -> std::optional<double> {
    std::optional<double> best;
    for (const auto& r : rows) {
      if (r.dataset != ds || r.family.rfind(family_prefix, 0) != 0) continue;
      const double v = macro ? r.macro_mean() : r.micro_mean();
      if (!best || v > *best) best = v;
    }
    return best;
  };
  const auto reference = [&](const std::string& name,
                             const std::string& measure) -> std::optional<double> {
    if (!references.is_object() || !references.contains(name)) return std::nullopt;
    const auto& r = references.at(name);
    if (!r.contains(measure)) return std::nullopt;
    return r.at(measure).get<double>();
  };
  const auto value = [](const ExperimentRow* r, bool macro) -> std::optional<double> {
    if (!r) return std::nullopt;
    return macro ? r->macro_mean() : r->micro_mean();
  };

  for (bool macro : {true, false}) {
    const std::string measure = macro ? "macro" : "micro";
    const auto push = [&](const std::string& name, double v) {
      out.push_back({name, measure, v, reference(name, measure)});
    };
    const auto best_base = best_of(base, macro, "");
    const auto best_ext = best_of(extended, macro, "");
    const auto nb_base = value(find(base, "NB-BOW"), macro);
    const auto nb_ext = value(find(extended, "NB-BOW"), macro);
    if (best_base && best_ext && nb_base && nb_ext) {
      push("increase_vs_baseline", fm_increase({*best_base, *best_ext}, {*nb_base, *nb_ext}));
    }
    const auto svm_base = best_of(base, macro, "RankSVM");
    const auto svm_ext = best_of(extended, macro, "RankSVM");
    if (best_base && best_ext && svm_base && svm_ext) {
      push("increase_vs_best_ranksvm", fm_increase({*best_base, *best_ext}, {*svm_base, *svm_ext}));
    }
    const auto grid = [&](const std::string& family) {
      FeatureGrid g;
      g.base_bow = value(find(base, family + "-BOW"), macro);
      g.base_we = value(find(base, family + "-WE"), macro);
      g.extended_bow = value(find(extended, family + "-BOW"), macro);
      g.extended_we = value(find(extended, family + "-WE"), macro);
      return g;
    };
    const auto complete = [](const FeatureGrid& g) {
      return g.base_bow && g.base_we && g.extended_bow && g.extended_we;
    };
    for (const std::string family : {"NB", "LSTM-Att"}) {
      const auto g = grid(family);
      if (complete(g)) push("drop_" + family, performance_drop(g));
    }
    std::vector<FeatureGrid> svm;
    for (const std::string family : {"RankSVM-PPT", "RankSVM-LP"}) {
      const auto g = grid(family);
      if (complete(g)) svm.push_back(g);
    }
    if (svm.size() == 2) push("drop_RankSVM", performance_drop(std::span<const FeatureGrid>(svm)));
  }
  return out;
}

struct ExperimentReport {
  int k = 0;
  std::vector<DatasetSummary> datasets;
  std::vector<ExperimentRow> rows;
  std::vector<DerivedStatistic> derived;
  std::string config_hash;
  std::vector<std::uint64_t> seeds;
  std::string toolkit_version;
  std::string generated_at;  // excluded from the body
};

inline nlohmann::ordered_json to_json(const DatasetSummary& s) {
  nlohmann::ordered_json j;
  j["name"] = s.name;
  j["documents"] = s.documents;
  j["labels"] = s.labels;
  j["label_counts"] = s.label_counts;
  auto& h = j["labelset_histogram"] = nlohmann::ordered_json::array();
  for (const auto& [set, count] : s.labelset_histogram) {
    h.push_back({{"labelset", labelset_name(set, s.labels)}, {"count", count}});
  }
  j["labelset_imbalance"] = {{"value", s.labelset_imbalance.value},
                             {"degenerate", s.labelset_imbalance.degenerate}};
  j["label_imbalance"] = {{"value", s.label_imbalance.value},
                          {"degenerate", s.label_imbalance.degenerate}};
  j["dropped"] = {{"incomplete", s.prepare.incomplete},
                  {"empty", s.prepare.empty},
                  {"duplicate", s.prepare.duplicate}};
  return j;
}

/// Everything except the generation timestamp; identical inputs give an
/// identical body.
inline nlohmann::ordered_json report_body(const ExperimentReport& r) {
  nlohmann::ordered_json j;
  j["provenance"] = {{"config_hash", r.config_hash},
                     {"seeds", r.seeds},
                     {"toolkit_version", r.toolkit_version}};
  j["folds"] = r.k;
  auto& ds = j["datasets"] = nlohmann::ordered_json::array();
  for (const auto& d : r.datasets) ds.push_back(to_json(d));
  auto& rows = j["experiments"] = nlohmann::ordered_json::array();
  for (const auto& row : r.rows) {
    nlohmann::ordered_json e;
    e["dataset"] = row.dataset;
    e["experiment"] = row.experiment;
    e["macro_fm"] = {{"mean", row.macro_mean()}, {"std", row.macro_std()}, {"folds", row.fold_macro}};
    e["micro_fm"] = {{"mean", row.micro_mean()}, {"std", row.micro_std()}, {"folds", row.fold_micro}};
    e["fold_params"] = row.fold_params;
    e["confusion"] = row.confusion;
    rows.push_back(std::move(e));
  }
  auto& der = j["derived"] = nlohmann::ordered_json::array();
  for (const auto& d : r.derived) {
    nlohmann::ordered_json e{{"name", d.name}, {"measure", d.measure}, {"value", d.value},
                             {"rounded", d.rounded()}};
    if (d.reference) {
      e["reference"] = *d.reference;
      e["matches"] = *d.matches();
    }
    der.push_back(std::move(e));
  }
  return j;
}

inline nlohmann::ordered_json to_json(const ExperimentReport& r) {
  return {{"generated_at", r.generated_at}, {"body", report_body(r)}};
}

// ---------------------------------------------------------------------------

namespace detail {

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

inline std::string file_stem(std::string s) {
  for (auto& c : s)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_')) c = '_';
  return s;
}

inline void write_file(const std::filesystem::path& path, const std::string& content,
                       std::vector<std::filesystem::path>& written) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << content;
  if (!out) throw Error("failed writing " + path.string());
  written.push_back(path);
}

inline std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << std::fixed << v;
  return os.str();
}

}  // namespace detail

/// Writes the report in the requested formats ("json", "csv") into `dir`:
///   json: report.json (everything)
///   csv:  results.csv (experiment table), labelsets_<dataset>.csv
///         (histogram data), confusion_<dataset>_<experiment>.csv, derived.csv
/// Returns the written paths.
inline std::vector<std::filesystem::path> emit_report(const ExperimentReport& report,
                                                      const std::vector<std::string>& formats,
                                                      const std::filesystem::path& dir) {
  if (report.rows.empty()) throw Error("report has no experiments");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw Error("output directory is not writable: " + dir.string());
  }
  std::vector<std::filesystem::path> written;
  for (const auto& format : formats) {
    if (format == "json") {
      detail::write_file(dir / "report.json", to_json(report).dump(2) + "\n", written);
    } else if (format == "csv") {
      std::string table = "dataset,experiment,macro_fm,macro_std,micro_fm,micro_std\n";
      for (const auto& r : report.rows) {
        table += detail::csv_field(r.dataset) + "," + detail::csv_field(r.experiment) + "," +
                 detail::fmt(r.macro_mean()) + "," + detail::fmt(r.macro_std()) + "," +
                 detail::fmt(r.micro_mean()) + "," + detail::fmt(r.micro_std()) + "\n";
      }
      detail::write_file(dir / "results.csv", table, written);
      for (const auto& d : report.datasets) {
        std::string hist = "labelset,count\n";
        for (const auto& [set, count] : d.labelset_histogram) {
          hist += detail::csv_field(labelset_name(set, d.labels)) + "," + std::to_string(count) + "\n";
        }
        detail::write_file(dir / ("labelsets_" + detail::file_stem(d.name) + ".csv"), hist, written);
      }
      for (const auto& r : report.rows) {
        const DatasetSummary* d = nullptr;
        for (const auto& s : report.datasets)
          if (s.name == r.dataset) d = &s;
        std::string grid = "true\\predicted";
        const auto label = [&](std::size_t i) {
          return d && i < d->labels.size() ? d->labels[i] : std::to_string(i);
        };
        for (std::size_t j = 0; j < r.confusion.size(); ++j) grid += "," + detail::csv_field(label(j));
        grid += "\n";
        for (std::size_t i = 0; i < r.confusion.size(); ++i) {
          grid += detail::csv_field(label(i));
          for (double v : r.confusion[i]) grid += "," + detail::fmt(v);
          grid += "\n";
        }
        detail::write_file(
            dir / ("confusion_" + detail::file_stem(r.dataset) + "_" + detail::file_stem(r.experiment) + ".csv"),
            grid, written);
      }
      std::string der = "name,measure,value,rounded,reference,matches\n";
      for (const auto& d : report.derived) {
        der += d.name + "," + d.measure + "," + detail::fmt(d.value) + "," + std::to_string(d.rounded()) + ",";
        if (d.reference) der += detail::fmt(*d.reference) + "," + (*d.matches() ? "yes" : "no");
        else der += ",";
        der += "\n";
      }
      detail::write_file(dir / "derived.csv", der, written);
    } else {
      throw Error("unknown report format '" + format + "' (expected json or csv)");
    }
  }
  return written;
}

}  // namespace emomine
