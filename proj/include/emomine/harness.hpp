#pragma once

// Experiment orchestration: configuration, per-fold feature pipelines,
// model fitting with validation tuning, and report assembly.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "emomine/corpus.hpp"
#include "emomine/error.hpp"
#include "emomine/features.hpp"
#include "emomine/labelsets.hpp"
#include "emomine/lstm.hpp"
#include "emomine/metrics.hpp"
#include "emomine/nb.hpp"
#include "emomine/ranksvm.hpp"
#include "emomine/report.hpp"
#include "emomine/rng.hpp"
#include "emomine/stopwords.hpp"

#ifndef EMOMINE_VERSION
#define EMOMINE_VERSION "0.0.0"
#endif

namespace emomine {

inline constexpr const char* kToolkitVersion = EMOMINE_VERSION;

enum class ModelKind { kNB, kRankSvmLP, kRankSvmPPT, kLstmAtt };

inline std::string to_string(ModelKind m) {
  switch (m) {
    case ModelKind::kNB: return "NB";
    case ModelKind::kRankSvmLP: return "RankSVM-LP";
    case ModelKind::kRankSvmPPT: return "RankSVM-PPT";
    case ModelKind::kLstmAtt: return "LSTM-Att";
  }
  return "?";
}

inline ModelKind parse_model_kind(std::string_view s) {
  for (auto m : {ModelKind::kNB, ModelKind::kRankSvmLP, ModelKind::kRankSvmPPT, ModelKind::kLstmAtt})
    if (s == to_string(m)) return m;
  throw Error("unknown model '" + std::string(s) + "' (expected NB, RankSVM-LP, RankSVM-PPT or LSTM-Att)");
}

/// Algorithm name suffixed by feature name, e.g. "RankSVM-LP-BOW".
inline std::string experiment_name(ModelKind m, FeatureKind f) { return to_string(m) + "-" + to_string(f); }

// ---------------------------------------------------------------------------
// Synthetic spec (de)serialization

inline void apply_decay(std::vector<std::pair<LabelSet, double>>& sets, double decay) {
  double scale = 1.0;
  for (auto& [_, w] : sets) {
    w *= scale;
    scale *= decay;
  }
}

/// Singletons (weight 1) plus ring pairs {i, i+1 mod n} (weight `pair_weight`);
/// the j-th labelset in that order is scaled by decay^j.
inline std::vector<std::pair<LabelSet, double>> ring_labelsets(std::size_t n, double pair_weight,
                                                               double decay = 1.0) {
  std::vector<std::pair<LabelSet, double>> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back({{static_cast<LabelId>(i)}, 1.0});
  if (n > 1 && pair_weight > 0.0) {
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t j = (i + 1) % n;
      if (n == 2 && i == 1) break;
      out.push_back({make_label_set({static_cast<LabelId>(i), static_cast<LabelId>(j)}), pair_weight});
    }
  }
  apply_decay(out, decay);
  return out;
}

/// Singletons (weight 1) plus every pair {i, j} (weight `pair_weight`), in
/// that order, scaled by decay^j like ring_labelsets.
inline std::vector<std::pair<LabelSet, double>> all_pairs_labelsets(std::size_t n, double pair_weight,
                                                                    double decay = 1.0) {
  std::vector<std::pair<LabelSet, double>> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back({{static_cast<LabelId>(i)}, 1.0});
  if (pair_weight > 0.0) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        out.push_back({{static_cast<LabelId>(i), static_cast<LabelId>(j)}, pair_weight});
  }
  apply_decay(out, decay);
  return out;
}

inline nlohmann::ordered_json to_json(const SynthSpec& s) {
  nlohmann::ordered_json j;
  j["label_names"] = s.label_names;
  j["lexicon"] = s.lexicon;
  auto& ls = j["labelsets"] = nlohmann::ordered_json::array();
  for (const auto& [set, w] : s.labelset_weights) ls.push_back({{"labels", set}, {"weight", w}});
  j["documents"] = s.documents;
  j["min_length"] = s.min_length;
  j["max_length"] = s.max_length;
  j["keywords_per_label"] = s.keywords_per_label;
  j["noise_rate"] = s.noise_rate;
  j["noise_vocabulary"] = s.noise_vocabulary;
  return j;
}

/// Accepts either the full form written by to_json or a shorthand:
///   "labels": count | "basic" | "defaults" | [names],
///   "keywords": per-label lexicon size,
///   "labelsets": [{"labels": [...], "weight": w}] | {"pattern": "ring" | "all_pairs", "pair_weight": w, "decay": d}
inline SynthSpec synth_spec_from_json(const nlohmann::json& j) {
  SynthSpec s;
  std::vector<std::string> names;
  if (j.contains("label_names")) {
    names = j.at("label_names").get<std::vector<std::string>>();
  } else if (j.contains("labels")) {
    const auto& l = j.at("labels");
    if (l.is_number_integer()) {
      for (int i = 0; i < l.get<int>(); ++i) names.push_back("l" + std::to_string(i));
    } else if (l.is_string()) {
      const auto v = l.get<std::string>();
      if (v == "basic") names = LabelVocabulary::basic().names();
      else if (v == "defaults") names = LabelVocabulary::defaults().names();
      else throw Error("synthetic labels must be a count, \"basic\", \"defaults\" or a list");
    } else {
      names = l.get<std::vector<std::string>>();
    }
  } else {
    throw Error("synthetic spec needs \"labels\" or \"label_names\"");
  }
  if (j.contains("lexicon")) {
    s.label_names = names;
    s.lexicon = j.at("lexicon").get<std::vector<std::vector<std::string>>>();
  } else {
    s = SynthSpec::keyword_corpus(names.size(), j.value("keywords", std::size_t{4}));
    s.label_names = names;
  }
  const auto& ls = j.at("labelsets");
  if (ls.is_object()) {
    const auto pattern = ls.value("pattern", "");
    const double pw = ls.value("pair_weight", 0.5);
    const double decay = ls.value("decay", 1.0);
    if (pattern == "ring") s.labelset_weights = ring_labelsets(names.size(), pw, decay);
    else if (pattern == "all_pairs") s.labelset_weights = all_pairs_labelsets(names.size(), pw, decay);
    else throw Error("unknown labelset pattern '" + pattern + "' (expected ring or all_pairs)");
  } else {
    for (const auto& e : ls) {
      std::vector<LabelId> ids;
      for (const auto& l : e.at("labels")) {
        if (l.is_string()) {
          auto it = std::find(names.begin(), names.end(), l.get<std::string>());
          if (it == names.end()) throw Error("synthetic labelset names unknown label " + l.dump());
          ids.push_back(static_cast<LabelId>(it - names.begin()));
        } else {
          ids.push_back(l.get<LabelId>());
        }
      }
      s.labelset_weights.push_back({make_label_set(ids), e.at("weight").get<double>()});
    }
  }
  s.documents = j.value("documents", s.documents);
  s.min_length = j.value("min_length", s.min_length);
  s.max_length = j.value("max_length", s.max_length);
  s.keywords_per_label = j.value("keywords_per_label", s.keywords_per_label);
  s.noise_rate = j.value("noise_rate", s.noise_rate);
  s.noise_vocabulary = j.value("noise_vocabulary", s.noise_vocabulary);
  return s;
}

// ---------------------------------------------------------------------------
// Configuration

struct DatasetConfig {
  std::string name;
  std::string path;                      // JSON-lines dataset file
  std::string labels = "defaults";       // "defaults", "basic" or a label file path
  std::optional<SynthSpec> synthetic;    // generated instead of read
  std::uint64_t synthetic_seed = 0;
};

struct ExperimentConfig {
  std::vector<DatasetConfig> datasets;
  std::string lexicon_path;    // empty: built-in lexicon
  std::string stopwords_path;  // empty: built-in list
  std::vector<FeatureKind> features{FeatureKind::kBow, FeatureKind::kEmb};
  std::vector<ModelKind> models{ModelKind::kNB, ModelKind::kRankSvmLP, ModelKind::kRankSvmPPT,
                                ModelKind::kLstmAtt};
  int k = 5;
  double validation_fraction = 0.1;
  std::uint64_t seed = 1;
  std::size_t vocab_max_size = 5000;
  std::size_t vocab_min_df = 3;

  double nb_alpha = 1.0;
  bool nb_balanced = true;

  std::vector<double> ranksvm_c_grid{0.1, 1.0, 10.0};
  int ranksvm_epochs = 50;
  std::size_t ppt_min_count = 5;

  LstmHyperParams lstm;
  bool lstm_tune_threshold = true;
  std::vector<double> lstm_threshold_grid = default_threshold_grid();

  std::string embeddings_path;
  std::size_t embeddings_dim = 200;
  std::size_t synthetic_embedding_dim = 0;  // > 0: generate vectors for synthetic datasets
  double synthetic_embedding_spread = 0.3;
  double synthetic_embedding_noise = 0.5;

  std::string output_dir = "out";
  std::vector<std::string> formats{"json", "csv"};
  nlohmann::json reference = nlohmann::json::object();  // derived-statistic reference values
};

inline nlohmann::ordered_json to_json(const ExperimentConfig& c) {
  nlohmann::ordered_json j;
  auto& ds = j["datasets"] = nlohmann::ordered_json::array();
  for (const auto& d : c.datasets) {
    nlohmann::ordered_json e{{"name", d.name}};
    if (d.synthetic) {
      e["synthetic"] = to_json(*d.synthetic);
      e["seed"] = d.synthetic_seed;
    } else {
      e["path"] = d.path;
      e["labels"] = d.labels;
    }
    ds.push_back(std::move(e));
  }
  j["lexicon"] = c.lexicon_path;
  j["stopwords"] = c.stopwords_path;
  auto& f = j["features"] = nlohmann::ordered_json::array();
  for (auto k : c.features) f.push_back(to_string(k));
  auto& m = j["models"] = nlohmann::ordered_json::array();
  for (auto k : c.models) m.push_back(to_string(k));
  j["folds"] = c.k;
  j["validation_fraction"] = c.validation_fraction;
  j["seed"] = c.seed;
  j["vocabulary"] = {{"max_size", c.vocab_max_size}, {"min_df", c.vocab_min_df}};
  j["nb"] = {{"alpha", c.nb_alpha}, {"balanced", c.nb_balanced}};
  j["ranksvm"] = {{"c_grid", c.ranksvm_c_grid}, {"epochs", c.ranksvm_epochs},
                  {"ppt_min_count", c.ppt_min_count}};
  const auto& h = c.lstm;
  j["lstm"] = {{"d_emb", h.d_emb},
               {"d_h", h.d_h},
               {"d_a", h.d_a},
               {"r", h.r},
               {"batch_size", h.batch_size},
               {"epochs", h.epochs},
               {"max_length", h.max_length},
               {"learning_rate", h.learning_rate},
               {"beta1", h.beta1},
               {"beta2", h.beta2},
               {"epsilon", h.epsilon},
               {"init_scale", h.init_scale},
               {"threshold", h.threshold},
               {"tune_threshold", c.lstm_tune_threshold},
               {"threshold_grid", c.lstm_threshold_grid}};
  j["embeddings"] = {{"path", c.embeddings_path},
                     {"dim", c.embeddings_dim},
                     {"synthetic_dim", c.synthetic_embedding_dim},
                     {"synthetic_spread", c.synthetic_embedding_spread},
                     {"synthetic_noise", c.synthetic_embedding_noise}};
  j["output_dir"] = c.output_dir;
  j["formats"] = c.formats;
  j["reference"] = c.reference;
  return j;
}

/// Missing keys keep their defaults; unknown top-level keys are rejected.
inline ExperimentConfig config_from_json(const nlohmann::json& j) {
  static const std::set<std::string> known{
      "datasets", "lexicon", "stopwords", "features", "models", "folds", "validation_fraction",
      "seed", "vocabulary", "nb", "ranksvm", "lstm", "embeddings", "output_dir", "formats",
      "reference", "comment"};
  if (!j.is_object()) throw Error("config must be a JSON object");
  for (const auto& [key, _] : j.items())
    if (!known.contains(key)) throw Error("unknown config key '" + key + "'");

  ExperimentConfig c;
  try {
    for (const auto& d : j.value("datasets", nlohmann::json::array())) {
      DatasetConfig dc;
      dc.name = d.at("name").get<std::string>();
      if (d.contains("synthetic")) {
        dc.synthetic = synth_spec_from_json(d.at("synthetic"));
        dc.synthetic_seed = d.value("seed", std::uint64_t{0});
      } else {
        dc.path = d.at("path").get<std::string>();
        dc.labels = d.value("labels", dc.labels);
      }
      c.datasets.push_back(std::move(dc));
    }
    c.lexicon_path = j.value("lexicon", c.lexicon_path);
    c.stopwords_path = j.value("stopwords", c.stopwords_path);
    if (j.contains("features")) {
      c.features.clear();
      for (const auto& f : j.at("features")) c.features.push_back(parse_feature_kind(f.get<std::string>()));
    }
    if (j.contains("models")) {
      c.models.clear();
      for (const auto& m : j.at("models")) c.models.push_back(parse_model_kind(m.get<std::string>()));
    }
    c.k = j.value("folds", c.k);
    c.validation_fraction = j.value("validation_fraction", c.validation_fraction);
    c.seed = j.value("seed", c.seed);
    if (j.contains("vocabulary")) {
      const auto& v = j.at("vocabulary");
      c.vocab_max_size = v.value("max_size", c.vocab_max_size);
      c.vocab_min_df = v.value("min_df", c.vocab_min_df);
    }
    if (j.contains("nb")) {
      const auto& v = j.at("nb");
      c.nb_alpha = v.value("alpha", c.nb_alpha);
      c.nb_balanced = v.value("balanced", c.nb_balanced);
    }
    if (j.contains("ranksvm")) {
      const auto& v = j.at("ranksvm");
      c.ranksvm_c_grid = v.value("c_grid", c.ranksvm_c_grid);
      c.ranksvm_epochs = v.value("epochs", c.ranksvm_epochs);
      c.ppt_min_count = v.value("ppt_min_count", c.ppt_min_count);
    }
    if (j.contains("lstm")) {
      const auto& v = j.at("lstm");
      auto& h = c.lstm;
      h.d_emb = v.value("d_emb", h.d_emb);
      h.d_h = v.value("d_h", h.d_h);
      h.d_a = v.value("d_a", h.d_a);
      h.r = v.value("r", h.r);
      h.batch_size = v.value("batch_size", h.batch_size);
      h.epochs = v.value("epochs", h.epochs);
      h.max_length = v.value("max_length", h.max_length);
      h.learning_rate = v.value("learning_rate", h.learning_rate);
      h.beta1 = v.value("beta1", h.beta1);
      h.beta2 = v.value("beta2", h.beta2);
      h.epsilon = v.value("epsilon", h.epsilon);
      h.init_scale = v.value("init_scale", h.init_scale);
      h.threshold = v.value("threshold", h.threshold);
      c.lstm_tune_threshold = v.value("tune_threshold", c.lstm_tune_threshold);
      c.lstm_threshold_grid = v.value("threshold_grid", c.lstm_threshold_grid);
    }
    if (j.contains("embeddings")) {
      const auto& v = j.at("embeddings");
      c.embeddings_path = v.value("path", c.embeddings_path);
      c.embeddings_dim = v.value("dim", c.embeddings_dim);
      c.synthetic_embedding_dim = v.value("synthetic_dim", c.synthetic_embedding_dim);
      c.synthetic_embedding_spread = v.value("synthetic_spread", c.synthetic_embedding_spread);
      c.synthetic_embedding_noise = v.value("synthetic_noise", c.synthetic_embedding_noise);
    }
    c.output_dir = j.value("output_dir", c.output_dir);
    c.formats = j.value("formats", c.formats);
    if (j.contains("reference")) c.reference = j.at("reference");
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("invalid config: ") + e.what());
  }
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error("config " + path + ": " + e.what());
  }
  return config_from_json(j);
}

/// FNV-1a over the canonical config serialization, as 16 hex digits.
inline std::string config_hash(const ExperimentConfig& c) {
  const std::string s = to_json(c).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << h;
  return os.str();
}

/// Fail-fast checks run before any data is loaded or any model is trained.
inline void validate_config(const ExperimentConfig& c) {
  const auto need_file = [](const std::string& p, const std::string& what) {
    if (!std::filesystem::is_regular_file(p)) throw Error(what + " not found: " + p);
  };
  if (c.datasets.empty()) throw Error("config lists no datasets");
  if (c.features.empty() || c.models.empty()) throw Error("config lists no features or no models");
  if (c.k < 2) throw Error("folds must be at least 2");
  if (!(c.validation_fraction > 0.0 && c.validation_fraction < 1.0)) {
    throw Error("validation_fraction must lie in (0, 1)");
  }
  if (c.ranksvm_c_grid.empty()) throw Error("ranksvm.c_grid is empty");
  for (double v : c.ranksvm_c_grid)
    if (!(v > 0.0)) throw Error("ranksvm.c_grid values must be positive");
  if (c.lstm_tune_threshold && c.lstm_threshold_grid.empty()) throw Error("lstm.threshold_grid is empty");
  std::set<std::string> names;
  for (const auto& d : c.datasets) {
    if (d.name.empty()) throw Error("dataset without a name");
    if (!names.insert(d.name).second) throw Error("duplicate dataset name '" + d.name + "'");
    if (!d.synthetic) {
      need_file(d.path, "dataset file");
      if (d.labels != "defaults" && d.labels != "basic") need_file(d.labels, "label vocabulary");
    }
  }
  if (!c.lexicon_path.empty()) need_file(c.lexicon_path, "lexicon");
  if (!c.stopwords_path.empty()) need_file(c.stopwords_path, "stop-word list");
  const bool wants_we =
      std::find(c.features.begin(), c.features.end(), FeatureKind::kEmb) != c.features.end();
  if (wants_we) {
    if (!c.embeddings_path.empty()) {
      need_file(c.embeddings_path, "embedding file");
    } else {
      for (const auto& d : c.datasets) {
        if (!d.synthetic || c.synthetic_embedding_dim == 0) {
          throw Error("WE experiments need an embedding file (embeddings.path)");
        }
      }
    }
  }
  for (const auto& f : c.formats)
    if (f != "json" && f != "csv") throw Error("unknown report format '" + f + "'");
}

// ---------------------------------------------------------------------------
// Data loading

struct LoadedDataset {
  Dataset data;
  PrepareStats prepare;
  std::shared_ptr<const EmbeddingTable> embeddings;  // null when no WE experiment is configured
};

inline LabelVocabulary resolve_labels(const std::string& spec) {
  if (spec == "defaults") return LabelVocabulary::defaults();
  if (spec == "basic") return LabelVocabulary::basic();
  std::ifstream in(spec);
  if (!in) throw Error("cannot open label vocabulary " + spec);
  return load_label_vocabulary(in);
}

inline Preprocessor make_preprocessor(const ExperimentConfig& c) {
  LabelLexicon lexicon = LabelLexicon::defaults();
  if (!c.lexicon_path.empty()) {
    std::ifstream in(c.lexicon_path);
    if (!in) throw Error("cannot open lexicon " + c.lexicon_path);
    lexicon = parse_lexicon(in);
  }
  StopWords stop = default_stopwords();
  if (!c.stopwords_path.empty()) {
    std::ifstream in(c.stopwords_path);
    if (!in) throw Error("cannot open stop-word list " + c.stopwords_path);
    stop = load_stopwords(in);
  }
  return Preprocessor(std::move(lexicon), std::move(stop));
}

inline std::uint64_t embedding_seed(std::uint64_t seed, std::size_t dataset) {
  return mix_seed(seed, 0x5eed0000ULL + dataset);
}

/// File datasets are read and preprocessed; synthetic datasets are generated
/// already tokenized. Validation runs first.
inline std::vector<LoadedDataset> load_datasets(const ExperimentConfig& c) {
  validate_config(c);
  const bool wants_we =
      std::find(c.features.begin(), c.features.end(), FeatureKind::kEmb) != c.features.end();
  std::shared_ptr<const EmbeddingTable> file_table;
  if (wants_we && !c.embeddings_path.empty()) {
    std::ifstream in(c.embeddings_path);
    if (!in) throw Error("cannot open embedding file " + c.embeddings_path);
    file_table = std::make_shared<EmbeddingTable>(load_embeddings(in, c.embeddings_dim));
  }
  const Preprocessor pre = make_preprocessor(c);
  std::vector<LoadedDataset> out;
  for (std::size_t i = 0; i < c.datasets.size(); ++i) {
    const auto& d = c.datasets[i];
    LoadedDataset ld;
    if (d.synthetic) {
      ld.data = generate_synthetic(*d.synthetic, d.synthetic_seed);
      ld.data.name = d.name;
      if (wants_we) {
        ld.embeddings = file_table ? file_table
                                   : std::make_shared<EmbeddingTable>(synthetic_embeddings(
                                         *d.synthetic, c.synthetic_embedding_dim,
                                         embedding_seed(d.synthetic_seed, i),
                                         c.synthetic_embedding_spread, c.synthetic_embedding_noise));
      }
    } else {
      ld.data = prepare_dataset(read_dataset_file(d.path, resolve_labels(d.labels), d.name), pre,
                                &ld.prepare);
      ld.embeddings = file_table;
    }
    out.push_back(std::move(ld));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Feature pipeline (fitted on a fold's training split only)

struct FeaturePipeline {
  FeatureKind kind = FeatureKind::kBow;
  Vocabulary vocab;
  MinMaxNormalizer normalizer;  // WE only
  std::shared_ptr<const EmbeddingTable> table;

  FeatureVector vector(const Document& doc) const {
    if (kind == FeatureKind::kBow) return vectorize_bow(doc, vocab);
    return minmax_apply(normalizer, embed_average(doc, *table));
  }
};

inline FeaturePipeline fit_pipeline(FeatureKind kind, const std::vector<const Document*>& train,
                                    const ExperimentConfig& c,
                                    std::shared_ptr<const EmbeddingTable> table) {
  FeaturePipeline p;
  p.kind = kind;
  std::vector<Document> docs;
  docs.reserve(train.size());
  for (const auto* d : train) docs.push_back(*d);
  p.vocab = build_vocabulary(docs, c.vocab_max_size, c.vocab_min_df);
  if (kind == FeatureKind::kEmb) {
    if (!table) throw Error("WE features need an embedding table");
    p.table = std::move(table);
    std::vector<FeatureVector> raw;
    for (const auto* d : train) raw.push_back(embed_average(*d, *p.table));
    p.normalizer = minmax_fit(raw);
  }
  return p;
}

using TrainedModel = std::variant<NBModel, RankSVMModel, LSTMAttModel>;

inline LabelSet predict(const TrainedModel& model, const FeaturePipeline& p, const Document& doc) {
  if (const auto* nb = std::get_if<NBModel>(&model)) return predict_nb(*nb, p.vector(doc));
  if (const auto* svm = std::get_if<RankSVMModel>(&model)) return predict_ranksvm(*svm, p.vector(doc));
  const auto& lstm = std::get<LSTMAttModel>(model);
  return predict_multilabel(lstm, token_ids(doc, p.vocab, lstm.hyper.max_length));
}

struct FoldOutcome {
  EvalResult test;
  nlohmann::ordered_json params;  // tuned values for this fold
  TrainedModel model;
  FeaturePipeline pipeline;
};

inline std::uint64_t fold_seed(std::uint64_t seed, std::size_t dataset, int fold, ModelKind m,
                               FeatureKind f) {
  const std::uint64_t stream = (static_cast<std::uint64_t>(dataset) << 32) |
                               (static_cast<std::uint64_t>(fold) << 8) |
                               (static_cast<std::uint64_t>(m) << 2) | static_cast<std::uint64_t>(f);
  return mix_seed(seed, stream);
}

inline std::uint64_t fold_plan_seed(std::uint64_t seed, std::size_t dataset) {
  return mix_seed(seed, 0xf01d0000ULL + dataset);
}

/// Trains one (model, feature) experiment on one fold: pipeline and costs
/// from the training split, tuning on the validation split, scores on the
/// test split.
inline FoldOutcome run_fold(const ExperimentConfig& c, const LoadedDataset& ld, std::size_t dataset_index,
                            const FoldPlan& plan, int fold, ModelKind model, FeatureKind feature) {
  const Dataset& ds = ld.data;
  const auto split = plan.split(ds, fold);
  if (split.train.empty() || split.validation.empty() || split.test.empty()) {
    throw Error("fold " + std::to_string(fold) + " of '" + ds.name + "' has an empty split");
  }
  const auto docs_of = [&](const std::vector<std::size_t>& pos) {
    std::vector<const Document*> out;
    for (auto p : pos) out.push_back(&ds.documents[p]);
    return out;
  };
  const auto train_docs = docs_of(split.train);
  const auto val_docs = docs_of(split.validation);
  const auto test_docs = docs_of(split.test);
  const std::size_t n_labels = ds.vocabulary.size();
  const std::uint64_t seed = fold_seed(c.seed, dataset_index, fold, model, feature);

  FoldOutcome out{{}, nlohmann::ordered_json::object(), NBModel{},
                  fit_pipeline(feature, train_docs, c, ld.embeddings)};
  const auto& pipe = out.pipeline;
  const auto labeled = [&](const std::vector<const Document*>& docs) {
    std::vector<LabeledVector> v;
    v.reserve(docs.size());
    for (const auto* d : docs) v.push_back({pipe.vector(*d), d->labels});
    return v;
  };
  const auto score = [&](const TrainedModel& m, const std::vector<const Document*>& docs) {
    std::vector<LabelSet> truth, pred;
    for (const auto* d : docs) {
      truth.push_back(d->labels);
      pred.push_back(predict(m, pipe, *d));
    }
    return evaluate(truth, pred, n_labels);
  };

  switch (model) {
    case ModelKind::kNB: {
      const auto train = labeled(train_docs);
      out.model = train_nb_ova(train, n_labels, c.nb_alpha, c.nb_balanced, seed);
      out.params["alpha"] = c.nb_alpha;
      break;
    }
    case ModelKind::kRankSvmLP:
    case ModelKind::kRankSvmPPT: {
      const CostMode mode = model == ModelKind::kRankSvmLP ? CostMode::kLP : CostMode::kPPT;
      const auto all = labeled(train_docs);
      std::vector<std::pair<std::string, LabelSet>> ids;
      for (const auto* d : train_docs) ids.emplace_back(d->id, d->labels);
      const auto costs = derive_costs(ids, mode, mode == CostMode::kPPT ? c.ppt_min_count : 1);
      std::vector<LabeledVector> train;
      std::vector<double> lambda;
      for (std::size_t i = 0; i < all.size(); ++i) {
        if (!costs.keep[i]) continue;
        train.push_back(all[i]);
        lambda.push_back(costs.costs[i]);
      }
      std::optional<RankSVMModel> best;
      double best_fm = -1.0;
      for (double C : c.ranksvm_c_grid) {
        RankSVMParams params{C, c.ranksvm_epochs, 0.0, seed};
        auto m = train_ranksvm(train, n_labels, lambda, params);
        m.kind = feature;
        m.mode = mode;
        m.min_count = mode == CostMode::kPPT ? c.ppt_min_count : 1;
        const double fm = score(m, val_docs).micro_fm;
        if (fm > best_fm) {
          best_fm = fm;
          best = std::move(m);
        }
      }
      out.params["C"] = best->params.C;
      out.params["validation_micro_fm"] = best_fm;
      if (mode == CostMode::kPPT) {
        out.params["reassigned"] = costs.reassigned;
        out.params["dropped"] = all.size() - train.size();
      }
      out.model = std::move(*best);
      break;
    }
    case ModelKind::kLstmAtt: {
      LstmHyperParams hp = c.lstm;
      hp.seed = seed;
      if (feature == FeatureKind::kEmb) hp.d_emb = pipe.table->dim;
      auto m = init_lstm(hp, pipe.vocab.size() + 1, n_labels);
      if (feature == FeatureKind::kEmb) load_pretrained(m, pipe.vocab, *pipe.table);
      const auto seqs = [&](const std::vector<const Document*>& docs) {
        std::vector<SequenceExample> v;
        for (const auto* d : docs) v.push_back({token_ids(*d, pipe.vocab, hp.max_length), d->labels});
        return v;
      };
      const auto train = seqs(train_docs);
      const auto val = seqs(val_docs);
      auto [trained, curve] = train_lstm(std::move(m), train, val);
      if (c.lstm_tune_threshold) trained.threshold = tune_threshold(trained, val, c.lstm_threshold_grid);
      out.params["epoch"] = curve.chosen_epoch;
      out.params["threshold"] = trained.threshold;
      out.model = std::move(trained);
      break;
    }
  }
  out.test = score(out.model, test_docs);
  return out;
}

// ---------------------------------------------------------------------------
// Checkpoints: model plus the fitted feature pipeline (embedding vectors are
// not stored; WE checkpoints need the same embedding source to score).

inline nlohmann::ordered_json checkpoint_to_json(const std::string& experiment, const LabelVocabulary& labels,
                                                 const FoldOutcome& o) {
  nlohmann::ordered_json j;
  j["format"] = "emomine-checkpoint";
  j["version"] = 1;
  j["experiment"] = experiment;
  j["labels"] = labels.names();
  j["features"] = {{"kind", to_string(o.pipeline.kind)},
                   {"vocabulary", o.pipeline.vocab.terms},
                   {"frequencies", o.pipeline.vocab.frequencies},
                   {"max_size", o.pipeline.vocab.max_size},
                   {"min_df", o.pipeline.vocab.min_df}};
  if (o.pipeline.kind == FeatureKind::kEmb) j["features"]["normalizer"] = to_json(o.pipeline.normalizer);
  j["params"] = o.params;
  std::visit([&](const auto& m) { j["model"] = to_json(m); }, o.model);
  return j;
}

struct Checkpoint {
  std::string experiment;
  std::vector<std::string> labels;
  FeaturePipeline pipeline;
  TrainedModel model;
};

inline Checkpoint checkpoint_from_json(const nlohmann::json& j,
                                       std::shared_ptr<const EmbeddingTable> table = nullptr) {
  if (j.value("format", "") != "emomine-checkpoint" || j.value("version", 0) != 1) {
    throw Error("not an emomine checkpoint (or unsupported version)");
  }
  Checkpoint c;
  c.experiment = j.at("experiment").get<std::string>();
  c.labels = j.at("labels").get<std::vector<std::string>>();
  const auto& f = j.at("features");
  c.pipeline.kind = parse_feature_kind(f.at("kind").get<std::string>());
  c.pipeline.vocab = make_vocabulary(f.at("vocabulary").get<std::vector<std::string>>(),
                                     f.at("frequencies").get<std::vector<std::size_t>>(),
                                     f.at("max_size").get<std::size_t>(), f.at("min_df").get<std::size_t>());
  if (c.pipeline.kind == FeatureKind::kEmb) {
    if (!table) throw Error("WE checkpoint needs an embedding table");
    c.pipeline.normalizer = minmax_from_json(f.at("normalizer"));
    c.pipeline.table = std::move(table);
  }
  const auto& m = j.at("model");
  const auto format = m.value("format", "");
  if (format == "emomine-nb") c.model = nb_from_json(m);
  else if (format == "emomine-ranksvm") c.model = ranksvm_from_json(m);
  else if (format == "emomine-lstm-att") c.model = lstm_from_json(m);
  else throw Error("unknown model format '" + format + "'");
  return c;
}

// ---------------------------------------------------------------------------

inline FoldPlan plan_folds(const ExperimentConfig& c, const LoadedDataset& ld, std::size_t dataset_index) {
  return split_folds(ld.data, c.k, c.validation_fraction, fold_plan_seed(c.seed, dataset_index));
}

/// Runs every configured (model, feature) pair over k folds of every dataset.
/// Derived statistics use datasets[0] as base and datasets[1] as extended.
inline ExperimentReport run_experiment(const ExperimentConfig& c, std::vector<LoadedDataset> data) {
  ExperimentReport report;
  report.k = c.k;
  report.config_hash = config_hash(c);
  report.toolkit_version = kToolkitVersion;
  report.seeds.push_back(c.seed);
  for (const auto& d : c.datasets)
    if (d.synthetic) report.seeds.push_back(d.synthetic_seed);

  for (std::size_t di = 0; di < data.size(); ++di) {
    const auto& ld = data[di];
    report.datasets.push_back(
        summarize_dataset(ld.data.name, ld.data.vocabulary, ld.data.documents, ld.prepare));
    const auto plan = plan_folds(c, ld, di);
    for (auto model : c.models) {
      for (auto feature : c.features) {
        ExperimentRow row;
        row.dataset = ld.data.name;
        row.experiment = experiment_name(model, feature);
        row.family = to_string(model);
        row.features = to_string(feature);
        std::vector<Matrix> confusions;
        for (int f = 0; f < c.k; ++f) {
          const auto o = run_fold(c, ld, di, plan, f, model, feature);
          row.fold_macro.push_back(o.test.macro_fm * 100.0);
          row.fold_micro.push_back(o.test.micro_fm * 100.0);
          row.fold_params.push_back(o.params);
          confusions.push_back(o.test.confusion);
        }
        row.confusion = average_matrices(confusions);
        report.rows.push_back(std::move(row));
      }
    }
  }
  if (data.size() >= 2) {
    report.derived = derive_statistics(report.rows, data[0].data.name, data[1].data.name, c.reference);
  }
  return report;
}

inline ExperimentReport run_experiment(const ExperimentConfig& c) {
  return run_experiment(c, load_datasets(c));
}

}  // namespace emomine
