// emomine command-line interface.

#include <CLI11.hpp>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "emomine/emomine.hpp"

namespace fs = std::filesystem;
using namespace emomine;

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string format;
};

void add_common(CLI::App* sub, Common& c, bool needs_config = true) {
  auto* opt = sub->add_option("--config", c.config, "Experiment config (JSON)");
  if (needs_config) opt->required()->check(CLI::ExistingFile);
  sub->add_option("--seed", c.seed, "Override the config seed");
  sub->add_option("--out", c.out, "Output directory");
  sub->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
}

ExperimentConfig config_of(const Common& c) {
  ExperimentConfig cfg = c.config.empty() ? ExperimentConfig{} : load_config(c.config);
  if (c.seed) cfg.seed = *c.seed;
  if (!c.out.empty()) cfg.output_dir = c.out;
  if (!c.format.empty()) cfg.formats = {c.format};
  return cfg;
}

fs::path out_dir(const ExperimentConfig& cfg) {
  fs::path dir(cfg.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw Error("output directory is not writable: " + dir.string());
  return dir;
}

void write_json(const fs::path& path, const nlohmann::ordered_json& j) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << j.dump(2) << '\n';
  std::cout << path.string() << '\n';
}

std::size_t dataset_index(const ExperimentConfig& cfg, const std::string& name) {
  for (std::size_t i = 0; i < cfg.datasets.size(); ++i)
    if (cfg.datasets[i].name == name) return i;
  if (name.empty() && !cfg.datasets.empty()) return 0;
  throw Error("config has no dataset named '" + name + "'");
}

std::string format_of(const ExperimentConfig& cfg) { return cfg.formats.empty() ? "json" : cfg.formats.front(); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-label emotion mining toolkit"};
  app.set_version_flag("--version", std::string(kToolkitVersion));
  app.require_subcommand(1);

  Common common;

  auto* ingest = app.add_subcommand("ingest", "Raw JSON lines -> canonical dataset (preprocessed, filtered)");
  std::string ingest_in, ingest_labels = "defaults", ingest_name = "dataset";
  ingest->add_option("input", ingest_in, "Raw dataset file")->required()->check(CLI::ExistingFile);
  ingest->add_option("--labels", ingest_labels, "Label vocabulary: defaults, basic or a file");
  ingest->add_option("--name", ingest_name, "Dataset name");
  add_common(ingest, common, false);

  auto* synth = app.add_subcommand("synth", "Generate the synthetic datasets named in a config");
  add_common(synth, common);

  auto* folds = app.add_subcommand("folds", "Emit the fold plan of every dataset");
  add_common(folds, common);

  auto* imbalance = app.add_subcommand("imbalance", "Labelset statistics and histogram data");
  add_common(imbalance, common);

  auto* train = app.add_subcommand("train", "Train one model on one fold and write a checkpoint");
  std::string dataset, model_name = "NB", feature_name = "BOW";
  int fold = 0;
  train->add_option("--dataset", dataset, "Dataset name (default: first)");
  train->add_option("--model", model_name, "NB, RankSVM-LP, RankSVM-PPT or LSTM-Att");
  train->add_option("--features", feature_name, "BOW or WE");
  train->add_option("--fold", fold, "Fold index");
  add_common(train, common);

  auto* eval = app.add_subcommand("eval", "Score a checkpoint on a fold's test split");
  std::string checkpoint;
  eval->add_option("checkpoint", checkpoint, "Checkpoint file")->required()->check(CLI::ExistingFile);
  eval->add_option("--dataset", dataset, "Dataset name (default: first)");
  eval->add_option("--fold", fold, "Fold index");
  add_common(eval, common);

  auto* report = app.add_subcommand("report", "Run the full model x feature grid and write the report");
  add_common(report, common);

  CLI11_PARSE(app, argc, argv);

  try {
    ExperimentConfig cfg = config_of(common);

    if (*ingest) {
      const Preprocessor pre = make_preprocessor(cfg);
      PrepareStats stats;
      auto ds = prepare_dataset(read_dataset_file(ingest_in, resolve_labels(ingest_labels), ingest_name), pre,
                                &stats);
      const auto path = out_dir(cfg) / (ingest_name + ".jsonl");
      write_dataset_file(path.string(), ds);
      std::cout << path.string() << '\n'
                << "kept " << ds.size() << ", dropped incomplete " << stats.incomplete << ", empty "
                << stats.empty << ", duplicate " << stats.duplicate << '\n';
      return 0;
    }

    if (*synth) {
      const auto dir = out_dir(cfg);
      bool any = false;
      for (std::size_t i = 0; i < cfg.datasets.size(); ++i) {
        const auto& d = cfg.datasets[i];
        if (!d.synthetic) continue;
        any = true;
        auto ds = generate_synthetic(*d.synthetic, d.synthetic_seed);
        ds.name = d.name;
        const auto path = dir / (d.name + ".jsonl");
        write_dataset_file(path.string(), ds);
        std::cout << path.string() << '\n';
        if (cfg.synthetic_embedding_dim > 0) {
          const auto table = synthetic_embeddings(*d.synthetic, cfg.synthetic_embedding_dim,
                                                  embedding_seed(d.synthetic_seed, i),
                                                  cfg.synthetic_embedding_spread, cfg.synthetic_embedding_noise);
          const auto vec = dir / (d.name + ".vec");
          std::ofstream out(vec);
          if (!out) throw Error("cannot write " + vec.string());
          write_embeddings(out, table);
          std::cout << vec.string() << '\n';
        }
      }
      if (!any) throw Error("config has no synthetic datasets");
      return 0;
    }

    const auto data = load_datasets(cfg);

    if (*folds) {
      const auto dir = out_dir(cfg);
      for (std::size_t i = 0; i < data.size(); ++i) {
        const auto plan = plan_folds(cfg, data[i], i);
        write_json(dir / ("folds_" + data[i].data.name + ".json"), to_json(plan, data[i].data));
      }
      return 0;
    }

    if (*imbalance) {
      ExperimentReport r;
      for (const auto& ld : data)
        r.datasets.push_back(summarize_dataset(ld.data.name, ld.data.vocabulary, ld.data.documents, ld.prepare));
      const auto dir = out_dir(cfg);
      if (format_of(cfg) == "json") {
        auto j = nlohmann::ordered_json::array();
        for (const auto& s : r.datasets) j.push_back(to_json(s));
        write_json(dir / "imbalance.json", j);
      } else {
        for (const auto& s : r.datasets) {
          const auto path = dir / ("labelsets_" + s.name + ".csv");
          std::ofstream out(path);
          if (!out) throw Error("cannot write " + path.string());
          out << "labelset,count\n";
          for (const auto& [set, count] : s.labelset_histogram)
            out << detail::csv_field(labelset_name(set, s.labels)) << ',' << count << '\n';
          std::cout << path.string() << '\n';
        }
      }
      for (const auto& s : r.datasets) {
        std::cout << s.name << ": " << s.documents << " documents, " << s.labelset_histogram.size()
                  << " labelsets, labelset imbalance " << s.labelset_imbalance.value
                  << (s.labelset_imbalance.degenerate ? " (degenerate)" : "") << ", label imbalance "
                  << s.label_imbalance.value << (s.label_imbalance.degenerate ? " (degenerate)" : "") << '\n';
      }
      return 0;
    }

    if (*train) {
      const auto di = dataset_index(cfg, dataset);
      const auto m = parse_model_kind(model_name);
      const auto f = parse_feature_kind(feature_name);
      const auto plan = plan_folds(cfg, data[di], di);
      const auto o = run_fold(cfg, data[di], di, plan, fold, m, f);
      const auto name = experiment_name(m, f);
      write_json(out_dir(cfg) / (name + "_" + data[di].data.name + "_fold" + std::to_string(fold) + ".json"),
                 checkpoint_to_json(name, data[di].data.vocabulary, o));
      std::cout << name << " fold " << fold << ": Macro-FM " << o.test.macro_fm << ", Micro-FM "
                << o.test.micro_fm << '\n';
      return 0;
    }

    if (*eval) {
      const auto di = dataset_index(cfg, dataset);
      std::ifstream in(checkpoint);
      const auto ck = checkpoint_from_json(nlohmann::json::parse(in), data[di].embeddings);
      const auto& ds = data[di].data;
      if (ck.labels != ds.vocabulary.names()) throw Error("checkpoint labels differ from the dataset labels");
      const auto split = plan_folds(cfg, data[di], di).split(ds, fold);
      std::vector<LabelSet> truth, pred;
      for (auto p : split.test) {
        truth.push_back(ds.documents[p].labels);
        pred.push_back(predict(ck.model, ck.pipeline, ds.documents[p]));
      }
      const auto r = evaluate(truth, pred, ds.vocabulary.size());
      nlohmann::ordered_json j{{"experiment", ck.experiment}, {"dataset", ds.name}, {"fold", fold},
                               {"macro_fm", r.macro_fm}, {"micro_fm", r.micro_fm},
                               {"per_label_f", r.per_label_f}, {"confusion", r.confusion}};
      if (!common.out.empty()) write_json(out_dir(cfg) / "eval.json", j);
      else std::cout << j.dump(2) << '\n';
      return 0;
    }

    if (*report) {
      auto r = run_experiment(cfg, data);
      r.generated_at = [] {
        const auto now = std::chrono::system_clock::now();
        const std::time_t t = std::chrono::system_clock::to_time_t(now);
        char buf[32];
        std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
        return std::string(buf);
      }();
      for (const auto& p : emit_report(r, cfg.formats, cfg.output_dir)) std::cout << p.string() << '\n';
      for (const auto& row : r.rows) {
        std::cout << row.dataset << '\t' << row.experiment << "\tMacro-FM " << row.macro_mean() << " +/- "
                  << row.macro_std() << "\tMicro-FM " << row.micro_mean() << " +/- " << row.micro_std() << '\n';
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
