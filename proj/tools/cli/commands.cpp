#include "commands.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include <detectkit/classifiers.hpp>
#include <detectkit/corpus_stats.hpp>
#include <detectkit/detectors.hpp>
#include <detectkit/embeddings.hpp>
#include <detectkit/error.hpp>
#include <detectkit/eval.hpp>
#include <detectkit/ingest.hpp>
#include <detectkit/ngram_lm.hpp>
#include <detectkit/zeroshot.hpp>

#include "run_config.hpp"

namespace fs = std::filesystem;
using OJson = nlohmann::ordered_json;

namespace detectkit::cli {

namespace {

constexpr const char* kCorpusFile = "corpus.jsonl";
constexpr const char* kSplitsFile = "splits.json";
constexpr const char* kStatsFile = "stats.json";
constexpr const char* kEmbeddingsFile = "embeddings.txt";
constexpr const char* kModelFile = "model.json";
constexpr const char* kLmFile = "lm.json";
constexpr const char* kZeroshotFile = "zeroshot.json";
constexpr const char* kValidationFile = "validation_metrics.json";
constexpr const char* kMetricsFile = "metrics.json";
constexpr const char* kRobustnessFile = "robustness.json";

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw Error(ErrorCode::Io, "cannot create output directory " + dir.string());
  }
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << content;
  out.flush();
  if (!out) throw Error(ErrorCode::Io, "failed writing " + path.string());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void require_input(const fs::path& path, const std::string& what) {
  if (!fs::exists(path)) throw Error(ErrorCode::ParseError, what + " not found: " + path.string());
}

std::string fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

struct Workspace {
  Corpus corpus;
  Splits splits;
};

Workspace load_workspace(const RunConfig& cfg) {
  const fs::path corpus_path = cfg.output_dir / kCorpusFile;
  const fs::path splits_path = cfg.output_dir / kSplitsFile;
  require_input(corpus_path, "ingested corpus (run 'ingest' first)");
  require_input(splits_path, "split manifest (run 'ingest' first)");

  Workspace ws;
  std::map<std::string, Document> by_id;
  std::istringstream lines(read_file(corpus_path));
  std::string line;
  std::size_t line_no = 0;
  try {
    while (std::getline(lines, line)) {
      ++line_no;
      if (line.empty()) continue;
      const auto j = nlohmann::json::parse(line);
      Document doc;
      doc.id = j.at("id").get<std::string>();
      doc.label = parse_label(j.at("label").get<std::string>());
      doc.body = j.at("body").get<std::string>();
      if (j.contains("question") && j["question"].is_string()) {
        doc.source_question = j["question"].get<std::string>();
      }
      by_id.emplace(doc.id, doc);
      ws.corpus.add(std::move(doc));
    }
    const auto manifest = nlohmann::json::parse(read_file(splits_path));
    auto fill = [&](const char* key, Corpus& target) {
      for (const auto& id : manifest.at(key)) {
        auto it = by_id.find(id.get<std::string>());
        if (it == by_id.end()) throw Error(ErrorCode::ParseError, "split manifest names unknown id");
        target.add(it->second);
      }
    };
    fill("train", ws.splits.train);
    fill("val", ws.splits.val);
    fill("test", ws.splits.test);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, "corrupt workspace file (line " + std::to_string(line_no) +
                                           "): " + e.what());
  }
  return ws;
}

std::optional<LabeledParses> load_parses(const RunConfig& cfg) {
  if (!cfg.conllu_human) return std::nullopt;
  require_input(*cfg.conllu_human, "CoNLL-U file");
  require_input(*cfg.conllu_machine, "CoNLL-U file");
  LabeledParses parses;
  parses.human = load_conllu(*cfg.conllu_human);
  parses.machine = load_conllu(*cfg.conllu_machine);
  return parses;
}

int cmd_ingest(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  require_input(cfg.hc3, "HC3 file");
  std::vector<std::string> rejected;
  const Corpus corpus = load_hc3(cfg.hc3, &rejected);
  for (const auto& id : rejected) err << "warning: skipped empty answer " << id << '\n';
  if (corpus.empty()) throw Error(ErrorCode::DegenerateSplit, "HC3 file holds no documents");
  const Splits splits = split(corpus, cfg.split);

  ensure_dir(cfg.output_dir);
  std::string corpus_lines;
  for (const auto& doc : corpus) {
    OJson j;
    j["id"] = doc.id;
    j["label"] = to_string(doc.label);
    j["body"] = doc.body;
    if (doc.source_question) j["question"] = *doc.source_question;
    corpus_lines += j.dump() + "\n";
  }
  write_file(cfg.output_dir / kCorpusFile, corpus_lines);

  OJson manifest;
  manifest["seed"] = cfg.split.seed;
  manifest["fractions"] = {{"train", cfg.split.train_frac}, {"val", cfg.split.val_frac},
                           {"test", cfg.split.test_frac}};
  auto ids = [](const Corpus& c) {
    std::vector<std::string> v;
    for (const auto& d : c) v.push_back(d.id);
    return v;
  };
  manifest["train"] = ids(splits.train);
  manifest["val"] = ids(splits.val);
  manifest["test"] = ids(splits.test);
  write_file(cfg.output_dir / kSplitsFile, manifest.dump(2) + "\n");

  out << "documents " << corpus.size() << " (human " << corpus.count(Label::Human) << ", machine "
      << corpus.count(Label::Machine) << ")\n";
  for (const auto& [name, c] : {std::pair<const char*, const Corpus*>{"train", &splits.train},
                                {"val", &splits.val},
                                {"test", &splits.test}}) {
    out << name << ' ' << c->size() << " (human " << c->count(Label::Human) << ", machine "
        << c->count(Label::Machine) << ")\n";
  }
  return kOk;
}

int cmd_stats(const RunConfig& cfg, std::ostream& out) {
  const Workspace ws = load_workspace(cfg);
  const StatsReport report = corpus_report(ws.corpus, load_parses(cfg), cfg.bins);
  write_file(cfg.output_dir / kStatsFile, report.to_json());
  for (Label label : kLabels) {
    out << to_string(label);
    for (Statistic stat : kStatistics) {
      if (report.classes.at(label).stats.count(stat)) {
        out << ' ' << to_string(stat) << '=' << fixed(report.mean(label, stat));
      }
    }
    out << '\n';
  }
  return kOk;
}

fs::path embeddings_path(const RunConfig& cfg) {
  return cfg.embeddings.kind == EmbeddingSource::Kind::Load ? cfg.embeddings.path
                                                            : cfg.output_dir / kEmbeddingsFile;
}

std::shared_ptr<const SubstitutionPool> make_pool(const NGramLM& lm, bool band) {
  return std::make_shared<SubstitutionPool>(lm.vocabulary(), band);
}

struct ZeroshotState {
  std::shared_ptr<const NGramLM> lm;
  OJson settings;
};

std::vector<std::unique_ptr<CurvatureDetector>> zeroshot_detectors(const ZeroshotState& zs) {
  const auto& s = zs.settings;
  PerturbConfig base;
  base.mask_fraction = s.at("mask_fraction").get<double>();
  base.k = s.at("k").get<std::size_t>();
  base.seed = s.at("seed").get<std::uint64_t>();
  base.pool = make_pool(*zs.lm, s.at("frequency_band").get<bool>());
  std::vector<std::unique_ptr<CurvatureDetector>> out;
  for (const auto& [name, entry] : s.at("methods").items()) {
    out.push_back(std::make_unique<CurvatureDetector>(zs.lm, base, parse_curvature_method(name),
                                                      entry.at("threshold").get<double>()));
  }
  return out;
}

void print_metrics_row(std::ostream& out, const std::string& method, const MetricsReport& m) {
  out << method << " precision=" << fixed(m.precision) << " recall=" << fixed(m.recall)
      << " f1=" << fixed(m.f1) << " accuracy=" << fixed(m.accuracy) << " auroc=" << fixed(m.auroc)
      << '\n';
}

int cmd_train(const RunConfig& cfg, std::ostream& out) {
  if (!cfg.classifier && !cfg.zeroshot) {
    throw Error(ErrorCode::InvalidArgument, "config: nothing to train (no 'classifier' or 'zeroshot')");
  }
  const Workspace ws = load_workspace(cfg);
  if (!ws.splits.train.has_both_classes() || !ws.splits.val.has_both_classes()) {
    throw Error(ErrorCode::SingleClass, "train and validation splits need both classes");
  }
  OJson validation;

  if (cfg.classifier) {
    std::shared_ptr<const EmbeddingMatrix> emb;
    if (cfg.embeddings.kind == EmbeddingSource::Kind::Train) {
      emb = std::make_shared<EmbeddingMatrix>(train_skipgram(ws.splits.train, cfg.embeddings.skipgram));
      save_vectors(*emb, cfg.output_dir / kEmbeddingsFile);
    } else {
      require_input(cfg.embeddings.path, "embedding file");
      emb = std::make_shared<EmbeddingMatrix>(load_vectors(cfg.embeddings.path));
    }
    const Dataset train = make_dataset(ws.splits.train, *emb);
    const ClassifierConfig& c = *cfg.classifier;
    Model model;
    if (c.family == "logreg") {
      model = train_logreg(train, c.logreg);
    } else if (c.family == "gnb") {
      const double smoothing = c.tune_budget > 0 ? tune_gnb(train, c.tune_budget, c.tune_seed) : c.var_smoothing;
      model = train_gnb(train, smoothing);
    } else if (c.family == "svm") {
      model = train_linear_svm(train, c.svm);
    } else {
      model = train_random_forest(train, c.rf);
    }
    save_model(model, cfg.output_dir / kModelFile);
    const ClassifierDetector detector(emb, model);
    const MetricsReport report = evaluate(detector, ws.splits.val);
    validation[detector.method()] = OJson::parse(metrics_to_json(report));
    print_metrics_row(out, detector.method(), report);
  }

  if (cfg.zeroshot) {
    const ZeroshotConfig& z = *cfg.zeroshot;
    // The source model stand-in learns from machine-written training text only.
    std::vector<std::string> texts;
    for (const auto& doc : ws.splits.train) {
      if (doc.label == Label::Machine) texts.push_back(doc.body);
    }
    ZeroshotState state;
    state.lm = std::make_shared<NGramLM>(train_kn_lm(texts, z.order, z.discount));
    save_lm(*state.lm, cfg.output_dir / kLmFile);

    OJson settings;
    settings["order"] = z.order;
    settings["discount"] = z.discount;
    settings["k"] = z.k;
    settings["mask_fraction"] = z.mask_fraction;
    settings["frequency_band"] = z.frequency_band;
    settings["seed"] = z.seed;
    settings["methods"] = OJson::object();
    for (CurvatureMethod m : z.methods) settings["methods"][to_string(m)] = {{"threshold", 0.0}};
    state.settings = settings;

    for (auto& detector : zeroshot_detectors(state)) {
      const ScoredSet scored = score_corpus(*detector, ws.splits.val);
      const double threshold = youden_threshold(scored.scores, scored.labels);
      detector->set_threshold(threshold);
      settings["methods"][detector->method()]["threshold"] = threshold;
      std::vector<Label> predictions;
      for (double s : scored.scores) predictions.push_back(detector->classify(s));
      const MetricsReport report = metrics(confusion(predictions, scored.labels), scored.scores, scored.labels);
      validation[detector->method()] = OJson::parse(metrics_to_json(report));
      print_metrics_row(out, detector->method(), report);
    }
    write_file(cfg.output_dir / kZeroshotFile, settings.dump(2) + "\n");
  }
  write_file(cfg.output_dir / kValidationFile, validation.dump(2) + "\n");
  return kOk;
}

// Every detector the trained workspace supports, classifier first.
std::vector<std::unique_ptr<Detector>> load_detectors(const RunConfig& cfg) {
  std::vector<std::unique_ptr<Detector>> detectors;
  const fs::path model_path = cfg.output_dir / kModelFile;
  if (fs::exists(model_path)) {
    const fs::path emb_path = embeddings_path(cfg);
    require_input(emb_path, "embedding file");
    auto emb = std::make_shared<EmbeddingMatrix>(load_vectors(emb_path));
    detectors.push_back(std::make_unique<ClassifierDetector>(emb, load_model(model_path)));
  }
  const fs::path zs_path = cfg.output_dir / kZeroshotFile;
  if (fs::exists(zs_path)) {
    require_input(cfg.output_dir / kLmFile, "language model");
    ZeroshotState state;
    state.lm = std::make_shared<NGramLM>(load_lm(cfg.output_dir / kLmFile));
    try {
      state.settings = OJson::parse(read_file(zs_path));
      for (auto& d : zeroshot_detectors(state)) detectors.push_back(std::move(d));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::ParseError, std::string("corrupt zero-shot settings: ") + e.what());
    }
  }
  return detectors;
}

int cmd_detect(const RunConfig& cfg, const fs::path& input, const std::string& method, bool debug,
               std::ostream& out, std::ostream& err) {
  require_input(input, "input file");
  auto detectors = load_detectors(cfg);
  if (detectors.empty()) throw Error(ErrorCode::ParseError, "no trained model in " + cfg.output_dir.string());

  Detector* chosen = nullptr;
  for (auto& d : detectors) {
    const bool is_classifier = dynamic_cast<ClassifierDetector*>(d.get()) != nullptr;
    if (method.empty() || d->method() == method || (method == "classifier" && is_classifier)) {
      chosen = d.get();
      break;
    }
  }
  if (!chosen) throw Error(ErrorCode::ParseError, "no trained model for method '" + method + "'");
  const auto* curvature = dynamic_cast<const CurvatureDetector*>(chosen);

  std::istringstream lines(read_file(input));
  std::string line;
  std::size_t line_no = 0;
  out << "id,score,label,method\n";
  char buf[64];
  while (std::getline(lines, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    Document doc;
    doc.id = std::to_string(line_no);
    try {
      doc.body = normalize(line);
      const std::size_t before = curvature ? curvature->scoring_passes() : 0;
      const double s = chosen->score(doc);
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, s);
      out << doc.id << ',' << std::string_view(buf, static_cast<std::size_t>(ptr - buf)) << ','
          << to_string(chosen->classify(s)) << ',' << chosen->method() << '\n';
      if (debug && curvature) {
        err << "debug: id=" << doc.id << " lm_passes=" << curvature->scoring_passes() - before << '\n';
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::EmptyDocument) throw;
      out << doc.id << ",NA,NA," << chosen->method() << '\n';
    }
  }
  return kOk;
}

int cmd_evaluate(const RunConfig& cfg, std::ostream& out) {
  const Workspace ws = load_workspace(cfg);
  if (!ws.splits.test.has_both_classes()) {
    throw Error(ErrorCode::SingleClass, "test split holds a single class");
  }
  auto detectors = load_detectors(cfg);
  if (detectors.empty()) throw Error(ErrorCode::ParseError, "no trained model in " + cfg.output_dir.string());

  OJson metrics_json = OJson::object();
  OJson robustness_json = OJson::object();
  out << "method transform f1_before f1_after auroc_before auroc_after\n";
  for (const auto& detector : detectors) {
    const RobustnessReport report = robustness_report(*detector, ws.splits.test, cfg.transforms);
    metrics_json[report.method] = OJson::parse(metrics_to_json(report.clean));
    robustness_json[report.method] = OJson::parse(report.to_json());
    write_file(cfg.output_dir / ("robustness_" + report.method + ".csv"), report.to_csv());
    out << report.method << " clean " << fixed(report.clean.f1) << " - " << fixed(report.clean.auroc)
        << " -\n";
    for (const auto& t : report.transforms) {
      out << report.method << ' ' << t.transform.name() << ' ' << fixed(t.before.f1) << ' '
          << fixed(t.after.f1) << ' ' << fixed(t.before.auroc) << ' ' << fixed(t.after.auroc) << '\n';
    }
  }
  write_file(cfg.output_dir / kMetricsFile, metrics_json.dump(2) + "\n");
  write_file(cfg.output_dir / kRobustnessFile, robustness_json.dump(2) + "\n");
  return kOk;
}

int exit_code_for(const Error& e) {
  switch (e.category()) {
    case ErrorCategory::Config: return kConfigError;
    case ErrorCategory::Io: return kIoError;
    case ErrorCategory::Data: return kDataError;
  }
  return kDataError;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Machine-generated text detection toolkit", "detectkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::string output_override;
  std::int64_t seed_override = -1;
  std::string input_path;
  std::string method;
  bool debug = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "Run configuration (JSON)")->required();
    sub->add_option("--output", output_override, "Output directory override");
    sub->add_option("--seed", seed_override, "Global seed override")->check(CLI::NonNegativeNumber);
  };
  auto* ingest = app.add_subcommand("ingest", "Normalize HC3 data and write split manifests");
  auto* stats = app.add_subcommand("stats", "Write per-class corpus statistics");
  auto* train = app.add_subcommand("train", "Train embeddings, classifier and zero-shot scorer");
  auto* detect = app.add_subcommand("detect", "Score one document per input line");
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Test-set metrics and robustness reports");
  for (auto* sub : {ingest, stats, train, detect, evaluate_cmd}) add_common(sub);
  detect->add_option("--input", input_path, "Plain-text file, one document per line")->required();
  detect->add_option("--method", method, "classifier, detect_gpt or single_revise");
  detect->add_flag("--debug", debug, "Report LM scoring passes per document on stderr");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    RunConfig cfg = RunConfig::load(config_path);
    if (!output_override.empty()) cfg.output_dir = output_override;
    if (seed_override >= 0) cfg.apply_seed(static_cast<std::uint64_t>(seed_override));

    if (ingest->parsed()) return cmd_ingest(cfg, out, err);
    if (stats->parsed()) return cmd_stats(cfg, out);
    if (train->parsed()) return cmd_train(cfg, out);
    if (detect->parsed()) return cmd_detect(cfg, input_path, method, debug, out, err);
    if (evaluate_cmd->parsed()) return cmd_evaluate(cfg, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kIoError;
  }
  return kConfigError;
}

}  // namespace detectkit::cli
