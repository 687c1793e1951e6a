#include "run_config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include <detectkit/error.hpp>
#include <detectkit/random.hpp>

namespace detectkit::cli {

using Json = nlohmann::json;

namespace {

[[noreturn]] void config_error(const std::string& message) {
  throw Error(ErrorCode::InvalidArgument, "config: " + message);
}

const Json* optional_object(const Json& parent, const char* key) {
  auto it = parent.find(key);
  if (it == parent.end() || it->is_null()) return nullptr;
  if (!it->is_object()) config_error(std::string("'") + key + "' must be an object");
  return &*it;
}

template <typename T>
void read(const Json& obj, const char* key, T& out) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return;
  try {
    out = it->get<T>();
  } catch (const nlohmann::json::exception&) {
    config_error(std::string("field '") + key + "' has the wrong type");
  }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

}  // namespace

void RunConfig::apply_seed(std::uint64_t new_seed) {
  seed = new_seed;
  split.seed = derive_seed(seed, "split.seed");
  embeddings.skipgram.seed = derive_seed(seed, "embeddings.seed");
  if (classifier) {
    classifier->logreg.seed = derive_seed(seed, "classifier.seed");
    classifier->svm.seed = classifier->logreg.seed;
    classifier->rf.seed = classifier->logreg.seed;
    classifier->tune_seed = derive_seed(seed, "classifier.tune_seed");
  }
  if (zeroshot) zeroshot->seed = derive_seed(seed, "zeroshot.seed");
  for (std::size_t i = 0; i < transforms.size(); ++i) {
    transforms[i].seed = derive_seed(seed, "evaluate.transforms." + std::to_string(i) + ".seed");
  }
}

RunConfig RunConfig::from_json(const std::string& text, const std::filesystem::path& base_dir) {
  Json root;
  try {
    root = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    config_error(std::string("not valid JSON (") + e.what() + ")");
  }
  if (!root.is_object()) config_error("top level must be an object");

  RunConfig cfg;
  std::uint64_t seed = 0;
  read(root, "seed", seed);
  std::string output = "out";
  read(root, "output_dir", output);
  cfg.output_dir = resolve(base_dir, output);

  const Json* data = optional_object(root, "data");
  if (!data) config_error("missing 'data' section");
  std::string hc3;
  read(*data, "hc3", hc3);
  if (hc3.empty()) config_error("missing 'data.hc3'");
  cfg.hc3 = resolve(base_dir, hc3);
  if (const Json* conllu = optional_object(*data, "conllu")) {
    std::string human, machine;
    read(*conllu, "human", human);
    read(*conllu, "machine", machine);
    if (human.empty() != machine.empty()) config_error("'data.conllu' needs both human and machine");
    if (!human.empty()) {
      cfg.conllu_human = resolve(base_dir, human);
      cfg.conllu_machine = resolve(base_dir, machine);
    }
  }

  if (const Json* split = optional_object(root, "split")) {
    read(*split, "train", cfg.split.train_frac);
    read(*split, "val", cfg.split.val_frac);
    read(*split, "test", cfg.split.test_frac);
  }
  cfg.split.validate();

  if (const Json* emb = optional_object(root, "embeddings")) {
    std::string source = "train";
    read(*emb, "source", source);
    std::string path;
    read(*emb, "path", path);
    if (source == "train") {
      if (!path.empty()) config_error("'embeddings.path' conflicts with source 'train'");
      cfg.embeddings.kind = EmbeddingSource::Kind::Train;
    } else if (source == "load") {
      if (path.empty()) config_error("'embeddings.source' load requires 'embeddings.path'");
      cfg.embeddings.kind = EmbeddingSource::Kind::Load;
      cfg.embeddings.path = resolve(base_dir, path);
    } else {
      config_error("'embeddings.source' must be 'train' or 'load'");
    }
    auto& sg = cfg.embeddings.skipgram;
    read(*emb, "dim", sg.dim);
    read(*emb, "window", sg.window);
    read(*emb, "negatives", sg.negatives);
    read(*emb, "epochs", sg.epochs);
    read(*emb, "learning_rate", sg.learning_rate);
    read(*emb, "min_count", sg.min_count);
    read(*emb, "subsample", sg.subsample);
    sg.validate();
  }

  if (const Json* cls = optional_object(root, "classifier")) {
    ClassifierConfig c;
    read(*cls, "family", c.family);
    if (c.family != "logreg" && c.family != "gnb" && c.family != "svm" && c.family != "random_forest") {
      config_error("unknown classifier family '" + c.family + "'");
    }
    read(*cls, "l2", c.logreg.l2);
    std::size_t epochs = 0;
    read(*cls, "epochs", epochs);
    if (epochs > 0) {
      c.logreg.epochs = epochs;
      c.svm.epochs = epochs;
    }
    read(*cls, "learning_rate", c.logreg.learning_rate);
    read(*cls, "batch_size", c.logreg.batch_size);
    read(*cls, "var_smoothing", c.var_smoothing);
    read(*cls, "tune_budget", c.tune_budget);
    read(*cls, "lambda", c.svm.lambda);
    read(*cls, "n_trees", c.rf.n_trees);
    std::size_t depth = 0;
    read(*cls, "max_depth", depth);
    c.rf.max_depth = depth == 0 ? kUnboundedDepth : depth;
    read(*cls, "max_features", c.rf.max_features);
    if (c.tune_budget != 0 && c.tune_budget < 5) config_error("'classifier.tune_budget' must be >= 5");
    if (!(c.var_smoothing > 0.0)) config_error("'classifier.var_smoothing' must be > 0");
    cfg.classifier = c;
  }

  if (const Json* zs = optional_object(root, "zeroshot")) {
    ZeroshotConfig z;
    read(*zs, "order", z.order);
    read(*zs, "discount", z.discount);
    read(*zs, "k", z.k);
    read(*zs, "mask_fraction", z.mask_fraction);
    read(*zs, "frequency_band", z.frequency_band);
    std::vector<std::string> methods;
    read(*zs, "methods", methods);
    if (!methods.empty()) {
      z.methods.clear();
      for (const auto& m : methods) z.methods.push_back(parse_curvature_method(m));
    }
    if (z.order < 2 || !(z.discount > 0.0 && z.discount < 1.0) || z.k < 2 ||
        !(z.mask_fraction >= 0.0 && z.mask_fraction <= 1.0)) {
      config_error("zeroshot settings out of range");
    }
    cfg.zeroshot = z;
  }

  if (const Json* ev = optional_object(root, "evaluate")) {
    auto it = ev->find("transforms");
    if (it != ev->end()) {
      if (!it->is_array()) config_error("'evaluate.transforms' must be an array");
      for (const auto& t : *it) {
        if (!t.is_object()) config_error("each transform must be an object");
        AdversarialTransform tr;
        std::string kind;
        read(t, "kind", kind);
        tr.kind = parse_transform_kind(kind);
        read(t, "intensity", tr.intensity);
        if (!(tr.intensity >= 0.0 && tr.intensity <= 1.0)) config_error("transform intensity must lie in [0,1]");
        cfg.transforms.push_back(tr);
      }
    }
  }

  if (const Json* stats = optional_object(root, "stats")) {
    if (const Json* bins = optional_object(*stats, "bins")) {
      read(*bins, "answer_length", cfg.bins.answer_length);
      read(*bins, "sentence_length", cfg.bins.sentence_length);
      read(*bins, "ttr", cfg.bins.type_token_ratio);
      read(*bins, "fkgl", cfg.bins.grade_level);
      read(*bins, "dependency_distance", cfg.bins.dependency_distance);
    }
  }

  cfg.apply_seed(seed);
  return cfg;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidArgument, "config: cannot read " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return from_json(buffer.str(), path.parent_path());
}

}  // namespace detectkit::cli
