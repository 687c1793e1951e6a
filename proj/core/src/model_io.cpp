#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "detectkit/classifiers.hpp"
#include "detectkit/error.hpp"

namespace detectkit {

using Json = nlohmann::ordered_json;

namespace {

Json tree_to_json(const DecisionTree& tree) {
  Json feature = Json::array(), threshold = Json::array(), left = Json::array(),
       right = Json::array(), value = Json::array();
  for (const auto& n : tree.nodes) {
    feature.push_back(n.is_leaf() ? -1 : static_cast<std::int64_t>(n.feature));
    threshold.push_back(n.threshold);
    left.push_back(n.left);
    right.push_back(n.right);
    value.push_back(n.value);
  }
  return Json{{"feature", feature}, {"threshold", threshold}, {"left", left},
              {"right", right}, {"value", value}};
}

const Json& field(const Json& obj, const char* name) {
  auto it = obj.find(name);
  if (it == obj.end()) throw Error(ErrorCode::MissingField, std::string("model field '") + name + "' missing");
  return *it;
}

double number(const Json& obj, const char* name) {
  const Json& v = field(obj, name);
  if (!v.is_number()) throw Error(ErrorCode::ParseError, std::string("model field '") + name + "' is not a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw Error(ErrorCode::ParseError, std::string("model field '") + name + "' is not finite");
  return x;
}

std::vector<double> numbers(const Json& v, const char* name) {
  if (!v.is_array()) throw Error(ErrorCode::ParseError, std::string("model field '") + name + "' is not an array");
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& e : v) {
    if (!e.is_number() || !std::isfinite(e.get<double>())) {
      throw Error(ErrorCode::ParseError, std::string("model field '") + name + "' holds a bad number");
    }
    out.push_back(e.get<double>());
  }
  return out;
}

std::vector<double> numbers(const Json& obj, const char* name, std::size_t expected) {
  auto out = numbers(field(obj, name), name);
  if (out.size() != expected) {
    throw Error(ErrorCode::ParseError, std::string("model field '") + name + "' has the wrong length");
  }
  return out;
}

std::uint64_t unsigned_number(const Json& obj, const char* name) {
  const Json& v = field(obj, name);
  if (!v.is_number_unsigned()) {
    throw Error(ErrorCode::ParseError, std::string("model field '") + name + "' is not a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

DecisionTree tree_from_json(const Json& obj, std::size_t dim) {
  const auto feature = numbers(field(obj, "feature"), "feature");
  const std::size_t n = feature.size();
  const auto threshold = numbers(obj, "threshold", n);
  const auto left = numbers(obj, "left", n);
  const auto right = numbers(obj, "right", n);
  const auto value = numbers(obj, "value", n);
  if (n == 0) throw Error(ErrorCode::ParseError, "empty decision tree");
  DecisionTree tree;
  tree.nodes.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    TreeNode& node = tree.nodes[i];
    if (!(value[i] >= 0.0 && value[i] <= 1.0)) throw Error(ErrorCode::ParseError, "leaf fraction out of [0,1]");
    node.value = value[i];
    node.threshold = threshold[i];
    if (feature[i] < 0) continue;
    if (feature[i] >= static_cast<double>(dim) || left[i] <= static_cast<double>(i) ||
        right[i] <= static_cast<double>(i) || left[i] >= static_cast<double>(n) ||
        right[i] >= static_cast<double>(n)) {
      throw Error(ErrorCode::ParseError, "malformed decision tree node " + std::to_string(i));
    }
    node.feature = static_cast<std::uint32_t>(feature[i]);
    node.left = static_cast<std::uint32_t>(left[i]);
    node.right = static_cast<std::uint32_t>(right[i]);
  }
  return tree;
}

}  // namespace

std::string model_to_json(const Model& model) {
  Json root;
  root["schema_version"] = kModelSchemaVersion;
  root["family"] = family_name(model);
  root["dim"] = model_dim(model);
  if (const auto* m = std::get_if<LogRegModel>(&model)) {
    root["weights"] = m->weights;
    root["bias"] = m->bias;
    root["l2"] = m->l2;
  } else if (const auto* m = std::get_if<GnbModel>(&model)) {
    root["mean"] = {m->mean[0], m->mean[1]};
    root["variance"] = {m->variance[0], m->variance[1]};
    root["prior"] = {m->prior[0], m->prior[1]};
    root["var_smoothing"] = m->var_smoothing;
    root["epsilon"] = m->epsilon;
  } else if (const auto* m = std::get_if<SvmModel>(&model)) {
    root["weights"] = m->weights;
    root["bias"] = m->bias;
    root["lambda"] = m->lambda;
  } else if (const auto* m = std::get_if<RfModel>(&model)) {
    root["n_trees"] = m->n_trees;
    root["max_depth"] = m->max_depth == kUnboundedDepth ? Json(nullptr) : Json(m->max_depth);
    root["seed"] = m->seed;
    Json trees = Json::array();
    for (const auto& t : m->trees) trees.push_back(tree_to_json(t));
    root["trees"] = std::move(trees);
  }
  return root.dump(1) + "\n";
}

Model model_from_json(const std::string& text) {
  Json root;
  try {
    root = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("model file is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw Error(ErrorCode::ParseError, "model file must hold a JSON object");
  const Json& version = field(root, "schema_version");
  if (!version.is_number_integer() || version.get<std::int64_t>() != kModelSchemaVersion) {
    throw Error(ErrorCode::SchemaMismatch, "unsupported model schema_version " + version.dump());
  }
  const Json& family_field = field(root, "family");
  if (!family_field.is_string()) throw Error(ErrorCode::ParseError, "model family must be a string");
  const std::string family = family_field.get<std::string>();
  const std::size_t dim = unsigned_number(root, "dim");

  if (family == "logreg") {
    LogRegModel m;
    m.weights = numbers(root, "weights", dim);
    m.bias = number(root, "bias");
    m.l2 = number(root, "l2");
    return m;
  }
  if (family == "gnb") {
    GnbModel m;
    const Json& mean = field(root, "mean");
    const Json& variance = field(root, "variance");
    if (!mean.is_array() || mean.size() != 2 || !variance.is_array() || variance.size() != 2) {
      throw Error(ErrorCode::ParseError, "gnb mean/variance must hold two rows");
    }
    for (std::size_t c = 0; c < 2; ++c) {
      m.mean[c] = numbers(mean[c], "mean");
      m.variance[c] = numbers(variance[c], "variance");
      if (m.mean[c].size() != dim || m.variance[c].size() != dim) {
        throw Error(ErrorCode::ParseError, "gnb parameter rows have the wrong length");
      }
    }
    const auto prior = numbers(root, "prior", 2);
    m.prior[0] = prior[0];
    m.prior[1] = prior[1];
    m.var_smoothing = number(root, "var_smoothing");
    m.epsilon = number(root, "epsilon");
    for (std::size_t c = 0; c < 2; ++c) {
      for (double v : m.variance[c]) {
        if (!(v + m.epsilon > 0.0)) throw Error(ErrorCode::ParseError, "gnb variance must be positive");
      }
    }
    return m;
  }
  if (family == "svm") {
    SvmModel m;
    m.weights = numbers(root, "weights", dim);
    m.bias = number(root, "bias");
    m.lambda = number(root, "lambda");
    return m;
  }
  if (family == "random_forest") {
    RfModel m;
    m.dim = dim;
    m.n_trees = unsigned_number(root, "n_trees");
    const Json& depth = field(root, "max_depth");
    if (depth.is_null()) {
      m.max_depth = kUnboundedDepth;
    } else {
      m.max_depth = unsigned_number(root, "max_depth");
    }
    m.seed = unsigned_number(root, "seed");
    const Json& trees = field(root, "trees");
    if (!trees.is_array() || trees.size() != m.n_trees || m.n_trees == 0) {
      throw Error(ErrorCode::ParseError, "random forest tree list does not match n_trees");
    }
    for (const auto& t : trees) m.trees.push_back(tree_from_json(t, dim));
    return m;
  }
  throw Error(ErrorCode::ParseError, "unknown model family '" + family + "'");
}

void save_model(const Model& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << model_to_json(model);
  if (!out) throw Error(ErrorCode::Io, "failed writing " + path.string());
}

Model load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return model_from_json(buffer.str());
}

}  // namespace detectkit
