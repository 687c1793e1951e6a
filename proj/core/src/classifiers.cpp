#include "detectkit/classifiers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "detectkit/error.hpp"
#include "detectkit/random.hpp"

namespace detectkit {

void Matrix::append_row(std::span<const double> values) {
  if (rows_ == 0 && cols_ == 0) cols_ = values.size();
  if (values.size() != cols_) throw Error(ErrorCode::DimensionMismatch, "row width mismatch");
  data_.insert(data_.end(), values.begin(), values.end());
  ++rows_;
}

std::size_t Dataset::positives() const {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
}

void Dataset::add(std::string id, std::span<const double> x, Label label) {
  features.append_row(x);
  labels.push_back(label == Label::Machine ? 1 : 0);
  ids.push_back(std::move(id));
}

void Dataset::validate(bool require_both_classes) const {
  if (labels.empty()) throw Error(ErrorCode::InvalidArgument, "dataset is empty");
  if (features.rows() != labels.size() || (!ids.empty() && ids.size() != labels.size())) {
    throw Error(ErrorCode::DimensionMismatch, "dataset columns disagree in length");
  }
  for (std::size_t i = 0; i < features.rows(); ++i) {
    for (double v : features.row(i)) {
      if (!std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "non-finite feature value");
    }
  }
  for (int y : labels) {
    if (y != 0 && y != 1) throw Error(ErrorCode::InvalidArgument, "labels must be 0 or 1");
  }
  if (require_both_classes) {
    const std::size_t pos = positives();
    if (pos == 0 || pos == labels.size()) {
      throw Error(ErrorCode::SingleClass, "training data holds a single class");
    }
  }
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  Dataset out;
  out.features = Matrix(0, dim());
  for (std::size_t r : rows) {
    out.features.append_row(features.row(r));
    out.labels.push_back(labels[r]);
    if (!ids.empty()) out.ids.push_back(ids[r]);
  }
  return out;
}

Dataset Dataset::canonical() const {
  std::vector<std::size_t> order(size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (!ids.empty() && ids[a] != ids[b]) return ids[a] < ids[b];
    auto ra = features.row(a);
    auto rb = features.row(b);
    if (!std::equal(ra.begin(), ra.end(), rb.begin())) {
      return std::lexicographical_compare(ra.begin(), ra.end(), rb.begin(), rb.end());
    }
    return labels[a] < labels[b];
  });
  return subset(order);
}

Dataset make_dataset(const Corpus& corpus, const EmbeddingMatrix& embeddings) {
  Dataset data;
  data.features = Matrix(0, embeddings.dim());
  for (const auto& doc : corpus) {
    data.add(doc.id, doc_vector(doc, embeddings).values, doc.label);
  }
  return data;
}

namespace {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow.
double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double squared_norm(std::span<const double> a) { return dot(a, a); }

std::vector<std::size_t> all_rows(std::size_t n) {
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return rows;
}

void require_dim(std::size_t expected, std::size_t actual) {
  if (expected != actual) {
    throw Error(ErrorCode::DimensionMismatch, "expected " + std::to_string(expected) +
                                                  " features, got " + std::to_string(actual));
  }
}

}  // namespace

double logreg_objective(const LogRegModel& model, const Dataset& data,
                        std::span<const std::size_t> rows) {
  double nll = 0.0;
  for (std::size_t r : rows) {
    const double z = dot(model.weights, data.features.row(r)) + model.bias;
    // -log p(y|x) = softplus(z) - y z
    nll += softplus(z) - static_cast<double>(data.labels[r]) * z;
  }
  return nll / static_cast<double>(rows.size()) + 0.5 * model.l2 * squared_norm(model.weights);
}

double logreg_objective(const LogRegModel& model, const Dataset& data) {
  const auto rows = all_rows(data.size());
  return logreg_objective(model, data, rows);
}

std::vector<double> logreg_gradient(const LogRegModel& model, const Dataset& data,
                                    std::span<const std::size_t> rows) {
  const std::size_t d = model.weights.size();
  std::vector<double> grad(d + 1, 0.0);
  for (std::size_t r : rows) {
    auto x = data.features.row(r);
    const double err = sigmoid(dot(model.weights, x) + model.bias) - data.labels[r];
    for (std::size_t j = 0; j < d; ++j) grad[j] += err * x[j];
    grad[d] += err;
  }
  const double inv = 1.0 / static_cast<double>(rows.size());
  for (std::size_t j = 0; j < d; ++j) grad[j] = grad[j] * inv + model.l2 * model.weights[j];
  grad[d] *= inv;
  return grad;
}

LogRegModel train_logreg(const Dataset& input, const LogRegParams& params) {
  input.validate(true);
  if (!(params.learning_rate > 0.0) || params.batch_size == 0 || !(params.l2 >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "invalid logistic regression parameters");
  }
  const Dataset data = input.canonical();
  LogRegModel model;
  model.weights.assign(data.dim(), 0.0);
  model.l2 = params.l2;

  Rng rng(derive_seed(params.seed, "logreg.shuffle"));
  std::vector<std::size_t> order = all_rows(data.size());
  for (std::size_t epoch = 0; epoch < params.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t start = 0; start < order.size(); start += params.batch_size) {
      const std::size_t stop = std::min(order.size(), start + params.batch_size);
      std::span<const std::size_t> batch(order.data() + start, stop - start);
      const auto grad = logreg_gradient(model, data, batch);
      for (std::size_t j = 0; j < model.weights.size(); ++j) {
        model.weights[j] -= params.learning_rate * grad[j];
      }
      model.bias -= params.learning_rate * grad.back();
    }
  }
  return model;
}

GnbModel train_gnb(const Dataset& data, double var_smoothing) {
  if (!(var_smoothing > 0.0)) throw Error(ErrorCode::InvalidArgument, "var_smoothing must be > 0");
  data.validate(true);
  const std::size_t d = data.dim();
  GnbModel model;
  model.var_smoothing = var_smoothing;
  std::size_t n_class[2] = {0, 0};
  for (int c = 0; c < 2; ++c) {
    model.mean[c].assign(d, 0.0);
    model.variance[c].assign(d, 0.0);
  }
  for (std::size_t i = 0; i < data.size(); ++i) {
    const int c = data.labels[i];
    ++n_class[c];
    auto x = data.features.row(i);
    for (std::size_t j = 0; j < d; ++j) model.mean[c][j] += x[j];
  }
  for (int c = 0; c < 2; ++c) {
    for (double& m : model.mean[c]) m /= static_cast<double>(n_class[c]);
  }
  for (std::size_t i = 0; i < data.size(); ++i) {
    const int c = data.labels[i];
    auto x = data.features.row(i);
    for (std::size_t j = 0; j < d; ++j) {
      const double diff = x[j] - model.mean[c][j];
      model.variance[c][j] += diff * diff;
    }
  }
  for (int c = 0; c < 2; ++c) {
    for (double& v : model.variance[c]) v /= static_cast<double>(n_class[c]);
  }

  // Largest per-feature variance over the pooled data.
  double max_var = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) mean += data.features(i, j);
    mean /= static_cast<double>(data.size());
    double var = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double diff = data.features(i, j) - mean;
      var += diff * diff;
    }
    max_var = std::max(max_var, var / static_cast<double>(data.size()));
  }
  model.epsilon = var_smoothing * (max_var > 0.0 ? max_var : 1.0);

  const double n = static_cast<double>(data.size());
  model.prior[0] = static_cast<double>(n_class[0]) / n;
  model.prior[1] = static_cast<double>(n_class[1]) / n;
  return model;
}

namespace {

double gnb_machine_posterior(const GnbModel& model, std::span<const double> x) {
  constexpr double kTwoPi = 6.283185307179586;
  double log_joint[2];
  for (int c = 0; c < 2; ++c) {
    double lp = std::log(model.prior[c]);
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double var = model.variance[c][j] + model.epsilon;
      const double diff = x[j] - model.mean[c][j];
      lp -= 0.5 * std::log(kTwoPi * var) + diff * diff / (2.0 * var);
    }
    log_joint[c] = lp;
  }
  const double top = std::max(log_joint[0], log_joint[1]);
  const double e0 = std::exp(log_joint[0] - top);
  const double e1 = std::exp(log_joint[1] - top);
  return e1 / (e0 + e1);
}

}  // namespace

double hinge_loss(double margin_times_label) { return std::max(0.0, 1.0 - margin_times_label); }

double svm_objective(const SvmModel& model, const Dataset& data) {
  double loss = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double y = data.labels[i] == 1 ? 1.0 : -1.0;
    loss += hinge_loss(y * (dot(model.weights, data.features.row(i)) + model.bias));
  }
  return 0.5 * model.lambda * (squared_norm(model.weights) + model.bias * model.bias) +
         loss / static_cast<double>(data.size());
}

SvmModel train_linear_svm(const Dataset& input, const SvmParams& params) {
  input.validate(true);
  if (!(params.lambda > 0.0)) throw Error(ErrorCode::InvalidArgument, "lambda must be > 0");
  const Dataset data = input.canonical();
  const std::size_t d = data.dim();
  // Weights with the bias appended as the weight of a constant 1 feature.
  std::vector<double> w(d + 1, 0.0);
  const double radius = 1.0 / std::sqrt(params.lambda);

  Rng rng(derive_seed(params.seed, "svm.shuffle"));
  std::vector<std::size_t> order = all_rows(data.size());
  std::size_t t = 0;
  for (std::size_t epoch = 0; epoch < params.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t i : order) {
      ++t;
      const double eta = 1.0 / (params.lambda * static_cast<double>(t));
      auto x = data.features.row(i);
      const double y = data.labels[i] == 1 ? 1.0 : -1.0;
      const double margin = y * (dot(std::span<const double>(w.data(), d), x) + w[d]);
      const double shrink = 1.0 - eta * params.lambda;
      for (double& v : w) v *= shrink;
      if (margin < 1.0) {
        for (std::size_t j = 0; j < d; ++j) w[j] += eta * y * x[j];
        w[d] += eta * y;
      }
      const double norm = std::sqrt(squared_norm(w));
      if (norm > radius) {
        const double scale = radius / norm;
        for (double& v : w) v *= scale;
      }
    }
  }
  SvmModel model;
  model.bias = w[d];
  w.pop_back();
  model.weights = std::move(w);
  model.lambda = params.lambda;
  return model;
}

double gini(std::size_t positives, std::size_t total) {
  if (total == 0) return 0.0;
  const double p = static_cast<double>(positives) / static_cast<double>(total);
  return 1.0 - p * p - (1.0 - p) * (1.0 - p);
}

double DecisionTree::predict(std::span<const double> x) const {
  std::uint32_t node = 0;
  while (!nodes[node].is_leaf()) {
    const TreeNode& n = nodes[node];
    node = x[n.feature] <= n.threshold ? n.left : n.right;
  }
  return nodes[node].value;
}

std::size_t DecisionTree::depth() const {
  std::size_t best = 0;
  std::vector<std::pair<std::uint32_t, std::size_t>> stack{{0, 0}};
  while (!stack.empty()) {
    auto [node, depth] = stack.back();
    stack.pop_back();
    best = std::max(best, depth);
    if (!nodes[node].is_leaf()) {
      stack.emplace_back(nodes[node].left, depth + 1);
      stack.emplace_back(nodes[node].right, depth + 1);
    }
  }
  return best;
}

namespace {

struct SplitChoice {
  bool found = false;
  std::uint32_t feature = 0;
  double threshold = 0.0;
  double impurity = std::numeric_limits<double>::infinity();
};

SplitChoice best_split(const Dataset& data, std::span<const std::size_t> rows,
                       std::size_t max_features, Rng& rng) {
  const std::size_t d = data.dim();
  std::vector<std::size_t> features(d);
  std::iota(features.begin(), features.end(), std::size_t{0});
  rng.shuffle(features);

  SplitChoice best;
  std::size_t examined = 0;
  std::vector<std::pair<double, int>> column(rows.size());
  std::size_t total_pos = 0;
  for (std::size_t r : rows) total_pos += static_cast<std::size_t>(data.labels[r]);
  const double n = static_cast<double>(rows.size());

  for (std::size_t f : features) {
    if (examined == max_features) break;
    for (std::size_t k = 0; k < rows.size(); ++k) {
      column[k] = {data.features(rows[k], f), data.labels[rows[k]]};
    }
    std::sort(column.begin(), column.end());
    if (column.front().first == column.back().first) continue;  // constant here; draw another
    ++examined;

    std::size_t left_pos = 0;
    for (std::size_t k = 0; k + 1 < column.size(); ++k) {
      left_pos += static_cast<std::size_t>(column[k].second);
      if (column[k].first == column[k + 1].first) continue;
      const std::size_t left_n = k + 1;
      const std::size_t right_n = column.size() - left_n;
      const double impurity = (static_cast<double>(left_n) * gini(left_pos, left_n) +
                               static_cast<double>(right_n) * gini(total_pos - left_pos, right_n)) /
                              n;
      if (impurity < best.impurity) {
        double threshold = 0.5 * (column[k].first + column[k + 1].first);
        if (!(threshold < column[k + 1].first)) threshold = column[k].first;
        best = {true, static_cast<std::uint32_t>(f), threshold, impurity};
      }
    }
  }
  return best;
}

DecisionTree grow_tree(const Dataset& data, std::vector<std::size_t> rows,
                       std::size_t max_depth, std::size_t max_features, Rng& rng) {
  DecisionTree tree;
  struct Pending {
    std::uint32_t node;
    std::vector<std::size_t> rows;
    std::size_t depth;
  };
  tree.nodes.emplace_back();
  std::vector<Pending> stack;
  stack.push_back({0, std::move(rows), 0});
  while (!stack.empty()) {
    Pending job = std::move(stack.back());
    stack.pop_back();
    std::size_t pos = 0;
    for (std::size_t r : job.rows) pos += static_cast<std::size_t>(data.labels[r]);
    const std::size_t n = job.rows.size();
    tree.nodes[job.node].value = static_cast<double>(pos) / static_cast<double>(n);

    if (pos == 0 || pos == n || n < 2 || job.depth >= max_depth) continue;
    const SplitChoice split = best_split(data, job.rows, max_features, rng);
    if (!split.found) continue;

    std::vector<std::size_t> left;
    std::vector<std::size_t> right;
    for (std::size_t r : job.rows) {
      (data.features(r, split.feature) <= split.threshold ? left : right).push_back(r);
    }
    const auto left_id = static_cast<std::uint32_t>(tree.nodes.size());
    tree.nodes.emplace_back();
    const auto right_id = static_cast<std::uint32_t>(tree.nodes.size());
    tree.nodes.emplace_back();
    TreeNode& node = tree.nodes[job.node];
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.left = left_id;
    node.right = right_id;
    stack.push_back({right_id, std::move(right), job.depth + 1});
    stack.push_back({left_id, std::move(left), job.depth + 1});
  }
  return tree;
}

}  // namespace

RfModel train_random_forest(const Dataset& data, const RfParams& params) {
  if (params.n_trees < 1) throw Error(ErrorCode::InvalidArgument, "n_trees must be >= 1");
  if (params.max_depth < 1) throw Error(ErrorCode::InvalidArgument, "max_depth must be >= 1");
  data.validate(false);
  const std::size_t d = data.dim();
  const std::size_t max_features =
      params.max_features > 0
          ? std::min(params.max_features, d)
          : std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(d))));

  RfModel model;
  model.n_trees = params.n_trees;
  model.max_depth = params.max_depth;
  model.seed = params.seed;
  model.dim = d;
  for (std::size_t t = 0; t < params.n_trees; ++t) {
    Rng rng(params.seed + t);
    std::vector<std::size_t> rows(data.size());
    if (params.bootstrap) {
      for (auto& r : rows) r = static_cast<std::size_t>(rng.below(data.size()));
    } else {
      std::iota(rows.begin(), rows.end(), std::size_t{0});
    }
    model.trees.push_back(grow_tree(data, std::move(rows), params.max_depth, max_features, rng));
  }
  return model;
}

const char* family_name(const Model& model) {
  struct Visitor {
    const char* operator()(const LogRegModel&) const { return "logreg"; }
    const char* operator()(const GnbModel&) const { return "gnb"; }
    const char* operator()(const SvmModel&) const { return "svm"; }
    const char* operator()(const RfModel&) const { return "random_forest"; }
  };
  return std::visit(Visitor{}, model);
}

std::size_t model_dim(const Model& model) {
  struct Visitor {
    std::size_t operator()(const LogRegModel& m) const { return m.weights.size(); }
    std::size_t operator()(const GnbModel& m) const { return m.mean[0].size(); }
    std::size_t operator()(const SvmModel& m) const { return m.weights.size(); }
    std::size_t operator()(const RfModel& m) const { return m.dim; }
  };
  return std::visit(Visitor{}, model);
}

double decision_threshold(const Model& model) {
  return std::holds_alternative<SvmModel>(model) ? 0.0 : 0.5;
}

double score(const Model& model, std::span<const double> x) {
  require_dim(model_dim(model), x.size());
  struct Visitor {
    std::span<const double> x;
    double operator()(const LogRegModel& m) const { return sigmoid(dot(m.weights, x) + m.bias); }
    double operator()(const GnbModel& m) const { return gnb_machine_posterior(m, x); }
    double operator()(const SvmModel& m) const { return dot(m.weights, x) + m.bias; }
    double operator()(const RfModel& m) const {
      double sum = 0.0;
      for (const auto& tree : m.trees) sum += tree.predict(x);
      return sum / static_cast<double>(m.trees.size());
    }
  };
  return std::visit(Visitor{x}, model);
}

Prediction predict(const Model& model, std::span<const double> x) {
  Prediction p;
  p.score = score(model, x);
  p.label = p.score >= decision_threshold(model) ? Label::Machine : Label::Human;
  return p;
}

}  // namespace detectkit
