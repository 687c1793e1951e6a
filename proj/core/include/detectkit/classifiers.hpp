#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <detectkit/embeddings.hpp>
#include <detectkit/ingest.hpp>

namespace detectkit {

// Dense row-major matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }
  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  void append_row(std::span<const double> values);

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct Dataset {
  Matrix features;
  std::vector<int> labels;  // 1 = Machine, 0 = Human
  std::vector<std::string> ids;

  std::size_t size() const { return labels.size(); }
  std::size_t dim() const { return features.cols(); }
  std::size_t positives() const;

  void add(std::string id, std::span<const double> x, Label label);

  // Shape and finiteness; with require_both_classes, SingleClass when one
  // label is missing.
  void validate(bool require_both_classes) const;

  // Rows reordered by id so training does not depend on input order.
  Dataset canonical() const;
  Dataset subset(std::span<const std::size_t> rows) const;
};

Dataset make_dataset(const Corpus& corpus, const EmbeddingMatrix& embeddings);

struct LogRegParams {
  double l2 = 1e-4;
  std::size_t epochs = 200;
  double learning_rate = 0.5;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
};

struct LogRegModel {
  std::vector<double> weights;
  double bias = 0.0;
  double l2 = 0.0;
};

// Mean negative log-likelihood over `rows` plus (l2/2)|w|^2.
double logreg_objective(const LogRegModel& model, const Dataset& data,
                        std::span<const std::size_t> rows);
double logreg_objective(const LogRegModel& model, const Dataset& data);
// Gradient of logreg_objective; weights first, bias last.
std::vector<double> logreg_gradient(const LogRegModel& model, const Dataset& data,
                                    std::span<const std::size_t> rows);

LogRegModel train_logreg(const Dataset& data, const LogRegParams& params);

struct GnbModel {
  std::vector<double> mean[2];      // per class, per feature
  std::vector<double> variance[2];  // maximum-likelihood, before smoothing
  double prior[2] = {0.5, 0.5};
  double var_smoothing = 1e-9;
  double epsilon = 0.0;  // added to every variance
};

// Smoothing is relative: epsilon = var_smoothing * (largest feature variance),
// falling back to var_smoothing itself when every feature is constant.
GnbModel train_gnb(const Dataset& data, double var_smoothing);

// Bayesian optimization of log10(var_smoothing) in [-12, 0] against
// validation F1 on an internal stratified 80/20 split.
double tune_gnb(const Dataset& data, std::size_t budget, std::uint64_t seed);

struct SvmParams {
  double lambda = 1e-4;
  std::size_t epochs = 20;
  std::uint64_t seed = 0;
};

struct SvmModel {
  std::vector<double> weights;
  double bias = 0.0;
  double lambda = 0.0;
};

// (lambda/2)(|w|^2 + b^2) + mean hinge loss.
double svm_objective(const SvmModel& model, const Dataset& data);
double hinge_loss(double margin_times_label);

// Pegasos: step 1/(lambda t) with projection onto the 1/sqrt(lambda) ball.
// The bias is trained as the weight of a constant feature.
SvmModel train_linear_svm(const Dataset& data, const SvmParams& params);

inline constexpr std::size_t kUnboundedDepth = std::numeric_limits<std::size_t>::max();

struct TreeNode {
  static constexpr std::uint32_t kLeaf = std::numeric_limits<std::uint32_t>::max();

  std::uint32_t feature = kLeaf;
  double threshold = 0.0;  // go left when x[feature] <= threshold
  std::uint32_t left = 0;
  std::uint32_t right = 0;
  double value = 0.0;  // Machine fraction at a leaf

  bool is_leaf() const { return feature == kLeaf; }
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // root at 0

  double predict(std::span<const double> x) const;
  std::size_t depth() const;
};

struct RfParams {
  std::size_t n_trees = 100;
  std::size_t max_depth = kUnboundedDepth;
  std::uint64_t seed = 0;
  std::size_t max_features = 0;  // 0 means floor(sqrt(d)), at least 1
  bool bootstrap = true;
};

struct RfModel {
  std::vector<DecisionTree> trees;
  std::size_t n_trees = 0;
  std::size_t max_depth = 0;
  std::uint64_t seed = 0;
  std::size_t dim = 0;
};

// 1 - sum_c p_c^2 for a two-class node.
double gini(std::size_t positives, std::size_t total);

// Tree i draws from seed + i, so trees are independent of build order.
RfModel train_random_forest(const Dataset& data, const RfParams& params);

using Model = std::variant<LogRegModel, GnbModel, SvmModel, RfModel>;

struct Prediction {
  double score = 0.0;  // higher means more likely Machine
  Label label = Label::Human;
};

const char* family_name(const Model& model);
std::size_t model_dim(const Model& model);
// 0.5 for probability scores, 0 for the SVM margin.
double decision_threshold(const Model& model);
double score(const Model& model, std::span<const double> x);
// Ties at the threshold go to Machine.
Prediction predict(const Model& model, std::span<const double> x);

// Versioned JSON with shortest round-trip number formatting.
inline constexpr int kModelSchemaVersion = 1;
std::string model_to_json(const Model& model);
Model model_from_json(const std::string& text);
void save_model(const Model& model, const std::filesystem::path& path);
Model load_model(const std::filesystem::path& path);

}  // namespace detectkit
