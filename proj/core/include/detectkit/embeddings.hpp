#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <detectkit/ingest.hpp>
#include <detectkit/text.hpp>

namespace detectkit {

// Dense word vectors, one row per known word of the vocabulary (UNK has no
// row; row index equals word id).
class EmbeddingMatrix {
 public:
  EmbeddingMatrix(Vocabulary vocabulary, std::size_t dim, std::vector<double> input,
                  std::vector<double> output = {});

  const Vocabulary& vocabulary() const { return vocabulary_; }
  std::size_t dim() const { return dim_; }
  std::size_t rows() const { return vocabulary_.known_size(); }

  std::span<const double> vector(std::uint32_t id) const {
    return {input_.data() + static_cast<std::size_t>(id) * dim_, dim_};
  }
  std::optional<std::span<const double>> lookup(std::string_view word) const;

  const std::vector<double>& input_vectors() const { return input_; }
  // Context vectors; empty for matrices loaded from text.
  const std::vector<double>& output_vectors() const { return output_; }

  bool operator==(const EmbeddingMatrix& other) const = default;

 private:
  Vocabulary vocabulary_;
  std::size_t dim_;
  std::vector<double> input_;
  std::vector<double> output_;
};

struct SkipGramConfig {
  std::size_t dim = 100;
  std::size_t window = 5;
  std::size_t negatives = 5;
  std::size_t epochs = 5;
  double learning_rate = 0.025;
  std::uint64_t min_count = 2;
  double subsample = 1e-3;  // 0 disables frequent-word subsampling
  std::uint64_t seed = 1;

  void validate() const;
};

struct SkipGramTrace {
  std::vector<double> epoch_loss;  // mean negative-sampling loss per pair
};

struct FeatureVector {
  std::vector<double> values;
  double oov_fraction = 1.0;
};

// Skip-gram with negative sampling. Deterministic for a given corpus and
// config: single-threaded, with every random draw taken from config.seed.
EmbeddingMatrix train_skipgram(const Corpus& corpus, const SkipGramConfig& config,
                               SkipGramTrace* trace = nullptr);
EmbeddingMatrix train_skipgram(std::span<const std::vector<std::string>> documents,
                               const SkipGramConfig& config, SkipGramTrace* trace = nullptr);

// The seeded starting point of training: input rows uniform in
// [-0.5/dim, 0.5/dim], output rows zero.
EmbeddingMatrix initial_embeddings(Vocabulary vocabulary, const SkipGramConfig& config);

// Text format: "count dim" header, then "word v1 ... v_dim" per line.
EmbeddingMatrix load_vectors(const std::filesystem::path& path);
void save_vectors(const EmbeddingMatrix& embeddings, const std::filesystem::path& path);

// Mean of in-vocabulary word vectors; zero vector when nothing is known.
FeatureVector doc_vector(std::string_view text, const EmbeddingMatrix& embeddings);
inline FeatureVector doc_vector(const Document& doc, const EmbeddingMatrix& embeddings) {
  return doc_vector(doc.body, embeddings);
}

double cosine_similarity(std::span<const double> u, std::span<const double> v);

struct SgnsGradient {
  std::vector<double> center;
  std::vector<double> context;
  std::vector<double> negatives;  // row-major, one row per negative
};

// Negative-sampling loss for one (center, context) pair:
//   -log sigmoid(context . center) - sum_k log sigmoid(-negative_k . center)
// `negatives` holds k rows of the center's width. Fills `gradient` when given.
double sgns_loss(std::span<const double> center, std::span<const double> context,
                 std::span<const double> negatives, SgnsGradient* gradient = nullptr);

}  // namespace detectkit
