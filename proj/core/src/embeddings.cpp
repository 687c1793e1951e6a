#include "detectkit/embeddings.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "detectkit/error.hpp"
#include "detectkit/random.hpp"

namespace detectkit {

EmbeddingMatrix::EmbeddingMatrix(Vocabulary vocabulary, std::size_t dim,
                                 std::vector<double> input, std::vector<double> output)
    : vocabulary_(std::move(vocabulary)), dim_(dim), input_(std::move(input)),
      output_(std::move(output)) {
  if (dim_ == 0) throw Error(ErrorCode::InvalidArgument, "embedding dimension must be >= 1");
  if (input_.size() != rows() * dim_ || (!output_.empty() && output_.size() != input_.size())) {
    throw Error(ErrorCode::DimensionMismatch, "embedding storage does not match vocabulary");
  }
  for (double v : input_) {
    if (!std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "non-finite embedding value");
  }
}

std::optional<std::span<const double>> EmbeddingMatrix::lookup(std::string_view word) const {
  auto id = vocabulary_.find(word);
  if (!id) return std::nullopt;
  return vector(*id);
}

void SkipGramConfig::validate() const {
  if (dim == 0 || window == 0 || negatives == 0 || min_count == 0) {
    throw Error(ErrorCode::InvalidArgument, "skip-gram dim, window, negatives and min_count must be positive");
  }
  if (!(learning_rate > 0.0)) throw Error(ErrorCode::InvalidArgument, "learning rate must be > 0");
  if (!(subsample >= 0.0)) throw Error(ErrorCode::InvalidArgument, "subsample threshold must be >= 0");
}

namespace {

double log_sigmoid(double x) {
  return x >= 0.0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

double sgns_loss(std::span<const double> center, std::span<const double> context,
                 std::span<const double> negatives, SgnsGradient* gradient) {
  const std::size_t dim = center.size();
  if (context.size() != dim || negatives.size() % dim != 0) {
    throw Error(ErrorCode::DimensionMismatch, "negative-sampling operands differ in width");
  }
  const std::size_t k = negatives.size() / dim;

  const double pos_score = dot(center, context);
  double loss = -log_sigmoid(pos_score);
  if (gradient) {
    gradient->center.assign(dim, 0.0);
    gradient->context.assign(dim, 0.0);
    gradient->negatives.assign(negatives.size(), 0.0);
    const double g = sigmoid(pos_score) - 1.0;
    for (std::size_t j = 0; j < dim; ++j) {
      gradient->center[j] += g * context[j];
      gradient->context[j] = g * center[j];
    }
  }
  for (std::size_t n = 0; n < k; ++n) {
    auto row = negatives.subspan(n * dim, dim);
    const double score = dot(center, row);
    loss -= log_sigmoid(-score);
    if (gradient) {
      const double g = sigmoid(score);
      for (std::size_t j = 0; j < dim; ++j) {
        gradient->center[j] += g * row[j];
        gradient->negatives[n * dim + j] = g * center[j];
      }
    }
  }
  return loss;
}

EmbeddingMatrix initial_embeddings(Vocabulary vocabulary, const SkipGramConfig& config) {
  config.validate();
  const std::size_t rows = vocabulary.known_size();
  std::vector<double> input(rows * config.dim);
  Rng rng(derive_seed(config.seed, "skipgram.init"));
  const double half = 0.5 / static_cast<double>(config.dim);
  for (double& v : input) v = rng.uniform(-half, half);
  std::vector<double> output(rows * config.dim, 0.0);
  return EmbeddingMatrix(std::move(vocabulary), config.dim, std::move(input), std::move(output));
}

EmbeddingMatrix train_skipgram(std::span<const std::vector<std::string>> documents,
                               const SkipGramConfig& config, SkipGramTrace* trace) {
  config.validate();
  std::size_t raw_tokens = 0;
  for (const auto& doc : documents) raw_tokens += doc.size();
  if (raw_tokens < config.window + 1) {
    throw Error(ErrorCode::InvalidArgument, "corpus has fewer tokens than window + 1");
  }

  Vocabulary vocab = build_vocab(documents, config.min_count);
  if (vocab.known_size() == 0) {
    throw Error(ErrorCode::EmptyVocabulary, "no word reaches min_count");
  }

  // Id streams without out-of-vocabulary words, one per document.
  std::vector<std::vector<std::uint32_t>> streams;
  std::uint64_t train_words = 0;
  for (const auto& doc : documents) {
    std::vector<std::uint32_t> ids;
    for (const auto& w : doc) {
      if (auto id = vocab.find(w)) ids.push_back(*id);
    }
    train_words += ids.size();
    streams.push_back(std::move(ids));
  }

  const std::size_t dim = config.dim;
  const std::size_t rows = vocab.known_size();
  EmbeddingMatrix init = initial_embeddings(vocab, config);
  std::vector<double> input = init.input_vectors();
  std::vector<double> output = init.output_vectors();

  std::vector<double> noise_weights(rows);
  for (std::uint32_t i = 0; i < rows; ++i) {
    noise_weights[i] = std::pow(static_cast<double>(vocab.frequency(i)), 0.75);
  }
  const DiscreteSampler noise(noise_weights);

  std::vector<double> keep_prob(rows, 1.0);
  if (config.subsample > 0.0) {
    const double threshold = config.subsample * static_cast<double>(train_words);
    for (std::uint32_t i = 0; i < rows; ++i) {
      const double f = static_cast<double>(vocab.frequency(i));
      keep_prob[i] = std::min(1.0, (std::sqrt(f / threshold) + 1.0) * threshold / f);
    }
  }

  Rng rng(derive_seed(config.seed, "skipgram.train"));
  const double total_work = static_cast<double>(config.epochs) * static_cast<double>(train_words) + 1.0;
  std::uint64_t processed = 0;

  SgnsGradient grad;
  std::vector<double> negative_rows;
  std::vector<std::uint32_t> negative_ids;
  std::vector<std::uint32_t> sentence;

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    double epoch_loss = 0.0;
    std::uint64_t pairs = 0;
    for (const auto& stream : streams) {
      sentence.clear();
      for (std::uint32_t id : stream) {
        if (keep_prob[id] < 1.0 && rng.uniform() >= keep_prob[id]) continue;
        sentence.push_back(id);
      }
      processed += stream.size();
      const double lr = config.learning_rate *
                        std::max(1e-4, 1.0 - static_cast<double>(processed) / total_work);

      for (std::size_t pos = 0; pos < sentence.size(); ++pos) {
        // Dynamic window: effective reach drawn uniformly from [1, window].
        const std::size_t reach = 1 + static_cast<std::size_t>(rng.below(config.window));
        const std::size_t lo = pos >= reach ? pos - reach : 0;
        const std::size_t hi = std::min(sentence.size() - 1, pos + reach);
        const std::uint32_t center = sentence[pos];
        for (std::size_t c = lo; c <= hi; ++c) {
          if (c == pos) continue;
          const std::uint32_t context = sentence[c];

          negative_ids.clear();
          for (std::size_t n = 0; n < config.negatives; ++n) {
            const auto id = static_cast<std::uint32_t>(noise.sample(rng));
            if (id != context) negative_ids.push_back(id);
          }
          negative_rows.resize(negative_ids.size() * dim);
          for (std::size_t n = 0; n < negative_ids.size(); ++n) {
            std::copy_n(output.begin() + static_cast<std::ptrdiff_t>(negative_ids[n] * dim), dim,
                        negative_rows.begin() + static_cast<std::ptrdiff_t>(n * dim));
          }

          std::span<double> center_row(input.data() + center * dim, dim);
          std::span<double> context_row(output.data() + context * dim, dim);
          epoch_loss += sgns_loss(center_row, context_row, negative_rows, &grad);
          ++pairs;

          for (std::size_t j = 0; j < dim; ++j) {
            center_row[j] -= lr * grad.center[j];
            context_row[j] -= lr * grad.context[j];
          }
          for (std::size_t n = 0; n < negative_ids.size(); ++n) {
            double* row = output.data() + negative_ids[n] * dim;
            for (std::size_t j = 0; j < dim; ++j) row[j] -= lr * grad.negatives[n * dim + j];
          }
        }
      }
    }
    if (trace) trace->epoch_loss.push_back(pairs ? epoch_loss / static_cast<double>(pairs) : 0.0);
  }

  return EmbeddingMatrix(std::move(vocab), dim, std::move(input), std::move(output));
}

EmbeddingMatrix train_skipgram(const Corpus& corpus, const SkipGramConfig& config,
                               SkipGramTrace* trace) {
  std::vector<std::vector<std::string>> docs;
  docs.reserve(corpus.size());
  for (const auto& doc : corpus) docs.push_back(word_tokens(doc.body));
  if (docs.empty()) throw Error(ErrorCode::EmptyVocabulary, "cannot train on an empty corpus");
  return train_skipgram(docs, config, trace);
}

namespace {

bool parse_double(std::string_view text, double& out) {
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc() && ptr == end && std::isfinite(out);
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
    if (j > i) fields.push_back(line.substr(i, j - i));
    i = j;
  }
  return fields;
}

}  // namespace

EmbeddingMatrix load_vectors(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());

  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::ParseError, "missing header line");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_fields(line);
  std::size_t count = 0;
  std::size_t dim = 0;
  auto parse_size = [](std::string_view s, std::size_t& out) {
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
  };
  if (header.size() != 2 || !parse_size(header[0], count) || !parse_size(header[1], dim)) {
    throw Error(ErrorCode::ParseError, "line 1: expected header 'count dim'");
  }
  if (count == 0) throw Error(ErrorCode::EmptyEmbedding, "vector file declares zero rows");
  if (dim == 0) throw Error(ErrorCode::ParseError, "line 1: dimension must be positive");

  std::vector<std::string> words;
  std::vector<double> values;
  std::unordered_set<std::string> seen;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto fields = split_fields(line);
    if (fields.empty()) continue;
    if (fields.size() != dim + 1) {
      throw Error(ErrorCode::DimensionMismatch,
                  "line " + std::to_string(line_no) + ": expected " + std::to_string(dim) +
                      " values, found " + std::to_string(fields.size() - 1));
    }
    if (words.size() == count) {
      throw Error(ErrorCode::ParseError,
                  "line " + std::to_string(line_no) + ": more rows than the header declares");
    }
    std::string word(fields[0]);
    if (!seen.insert(word).second) {
      throw Error(ErrorCode::ParseError,
                  "line " + std::to_string(line_no) + ": duplicate word '" + word + "'");
    }
    for (std::size_t j = 1; j <= dim; ++j) {
      double v = 0.0;
      if (!parse_double(fields[j], v)) {
        throw Error(ErrorCode::ParseError,
                    "line " + std::to_string(line_no) + ": bad number '" + std::string(fields[j]) + "'");
      }
      values.push_back(v);
    }
    words.push_back(std::move(word));
  }
  if (words.size() != count) {
    throw Error(ErrorCode::ParseError, "header declares " + std::to_string(count) +
                                           " rows but file has " + std::to_string(words.size()));
  }
  Vocabulary vocab;
  try {
    vocab = Vocabulary::from_words(std::move(words));
  } catch (const Error& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  return EmbeddingMatrix(std::move(vocab), dim, std::move(values));
}

void save_vectors(const EmbeddingMatrix& embeddings, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << embeddings.rows() << ' ' << embeddings.dim() << '\n';
  char buf[64];
  const auto& vocab = embeddings.vocabulary();
  for (std::uint32_t id = 0; id < embeddings.rows(); ++id) {
    out << vocab.word(id);
    for (double v : embeddings.vector(id)) {
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
      out << ' ' << std::string_view(buf, static_cast<std::size_t>(ptr - buf));
    }
    out << '\n';
  }
  if (!out) throw Error(ErrorCode::Io, "failed writing " + path.string());
}

FeatureVector doc_vector(std::string_view text, const EmbeddingMatrix& embeddings) {
  FeatureVector fv;
  fv.values.assign(embeddings.dim(), 0.0);
  const auto words = word_tokens(text);
  std::size_t known = 0;
  for (const auto& w : words) {
    auto vec = embeddings.lookup(w);
    if (!vec) continue;
    for (std::size_t j = 0; j < fv.values.size(); ++j) fv.values[j] += (*vec)[j];
    ++known;
  }
  if (known > 0) {
    for (double& v : fv.values) v /= static_cast<double>(known);
  }
  fv.oov_fraction = words.empty() ? 1.0
                                  : static_cast<double>(words.size() - known) /
                                        static_cast<double>(words.size());
  return fv;
}

double cosine_similarity(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw Error(ErrorCode::DimensionMismatch, "cosine operands differ in width");
  const double nu = std::sqrt(dot(u, u));
  const double nv = std::sqrt(dot(v, v));
  if (nu == 0.0 || nv == 0.0) throw Error(ErrorCode::InvalidArgument, "cosine of a zero vector");
  return std::clamp(dot(u, v) / (nu * nv), -1.0, 1.0);
}

}  // namespace detectkit
