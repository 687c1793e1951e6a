#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <detectkit/classifiers.hpp>
#include <detectkit/corpus_stats.hpp>
#include <detectkit/detectors.hpp>
#include <detectkit/embeddings.hpp>
#include <detectkit/eval.hpp>
#include <detectkit/ingest.hpp>

namespace detectkit::cli {

struct EmbeddingSource {
  enum class Kind { Train, Load };
  Kind kind = Kind::Train;
  std::filesystem::path path;  // Load only
  SkipGramConfig skipgram;
};

struct ClassifierConfig {
  std::string family;
  LogRegParams logreg;
  double var_smoothing = 1e-9;
  std::size_t tune_budget = 0;  // > 0 runs Bayesian optimization for GNB
  std::uint64_t tune_seed = 0;
  SvmParams svm;
  RfParams rf;
};

struct ZeroshotConfig {
  std::size_t order = 3;
  double discount = 0.75;
  std::size_t k = 20;
  double mask_fraction = 0.15;
  bool frequency_band = true;
  std::vector<CurvatureMethod> methods{CurvatureMethod::DetectGpt};
  std::uint64_t seed = 0;
};

struct RunConfig {
  std::filesystem::path hc3;
  std::optional<std::filesystem::path> conllu_human;
  std::optional<std::filesystem::path> conllu_machine;
  SplitSpec split;
  EmbeddingSource embeddings;
  std::optional<ClassifierConfig> classifier;
  std::optional<ZeroshotConfig> zeroshot;
  std::vector<AdversarialTransform> transforms;
  BinConfig bins = BinConfig::defaults();
  std::filesystem::path output_dir;
  std::uint64_t seed = 0;

  // Relative paths resolve against `base_dir`. Every module seed derives
  // from the global seed through its field path, e.g. "classifier.seed".
  static RunConfig from_json(const std::string& text, const std::filesystem::path& base_dir);
  static RunConfig load(const std::filesystem::path& path);

  // Re-derives module seeds after the global seed changes.
  void apply_seed(std::uint64_t seed);
};

}  // namespace detectkit::cli
