#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <detectkit/ingest.hpp>

namespace detectkit {

struct Histogram {
  std::vector<double> bin_edges;
  std::vector<std::size_t> counts;
  std::size_t underflow = 0;
  std::size_t overflow = 0;
  std::string label;

  std::size_t total() const;
};

enum class Statistic { AnswerLength, SentenceLength, TypeTokenRatio, GradeLevel, DependencyDistance };

inline constexpr std::array<Statistic, 5> kStatistics{
    Statistic::AnswerLength, Statistic::SentenceLength, Statistic::TypeTokenRatio,
    Statistic::GradeLevel, Statistic::DependencyDistance};

const char* to_string(Statistic stat) noexcept;

// Fixed default edges keep reports from different runs comparable.
struct BinConfig {
  std::vector<double> answer_length;
  std::vector<double> sentence_length;
  std::vector<double> type_token_ratio;
  std::vector<double> grade_level;
  std::vector<double> dependency_distance;

  static BinConfig defaults();
  const std::vector<double>& edges(Statistic stat) const;
};

struct Distribution {
  std::vector<double> values;
  double mean = 0.0;
  Histogram histogram;
};

struct ClassStats {
  std::map<Statistic, Distribution> stats;
  // Documents that could not contribute to a statistic (e.g. no word tokens).
  std::map<Statistic, std::size_t> skipped;
};

struct StatsReport {
  std::map<Label, ClassStats> classes;

  bool has(Statistic stat) const;
  double mean(Label label, Statistic stat) const;
  // {class: {stat: {mean, n, histogram: {edges, counts, underflow, overflow}}}}
  std::string to_json() const;
};

// Per-label dependency parses; supplied separately because documents carry
// no syntactic annotation.
struct LabeledParses {
  std::vector<ParsedSentence> human;
  std::vector<ParsedSentence> machine;

  const std::vector<ParsedSentence>& of(Label label) const {
    return label == Label::Human ? human : machine;
  }
};

std::size_t answer_length(const Document& doc);
double mean_sentence_length(const Document& doc);
double type_token_ratio(const Document& doc);
double flesch_kincaid_grade(const Document& doc);
double flesch_kincaid_grade(double words, double sentences, double syllables);
double mean_dependency_distance(const ParsedSentence& sentence);

// Bins are half-open [e_i, e_{i+1}) except the last, which is closed.
Histogram histogram(std::span<const double> values, std::span<const double> bin_edges);

StatsReport corpus_report(const Corpus& corpus, const std::optional<LabeledParses>& parses = {},
                          const BinConfig& bins = BinConfig::defaults());

}  // namespace detectkit
