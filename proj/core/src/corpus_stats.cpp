#include "detectkit/corpus_stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include <json.hpp>

#include "detectkit/error.hpp"
#include "detectkit/text.hpp"

namespace detectkit {

const char* to_string(Statistic stat) noexcept {
  switch (stat) {
    case Statistic::AnswerLength: return "answer_length";
    case Statistic::SentenceLength: return "sentence_length";
    case Statistic::TypeTokenRatio: return "ttr";
    case Statistic::GradeLevel: return "fkgl";
    case Statistic::DependencyDistance: return "dependency_distance";
  }
  return "unknown";
}

std::size_t Histogram::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::size_t{0}) + underflow + overflow;
}

namespace {

std::vector<double> linspace_edges(double lo, double hi, double width) {
  std::vector<double> edges;
  const auto n = static_cast<std::size_t>(std::llround((hi - lo) / width));
  for (std::size_t i = 0; i <= n; ++i) edges.push_back(lo + width * static_cast<double>(i));
  return edges;
}

}  // namespace

BinConfig BinConfig::defaults() {
  BinConfig cfg;
  cfg.answer_length = linspace_edges(0.0, 500.0, 20.0);
  cfg.sentence_length = linspace_edges(0.0, 60.0, 2.0);
  cfg.type_token_ratio = linspace_edges(0.0, 1.0, 0.1);
  cfg.grade_level = linspace_edges(-5.0, 25.0, 1.0);
  cfg.dependency_distance = linspace_edges(0.0, 10.0, 0.5);
  return cfg;
}

const std::vector<double>& BinConfig::edges(Statistic stat) const {
  switch (stat) {
    case Statistic::AnswerLength: return answer_length;
    case Statistic::SentenceLength: return sentence_length;
    case Statistic::TypeTokenRatio: return type_token_ratio;
    case Statistic::GradeLevel: return grade_level;
    case Statistic::DependencyDistance: return dependency_distance;
  }
  return answer_length;
}

std::size_t answer_length(const Document& doc) { return word_tokens(doc.body).size(); }

double mean_sentence_length(const Document& doc) {
  const auto sentences = split_sentences(doc.body);
  if (sentences.empty()) throw Error(ErrorCode::InvalidArgument, "document has no sentences");
  return static_cast<double>(answer_length(doc)) / static_cast<double>(sentences.size());
}

double type_token_ratio(const Document& doc) {
  const auto words = word_tokens(doc.body);
  if (words.empty()) throw Error(ErrorCode::InvalidArgument, "document has no word tokens");
  const std::unordered_set<std::string> types(words.begin(), words.end());
  return static_cast<double>(types.size()) / static_cast<double>(words.size());
}

double flesch_kincaid_grade(double words, double sentences, double syllables) {
  if (!(words > 0.0) || !(sentences > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "grade level needs at least one word and sentence");
  }
  return 0.39 * (words / sentences) + 11.8 * (syllables / words) - 15.59;
}

double flesch_kincaid_grade(const Document& doc) {
  const auto sentences = split_sentences(doc.body);
  const auto words = word_tokens(doc.body);
  std::size_t syllables = 0;
  for (const auto& w : words) syllables += count_syllables(w);
  return flesch_kincaid_grade(static_cast<double>(words.size()),
                              static_cast<double>(sentences.size()),
                              static_cast<double>(syllables));
}

double mean_dependency_distance(const ParsedSentence& sentence) {
  if (sentence.heads.size() != sentence.tokens.size()) {
    throw Error(ErrorCode::InvalidArgument, "heads and tokens differ in length");
  }
  double total = 0.0;
  std::size_t arcs = 0;
  for (std::size_t i = 0; i < sentence.heads.size(); ++i) {
    const std::size_t head = sentence.heads[i];
    if (head == 0) continue;
    const std::size_t position = i + 1;
    total += static_cast<double>(position > head ? position - head : head - position);
    ++arcs;
  }
  if (arcs == 0) throw Error(ErrorCode::InvalidArgument, "sentence has no non-root arcs");
  return total / static_cast<double>(arcs);
}

Histogram histogram(std::span<const double> values, std::span<const double> bin_edges) {
  if (bin_edges.size() < 2) throw Error(ErrorCode::InvalidArgument, "histogram needs >= 2 edges");
  for (std::size_t i = 1; i < bin_edges.size(); ++i) {
    if (!(bin_edges[i] > bin_edges[i - 1])) {
      throw Error(ErrorCode::InvalidArgument, "histogram edges must be strictly ascending");
    }
  }
  Histogram h;
  h.bin_edges.assign(bin_edges.begin(), bin_edges.end());
  h.counts.assign(bin_edges.size() - 1, 0);
  for (double v : values) {
    if (v < bin_edges.front()) {
      ++h.underflow;
    } else if (v > bin_edges.back()) {
      ++h.overflow;
    } else if (v == bin_edges.back()) {
      ++h.counts.back();
    } else {
      auto it = std::upper_bound(bin_edges.begin(), bin_edges.end(), v);
      ++h.counts[static_cast<std::size_t>(it - bin_edges.begin()) - 1];
    }
  }
  return h;
}

bool StatsReport::has(Statistic stat) const {
  return std::all_of(classes.begin(), classes.end(),
                     [&](const auto& kv) { return kv.second.stats.count(stat) > 0; }) &&
         !classes.empty();
}

double StatsReport::mean(Label label, Statistic stat) const {
  return classes.at(label).stats.at(stat).mean;
}

std::string StatsReport::to_json() const {
  nlohmann::ordered_json root = nlohmann::ordered_json::object();
  for (const auto& [label, cls] : classes) {
    nlohmann::ordered_json stats = nlohmann::ordered_json::object();
    for (Statistic stat : kStatistics) {
      auto it = cls.stats.find(stat);
      if (it == cls.stats.end()) continue;
      const Distribution& d = it->second;
      nlohmann::ordered_json entry;
      entry["mean"] = d.mean;
      entry["n"] = d.values.size();
      entry["histogram"] = {{"edges", d.histogram.bin_edges},
                            {"counts", d.histogram.counts},
                            {"underflow", d.histogram.underflow},
                            {"overflow", d.histogram.overflow}};
      stats[to_string(stat)] = std::move(entry);
    }
    root[to_string(label)] = std::move(stats);
  }
  return root.dump(2) + "\n";
}

namespace {

Distribution summarize(std::vector<double> values, const std::vector<double>& edges,
                       Label label) {
  Distribution d;
  d.histogram = histogram(values, edges);
  d.histogram.label = to_string(label);
  d.mean = values.empty() ? 0.0
                          : std::accumulate(values.begin(), values.end(), 0.0) /
                                static_cast<double>(values.size());
  d.values = std::move(values);
  return d;
}

}  // namespace

StatsReport corpus_report(const Corpus& corpus, const std::optional<LabeledParses>& parses,
                          const BinConfig& bins) {
  if (!corpus.has_both_classes()) {
    throw Error(ErrorCode::SingleClass, "corpus report needs both human and machine documents");
  }
  StatsReport report;
  for (Label label : kLabels) {
    std::map<Statistic, std::vector<double>> values;
    ClassStats& cls = report.classes[label];
    for (Statistic stat : {Statistic::AnswerLength, Statistic::SentenceLength,
                           Statistic::TypeTokenRatio, Statistic::GradeLevel}) {
      values[stat];
    }
    for (const auto& doc : corpus) {
      if (doc.label != label) continue;
      const auto words = word_tokens(doc.body);
      const auto sentences = split_sentences(doc.body);
      values[Statistic::AnswerLength].push_back(static_cast<double>(words.size()));
      if (words.empty() || sentences.empty()) {
        ++cls.skipped[Statistic::SentenceLength];
        ++cls.skipped[Statistic::TypeTokenRatio];
        ++cls.skipped[Statistic::GradeLevel];
        continue;
      }
      values[Statistic::SentenceLength].push_back(mean_sentence_length(doc));
      values[Statistic::TypeTokenRatio].push_back(type_token_ratio(doc));
      values[Statistic::GradeLevel].push_back(flesch_kincaid_grade(doc));
    }
    if (parses) {
      auto& dd = values[Statistic::DependencyDistance];
      for (const auto& sent : parses->of(label)) {
        const bool has_arc = std::any_of(sent.heads.begin(), sent.heads.end(),
                                         [](std::size_t h) { return h != 0; });
        if (!has_arc) {
          ++cls.skipped[Statistic::DependencyDistance];
          continue;
        }
        dd.push_back(mean_dependency_distance(sent));
      }
    }
    for (auto& [stat, vals] : values) {
      cls.stats.emplace(stat, summarize(std::move(vals), bins.edges(stat), label));
    }
  }
  return report;
}

}  // namespace detectkit
