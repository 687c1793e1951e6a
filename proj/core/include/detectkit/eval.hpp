#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <detectkit/ingest.hpp>

namespace detectkit {

// Positive class is Machine throughout.
struct ConfusionMatrix {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;

  std::size_t total() const { return tp + fp + fn + tn; }
  bool operator==(const ConfusionMatrix&) const = default;
};

struct MetricsReport {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double accuracy = 0.0;
  double auroc = 0.0;
  ConfusionMatrix confusion;
  std::size_t n = 0;
  // Metrics whose denominator was zero and were reported as 0.
  std::vector<std::string> zero_denominator;
};

ConfusionMatrix confusion(std::span<const Label> predictions, std::span<const Label> labels);

// Harmonic mean, 0 when both are 0.
double f1_score(double precision, double recall);

// Mann-Whitney rank statistic with tied scores sharing their mean rank.
// Throws AurocUndefined unless both classes are present.
double auroc(std::span<const double> scores, std::span<const Label> labels);

MetricsReport metrics(const ConfusionMatrix& confusion, std::span<const double> scores,
                      std::span<const Label> labels);

// Threshold t among the observed scores maximizing TPR - FPR for the rule
// "Machine iff score >= t". Ties keep the largest threshold.
double youden_threshold(std::span<const double> scores, std::span<const Label> labels);

enum class TransformKind { SpecialChars, WhitespaceNoise, CaseFlip };

const char* to_string(TransformKind kind) noexcept;
TransformKind parse_transform_kind(std::string_view name);

struct AdversarialTransform {
  TransformKind kind = TransformKind::SpecialChars;
  double intensity = 0.0;
  std::uint64_t seed = 0;

  // e.g. "special_chars@0.2"
  std::string name() const;
};

// special_chars prefixes floor(intensity * words) words with \" or \/;
// whitespace_noise doubles floor(intensity * spaces) spaces; case_flip flips
// floor(intensity * letters) letters. Positions are seeded.
Document adversarial_transform(const Document& doc, const AdversarialTransform& transform);

// Unified scoring surface for classifiers and zero-shot detectors.
class Detector {
 public:
  virtual ~Detector() = default;
  virtual std::string method() const = 0;
  virtual double score(const Document& doc) const = 0;
  virtual double threshold() const = 0;

  Label classify(double score) const { return score >= threshold() ? Label::Machine : Label::Human; }
};

struct ScoredSet {
  std::vector<double> scores;
  std::vector<Label> predictions;
  std::vector<Label> labels;
};

ScoredSet score_corpus(const Detector& detector, const Corpus& corpus);
MetricsReport evaluate(const Detector& detector, const Corpus& corpus);

struct MetricDelta {
  std::string metric;
  double before = 0.0;
  double after = 0.0;
  double delta = 0.0;
};

struct TransformResult {
  AdversarialTransform transform;
  MetricsReport before;
  MetricsReport after;
  std::vector<MetricDelta> deltas;  // precision, recall, f1, accuracy, auroc
};

struct RobustnessReport {
  std::string method;
  MetricsReport clean;
  std::vector<TransformResult> transforms;

  std::string to_json() const;
  // transform,metric,before,after,delta
  std::string to_csv() const;
};

RobustnessReport robustness_report(const Detector& detector, const Corpus& test,
                                   std::span<const AdversarialTransform> transforms);

std::string metrics_to_json(const MetricsReport& report, int indent = 2);

}  // namespace detectkit
