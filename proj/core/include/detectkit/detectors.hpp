#pragma once

#include <atomic>
#include <memory>
#include <string>

#include <detectkit/classifiers.hpp>
#include <detectkit/embeddings.hpp>
#include <detectkit/eval.hpp>
#include <detectkit/ngram_lm.hpp>
#include <detectkit/zeroshot.hpp>

namespace detectkit {

// Mean-pooled embedding features fed to a trained classifier.
class ClassifierDetector final : public Detector {
 public:
  ClassifierDetector(std::shared_ptr<const EmbeddingMatrix> embeddings, Model model);

  std::string method() const override { return family_name(model_); }
  double score(const Document& doc) const override;
  double threshold() const override { return decision_threshold(model_); }

  const Model& model() const { return model_; }

 private:
  std::shared_ptr<const EmbeddingMatrix> embeddings_;
  Model model_;
};

enum class CurvatureMethod { DetectGpt, SingleRevise };

const char* to_string(CurvatureMethod method) noexcept;
CurvatureMethod parse_curvature_method(std::string_view name);

class CurvatureDetector final : public Detector {
 public:
  CurvatureDetector(std::shared_ptr<const NGramLM> lm, PerturbConfig config, CurvatureMethod method,
                    double threshold);

  std::string method() const override { return to_string(method_); }
  double score(const Document& doc) const override { return curvature(doc).d; }
  double threshold() const override { return threshold_; }
  void set_threshold(double t) { threshold_ = t; }

  CurvatureScore curvature(const Document& doc) const;
  // LM scoring passes issued so far.
  std::size_t scoring_passes() const { return passes_.load(); }

 private:
  std::shared_ptr<const NGramLM> lm_;
  PerturbConfig config_;
  CurvatureMethod method_;
  double threshold_;
  mutable std::atomic<std::size_t> passes_{0};
};

}  // namespace detectkit
