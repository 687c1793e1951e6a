#include "detectkit/detectors.hpp"

#include "detectkit/error.hpp"

namespace detectkit {

ClassifierDetector::ClassifierDetector(std::shared_ptr<const EmbeddingMatrix> embeddings, Model model)
    : embeddings_(std::move(embeddings)), model_(std::move(model)) {
  if (!embeddings_) throw Error(ErrorCode::InvalidArgument, "classifier detector needs embeddings");
  if (embeddings_->dim() != model_dim(model_)) {
    throw Error(ErrorCode::DimensionMismatch, "embedding width differs from model input width");
  }
}

double ClassifierDetector::score(const Document& doc) const {
  return detectkit::score(model_, doc_vector(doc, *embeddings_).values);
}

const char* to_string(CurvatureMethod method) noexcept {
  return method == CurvatureMethod::DetectGpt ? "detect_gpt" : "single_revise";
}

CurvatureMethod parse_curvature_method(std::string_view name) {
  if (name == "detect_gpt") return CurvatureMethod::DetectGpt;
  if (name == "single_revise") return CurvatureMethod::SingleRevise;
  throw Error(ErrorCode::InvalidArgument, "unknown zero-shot method '" + std::string(name) + "'");
}

CurvatureDetector::CurvatureDetector(std::shared_ptr<const NGramLM> lm, PerturbConfig config,
                                     CurvatureMethod method, double threshold)
    : lm_(std::move(lm)), config_(std::move(config)), method_(method), threshold_(threshold) {
  if (!lm_) throw Error(ErrorCode::InvalidArgument, "curvature detector needs a language model");
  if (method_ == CurvatureMethod::SingleRevise) config_.k = 1;
  if (!config_.pool) config_.pool = std::make_shared<SubstitutionPool>(lm_->vocabulary());
}

CurvatureScore CurvatureDetector::curvature(const Document& doc) const {
  CurvatureScore s = method_ == CurvatureMethod::DetectGpt ? detect_gpt_score(*lm_, doc, config_)
                                                           : single_revise_score(*lm_, doc, config_);
  passes_ += s.scoring_passes;
  return s;
}

}  // namespace detectkit
