#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <unordered_map>
#include <string>
#include <string_view>
#include <vector>

#include <detectkit/ingest.hpp>
#include <detectkit/ngram_lm.hpp>
#include <detectkit/random.hpp>
#include <detectkit/text.hpp>

namespace detectkit {

struct LmScore {
  double log_prob = 0.0;
  std::size_t events = 0;  // predicted tokens, end markers included

  double per_token() const { return log_prob / static_cast<double>(events); }
};

// Total natural-log probability over the document's sentences. Throws
// EmptyDocument when the text holds no word token.
LmScore score_text(const NGramLM& lm, std::string_view text);
inline double log_prob(const NGramLM& lm, const Document& doc) {
  return score_text(lm, doc.body).log_prob;
}

// Replacement words drawn from a unigram distribution, optionally limited to
// words whose frequency lies within one octave of the replaced word.
class SubstitutionPool {
 public:
  explicit SubstitutionPool(const Vocabulary& vocabulary, bool frequency_band = true);

  std::string draw(std::string_view original, Rng& rng) const;
  std::size_t size() const { return words_.size(); }

 private:
  std::string draw_in_range(std::size_t lo, std::size_t hi, Rng& rng) const;

  bool frequency_band_;
  std::vector<std::string> words_;        // ascending frequency
  std::vector<std::uint64_t> frequency_;  // aligned with words_
  std::vector<double> cumulative_;        // prefix sums of sampling weights
  std::unordered_map<std::string, std::uint64_t> lookup_;
};

struct PerturbConfig {
  double mask_fraction = 0.15;
  std::shared_ptr<const SubstitutionPool> pool;
  std::uint64_t seed = 0;
  std::size_t k = 20;
};

// Replaces floor(mask_fraction * words) word tokens at seeded positions.
// Punctuation, spacing and the word-token count are preserved.
Document perturb(const Document& doc, const PerturbConfig& config);

struct CurvatureScore {
  double d = 0.0;
  double logp_original = 0.0;  // per token
  double logp_perturbed_mean = 0.0;
  double logp_perturbed_std = 0.0;
  std::size_t k_used = 0;
  std::size_t scoring_passes = 0;  // LM scoring calls made
};

// (original - mean) / population std, or 0 when std < 1e-9.
double perturbation_discrepancy(double original, std::span<const double> perturbed);

// Perturbation seeds are config.seed + 1 .. config.seed + k.
CurvatureScore detect_gpt_score(const NGramLM& lm, const Document& doc, const PerturbConfig& config);
// One perturbation: d = per-token logp(x) - per-token logp(x~).
CurvatureScore single_revise_score(const NGramLM& lm, const Document& doc,
                                   const PerturbConfig& config);

Label classify_curvature(const CurvatureScore& score, double threshold);

}  // namespace detectkit
