#include "detectkit/zeroshot.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "detectkit/error.hpp"

namespace detectkit {

LmScore score_text(const NGramLM& lm, std::string_view text) {
  LmScore score;
  for (const auto& sentence : lm_sentences(text)) {
    std::size_t events = 0;
    score.log_prob += lm.sentence_log_prob(sentence, &events);
    score.events += events;
  }
  if (score.events == 0) throw Error(ErrorCode::EmptyDocument, "text has no word tokens to score");
  return score;
}

SubstitutionPool::SubstitutionPool(const Vocabulary& vocabulary, bool frequency_band)
    : frequency_band_(frequency_band) {
  std::vector<std::uint32_t> ids(vocabulary.known_size());
  std::iota(ids.begin(), ids.end(), 0u);
  if (ids.empty()) throw Error(ErrorCode::EmptyVocabulary, "substitution pool needs words");
  std::stable_sort(ids.begin(), ids.end(), [&](std::uint32_t a, std::uint32_t b) {
    return vocabulary.frequency(a) != vocabulary.frequency(b)
               ? vocabulary.frequency(a) < vocabulary.frequency(b)
               : vocabulary.word(a) < vocabulary.word(b);
  });
  const bool all_zero = std::all_of(ids.begin(), ids.end(),
                                    [&](std::uint32_t id) { return vocabulary.frequency(id) == 0; });
  double total = 0.0;
  cumulative_.push_back(0.0);
  for (std::uint32_t id : ids) {
    words_.push_back(vocabulary.word(id));
    frequency_.push_back(vocabulary.frequency(id));
    lookup_.emplace(vocabulary.word(id), vocabulary.frequency(id));
    total += all_zero ? 1.0 : static_cast<double>(vocabulary.frequency(id));
    cumulative_.push_back(total);
  }
}

std::string SubstitutionPool::draw_in_range(std::size_t lo, std::size_t hi, Rng& rng) const {
  const double base = cumulative_[lo];
  const double span = cumulative_[hi] - base;
  const double target = base + rng.uniform() * span;
  auto it = std::upper_bound(cumulative_.begin() + static_cast<std::ptrdiff_t>(lo) + 1,
                             cumulative_.begin() + static_cast<std::ptrdiff_t>(hi) + 1, target);
  std::size_t idx = static_cast<std::size_t>(it - cumulative_.begin()) - 1;
  return words_[std::min(idx, hi - 1)];
}

std::string SubstitutionPool::draw(std::string_view original, Rng& rng) const {
  std::size_t lo = 0;
  std::size_t hi = words_.size();
  if (frequency_band_) {
    auto it = lookup_.find(std::string(original));
    if (it != lookup_.end() && it->second > 0) {
      const std::uint64_t f = it->second;
      const std::uint64_t band_lo = (f + 1) / 2;  // ceil(f / 2)
      const std::uint64_t band_hi = 2 * f;
      const std::size_t a = static_cast<std::size_t>(
          std::lower_bound(frequency_.begin(), frequency_.end(), band_lo) - frequency_.begin());
      const std::size_t b = static_cast<std::size_t>(
          std::upper_bound(frequency_.begin(), frequency_.end(), band_hi) - frequency_.begin());
      // A band holding nothing but the original word falls back to the whole pool.
      if (b > a + 1 && cumulative_[b] > cumulative_[a]) {
        lo = a;
        hi = b;
      }
    }
  }
  return draw_in_range(lo, hi, rng);
}

Document perturb(const Document& doc, const PerturbConfig& config) {
  if (!(config.mask_fraction >= 0.0 && config.mask_fraction <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "mask_fraction must lie in [0,1]");
  }
  const auto tokens = tokenize(doc.body);
  std::vector<std::size_t> word_positions;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i].is_word) word_positions.push_back(i);
  }
  const auto replace_count = static_cast<std::size_t>(
      std::floor(config.mask_fraction * static_cast<double>(word_positions.size()) + 1e-9));
  if (replace_count == 0) return doc;
  if (!config.pool) throw Error(ErrorCode::InvalidArgument, "perturbation needs a substitution pool");

  Rng rng(derive_seed(config.seed, "perturb"));
  auto chosen = rng.sample_without_replacement(word_positions.size(), replace_count);
  std::vector<std::pair<std::size_t, std::string>> replacements;
  for (std::size_t pick : chosen) {
    const Token& tok = tokens[word_positions[pick]];
    std::string word = config.pool->draw(tok.surface, rng);
    for (int attempt = 0; attempt < 10 && word == tok.surface; ++attempt) {
      word = config.pool->draw(tok.surface, rng);
    }
    replacements.emplace_back(word_positions[pick], std::move(word));
  }
  std::sort(replacements.begin(), replacements.end());

  Document out = doc;
  out.body.clear();
  std::size_t cursor = 0;
  for (const auto& [token_index, word] : replacements) {
    const Token& tok = tokens[token_index];
    out.body.append(doc.body, cursor, tok.offset - cursor);
    out.body.append(word);
    cursor = tok.offset + tok.length;
  }
  out.body.append(doc.body, cursor, std::string::npos);
  return out;
}

double perturbation_discrepancy(double original, std::span<const double> perturbed) {
  if (perturbed.empty()) throw Error(ErrorCode::InvalidArgument, "no perturbed scores");
  const double n = static_cast<double>(perturbed.size());
  const double mean = std::accumulate(perturbed.begin(), perturbed.end(), 0.0) / n;
  double var = 0.0;
  for (double v : perturbed) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / n);
  return sd < 1e-9 ? 0.0 : (original - mean) / sd;
}

CurvatureScore detect_gpt_score(const NGramLM& lm, const Document& doc, const PerturbConfig& config) {
  if (config.k < 2) throw Error(ErrorCode::InvalidArgument, "DetectGPT scoring needs k >= 2");
  CurvatureScore out;
  out.logp_original = score_text(lm, doc.body).per_token();
  out.scoring_passes = 1;

  std::vector<double> perturbed;
  perturbed.reserve(config.k);
  for (std::size_t j = 1; j <= config.k; ++j) {
    PerturbConfig cfg = config;
    cfg.seed = config.seed + j;
    perturbed.push_back(score_text(lm, perturb(doc, cfg).body).per_token());
    ++out.scoring_passes;
  }
  const double n = static_cast<double>(perturbed.size());
  out.logp_perturbed_mean = std::accumulate(perturbed.begin(), perturbed.end(), 0.0) / n;
  double var = 0.0;
  for (double v : perturbed) var += (v - out.logp_perturbed_mean) * (v - out.logp_perturbed_mean);
  out.logp_perturbed_std = std::sqrt(var / n);
  out.d = perturbation_discrepancy(out.logp_original, perturbed);
  out.k_used = config.k;
  return out;
}

CurvatureScore single_revise_score(const NGramLM& lm, const Document& doc,
                                   const PerturbConfig& config) {
  if (config.k != 1) throw Error(ErrorCode::InvalidArgument, "Single-Revise scoring uses k = 1");
  CurvatureScore out;
  out.logp_original = score_text(lm, doc.body).per_token();
  PerturbConfig cfg = config;
  cfg.seed = config.seed + 1;
  out.logp_perturbed_mean = score_text(lm, perturb(doc, cfg).body).per_token();
  out.scoring_passes = 2;
  out.logp_perturbed_std = 0.0;
  out.d = out.logp_original - out.logp_perturbed_mean;
  out.k_used = 1;
  return out;
}

Label classify_curvature(const CurvatureScore& score, double threshold) {
  return score.d >= threshold ? Label::Machine : Label::Human;
}

}  // namespace detectkit
