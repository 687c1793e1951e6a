#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <detectkit/ingest.hpp>
#include <detectkit/random.hpp>

namespace detectkit::testing {

// Pronounceable pseudo-words, distinct and deterministic for a seed.
std::vector<std::string> make_lexicon(std::size_t size, std::uint64_t seed);

// Second-order Markov text source. Each word pair has a small seeded set of
// successors drawn from a Zipf profile over a source-specific permutation of
// the lexicon, so two sources differ in both unigram and trigram statistics.
class TrigramSource {
 public:
  TrigramSource(std::vector<std::string> lexicon, std::uint64_t seed, std::size_t branching = 4,
                double zipf_exponent = 1.1);

  std::vector<std::string> sentence_words(Rng& rng, std::size_t min_words = 5,
                                          std::size_t max_words = 14) const;
  // Capitalized first word, terminated with '.'.
  std::string sentence(Rng& rng) const;
  std::string document(Rng& rng, std::size_t sentences) const;

 private:
  std::size_t next(std::size_t a, std::size_t b, Rng& rng) const;

  std::vector<std::string> lexicon_;
  std::uint64_t seed_;
  std::size_t branching_;
  std::vector<std::size_t> rank_to_word_;
  DiscreteSampler zipf_;
};

// n documents per class; Human from `human`, Machine from `machine`.
Corpus two_source_corpus(const TrigramSource& human, const TrigramSource& machine, std::size_t n,
                         std::size_t sentences_per_doc, std::uint64_t seed);

// One HC3 line per question with the given answers, JSON-escaped.
std::string hc3_line(const std::string& question, const std::vector<std::string>& human,
                     const std::vector<std::string>& machine);

// HC3 JSONL with `questions` lines, one human and one machine answer each,
// drawn from two sources over a shared lexicon.
std::string synthetic_hc3(std::size_t questions, std::uint64_t seed);

std::string shuffle_words(const std::string& text, Rng& rng);

}  // namespace detectkit::testing
