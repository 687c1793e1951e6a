#include "synthetic.hpp"

#include <cmath>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

namespace detectkit::testing {

std::vector<std::string> make_lexicon(std::size_t size, std::uint64_t seed) {
  static constexpr const char* kOnsets[] = {"b", "d", "f", "g", "k", "l", "m", "n", "p",
                                            "r", "s", "t", "v", "z", "br", "st", "tr", "pl"};
  static constexpr const char* kVowels[] = {"a", "e", "i", "o", "u"};
  Rng rng(seed);
  std::unordered_set<std::string> seen;
  std::vector<std::string> words;
  while (words.size() < size) {
    const std::size_t syllables = 1 + rng.below(3);
    std::string w;
    for (std::size_t s = 0; s < syllables; ++s) {
      w += kOnsets[rng.below(std::size(kOnsets))];
      w += kVowels[rng.below(std::size(kVowels))];
    }
    if (seen.insert(w).second) words.push_back(w);
  }
  return words;
}

TrigramSource::TrigramSource(std::vector<std::string> lexicon, std::uint64_t seed,
                             std::size_t branching, double zipf_exponent)
    : lexicon_(std::move(lexicon)), seed_(seed), branching_(branching) {
  rank_to_word_.resize(lexicon_.size());
  std::iota(rank_to_word_.begin(), rank_to_word_.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(rank_to_word_);
  std::vector<double> weights(lexicon_.size());
  for (std::size_t r = 0; r < weights.size(); ++r) {
    weights[r] = 1.0 / std::pow(static_cast<double>(r + 1), zipf_exponent);
  }
  zipf_ = DiscreteSampler(weights);
}

std::size_t TrigramSource::next(std::size_t a, std::size_t b, Rng& rng) const {
  Rng table(splitmix64(seed_ ^ splitmix64(a * 1000003u + b)));
  const std::size_t pick = rng.below(branching_);
  std::size_t word = 0;
  for (std::size_t i = 0; i <= pick; ++i) word = rank_to_word_[zipf_.sample(table)];
  return word;
}

std::vector<std::string> TrigramSource::sentence_words(Rng& rng, std::size_t min_words,
                                                       std::size_t max_words) const {
  const std::size_t length = min_words + rng.below(max_words - min_words + 1);
  std::vector<std::string> out;
  std::size_t a = lexicon_.size();
  std::size_t b = lexicon_.size();
  for (std::size_t i = 0; i < length; ++i) {
    const std::size_t w = next(a, b, rng);
    out.push_back(lexicon_[w]);
    a = b;
    b = w;
  }
  return out;
}

std::string TrigramSource::sentence(Rng& rng) const {
  auto words = sentence_words(rng);
  std::string s;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i) s += ' ';
    s += words[i];
  }
  s[0] = static_cast<char>(s[0] - 'a' + 'A');
  return s + ".";
}

std::string TrigramSource::document(Rng& rng, std::size_t sentences) const {
  std::string doc;
  for (std::size_t i = 0; i < sentences; ++i) {
    if (i) doc += ' ';
    doc += sentence(rng);
  }
  return doc;
}

Corpus two_source_corpus(const TrigramSource& human, const TrigramSource& machine, std::size_t n,
                         std::size_t sentences_per_doc, std::uint64_t seed) {
  Rng rng(seed);
  Corpus corpus;
  for (std::size_t i = 0; i < n; ++i) {
    corpus.add({"h" + std::to_string(i), human.document(rng, sentences_per_doc), Label::Human, {}});
    corpus.add({"m" + std::to_string(i), machine.document(rng, sentences_per_doc), Label::Machine, {}});
  }
  return corpus;
}

std::string hc3_line(const std::string& question, const std::vector<std::string>& human,
                     const std::vector<std::string>& machine) {
  nlohmann::ordered_json j;
  j["question"] = question;
  j["human_answers"] = human;
  j["chatgpt_answers"] = machine;
  return j.dump();
}

std::string synthetic_hc3(std::size_t questions, std::uint64_t seed) {
  const auto lexicon = make_lexicon(200, seed);
  const TrigramSource human(lexicon, seed + 1, 6, 0.9);
  const TrigramSource machine(lexicon, seed + 2, 3, 1.2);
  Rng rng(seed + 3);
  std::string out;
  for (std::size_t q = 0; q < questions; ++q) {
    out += hc3_line(human.sentence(rng), {human.document(rng, 1 + rng.below(3))},
                    {machine.document(rng, 2 + rng.below(3))}) +
           "\n";
  }
  return out;
}

std::string shuffle_words(const std::string& text, Rng& rng) {
  std::istringstream in(text);
  std::vector<std::string> words;
  for (std::string w; in >> w;) words.push_back(w);
  rng.shuffle(words);
  std::string out;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i) out += ' ';
    out += words[i];
  }
  return out;
}

}  // namespace detectkit::testing
