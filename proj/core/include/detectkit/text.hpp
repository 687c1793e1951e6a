#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "detectkit/ingest.hpp"

namespace detectkit {

struct Token {
  std::string surface;  // lowercased for words
  bool is_word = false;
  std::size_t offset = 0;  // byte range in the source text
  std::size_t length = 0;
};

// Letters, digits and combining marks form words; an apostrophe joins two
// word characters ("don't"). Every other non-space code point becomes a
// one-character punctuation token.
std::vector<Token> tokenize(std::string_view text);

// Lowercased word surfaces only.
std::vector<std::string> word_tokens(std::string_view text);

// Splits after runs of '.', '!' or '?' that are followed by whitespace or the
// end of text, unless the run closes a known abbreviation.
std::vector<std::string> split_sentences(std::string_view text);

// Vowel-group heuristic (a e i o u y) with a silent final 'e'; at least 1.
std::size_t count_syllables(std::string_view word);

class Vocabulary {
 public:
  static constexpr std::string_view kUnk = "<unk>";

  // Vocabulary holding only UNK.
  Vocabulary();

  // Keeps words with count >= min_count, ordered by (count desc, word asc).
  // Dropped counts accumulate on UNK.
  static Vocabulary from_counts(const std::unordered_map<std::string, std::uint64_t>& counts,
                                std::uint64_t min_count);

  // Ids follow the given order. Frequencies default to zero.
  static Vocabulary from_words(std::vector<std::string> words,
                               std::vector<std::uint64_t> frequencies = {});

  // Includes UNK.
  std::size_t size() const { return words_.size(); }
  // Words other than UNK; they hold ids [0, known_size()).
  std::size_t known_size() const { return words_.size() - 1; }
  std::uint32_t unk_id() const { return static_cast<std::uint32_t>(words_.size() - 1); }

  std::uint32_t id(std::string_view word) const;
  std::optional<std::uint32_t> find(std::string_view word) const;
  bool contains(std::string_view word) const { return find(word).has_value(); }
  const std::string& word(std::uint32_t id) const { return words_.at(id); }
  std::uint64_t frequency(std::uint32_t id) const { return frequencies_.at(id); }

  bool operator==(const Vocabulary& other) const {
    return words_ == other.words_ && frequencies_ == other.frequencies_;
  }

 private:
  void rebuild_index();

  std::vector<std::string> words_;          // UNK last
  std::vector<std::uint64_t> frequencies_;
  std::unordered_map<std::string, std::uint32_t> index_;
};

Vocabulary build_vocab(const Corpus& corpus, std::uint64_t min_count);
Vocabulary build_vocab(std::span<const std::vector<std::string>> documents,
                       std::uint64_t min_count);

}  // namespace detectkit
