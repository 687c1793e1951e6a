#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <detectkit/ingest.hpp>
#include <detectkit/random.hpp>
#include <detectkit/text.hpp>

namespace detectkit {

// Interpolated Kneser-Ney n-gram model over lowercased word tokens.
//
// Outcome ids: known words [0, K), UNK = K, end-of-sentence = K + 1. The
// start marker K + 2 only ever appears in histories. Every sentence is
// padded with order - 1 start markers and one end marker.
//
// The highest order uses raw counts with absolute discounting; lower orders
// use continuation counts N1+(. h w); the unigram level interpolates with
// the uniform distribution over all outcomes, so unseen words get mass
// through UNK.
class NGramLM {
 public:
  static constexpr std::size_t kMaxOrder = 8;
  static constexpr std::uint32_t kNone = 0xFFFFFFFFu;
  using Key = std::array<std::uint32_t, kMaxOrder - 1>;

  struct ContextTable {
    std::unordered_map<std::uint32_t, std::uint32_t> counts;
    std::uint64_t total = 0;
    std::uint32_t types = 0;
  };

  struct KeyHash {
    std::size_t operator()(const Key& key) const noexcept;
  };
  using Table = std::unordered_map<Key, ContextTable, KeyHash>;

  // Sentences of lowercased word tokens.
  static NGramLM train(std::span<const std::vector<std::string>> sentences, std::size_t order,
                       double discount);

  std::size_t order() const { return order_; }
  double discount() const { return discount_; }
  const Vocabulary& vocabulary() const { return vocab_; }

  std::uint32_t unk() const { return vocab_.unk_id(); }
  std::uint32_t eos() const { return unk() + 1; }
  std::uint32_t bos() const { return unk() + 2; }
  // Size of the predicted outcome space (words, UNK, end marker).
  std::size_t outcome_count() const { return vocab_.size() + 1; }

  std::uint32_t id(std::string_view word) const { return vocab_.id(word); }
  // Text form of an outcome id; UNK renders as "<unk>", end as "</s>".
  std::string outcome_name(std::uint32_t id) const;

  // P(word | history). Only the last order-1 history ids are used; shorter
  // histories are left-padded with the start marker.
  double probability(std::span<const std::uint32_t> history, std::uint32_t word) const;

  // Log probability (natural log) of one padded sentence and the number of
  // predicted events (words plus the end marker).
  double sentence_log_prob(std::span<const std::string> words, std::size_t* events = nullptr) const;

  // Generates one sentence by ancestral sampling; UNK is never emitted.
  std::vector<std::string> sample_sentence(Rng& rng, std::size_t max_words) const;

  // Per-order tables (index m - 1 holds contexts of length m - 1).
  const std::vector<Table>& tables() const { return tables_; }

  std::string to_json() const;
  static NGramLM from_json(const std::string& text);

 private:
  NGramLM() = default;
  double level_probability(std::size_t m, std::span<const std::uint32_t> context,
                           std::uint32_t word) const;
  void finalize_tables();

  std::size_t order_ = 3;
  double discount_ = 0.75;
  Vocabulary vocab_;
  std::vector<Table> tables_;
};

// Word-token sentences of a text, sentences without words dropped.
std::vector<std::vector<std::string>> lm_sentences(std::string_view text);

NGramLM train_kn_lm(const Corpus& corpus, std::size_t order = 3, double discount = 0.75);
NGramLM train_kn_lm(std::span<const std::string> texts, std::size_t order = 3,
                    double discount = 0.75);

void save_lm(const NGramLM& lm, const std::filesystem::path& path);
NGramLM load_lm(const std::filesystem::path& path);

}  // namespace detectkit
