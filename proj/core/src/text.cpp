#include "detectkit/text.hpp"

#include <unicode/locid.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include <algorithm>
#include <array>
#include <cctype>

#include "detectkit/error.hpp"

namespace detectkit {

namespace {

bool is_space(UChar32 c) {
  return u_isUWhiteSpace(c) || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_word_char(UChar32 c) {
  if (u_hasBinaryProperty(c, UCHAR_ALPHABETIC) || u_isdigit(c)) return true;
  const int8_t type = u_charType(c);
  return type == U_NON_SPACING_MARK || type == U_COMBINING_SPACING_MARK ||
         type == U_ENCLOSING_MARK;
}

bool is_apostrophe(UChar32 c) { return c == '\'' || c == 0x2019; }

struct CodePoint {
  UChar32 value;
  std::size_t offset;
  std::size_t length;
};

std::vector<CodePoint> decode(std::string_view text) {
  std::vector<CodePoint> out;
  out.reserve(text.size());
  const auto* bytes = reinterpret_cast<const uint8_t*>(text.data());
  const int32_t length = static_cast<int32_t>(text.size());
  int32_t i = 0;
  while (i < length) {
    const int32_t start = i;
    UChar32 c;
    U8_NEXT(bytes, i, length, c);
    if (c < 0) c = 0xFFFD;
    out.push_back({c, static_cast<std::size_t>(start), static_cast<std::size_t>(i - start)});
  }
  return out;
}

std::string lower_word(std::string_view surface) {
  icu::UnicodeString u = icu::UnicodeString::fromUTF8(
      icu::StringPiece(surface.data(), static_cast<int32_t>(surface.size())));
  u.findAndReplace(icu::UnicodeString(static_cast<UChar>(0x2019)),
                   icu::UnicodeString(static_cast<UChar>('\'')));
  u.toLower(icu::Locale::getRoot());
  std::string out;
  u.toUTF8String(out);
  return out;
}

}  // namespace

std::vector<Token> tokenize(std::string_view text) {
  const auto cps = decode(text);
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < cps.size()) {
    const UChar32 c = cps[i].value;
    if (is_space(c)) {
      ++i;
      continue;
    }
    if (is_word_char(c)) {
      std::size_t j = i + 1;
      while (j < cps.size()) {
        if (is_word_char(cps[j].value)) {
          ++j;
        } else if (is_apostrophe(cps[j].value) && j + 1 < cps.size() &&
                   is_word_char(cps[j + 1].value)) {
          j += 2;
        } else {
          break;
        }
      }
      const std::size_t begin = cps[i].offset;
      const std::size_t end = cps[j - 1].offset + cps[j - 1].length;
      tokens.push_back({lower_word(text.substr(begin, end - begin)), true, begin, end - begin});
      i = j;
      continue;
    }
    tokens.push_back({std::string(text.substr(cps[i].offset, cps[i].length)), false,
                      cps[i].offset, cps[i].length});
    ++i;
  }
  return tokens;
}

std::vector<std::string> word_tokens(std::string_view text) {
  std::vector<std::string> words;
  for (auto& tok : tokenize(text)) {
    if (tok.is_word) words.push_back(std::move(tok.surface));
  }
  return words;
}

namespace {

constexpr std::array<std::string_view, 22> kAbbreviations{
    "mr.", "mrs.", "ms.", "dr.", "prof.", "sr.", "jr.", "st.", "vs.", "etc.", "e.g.",
    "i.e.", "a.m.", "p.m.", "u.s.", "no.", "fig.", "approx.", "inc.", "ltd.", "cf.", "al."};

bool ascii_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && ascii_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && ascii_space(s.back())) s.remove_suffix(1);
  return s;
}

bool ends_with_abbreviation(std::string_view text, std::size_t dot) {
  std::size_t start = dot;
  while (start > 0 && !ascii_space(text[start - 1])) --start;
  std::string word(text.substr(start, dot - start + 1));
  // Leading quotes or brackets do not belong to the abbreviation.
  while (!word.empty() && (word.front() == '"' || word.front() == '(' || word.front() == '\'')) {
    word.erase(word.begin());
  }
  std::transform(word.begin(), word.end(), word.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return std::find(kAbbreviations.begin(), kAbbreviations.end(), word) != kAbbreviations.end();
}

}  // namespace

std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> sentences;
  auto emit = [&](std::string_view piece) {
    piece = trim(piece);
    if (!piece.empty()) sentences.emplace_back(piece);
  };

  std::size_t start = 0;
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (c != '.' && c != '!' && c != '?') {
      ++i;
      continue;
    }
    std::size_t run_end = i;
    while (run_end + 1 < text.size() &&
           (text[run_end + 1] == '.' || text[run_end + 1] == '!' || text[run_end + 1] == '?')) {
      ++run_end;
    }
    const bool at_boundary = run_end + 1 == text.size() || ascii_space(text[run_end + 1]);
    const bool guarded = run_end == i && c == '.' && ends_with_abbreviation(text, i);
    if (at_boundary && !guarded) {
      emit(text.substr(start, run_end + 1 - start));
      start = run_end + 1;
    }
    i = run_end + 1;
  }
  if (start < text.size()) emit(text.substr(start));
  return sentences;
}

std::size_t count_syllables(std::string_view word) {
  auto is_vowel = [](char c) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u' || c == 'y';
  };
  std::size_t groups = 0;
  bool in_group = false;
  for (char c : word) {
    const bool v = is_vowel(c);
    if (v && !in_group) ++groups;
    in_group = v;
  }
  const std::size_t n = word.size();
  if (groups > 1 && n >= 2 && std::tolower(static_cast<unsigned char>(word[n - 1])) == 'e' &&
      !is_vowel(word[n - 2])) {
    --groups;
  }
  return std::max<std::size_t>(groups, 1);
}

Vocabulary::Vocabulary() : words_{std::string(kUnk)}, frequencies_{0} { rebuild_index(); }

Vocabulary Vocabulary::from_counts(const std::unordered_map<std::string, std::uint64_t>& counts,
                                   std::uint64_t min_count) {
  if (min_count < 1) throw Error(ErrorCode::InvalidArgument, "min_count must be >= 1");
  std::vector<std::pair<std::string, std::uint64_t>> kept;
  std::uint64_t unk_count = 0;
  for (const auto& [word, count] : counts) {
    if (count >= min_count) {
      kept.emplace_back(word, count);
    } else {
      unk_count += count;
    }
  }
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });

  Vocabulary vocab;
  vocab.words_.clear();
  vocab.frequencies_.clear();
  for (auto& [word, count] : kept) {
    vocab.words_.push_back(std::move(word));
    vocab.frequencies_.push_back(count);
  }
  vocab.words_.emplace_back(kUnk);
  vocab.frequencies_.push_back(unk_count);
  vocab.rebuild_index();
  return vocab;
}

Vocabulary Vocabulary::from_words(std::vector<std::string> words,
                                  std::vector<std::uint64_t> frequencies) {
  if (frequencies.empty()) frequencies.assign(words.size(), 0);
  if (frequencies.size() != words.size()) {
    throw Error(ErrorCode::InvalidArgument, "word and frequency lists differ in length");
  }
  Vocabulary vocab;
  vocab.words_ = std::move(words);
  vocab.frequencies_ = std::move(frequencies);
  vocab.words_.emplace_back(kUnk);
  vocab.frequencies_.push_back(0);
  vocab.rebuild_index();
  if (vocab.index_.size() != vocab.words_.size()) {
    throw Error(ErrorCode::InvalidArgument, "duplicate word in vocabulary");
  }
  return vocab;
}

void Vocabulary::rebuild_index() {
  index_.clear();
  index_.reserve(words_.size());
  for (std::uint32_t i = 0; i < words_.size(); ++i) index_.emplace(words_[i], i);
}

std::optional<std::uint32_t> Vocabulary::find(std::string_view word) const {
  auto it = index_.find(std::string(word));
  if (it == index_.end() || it->second == unk_id()) return std::nullopt;
  return it->second;
}

std::uint32_t Vocabulary::id(std::string_view word) const {
  return find(word).value_or(unk_id());
}

Vocabulary build_vocab(std::span<const std::vector<std::string>> documents,
                       std::uint64_t min_count) {
  if (documents.empty()) throw Error(ErrorCode::InvalidArgument, "cannot build a vocabulary from an empty corpus");
  std::unordered_map<std::string, std::uint64_t> counts;
  for (const auto& doc : documents) {
    for (const auto& w : doc) ++counts[w];
  }
  return Vocabulary::from_counts(counts, min_count);
}

Vocabulary build_vocab(const Corpus& corpus, std::uint64_t min_count) {
  if (corpus.empty()) throw Error(ErrorCode::InvalidArgument, "cannot build a vocabulary from an empty corpus");
  std::vector<std::vector<std::string>> docs;
  docs.reserve(corpus.size());
  for (const auto& doc : corpus) docs.push_back(word_tokens(doc.body));
  return build_vocab(docs, min_count);
}

}  // namespace detectkit
