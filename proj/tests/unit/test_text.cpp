#include <doctest.h>

#include <string>
#include <unordered_map>
#include <vector>

#include <detectkit/text.hpp>

#include "helpers.hpp"

using namespace detectkit;
using dk_test::error_code;

TEST_CASE("tokenize splits words and punctuation") {
  const auto tokens = tokenize("Hello, world!");
  REQUIRE(tokens.size() == 4);
  CHECK(tokens[0].surface == "hello");
  CHECK(tokens[0].is_word);
  CHECK(tokens[1].surface == ",");
  CHECK_FALSE(tokens[1].is_word);
  CHECK(tokens[2].surface == "world");
  CHECK(tokens[3].surface == "!");
  CHECK(tokens[2].offset == 7);
  CHECK(tokens[2].length == 5);
  CHECK(tokenize("").empty());
  CHECK(tokenize("   \t\n").empty());
}

TEST_CASE("tokenize keeps apostrophe contractions") {
  CHECK(word_tokens("don't stop") == std::vector<std::string>{"don't", "stop"});
  CHECK(word_tokens("Don’t") == std::vector<std::string>{"don't"});
  const auto quoted = tokenize("'tis");
  REQUIRE(quoted.size() == 2);
  CHECK_FALSE(quoted[0].is_word);
}

TEST_CASE("tokenize handles non-ASCII letters and digits") {
  CHECK(word_tokens("Café NAÏVE 42x") == std::vector<std::string>{"café", "naïve", "42x"});
}

TEST_CASE("word order is preserved") {
  const std::string text = "The quick, brown fox; jumps over the lazy dog.";
  const auto tokens = tokenize(text);
  std::size_t last = 0;
  for (const auto& t : tokens) {
    CHECK(t.offset >= last);
    CHECK(!t.surface.empty());
    last = t.offset + t.length;
  }
  CHECK(word_tokens(text).front() == "the");
  CHECK(word_tokens(text).back() == "dog");
}

TEST_CASE("split_sentences") {
  CHECK(split_sentences("A b. C d!") == std::vector<std::string>{"A b.", "C d!"});
  CHECK(split_sentences("no terminator") == std::vector<std::string>{"no terminator"});
  CHECK(split_sentences("See Dr. Smith. Then go.").size() == 2);
  CHECK(split_sentences("Wait... what?! Yes.") ==
        std::vector<std::string>{"Wait...", "what?!", "Yes."});
  CHECK(split_sentences("Version 2.5 is out.").size() == 1);
  CHECK(split_sentences("").empty());
}

TEST_CASE("count_syllables") {
  CHECK(count_syllables("detection") == 3);
  CHECK(count_syllables("the") == 1);
  CHECK(count_syllables("queue") == 1);
  CHECK(count_syllables("make") == 1);
  CHECK(count_syllables("table") == 1);
  CHECK(count_syllables("rhythm") == 1);
  CHECK(count_syllables("x") == 1);
  for (const char* w : {"a", "bcd", "strengths", "aeiou", "tree"}) CHECK(count_syllables(w) >= 1);
}

TEST_CASE("build_vocab ordering and thresholds") {
  Corpus c;
  c.add({"d1", "a a b", Label::Human, {}});
  const Vocabulary v1 = build_vocab(c, 1);
  CHECK(v1.size() == 3);
  CHECK(v1.id("a") == 0);
  CHECK(v1.id("b") == 1);
  CHECK(v1.unk_id() == 2);
  CHECK(v1.word(2) == Vocabulary::kUnk);
  CHECK(v1.id("zzz") == v1.unk_id());

  const Vocabulary v2 = build_vocab(c, 2);
  CHECK(v2.size() == 2);
  CHECK(v2.contains("a"));
  CHECK_FALSE(v2.contains("b"));
  CHECK(v2.frequency(v2.unk_id()) == 1);

  const Vocabulary v3 = build_vocab(c, 10);
  CHECK(v3.size() == 1);
  CHECK(v3.known_size() == 0);

  CHECK(error_code([] { build_vocab(Corpus{}, 1); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("build_vocab breaks frequency ties lexicographically") {
  std::vector<std::vector<std::string>> docs{{"pear", "apple", "fig"}, {"fig", "apple"}};
  const Vocabulary v = build_vocab(docs, 1);
  CHECK(v.word(0) == "apple");
  CHECK(v.word(1) == "fig");
  CHECK(v.word(2) == "pear");
  std::vector<std::vector<std::string>> reordered{{"apple", "fig"}, {"fig", "pear", "apple"}};
  CHECK(build_vocab(reordered, 1) == v);
}

TEST_CASE("vocabulary from explicit words rejects duplicates") {
  const Vocabulary v = Vocabulary::from_words({"x", "y"});
  CHECK(v.id("y") == 1);
  CHECK(error_code([] { Vocabulary::from_words({"x", "x"}); }).has_value());
}
