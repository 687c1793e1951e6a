#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include <json.hpp>

#include <detectkit/corpus_stats.hpp>
#include <detectkit/random.hpp>

#include "helpers.hpp"

using namespace detectkit;
using dk_test::error_code;

namespace {

Document doc(const std::string& body, Label label = Label::Human) {
  static int next = 0;
  return {"d" + std::to_string(next++), body, label, {}};
}

ParsedSentence parsed(std::vector<std::size_t> heads) {
  ParsedSentence s;
  s.heads = std::move(heads);
  s.tokens.assign(s.heads.size(), "w");
  return s;
}

}  // namespace

TEST_CASE("answer_length counts word tokens") {
  CHECK(answer_length(doc("the cat sat")) == 3);
  CHECK(answer_length(doc("!!!")) == 0);
  CHECK(answer_length(doc("a b, c")) == 3);
}

TEST_CASE("mean_sentence_length") {
  CHECK(mean_sentence_length(doc("A b. C d e.")) == doctest::Approx(2.5).epsilon(1e-12));
  CHECK(mean_sentence_length(doc("Hi.")) == 1.0);
  CHECK(mean_sentence_length(doc("x y")) == 2.0);
  CHECK(error_code([] { mean_sentence_length(doc(" ")); }).has_value());
}

TEST_CASE("type_token_ratio") {
  CHECK(type_token_ratio(doc("the cat sat on the mat")) == doctest::Approx(5.0 / 6.0).epsilon(1e-12));
  CHECK(type_token_ratio(doc("one two three")) == 1.0);
  CHECK(type_token_ratio(doc("a a a a")) == 0.25);
  CHECK(type_token_ratio(doc("The the THE")) == doctest::Approx(1.0 / 3.0));
  CHECK(error_code([] { type_token_ratio(doc("?!")); }).has_value());
}

TEST_CASE("flesch_kincaid_grade arithmetic") {
  CHECK(std::abs(flesch_kincaid_grade(10, 1, 14) - 4.83) < 1e-9);
  CHECK(std::abs(flesch_kincaid_grade(1, 1, 1) - (-3.4)) < 1e-9);
  CHECK(error_code([] { flesch_kincaid_grade(0, 1, 0); }).has_value());
  CHECK(error_code([] { flesch_kincaid_grade(3, 0, 3); }).has_value());
  // "Cats sleep." : 2 words, 1 sentence, 2 syllables
  CHECK(std::abs(flesch_kincaid_grade(doc("Cats sleep.")) - (0.39 * 2 + 11.8 * 1 - 15.59)) < 1e-9);
}

TEST_CASE("flesch_kincaid_grade is invariant under concatenated copies") {
  const std::string base = "The committee approved the ambitious proposal. Everyone celebrated quietly!";
  const double g = flesch_kincaid_grade(doc(base));
  std::string copies = base;
  for (int k = 2; k <= 5; ++k) {
    copies += " " + base;
    CHECK(std::abs(flesch_kincaid_grade(doc(copies)) - g) < 1e-9);
  }
}

TEST_CASE("mean_dependency_distance") {
  CHECK(mean_dependency_distance(parsed({2, 0, 2})) == 1.0);
  CHECK(mean_dependency_distance(parsed({2, 0})) == 1.0);
  CHECK(mean_dependency_distance(parsed({3, 3, 0})) == 1.5);
  CHECK(error_code([] { mean_dependency_distance(parsed({0})); }).has_value());
  CHECK(mean_dependency_distance(parsed({0, 1, 1, 1, 1})) >= 1.0);
}

TEST_CASE("histogram binning") {
  const std::vector<double> edges{0, 2, 4};
  const std::vector<double> values{1, 2, 3};
  const Histogram h = histogram(values, edges);
  CHECK(h.counts == std::vector<std::size_t>{1, 2});
  CHECK(histogram(std::vector<double>{}, edges).counts == std::vector<std::size_t>{0, 0});
  const Histogram last = histogram(std::vector<double>{4.0}, edges);
  CHECK(last.counts == std::vector<std::size_t>{0, 1});
  const Histogram outside = histogram(std::vector<double>{-1, 5, 0}, edges);
  CHECK(outside.underflow == 1);
  CHECK(outside.overflow == 1);
  CHECK(error_code([] { histogram(std::vector<double>{1}, std::vector<double>{0, 2, 2}); }) ==
        ErrorCode::InvalidArgument);
  CHECK(error_code([] { histogram(std::vector<double>{1}, std::vector<double>{3, 1}); }) ==
        ErrorCode::InvalidArgument);
}

TEST_CASE("histogram totals match value counts") {
  Rng rng(5);
  const std::vector<double> edges{-1, -0.25, 0, 0.5, 1};
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> values(rng.below(40));
    for (double& v : values) v = rng.uniform(-2, 2);
    const Histogram h = histogram(values, edges);
    CHECK(h.total() == values.size());
  }
}

TEST_CASE("type_token_ratio stays in (0,1] and hits 1 only for distinct words") {
  Rng rng(9);
  const std::vector<std::string> words{"alpha", "beta", "gamma", "delta", "eps"};
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng.below(12);
    std::string body;
    std::vector<std::string> used;
    for (std::size_t i = 0; i < n; ++i) {
      used.push_back(words[rng.below(words.size())]);
      body += used.back() + " ";
    }
    const double ttr = type_token_ratio(doc(body));
    CHECK(ttr > 0.0);
    CHECK(ttr <= 1.0);
    std::sort(used.begin(), used.end());
    const bool distinct = std::adjacent_find(used.begin(), used.end()) == used.end();
    CHECK((ttr == 1.0) == distinct);
  }
}

TEST_CASE("corpus_report with verbatim duplicates is symmetric") {
  Corpus c;
  const std::vector<std::string> bodies{"Short answer here.", "Another reply, with more words. Two sentences!",
                                        "Yes."};
  for (std::size_t i = 0; i < bodies.size(); ++i) {
    c.add({"h" + std::to_string(i), bodies[i], Label::Human, {}});
    c.add({"m" + std::to_string(i), bodies[i], Label::Machine, {}});
  }
  const StatsReport r = corpus_report(c);
  CHECK_FALSE(r.has(Statistic::DependencyDistance));
  for (Statistic s : {Statistic::AnswerLength, Statistic::SentenceLength, Statistic::TypeTokenRatio,
                      Statistic::GradeLevel}) {
    CHECK(r.has(s));
    CHECK(r.classes.at(Label::Human).stats.at(s).values == r.classes.at(Label::Machine).stats.at(s).values);
    CHECK(r.classes.at(Label::Human).stats.at(s).histogram.counts ==
          r.classes.at(Label::Machine).stats.at(s).histogram.counts);
  }
}

TEST_CASE("corpus_report doubles answer length for self-concatenated machine bodies") {
  Corpus c;
  const std::vector<std::string> bodies{"One two three.", "Four five six seven eight.", "Nine."};
  for (std::size_t i = 0; i < bodies.size(); ++i) {
    c.add({"h" + std::to_string(i), bodies[i], Label::Human, {}});
    c.add({"m" + std::to_string(i), bodies[i] + " " + bodies[i], Label::Machine, {}});
  }
  const StatsReport r = corpus_report(c);
  CHECK(r.mean(Label::Machine, Statistic::AnswerLength) ==
        doctest::Approx(2.0 * r.mean(Label::Human, Statistic::AnswerLength)).epsilon(1e-12));
}

TEST_CASE("corpus_report includes dependency distance when parses are given") {
  Corpus c;
  c.add({"h", "A b.", Label::Human, {}});
  c.add({"m", "C d.", Label::Machine, {}});
  LabeledParses parses;
  parses.human = load_conllu(dk_test::fixture("human.conllu"));
  parses.machine = load_conllu(dk_test::fixture("machine.conllu"));
  const StatsReport r = corpus_report(c, parses);
  REQUIRE(r.has(Statistic::DependencyDistance));
  // human: (1+1+2)/3 and (1+1)/2; machine: 18/9 and 13/7
  CHECK(std::abs(r.mean(Label::Human, Statistic::DependencyDistance) - 7.0 / 6.0) < 1e-9);
  CHECK(std::abs(r.mean(Label::Machine, Statistic::DependencyDistance) - 27.0 / 14.0) < 1e-9);

  const auto j = nlohmann::json::parse(r.to_json());
  CHECK(j.at("human").at("dependency_distance").at("n") == 2);
  CHECK(j.at("machine").at("ttr").at("histogram").at("edges").size() == 11);
  CHECK(j.at("machine").at("fkgl").at("histogram").contains("underflow"));
}

TEST_CASE("corpus_report rejects single-class corpora and skips wordless documents") {
  Corpus one;
  one.add({"h", "text", Label::Human, {}});
  CHECK(error_code([&] { corpus_report(one); }) == ErrorCode::SingleClass);

  Corpus c;
  c.add({"h1", "Words here.", Label::Human, {}});
  c.add({"h2", "???", Label::Human, {}});
  c.add({"m1", "More words here.", Label::Machine, {}});
  const StatsReport r = corpus_report(c);
  CHECK(r.classes.at(Label::Human).stats.at(Statistic::TypeTokenRatio).values.size() == 1);
  CHECK(r.classes.at(Label::Human).skipped.at(Statistic::TypeTokenRatio) == 1);
  CHECK(r.classes.at(Label::Human).stats.at(Statistic::AnswerLength).values.size() == 2);
}
