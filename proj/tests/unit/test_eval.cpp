#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include <json.hpp>

#include <detectkit/eval.hpp>
#include <detectkit/random.hpp>
#include <detectkit/text.hpp>

#include "helpers.hpp"

using namespace detectkit;
using dk_test::error_code;

namespace {

constexpr Label M = Label::Machine;
constexpr Label H = Label::Human;

double brute_auroc(const std::vector<double>& s, const std::vector<Label>& y) {
  double wins = 0.0, pairs = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (y[i] != M) continue;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (y[j] != H) continue;
      pairs += 1.0;
      wins += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
    }
  }
  return wins / pairs;
}

class ConstantDetector final : public Detector {
 public:
  std::string method() const override { return "constant"; }
  double score(const Document&) const override { return 0.3; }
  double threshold() const override { return 0.5; }
};

// Fraction of upper-case letters; sensitive to case flips.
class UppercaseDetector final : public Detector {
 public:
  std::string method() const override { return "uppercase"; }
  double score(const Document& doc) const override {
    double upper = 0, letters = 0;
    for (char c : doc.body) {
      if (std::isalpha(static_cast<unsigned char>(c))) {
        ++letters;
        upper += std::isupper(static_cast<unsigned char>(c)) ? 1 : 0;
      }
    }
    return letters ? upper / letters : 0.0;
  }
  double threshold() const override { return 0.2; }
};

Corpus mixed_corpus() {
  Corpus c;
  c.add({"h1", "quiet lowercase words here", H, {}});
  c.add({"h2", "another calm sentence", H, {}});
  c.add({"h3", "Mostly lower text", H, {}});
  c.add({"m1", "LOUD SHOUTING TEXT", M, {}});
  c.add({"m2", "More CAPITAL Letters HERE", M, {}});
  c.add({"m3", "ALL CAPS", M, {}});
  return c;
}

}  // namespace

TEST_CASE("confusion counts") {
  const std::vector<Label> y{M, M, H};
  CHECK(confusion(y, y) == ConfusionMatrix{2, 0, 0, 1});
  const std::vector<Label> inv{H, H, M};
  const ConfusionMatrix c = confusion(inv, y);
  CHECK(c.tp == 0);
  CHECK(c.tn == 0);
  CHECK(c.total() == 3);
  CHECK(error_code([] { confusion({}, {}); }) == ErrorCode::InvalidArgument);
  CHECK(error_code([&] { confusion(inv, std::vector<Label>{M}); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("f1 from precision and recall") {
  CHECK(f1_score(0.97, 0.97) == 0.97);
  CHECK(f1_score(0.0, 0.0) == 0.0);
  CHECK(f1_score(1.0, 0.5) == doctest::Approx(2.0 / 3.0));
  Rng rng(2);
  for (int t = 0; t < 500; ++t) {
    const double p = rng.uniform(0.01, 1), r = rng.uniform(0.01, 1);
    const double f = f1_score(p, r);
    CHECK(f >= std::min(p, r) - 1e-15);
    CHECK(f <= std::max(p, r) + 1e-15);
  }
}

TEST_CASE("auroc examples") {
  CHECK(auroc(std::vector<double>{0.9, 0.8, 0.1, 0.2}, std::vector<Label>{M, M, H, H}) == 1.0);
  CHECK(auroc(std::vector<double>{0.8, 0.2, 0.5}, std::vector<Label>{M, M, H}) == 0.5);
  CHECK(auroc(std::vector<double>{0.4, 0.4}, std::vector<Label>{M, H}) == 0.5);
  CHECK(error_code([] { auroc(std::vector<double>{0.1, 0.2}, std::vector<Label>{M, M}); }) ==
        ErrorCode::AurocUndefined);
}

TEST_CASE("auroc equals the pairwise count with ties") {
  Rng rng(77);
  for (int t = 0; t < 300; ++t) {
    const std::size_t n = 2 + rng.below(49);
    std::vector<double> s(n);
    std::vector<Label> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = static_cast<double>(rng.below(8)) / 4.0;
      y[i] = rng.below(2) ? M : H;
    }
    y[0] = M;
    y[1] = H;
    CHECK(std::abs(auroc(s, y) - brute_auroc(s, y)) <= 1e-12);
  }
}

TEST_CASE("auroc is invariant under increasing transforms") {
  Rng rng(6);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> s(20), e(20);
    std::vector<Label> y(20);
    for (std::size_t i = 0; i < 20; ++i) {
      s[i] = static_cast<double>(rng.below(10)) / 10.0;
      e[i] = std::exp(3.0 * s[i]) - 7.0;
      y[i] = i % 2 ? M : H;
    }
    CHECK(auroc(s, y) == auroc(e, y));
  }
}

TEST_CASE("metrics definitions and zero denominators") {
  const std::vector<double> s{0.9, 0.2, 0.7, 0.4};
  const std::vector<Label> y{M, M, H, H};
  const std::vector<Label> p{M, H, M, H};
  const MetricsReport r = metrics(confusion(p, y), s, y);
  CHECK(r.precision == 0.5);
  CHECK(r.recall == 0.5);
  CHECK(r.accuracy == 0.5);
  CHECK(r.f1 == 0.5);
  CHECK(r.auroc == 0.5);
  CHECK(r.n == 4);

  const std::vector<Label> none{H, H, H, H};
  const MetricsReport z = metrics(confusion(none, y), s, y);
  CHECK(z.precision == 0.0);
  CHECK(z.f1 == 0.0);
  CHECK(std::find(z.zero_denominator.begin(), z.zero_denominator.end(), "precision") !=
        z.zero_denominator.end());
  CHECK(z.accuracy == 0.5);
  CHECK(error_code([&] { metrics(confusion(none, none), s, none); }) == ErrorCode::AurocUndefined);
}

TEST_CASE("youden threshold maximizes tpr minus fpr") {
  const std::vector<double> s{0.1, 0.4, 0.35, 0.8};
  const std::vector<Label> y{H, H, M, M};
  CHECK(youden_threshold(s, y) == 0.8);
  const std::vector<double> sep{0.1, 0.2, 0.6, 0.9};
  const std::vector<Label> ys{H, H, M, M};
  CHECK(youden_threshold(sep, ys) == 0.6);
}

TEST_CASE("adversarial transforms") {
  const Document doc{"d", "one two three four five six seven eight nine ten", M, {}};
  for (TransformKind kind : {TransformKind::SpecialChars, TransformKind::WhitespaceNoise, TransformKind::CaseFlip}) {
    const AdversarialTransform none{kind, 0.0, 1};
    CHECK(adversarial_transform(doc, none) == doc);
    const AdversarialTransform some{kind, 0.4, 3};
    const Document a = adversarial_transform(doc, some);
    CHECK(a == adversarial_transform(doc, some));
    CHECK(a.label == doc.label);
    CHECK(a.id == doc.id);
    CHECK_FALSE(a.body == doc.body);
  }
  const Document sc = adversarial_transform(doc, {TransformKind::SpecialChars, 0.2, 5});
  CHECK(sc.body.size() == doc.body.size() + 4);
  std::size_t inserted = 0;
  for (std::size_t i = 0; i + 1 < sc.body.size(); ++i) {
    inserted += sc.body[i] == '\\' && (sc.body[i + 1] == '"' || sc.body[i + 1] == '/');
  }
  CHECK(inserted == 2);
  CHECK(word_tokens(sc.body) == word_tokens(doc.body));

  const Document ws = adversarial_transform(doc, {TransformKind::WhitespaceNoise, 1.0, 5});
  CHECK(ws.body.size() == doc.body.size() + 9);
  const Document cf = adversarial_transform(doc, {TransformKind::CaseFlip, 0.5, 5});
  std::size_t upper = 0;
  for (char c : cf.body) upper += std::isupper(static_cast<unsigned char>(c)) ? 1 : 0;
  CHECK(upper == 19);  // floor(0.5 * 39 letters)

  CHECK(AdversarialTransform{TransformKind::SpecialChars, 0.2, 0}.name() == "special_chars@0.2");
  CHECK(parse_transform_kind("case_flip") == TransformKind::CaseFlip);
  CHECK(error_code([] { parse_transform_kind("rot13"); }) == ErrorCode::InvalidArgument);
  CHECK(error_code([&] { adversarial_transform(doc, {TransformKind::CaseFlip, 1.5, 0}); }) ==
        ErrorCode::InvalidArgument);
}

TEST_CASE("robustness report with identity and constant detectors") {
  const Corpus test = mixed_corpus();
  const std::vector<AdversarialTransform> identity{{TransformKind::SpecialChars, 0.0, 1},
                                                   {TransformKind::CaseFlip, 0.0, 2}};
  const RobustnessReport r = robustness_report(UppercaseDetector{}, test, identity);
  REQUIRE(r.transforms.size() == 2);
  for (const auto& t : r.transforms) {
    CHECK(t.deltas.size() == 5);
    for (const auto& d : t.deltas) CHECK(d.delta == 0.0);
  }

  const std::vector<AdversarialTransform> attacks{{TransformKind::CaseFlip, 0.6, 4},
                                                  {TransformKind::SpecialChars, 0.5, 4}};
  const RobustnessReport c = robustness_report(ConstantDetector{}, test, attacks);
  CHECK(c.clean.auroc == 0.5);
  for (const auto& t : c.transforms) {
    for (const auto& d : t.deltas) CHECK(d.delta == 0.0);
  }

  const RobustnessReport u = robustness_report(UppercaseDetector{}, test, attacks);
  bool any_change = false;
  for (const auto& d : u.transforms[0].deltas) any_change |= d.delta != 0.0;
  CHECK(any_change);
  CHECK(u.transforms[0].before.f1 == u.transforms[1].before.f1);
  CHECK(u.transforms[0].before.auroc == u.clean.auroc);

  const auto j = nlohmann::json::parse(u.to_json());
  CHECK(j.at("method") == "uppercase");
  CHECK(j.at("transforms").size() == 2);
  const std::string csv = u.to_csv();
  CHECK(csv.rfind("transform,metric,before,after,delta\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 11);
}
