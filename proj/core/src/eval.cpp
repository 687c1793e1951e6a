#include "detectkit/eval.hpp"

#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "detectkit/error.hpp"
#include "detectkit/random.hpp"
#include "detectkit/text.hpp"

namespace detectkit {

ConfusionMatrix confusion(std::span<const Label> predictions, std::span<const Label> labels) {
  if (predictions.size() != labels.size()) {
    throw Error(ErrorCode::DimensionMismatch, "predictions and labels differ in length");
  }
  if (labels.empty()) throw Error(ErrorCode::InvalidArgument, "confusion matrix of no samples");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool predicted = predictions[i] == Label::Machine;
    const bool actual = labels[i] == Label::Machine;
    if (predicted && actual) ++cm.tp;
    else if (predicted) ++cm.fp;
    else if (actual) ++cm.fn;
    else ++cm.tn;
  }
  return cm;
}

double f1_score(double precision, double recall) {
  return precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
}

double auroc(std::span<const double> scores, std::span<const Label> labels) {
  if (scores.size() != labels.size()) {
    throw Error(ErrorCode::DimensionMismatch, "scores and labels differ in length");
  }
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Twice the mean rank keeps tied ranks integral.
  double positive_rank_sum_x2 = 0.0;
  std::size_t positives = 0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i + 1;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double rank_x2 = static_cast<double>(i + 1 + j);  // 2 * mean of ranks i+1..j
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]] == Label::Machine) {
        positive_rank_sum_x2 += rank_x2;
        ++positives;
      }
    }
    i = j;
  }
  const std::size_t negatives = n - positives;
  if (positives == 0 || negatives == 0) {
    throw Error(ErrorCode::AurocUndefined, "AUROC needs both classes");
  }
  const double p = static_cast<double>(positives);
  const double u_x2 = positive_rank_sum_x2 - p * (p + 1.0);
  return u_x2 / (2.0 * p * static_cast<double>(negatives));
}

MetricsReport metrics(const ConfusionMatrix& cm, std::span<const double> scores,
                      std::span<const Label> labels) {
  if (scores.size() != cm.total() || labels.size() != cm.total()) {
    throw Error(ErrorCode::DimensionMismatch, "scores and labels must match the confusion total");
  }
  MetricsReport r;
  r.confusion = cm;
  r.n = cm.total();
  auto ratio = [&](std::size_t num, std::size_t den, const char* name) {
    if (den == 0) {
      r.zero_denominator.emplace_back(name);
      return 0.0;
    }
    return static_cast<double>(num) / static_cast<double>(den);
  };
  r.precision = ratio(cm.tp, cm.tp + cm.fp, "precision");
  r.recall = ratio(cm.tp, cm.tp + cm.fn, "recall");
  r.accuracy = ratio(cm.tp + cm.tn, r.n, "accuracy");
  if (r.precision + r.recall == 0.0) r.zero_denominator.emplace_back("f1");
  r.f1 = f1_score(r.precision, r.recall);
  r.auroc = auroc(scores, labels);
  return r;
}

double youden_threshold(std::span<const double> scores, std::span<const Label> labels) {
  if (scores.size() != labels.size()) {
    throw Error(ErrorCode::DimensionMismatch, "scores and labels differ in length");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  const auto pos = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), Label::Machine));
  const std::size_t neg = labels.size() - pos;
  if (pos == 0 || neg == 0) throw Error(ErrorCode::SingleClass, "threshold selection needs both classes");

  double best_j = -std::numeric_limits<double>::infinity();
  double best_t = scores[order.front()];
  std::size_t tp = 0, fp = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    const double t = scores[order[i]];
    while (i < order.size() && scores[order[i]] == t) {
      (labels[order[i]] == Label::Machine ? tp : fp) += 1;
      ++i;
    }
    const double j = static_cast<double>(tp) / static_cast<double>(pos) -
                     static_cast<double>(fp) / static_cast<double>(neg);
    if (j > best_j) {
      best_j = j;
      best_t = t;
    }
  }
  return best_t;
}

const char* to_string(TransformKind kind) noexcept {
  switch (kind) {
    case TransformKind::SpecialChars: return "special_chars";
    case TransformKind::WhitespaceNoise: return "whitespace_noise";
    case TransformKind::CaseFlip: return "case_flip";
  }
  return "unknown";
}

TransformKind parse_transform_kind(std::string_view name) {
  if (name == "special_chars") return TransformKind::SpecialChars;
  if (name == "whitespace_noise") return TransformKind::WhitespaceNoise;
  if (name == "case_flip") return TransformKind::CaseFlip;
  throw Error(ErrorCode::InvalidArgument, "unknown transform kind '" + std::string(name) + "'");
}

namespace {

std::string format_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::size_t scaled_count(double intensity, std::size_t population) {
  return std::min(population, static_cast<std::size_t>(
                                  std::floor(intensity * static_cast<double>(population) + 1e-9)));
}

}  // namespace

std::string AdversarialTransform::name() const {
  return std::string(to_string(kind)) + "@" + format_number(intensity);
}

Document adversarial_transform(const Document& doc, const AdversarialTransform& transform) {
  if (!(transform.intensity >= 0.0 && transform.intensity <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "transform intensity must lie in [0,1]");
  }
  if (doc.body.empty()) throw Error(ErrorCode::EmptyDocument, "cannot transform an empty document");
  Rng rng(derive_seed(transform.seed, std::string("adversarial.") + to_string(transform.kind)));
  Document out = doc;
  const std::string& body = doc.body;

  switch (transform.kind) {
    case TransformKind::SpecialChars: {
      std::vector<std::size_t> word_offsets;
      for (const auto& tok : tokenize(body)) {
        if (tok.is_word) word_offsets.push_back(tok.offset);
      }
      auto picks = rng.sample_without_replacement(
          word_offsets.size(), scaled_count(transform.intensity, word_offsets.size()));
      std::vector<std::pair<std::size_t, const char*>> inserts;
      for (std::size_t p : picks) {
        inserts.emplace_back(word_offsets[p], rng.below(2) == 0 ? "\\\"" : "\\/");
      }
      std::sort(inserts.begin(), inserts.end());
      out.body.clear();
      std::size_t cursor = 0;
      for (const auto& [offset, text] : inserts) {
        out.body.append(body, cursor, offset - cursor);
        out.body.append(text);
        cursor = offset;
      }
      out.body.append(body, cursor, std::string::npos);
      break;
    }
    case TransformKind::WhitespaceNoise: {
      std::vector<std::size_t> spaces;
      for (std::size_t i = 0; i < body.size(); ++i) {
        if (body[i] == ' ') spaces.push_back(i);
      }
      auto picks = rng.sample_without_replacement(spaces.size(),
                                                  scaled_count(transform.intensity, spaces.size()));
      std::vector<bool> doubled(body.size(), false);
      for (std::size_t p : picks) doubled[spaces[p]] = true;
      out.body.clear();
      for (std::size_t i = 0; i < body.size(); ++i) {
        out.body.push_back(body[i]);
        if (doubled[i]) out.body.push_back(' ');
      }
      break;
    }
    case TransformKind::CaseFlip: {
      struct Cp {
        UChar32 c;
        bool cased;
      };
      std::vector<Cp> cps;
      const auto* bytes = reinterpret_cast<const uint8_t*>(body.data());
      const auto length = static_cast<int32_t>(body.size());
      int32_t i = 0;
      std::vector<std::size_t> letters;
      while (i < length) {
        UChar32 c;
        U8_NEXT(bytes, i, length, c);
        if (c < 0) throw Error(ErrorCode::InvalidEncoding, "malformed UTF-8 in document");
        const bool cased = (u_isupper(c) && u_tolower(c) != c) || (u_islower(c) && u_toupper(c) != c);
        if (cased) letters.push_back(cps.size());
        cps.push_back({c, cased});
      }
      auto picks = rng.sample_without_replacement(letters.size(),
                                                  scaled_count(transform.intensity, letters.size()));
      for (std::size_t p : picks) {
        UChar32& c = cps[letters[p]].c;
        c = u_isupper(c) ? u_tolower(c) : u_toupper(c);
      }
      out.body.clear();
      for (const auto& cp : cps) {
        char buf[4];
        int32_t len = 0;
        UBool error = false;
        U8_APPEND(reinterpret_cast<uint8_t*>(buf), len, 4, cp.c, error);
        if (error) throw Error(ErrorCode::InvalidEncoding, "cannot encode flipped code point");
        out.body.append(buf, static_cast<std::size_t>(len));
      }
      break;
    }
  }
  return out;
}

ScoredSet score_corpus(const Detector& detector, const Corpus& corpus) {
  ScoredSet set;
  set.scores.reserve(corpus.size());
  for (const auto& doc : corpus) {
    const double s = detector.score(doc);
    set.scores.push_back(s);
    set.predictions.push_back(detector.classify(s));
    set.labels.push_back(doc.label);
  }
  return set;
}

MetricsReport evaluate(const Detector& detector, const Corpus& corpus) {
  const auto set = score_corpus(detector, corpus);
  return metrics(confusion(set.predictions, set.labels), set.scores, set.labels);
}

RobustnessReport robustness_report(const Detector& detector, const Corpus& test,
                                   std::span<const AdversarialTransform> transforms) {
  if (!test.has_both_classes()) {
    throw Error(ErrorCode::SingleClass, "robustness evaluation needs both classes in the test set");
  }
  RobustnessReport report;
  report.method = detector.method();
  report.clean = evaluate(detector, test);
  for (const auto& transform : transforms) {
    std::vector<Document> docs;
    docs.reserve(test.size());
    for (const auto& doc : test) docs.push_back(adversarial_transform(doc, transform));
    TransformResult result;
    result.transform = transform;
    result.before = report.clean;
    result.after = evaluate(detector, Corpus(std::move(docs)));
    const std::pair<const char*, double MetricsReport::*> fields[] = {
        {"precision", &MetricsReport::precision}, {"recall", &MetricsReport::recall},
        {"f1", &MetricsReport::f1}, {"accuracy", &MetricsReport::accuracy},
        {"auroc", &MetricsReport::auroc}};
    for (const auto& [name, member] : fields) {
      const double before = result.before.*member;
      const double after = result.after.*member;
      result.deltas.push_back({name, before, after, after - before});
    }
    report.transforms.push_back(std::move(result));
  }
  return report;
}

namespace {

nlohmann::ordered_json metrics_json(const MetricsReport& r) {
  nlohmann::ordered_json j;
  j["n"] = r.n;
  j["precision"] = r.precision;
  j["recall"] = r.recall;
  j["f1"] = r.f1;
  j["accuracy"] = r.accuracy;
  j["auroc"] = r.auroc;
  j["confusion"] = {{"tp", r.confusion.tp}, {"fp", r.confusion.fp},
                    {"fn", r.confusion.fn}, {"tn", r.confusion.tn}};
  j["zero_denominator"] = r.zero_denominator;
  return j;
}

}  // namespace

std::string metrics_to_json(const MetricsReport& report, int indent) {
  return metrics_json(report).dump(indent);
}

std::string RobustnessReport::to_json() const {
  nlohmann::ordered_json root;
  root["method"] = method;
  root["clean"] = metrics_json(clean);
  nlohmann::ordered_json list = nlohmann::ordered_json::array();
  for (const auto& t : transforms) {
    nlohmann::ordered_json entry;
    entry["transform"] = t.transform.name();
    entry["kind"] = to_string(t.transform.kind);
    entry["intensity"] = t.transform.intensity;
    entry["seed"] = t.transform.seed;
    entry["before"] = metrics_json(t.before);
    entry["after"] = metrics_json(t.after);
    nlohmann::ordered_json deltas;
    for (const auto& d : t.deltas) deltas[d.metric] = d.delta;
    entry["delta"] = std::move(deltas);
    list.push_back(std::move(entry));
  }
  root["transforms"] = std::move(list);
  return root.dump(2) + "\n";
}

std::string RobustnessReport::to_csv() const {
  std::ostringstream out;
  out << "transform,metric,before,after,delta\n";
  for (const auto& t : transforms) {
    for (const auto& d : t.deltas) {
      out << t.transform.name() << ',' << d.metric << ',' << format_number(d.before) << ','
          << format_number(d.after) << ',' << format_number(d.delta) << '\n';
    }
  }
  return out.str();
}

}  // namespace detectkit
