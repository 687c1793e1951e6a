#include "detectkit/ngram_lm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "detectkit/error.hpp"

namespace detectkit {

namespace {

NGramLM::Key make_key(std::span<const std::uint32_t> ids) {
  NGramLM::Key key;
  key.fill(NGramLM::kNone);
  std::copy(ids.begin(), ids.end(), key.begin());
  return key;
}

}  // namespace

std::size_t NGramLM::KeyHash::operator()(const Key& key) const noexcept {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (std::uint32_t v : key) {
    if (v == kNone) break;
    h ^= v;
    h *= 0x100000001b3ull;
    h ^= h >> 29;
  }
  return static_cast<std::size_t>(h);
}

NGramLM NGramLM::train(std::span<const std::vector<std::string>> sentences, std::size_t order,
                       double discount) {
  if (order < 2 || order > kMaxOrder) {
    throw Error(ErrorCode::InvalidArgument, "n-gram order must lie in [2, " + std::to_string(kMaxOrder) + "]");
  }
  if (!(discount > 0.0 && discount < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "Kneser-Ney discount must lie in (0,1)");
  }
  std::size_t longest = 0;
  for (const auto& s : sentences) longest = std::max(longest, s.size());
  if (sentences.empty() || longest == 0) {
    throw Error(ErrorCode::InvalidArgument, "cannot train a language model on an empty corpus");
  }
  if (order > longest + 2) {
    throw Error(ErrorCode::InvalidArgument, "order " + std::to_string(order) +
                                                " exceeds the longest padded sentence");
  }

  NGramLM lm;
  lm.order_ = order;
  lm.discount_ = discount;
  lm.vocab_ = build_vocab(sentences, 1);
  lm.tables_.assign(order, Table{});

  std::vector<std::uint32_t> padded;
  for (const auto& sentence : sentences) {
    if (sentence.empty()) continue;
    padded.assign(order - 1, lm.bos());
    for (const auto& w : sentence) padded.push_back(lm.id(w));
    padded.push_back(lm.eos());
    for (std::size_t i = order - 1; i < padded.size(); ++i) {
      std::span<const std::uint32_t> context(padded.data() + i - (order - 1), order - 1);
      ++lm.tables_[order - 1][make_key(context)].counts[padded[i]];
    }
  }

  // Continuation counts: every distinct (v h w) at order m + 1 adds one to (h w).
  for (std::size_t m = order - 1; m >= 1; --m) {
    Table& lower = lm.tables_[m - 1];
    for (const auto& [key, table] : lm.tables_[m]) {
      std::span<const std::uint32_t> context(key.data() + 1, m - 1);
      ContextTable& target = lower[make_key(context)];
      for (const auto& entry : table.counts) ++target.counts[entry.first];
    }
  }
  lm.finalize_tables();
  return lm;
}

void NGramLM::finalize_tables() {
  for (auto& table : tables_) {
    for (auto& [key, ctx] : table) {
      ctx.total = 0;
      ctx.types = 0;
      for (const auto& entry : ctx.counts) {
        ctx.total += entry.second;
        ctx.types += entry.second > 0 ? 1 : 0;
      }
    }
  }
}

std::string NGramLM::outcome_name(std::uint32_t id) const {
  if (id == eos()) return "</s>";
  if (id == bos()) return "<s>";
  return vocab_.word(id);
}

double NGramLM::level_probability(std::size_t m, std::span<const std::uint32_t> context,
                                  std::uint32_t word) const {
  const auto& table = tables_[m - 1];
  const double lower = m == 1 ? 1.0 / static_cast<double>(outcome_count())
                              : level_probability(m - 1, context.subspan(1), word);
  auto it = table.find(make_key(context));
  if (it == table.end() || it->second.total == 0) return lower;
  const ContextTable& ctx = it->second;
  auto found = ctx.counts.find(word);
  const double count = found == ctx.counts.end() ? 0.0 : static_cast<double>(found->second);
  const double total = static_cast<double>(ctx.total);
  return std::max(count - discount_, 0.0) / total +
         discount_ * static_cast<double>(ctx.types) / total * lower;
}

double NGramLM::probability(std::span<const std::uint32_t> history, std::uint32_t word) const {
  std::array<std::uint32_t, kMaxOrder - 1> context;
  const std::size_t n = order_ - 1;
  for (std::size_t i = 0; i < n; ++i) {
    // Right-align the history; missing positions are start markers.
    const std::size_t from_end = n - i;
    context[i] = from_end <= history.size() ? history[history.size() - from_end] : bos();
  }
  return level_probability(order_, std::span<const std::uint32_t>(context.data(), n), word);
}

double NGramLM::sentence_log_prob(std::span<const std::string> words, std::size_t* events) const {
  std::vector<std::uint32_t> padded(order_ - 1, bos());
  for (const auto& w : words) padded.push_back(id(w));
  padded.push_back(eos());
  double total = 0.0;
  for (std::size_t i = order_ - 1; i < padded.size(); ++i) {
    std::span<const std::uint32_t> context(padded.data() + i - (order_ - 1), order_ - 1);
    total += std::log(level_probability(order_, context, padded[i]));
  }
  if (events) *events = padded.size() - (order_ - 1);
  return total;
}

std::vector<std::string> NGramLM::sample_sentence(Rng& rng, std::size_t max_words) const {
  std::vector<std::uint32_t> history(order_ - 1, bos());
  std::vector<std::string> words;
  std::vector<double> weights(outcome_count());
  while (words.size() < max_words) {
    std::span<const std::uint32_t> context(history.data() + history.size() - (order_ - 1), order_ - 1);
    for (std::uint32_t w = 0; w < weights.size(); ++w) {
      weights[w] = w == unk() ? 0.0 : level_probability(order_, context, w);
    }
    const auto next = static_cast<std::uint32_t>(DiscreteSampler(weights).sample(rng));
    if (next == eos()) break;
    words.push_back(vocab_.word(next));
    history.push_back(next);
  }
  return words;
}

std::vector<std::vector<std::string>> lm_sentences(std::string_view text) {
  std::vector<std::vector<std::string>> out;
  for (const auto& sentence : split_sentences(text)) {
    auto words = word_tokens(sentence);
    if (!words.empty()) out.push_back(std::move(words));
  }
  return out;
}

NGramLM train_kn_lm(std::span<const std::string> texts, std::size_t order, double discount) {
  std::vector<std::vector<std::string>> sentences;
  for (const auto& text : texts) {
    for (auto& s : lm_sentences(text)) sentences.push_back(std::move(s));
  }
  return NGramLM::train(sentences, order, discount);
}

NGramLM train_kn_lm(const Corpus& corpus, std::size_t order, double discount) {
  std::vector<std::string> texts;
  texts.reserve(corpus.size());
  for (const auto& doc : corpus) texts.push_back(doc.body);
  return train_kn_lm(texts, order, discount);
}

namespace {

constexpr int kLmSchemaVersion = 1;

}  // namespace

std::string NGramLM::to_json() const {
  nlohmann::ordered_json root;
  root["schema_version"] = kLmSchemaVersion;
  root["order"] = order_;
  root["discount"] = discount_;
  std::vector<std::string> words;
  std::vector<std::uint64_t> freqs;
  for (std::uint32_t i = 0; i < vocab_.known_size(); ++i) {
    words.push_back(vocab_.word(i));
    freqs.push_back(vocab_.frequency(i));
  }
  root["vocabulary"] = words;
  root["frequencies"] = freqs;
  nlohmann::ordered_json tables = nlohmann::ordered_json::array();
  for (std::size_t m = 1; m <= order_; ++m) {
    std::vector<std::pair<std::vector<std::uint32_t>, std::uint32_t>> entries;
    for (const auto& [key, ctx] : tables_[m - 1]) {
      std::vector<std::uint32_t> prefix(key.begin(), key.begin() + static_cast<std::ptrdiff_t>(m - 1));
      for (const auto& [w, c] : ctx.counts) {
        auto ids = prefix;
        ids.push_back(w);
        entries.emplace_back(std::move(ids), c);
      }
    }
    std::sort(entries.begin(), entries.end());
    nlohmann::ordered_json list = nlohmann::ordered_json::array();
    for (const auto& [ids, c] : entries) list.push_back({ids, c});
    tables.push_back({{"order", m}, {"kind", m == order_ ? "count" : "continuation"},
                      {"entries", std::move(list)}});
  }
  root["tables"] = std::move(tables);
  return root.dump() + "\n";
}

NGramLM NGramLM::from_json(const std::string& text) {
  try {
    const auto root = nlohmann::json::parse(text);
    if (root.at("schema_version").get<int>() != kLmSchemaVersion) {
      throw Error(ErrorCode::SchemaMismatch, "unsupported language model schema_version");
    }
    NGramLM lm;
    lm.order_ = root.at("order").get<std::size_t>();
    lm.discount_ = root.at("discount").get<double>();
    if (lm.order_ < 2 || lm.order_ > kMaxOrder || !(lm.discount_ > 0.0 && lm.discount_ < 1.0)) {
      throw Error(ErrorCode::ParseError, "language model order or discount out of range");
    }
    lm.vocab_ = Vocabulary::from_words(root.at("vocabulary").get<std::vector<std::string>>(),
                                       root.at("frequencies").get<std::vector<std::uint64_t>>());
    lm.tables_.assign(lm.order_, Table{});
    const auto& tables = root.at("tables");
    if (tables.size() != lm.order_) throw Error(ErrorCode::ParseError, "language model table count mismatch");
    const std::uint32_t limit = lm.bos();
    for (const auto& table : tables) {
      const auto m = table.at("order").get<std::size_t>();
      if (m < 1 || m > lm.order_) throw Error(ErrorCode::ParseError, "bad table order");
      for (const auto& entry : table.at("entries")) {
        const auto ids = entry.at(0).get<std::vector<std::uint32_t>>();
        const auto count = entry.at(1).get<std::uint32_t>();
        if (ids.size() != m || std::any_of(ids.begin(), ids.end(), [&](auto v) { return v > limit; })) {
          throw Error(ErrorCode::ParseError, "malformed n-gram entry");
        }
        std::span<const std::uint32_t> context(ids.data(), m - 1);
        lm.tables_[m - 1][make_key(context)].counts[ids.back()] = count;
      }
    }
    lm.finalize_tables();
    return lm;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("language model file is malformed: ") + e.what());
  }
}

void save_lm(const NGramLM& lm, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << lm.to_json();
  if (!out) throw Error(ErrorCode::Io, "failed writing " + path.string());
}

NGramLM load_lm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return NGramLM::from_json(buffer.str());
}

}  // namespace detectkit
