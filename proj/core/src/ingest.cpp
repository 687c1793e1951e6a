#include "detectkit/ingest.hpp"

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_set>

#include <json.hpp>

#include "detectkit/error.hpp"
#include "detectkit/random.hpp"

namespace detectkit {

const char* to_string(Label label) noexcept {
  return label == Label::Human ? "human" : "machine";
}

Label parse_label(std::string_view name) {
  if (name == "human") return Label::Human;
  if (name == "machine") return Label::Machine;
  throw Error(ErrorCode::ParseError, "unknown label '" + std::string(name) + "'");
}

Corpus::Corpus(std::vector<Document> documents) {
  documents_.reserve(documents.size());
  for (auto& doc : documents) add(std::move(doc));
}

void Corpus::add(Document doc) {
  if (!ids_.insert(doc.id).second) {
    throw Error(ErrorCode::InvalidArgument, "duplicate document id " + doc.id);
  }
  ++class_counts_[static_cast<std::size_t>(doc.label)];
  documents_.push_back(std::move(doc));
}

bool Corpus::contains(std::string_view id) const {
  return ids_.count(std::string(id)) > 0;
}

void SplitSpec::validate() const {
  for (double f : {train_frac, val_frac, test_frac}) {
    if (!(f > 0.0 && f < 1.0)) {
      throw Error(ErrorCode::InvalidArgument, "split fractions must lie in (0,1)");
    }
  }
  if (std::abs(train_frac + val_frac + test_frac - 1.0) > 1e-9) {
    throw Error(ErrorCode::InvalidArgument, "split fractions must sum to 1");
  }
}

namespace {

bool is_zero_width(UChar32 c) {
  switch (c) {
    case 0x200B: case 0x200C: case 0x200D: case 0x2060: case 0xFEFF: case 0x180E:
      return true;
    default:
      return false;
  }
}

}  // namespace

std::string normalize(std::string_view raw) {
  icu::UnicodeString cleaned;
  bool pending_space = false;
  const auto* bytes = reinterpret_cast<const uint8_t*>(raw.data());
  const int32_t length = static_cast<int32_t>(raw.size());
  int32_t i = 0;
  while (i < length) {
    UChar32 c;
    U8_NEXT(bytes, i, length, c);
    if (c < 0) throw Error(ErrorCode::InvalidEncoding, "malformed UTF-8 input");
    if (is_zero_width(c)) continue;
    if (u_isUWhiteSpace(c) || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v') {
      pending_space = !cleaned.isEmpty();
      continue;
    }
    if (u_charType(c) == U_CONTROL_CHAR) continue;
    if (pending_space) {
      cleaned.append(static_cast<UChar>(0x20));
      pending_space = false;
    }
    cleaned.append(c);
  }

  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) throw Error(ErrorCode::InvalidEncoding, "NFC normalizer unavailable");
  icu::UnicodeString composed = nfc->normalize(cleaned, status);
  if (U_FAILURE(status)) throw Error(ErrorCode::InvalidEncoding, "NFC normalization failed");

  std::string out;
  composed.toUTF8String(out);
  if (out.empty()) throw Error(ErrorCode::EmptyDocument, "document is empty after normalization");
  return out;
}

namespace {

std::vector<std::string> answers_field(const nlohmann::json& obj, const char* field,
                                       std::size_t line_no) {
  auto it = obj.find(field);
  if (it == obj.end()) {
    throw Error(ErrorCode::MissingField,
                "line " + std::to_string(line_no) + ": missing field '" + field + "'");
  }
  if (!it->is_array()) {
    throw Error(ErrorCode::ParseError,
                "line " + std::to_string(line_no) + ": field '" + field + "' is not an array");
  }
  std::vector<std::string> out;
  for (const auto& v : *it) {
    if (!v.is_string()) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": field '" +
                                             field + "' holds a non-string entry");
    }
    out.push_back(v.get<std::string>());
  }
  return out;
}

}  // namespace

Corpus load_hc3(const std::filesystem::path& path, std::vector<std::string>* rejected) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());

  Corpus corpus;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); })) {
      continue;
    }
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::ParseError,
                  "line " + std::to_string(line_no) + ": malformed JSON (" + e.what() + ")");
    }
    if (!obj.is_object()) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": not a JSON object");
    }
    auto q = obj.find("question");
    if (q == obj.end()) {
      throw Error(ErrorCode::MissingField,
                  "line " + std::to_string(line_no) + ": missing field 'question'");
    }
    if (!q->is_string()) {
      throw Error(ErrorCode::ParseError,
                  "line " + std::to_string(line_no) + ": field 'question' is not a string");
    }
    std::optional<std::string> question;
    try {
      question = normalize(q->get<std::string>());
    } catch (const Error&) {
      question.reset();
    }

    const auto human = answers_field(obj, "human_answers", line_no);
    const auto machine = answers_field(obj, "chatgpt_answers", line_no);

    auto emit = [&](const std::vector<std::string>& answers, Label label, char tag) {
      for (std::size_t k = 0; k < answers.size(); ++k) {
        std::string id = std::to_string(line_no) + "-" + tag + std::to_string(k + 1);
        try {
          corpus.add(Document{id, normalize(answers[k]), label, question});
        } catch (const Error& e) {
          if (e.code() != ErrorCode::EmptyDocument) throw;
          if (rejected) rejected->push_back(std::move(id));
        }
      }
    };
    emit(human, Label::Human, 'h');
    emit(machine, Label::Machine, 'm');
  }
  return corpus;
}

Splits split(const Corpus& corpus, const SplitSpec& spec) {
  spec.validate();
  if (corpus.empty()) throw Error(ErrorCode::InvalidArgument, "cannot split an empty corpus");

  // Split index per document: 0 train, 1 val, 2 test.
  std::vector<int> assignment(corpus.size(), 0);
  for (Label label : kLabels) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      if (corpus[i].label == label) members.push_back(i);
    }
    Rng rng(derive_seed(spec.seed, std::string("split.") + to_string(label)));
    rng.shuffle(members);

    const double n = static_cast<double>(members.size());
    // The epsilon absorbs representation error such as 0.1 * 30 = 3.0000000000000004.
    const auto n_val = static_cast<std::size_t>(std::floor(spec.val_frac * n + 1e-9));
    const auto n_test = static_cast<std::size_t>(std::floor(spec.test_frac * n + 1e-9));
    const std::size_t n_train = members.size() - n_val - n_test;
    if (n_val == 0 || n_test == 0 || n_train == 0) {
      throw Error(ErrorCode::DegenerateSplit,
                  std::string("a split receives no ") + to_string(label) + " documents (" +
                      std::to_string(members.size()) + " available)");
    }
    for (std::size_t k = 0; k < n_val; ++k) assignment[members[k]] = 1;
    for (std::size_t k = n_val; k < n_val + n_test; ++k) assignment[members[k]] = 2;
  }

  Splits out;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    Corpus& target = assignment[i] == 0 ? out.train : assignment[i] == 1 ? out.val : out.test;
    target.add(corpus[i]);
  }
  return out;
}

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> cols;
  std::size_t start = 0;
  while (true) {
    std::size_t tab = line.find('\t', start);
    cols.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return cols;
}

bool parse_index(const std::string& text, std::size_t& value) {
  if (text.empty() || text.size() > 9) return false;
  value = 0;
  for (char c : text) {
    if (c < '0' || c > '9') return false;
    value = value * 10 + static_cast<std::size_t>(c - '0');
  }
  return true;
}

}  // namespace

std::vector<ParsedSentence> load_conllu(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());

  std::vector<ParsedSentence> sentences;
  ParsedSentence current;
  std::size_t block_start = 0;

  auto flush = [&]() {
    if (current.tokens.empty()) return;
    for (std::size_t h : current.heads) {
      if (h > current.tokens.size()) {
        throw Error(ErrorCode::ParseError, "sentence starting at line " +
                                               std::to_string(block_start) +
                                               ": head index out of range");
      }
    }
    sentences.push_back(std::move(current));
    current = {};
  };

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      flush();
      continue;
    }
    if (line.front() == '#') continue;

    const auto cols = split_tabs(line);
    if (cols.size() < 7) {
      throw Error(ErrorCode::ParseError,
                  "line " + std::to_string(line_no) + ": expected at least 7 columns");
    }
    // Multiword-token ranges (1-2) and empty nodes (1.1) carry no arc.
    if (cols[0].find_first_of("-.") != std::string::npos) continue;

    std::size_t id = 0;
    if (!parse_index(cols[0], id) || id != current.tokens.size() + 1) {
      throw Error(ErrorCode::ParseError,
                  "line " + std::to_string(line_no) + ": unexpected token ID '" + cols[0] + "'");
    }
    std::size_t head = 0;
    if (!parse_index(cols[6], head)) {
      throw Error(ErrorCode::ParseError,
                  "line " + std::to_string(line_no) + ": non-integer HEAD '" + cols[6] + "'");
    }
    if (current.tokens.empty()) block_start = line_no;
    current.tokens.push_back(cols[1]);
    current.heads.push_back(head);
  }
  flush();
  return sentences;
}

}  // namespace detectkit
