#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace detectkit {

enum class Label : std::uint8_t { Human = 0, Machine = 1 };

inline constexpr std::array<Label, 2> kLabels{Label::Human, Label::Machine};

const char* to_string(Label label) noexcept;
Label parse_label(std::string_view name);

struct Document {
  std::string id;
  std::string body;
  Label label = Label::Human;
  std::optional<std::string> source_question;

  bool operator==(const Document&) const = default;
};

// Ordered documents with unique ids and maintained per-label counts.
class Corpus {
 public:
  Corpus() = default;
  explicit Corpus(std::vector<Document> documents);

  void add(Document doc);

  const std::vector<Document>& documents() const { return documents_; }
  std::size_t size() const { return documents_.size(); }
  bool empty() const { return documents_.empty(); }
  std::size_t count(Label label) const { return class_counts_[static_cast<std::size_t>(label)]; }
  bool has_both_classes() const { return count(Label::Human) > 0 && count(Label::Machine) > 0; }
  bool contains(std::string_view id) const;

  auto begin() const { return documents_.begin(); }
  auto end() const { return documents_.end(); }
  const Document& operator[](std::size_t i) const { return documents_[i]; }

  bool operator==(const Corpus& other) const { return documents_ == other.documents_; }

 private:
  std::vector<Document> documents_;
  std::unordered_set<std::string> ids_;
  std::array<std::size_t, 2> class_counts_{0, 0};
};

struct SplitSpec {
  double train_frac = 0.8;
  double val_frac = 0.1;
  double test_frac = 0.1;
  std::uint64_t seed = 0;

  // Throws InvalidArgument unless each fraction is in (0,1) and they sum to 1.
  void validate() const;
};

struct Splits {
  Corpus train;
  Corpus val;
  Corpus test;
};

// Word forms and 1-based head indices (0 marks the root).
struct ParsedSentence {
  std::vector<std::string> tokens;
  std::vector<std::size_t> heads;
};

// NFC, NBSP and other Unicode whitespace to a single space, zero-width and
// control characters dropped, trimmed. Throws EmptyDocument when nothing
// is left and InvalidEncoding on malformed UTF-8.
std::string normalize(std::string_view raw);

// Reads HC3-style JSONL. Answers that normalize to nothing are skipped;
// their would-be ids are appended to `rejected` when given.
Corpus load_hc3(const std::filesystem::path& path,
                std::vector<std::string>* rejected = nullptr);

// Stratified, seeded three-way split. Within each label the documents are
// permuted, then floor(frac * n) go to validation and test and the rest to
// train. Each split keeps the corpus order of its members.
Splits split(const Corpus& corpus, const SplitSpec& spec);

std::vector<ParsedSentence> load_conllu(const std::filesystem::path& path);

}  // namespace detectkit
