#include "detectkit/random.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "detectkit/error.hpp"

namespace detectkit {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::EmptyDocument: return "EmptyDocument";
    case ErrorCode::InvalidEncoding: return "InvalidEncoding";
    case ErrorCode::DegenerateSplit: return "DegenerateSplit";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::MissingField: return "MissingField";
    case ErrorCode::EmptyEmbedding: return "EmptyEmbedding";
    case ErrorCode::EmptyVocabulary: return "EmptyVocabulary";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::SingleClass: return "SingleClass";
    case ErrorCode::AurocUndefined: return "AurocUndefined";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

ErrorCategory Error::category() const noexcept {
  switch (code_) {
    case ErrorCode::InvalidArgument:
      return ErrorCategory::Config;
    case ErrorCode::Io:
      return ErrorCategory::Io;
    default:
      return ErrorCategory::Data;
  }
}

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::uint64_t Rng::below(std::uint64_t bound) {
  if (bound == 0) throw Error(ErrorCode::InvalidArgument, "Rng::below with zero bound");
  // Rejection sampling removes modulo bias.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % bound;
}

std::vector<std::size_t> Rng::sample_without_replacement(std::size_t n, std::size_t k) {
  if (k > n) throw Error(ErrorCode::InvalidArgument, "sample size exceeds population");
  std::vector<std::size_t> pool(n);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t j = i + static_cast<std::size_t>(below(n - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  return pool;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t base, std::string_view path) {
  std::uint64_t h = 0xcbf29ce484222325ull;  // FNV-1a
  for (unsigned char c : path) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return splitmix64(base ^ splitmix64(h));
}

DiscreteSampler::DiscreteSampler(std::span<const double> weights) {
  cumulative_.reserve(weights.size());
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw Error(ErrorCode::InvalidArgument, "negative sampling weight");
    total += w;
    cumulative_.push_back(total);
  }
}

std::size_t DiscreteSampler::sample(Rng& rng) const {
  if (empty()) throw Error(ErrorCode::InvalidArgument, "sampling from an empty distribution");
  const double target = rng.uniform() * cumulative_.back();
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
  if (it == cumulative_.end()) --it;
  // upper_bound never lands on a zero-weight entry.
  return static_cast<std::size_t>(it - cumulative_.begin());
}

}  // namespace detectkit
