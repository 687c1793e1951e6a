#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <detectkit/ngram_lm.hpp>

namespace dk_test {

// Brute-force interpolated Kneser-Ney over explicit n-gram maps.
class KnOracle {
 public:
  KnOracle(const detectkit::NGramLM& lm, const std::vector<std::vector<std::string>>& sentences)
      : n_(lm.order()), d_(lm.discount()), outcomes_(lm.outcome_count()) {
    const std::uint32_t bos = lm.bos();
    std::vector<std::vector<std::uint32_t>> padded;
    for (const auto& s : sentences) {
      if (s.empty()) continue;
      std::vector<std::uint32_t> p(n_ - 1, bos);
      for (const auto& w : s) p.push_back(lm.id(w));
      p.push_back(lm.eos());
      padded.push_back(p);
    }
    counts_.resize(n_ + 1);
    for (const auto& p : padded) {
      for (std::size_t end = n_ - 1; end < p.size(); ++end) {
        std::vector<std::uint32_t> full(p.begin() + static_cast<long>(end + 1 - n_), p.begin() + static_cast<long>(end + 1));
        ++counts_[n_][full];
        for (std::size_t m = 1; m < n_; ++m) {
          std::vector<std::uint32_t> left(full.end() - static_cast<long>(m + 1), full.end());
          std::vector<std::uint32_t> gram(left.begin() + 1, left.end());
          continuation_[m][gram].insert(left.front());
        }
      }
    }
    for (std::size_t m = 1; m < n_; ++m) {
      for (const auto& [gram, lefts] : continuation_[m]) counts_[m][gram] = lefts.size();
    }
  }

  double probability(const std::vector<std::uint32_t>& context, std::uint32_t w) const {
    return level(n_, context, w);
  }

 private:
  double level(std::size_t m, std::vector<std::uint32_t> context, std::uint32_t w) const {
    const double lower = m == 1 ? 1.0 / static_cast<double>(outcomes_)
                                : level(m - 1, std::vector<std::uint32_t>(context.begin() + 1, context.end()), w);
    double total = 0.0, types = 0.0, count = 0.0;
    for (const auto& [gram, c] : counts_[m]) {
      if (!std::equal(context.begin(), context.end(), gram.begin())) continue;
      total += static_cast<double>(c);
      types += 1.0;
      if (gram.back() == w) count = static_cast<double>(c);
    }
    if (total == 0.0) return lower;
    return std::max(count - d_, 0.0) / total + d_ * types / total * lower;
  }

  std::size_t n_;
  double d_;
  std::size_t outcomes_;
  std::vector<std::map<std::vector<std::uint32_t>, std::size_t>> counts_;
  std::map<std::size_t, std::map<std::vector<std::uint32_t>, std::set<std::uint32_t>>> continuation_;
};

}  // namespace dk_test
