#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "job2vec/ingest.hpp"
#include "job2vec/types.hpp"

namespace job2vec {

// Lowercases ASCII letters and splits on every run of characters that are
// neither ASCII alphanumerics nor part of a multi-byte UTF-8 sequence.
std::vector<std::string> tokenize(std::string_view title_raw);

// Corpus-wide multiset counts of title words.
class WordFrequencyTable {
 public:
  void add_title(std::string_view title_raw);

  std::size_t count(const std::string& word) const;
  std::size_t distinct_words() const { return counts_.size(); }
  std::size_t total_titles() const { return total_titles_; }
  const std::map<std::string, std::size_t>& counts() const { return counts_; }

 private:
  std::map<std::string, std::size_t> counts_;
  std::size_t total_titles_ = 0;
};

WordFrequencyTable word_frequencies(std::span<const std::string> titles);

// Least-squares slope of log(count) against log(rank) over the table's words,
// ranked by descending count. Returns 0 for fewer than two words.
double power_law_slope(const WordFrequencyTable& table);

inline constexpr std::size_t kDefaultMinWordFrequency = 30;

// Drops words whose corpus frequency is below `min_freq`, keeping order. A
// title that would lose every word keeps its full token list instead.
std::vector<std::string> aggregate_title(std::string_view title_raw, const WordFrequencyTable& freq,
                                         std::size_t min_freq = kDefaultMinWordFrequency);

// Maps career records onto Job-Graph node keys with a fixed frequency table.
class TitleAggregator {
 public:
  TitleAggregator(WordFrequencyTable freq, std::size_t min_freq);

  static TitleAggregator from_records(std::span<const CareerRecord> records, std::size_t min_freq);

  NodeKey key(const CareerRecord& record) const;
  std::vector<std::string> aggregate(std::string_view title_raw) const;

  const WordFrequencyTable& frequencies() const { return freq_; }
  std::size_t min_freq() const { return min_freq_; }

 private:
  WordFrequencyTable freq_;
  std::size_t min_freq_;
};

}  // namespace job2vec
