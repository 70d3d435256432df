#include "job2vec/titlenorm.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "job2vec/textio.hpp"

namespace job2vec {

std::vector<std::string> tokenize(std::string_view title_raw) {
  std::vector<std::string> tokens;
  std::string current;
  for (unsigned char c : title_raw) {
    if (std::isalnum(c) != 0 || c >= 0x80) {
      current.push_back(static_cast<char>(c < 0x80 ? std::tolower(c) : c));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

void WordFrequencyTable::add_title(std::string_view title_raw) {
  ++total_titles_;
  for (auto& token : tokenize(title_raw)) ++counts_[std::move(token)];
}

std::size_t WordFrequencyTable::count(const std::string& word) const {
  auto it = counts_.find(word);
  return it == counts_.end() ? 0 : it->second;
}

WordFrequencyTable word_frequencies(std::span<const std::string> titles) {
  WordFrequencyTable table;
  for (const auto& t : titles) table.add_title(t);
  return table;
}

double power_law_slope(const WordFrequencyTable& table) {
  std::vector<double> counts;
  counts.reserve(table.distinct_words());
  for (const auto& [word, count] : table.counts()) counts.push_back(static_cast<double>(count));
  if (counts.size() < 2) return 0.0;
  std::sort(counts.begin(), counts.end(), std::greater<>());

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(counts.size());
  for (std::size_t r = 0; r < counts.size(); ++r) {
    double x = std::log(static_cast<double>(r + 1));
    double y = std::log(counts[r]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  double denom = n * sxx - sx * sx;
  return denom == 0.0 ? 0.0 : (n * sxy - sx * sy) / denom;
}

std::vector<std::string> aggregate_title(std::string_view title_raw, const WordFrequencyTable& freq,
                                         std::size_t min_freq) {
  auto tokens = tokenize(title_raw);
  std::vector<std::string> kept;
  for (const auto& t : tokens) {
    if (freq.count(t) >= min_freq) kept.push_back(t);
  }
  return kept.empty() ? tokens : kept;
}

TitleAggregator::TitleAggregator(WordFrequencyTable freq, std::size_t min_freq)
    : freq_(std::move(freq)), min_freq_(min_freq) {}

TitleAggregator TitleAggregator::from_records(std::span<const CareerRecord> records,
                                              std::size_t min_freq) {
  WordFrequencyTable table;
  for (const auto& r : records) table.add_title(r.title_raw);
  return TitleAggregator(std::move(table), min_freq);
}

std::vector<std::string> TitleAggregator::aggregate(std::string_view title_raw) const {
  return aggregate_title(title_raw, freq_, min_freq_);
}

NodeKey TitleAggregator::key(const CareerRecord& record) const {
  return NodeKey{aggregate(record.title_raw), std::string(trim(record.company))};
}

}  // namespace job2vec
