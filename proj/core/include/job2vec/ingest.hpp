#pragma once

#include <compare>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "job2vec/types.hpp"

namespace job2vec {

// Calendar month, stored as a month count since year 0.
class YearMonth {
 public:
  constexpr YearMonth() = default;
  constexpr YearMonth(int year, int month) : index_(year * 12 + (month - 1)) {}

  // Accepts "YYYY/M", "YYYY/MM" and the same with '-' as separator.
  static std::optional<YearMonth> parse(std::string_view text);

  constexpr int year() const { return index_ / 12; }
  constexpr int month() const { return index_ % 12 + 1; }
  constexpr int index() const { return index_; }
  constexpr YearMonth plus_months(int months) const {
    YearMonth out;
    out.index_ = index_ + months;
    return out;
  }

  // Rendered as "YYYY/MM".
  std::string to_string() const;

  friend constexpr int months_between(YearMonth from, YearMonth to) {
    return to.index_ - from.index_;
  }
  friend constexpr auto operator<=>(YearMonth, YearMonth) = default;

 private:
  int index_ = 0;
};

struct CareerRecord {
  std::string person_id;
  std::string title_raw;
  std::string company;
  YearMonth start;
  YearMonth end;
  // The input said "present"; `end` holds the resolved snapshot month.
  bool end_is_present = false;

  int tenure_months() const { return months_between(start, end); }

  friend bool operator==(const CareerRecord&, const CareerRecord&) = default;
};

struct Transition {
  NodeKey src;
  NodeKey dst;
  int src_tenure_months = 0;
};

class IngestError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ParseOptions {
  // Month substituted for "present". Defaults to the latest concrete end month
  // in the input (or the latest start month if no row has a concrete end).
  std::optional<YearMonth> snapshot;
};

struct ParseResult {
  std::vector<CareerRecord> records;
  std::size_t skipped_lines = 0;
  std::vector<std::string> diagnostics;
};

// Tab-separated `person_id title company start end` rows. Records come back
// grouped by person (in order of first appearance) and sorted by start month,
// ties broken by end month and then input order. Malformed lines are skipped
// and described in `diagnostics`.
ParseResult parse_records(std::istream& in, const ParseOptions& options = {});
ParseResult read_records_file(const std::filesystem::path& path, const ParseOptions& options = {});

void write_records(std::ostream& out, std::span<const CareerRecord> records);

using NodeKeyFn = std::function<NodeKey(const CareerRecord&)>;

// One transition per consecutive pair of a person's records. Expects the
// grouping and ordering produced by parse_records.
std::vector<Transition> extract_transitions(std::span<const CareerRecord> records,
                                            const NodeKeyFn& key_of);

}  // namespace job2vec
