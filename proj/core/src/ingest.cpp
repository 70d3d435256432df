#include "job2vec/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>

#include <fmt/format.h>

#include "job2vec/textio.hpp"

namespace job2vec {

std::optional<YearMonth> YearMonth::parse(std::string_view text) {
  text = trim(text);
  auto sep = text.find_first_of("/-");
  if (sep == std::string_view::npos) return std::nullopt;
  auto year_part = text.substr(0, sep);
  auto month_part = text.substr(sep + 1);
  if (year_part.size() != 4 || month_part.empty() || month_part.size() > 2) return std::nullopt;
  auto year = parse_int(year_part);
  auto month = parse_int(month_part);
  if (!year || !month || *month < 1 || *month > 12) return std::nullopt;
  return YearMonth(static_cast<int>(*year), static_cast<int>(*month));
}

std::string YearMonth::to_string() const { return fmt::format("{:04}/{:02}", year(), month()); }

namespace {

struct PendingRecord {
  CareerRecord record;
  std::size_t person_rank = 0;
  std::size_t input_order = 0;
};

bool has_word_character(std::string_view text) {
  return std::any_of(text.begin(), text.end(), [](unsigned char c) {
    return std::isalnum(c) != 0 || c >= 0x80;
  });
}

}  // namespace

ParseResult parse_records(std::istream& in, const ParseOptions& options) {
  if (!in) throw IngestError("record stream is not readable");

  ParseResult result;
  std::vector<PendingRecord> pending;
  std::map<std::string, std::size_t, std::less<>> person_rank;
  std::optional<YearMonth> latest_end;
  std::optional<YearMonth> latest_start;

  auto skip = [&](std::size_t line_no, std::string_view why) {
    ++result.skipped_lines;
    result.diagnostics.push_back(fmt::format("line {}: {}", line_no, why));
  };

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;

    auto fields = split_fields(line, '\t');
    if (fields.size() != 5) {
      skip(line_no, fmt::format("expected 5 tab-separated fields, got {}", fields.size()));
      continue;
    }
    auto person = trim(fields[0]);
    auto title = trim(fields[1]);
    auto company = trim(fields[2]);
    if (person.empty() || title.empty() || company.empty()) {
      skip(line_no, "empty person, title or company");
      continue;
    }
    if (!has_word_character(title)) {
      skip(line_no, "title has no word characters");
      continue;
    }
    auto start = YearMonth::parse(fields[3]);
    if (!start) {
      skip(line_no, fmt::format("unparsable start date '{}'", fields[3]));
      continue;
    }
    CareerRecord record{std::string(person), std::string(title), std::string(company), *start,
                        *start, false};
    if (trim(fields[4]) == "present") {
      record.end_is_present = true;
    } else {
      auto end = YearMonth::parse(fields[4]);
      if (!end) {
        skip(line_no, fmt::format("unparsable end date '{}'", fields[4]));
        continue;
      }
      if (*end < *start) {
        skip(line_no, "end date precedes start date");
        continue;
      }
      record.end = *end;
      latest_end = latest_end ? std::max(*latest_end, *end) : *end;
    }
    latest_start = latest_start ? std::max(*latest_start, *start) : *start;

    auto [it, inserted] = person_rank.try_emplace(record.person_id, person_rank.size());
    pending.push_back({std::move(record), it->second, pending.size()});
  }
  if (in.bad()) throw IngestError("read error on record stream");

  YearMonth snapshot = options.snapshot.value_or(latest_end.value_or(latest_start.value_or(YearMonth{})));
  for (auto& p : pending) {
    if (p.record.end_is_present) p.record.end = std::max(snapshot, p.record.start);
  }

  std::sort(pending.begin(), pending.end(), [](const PendingRecord& a, const PendingRecord& b) {
    return std::tie(a.person_rank, a.record.start, a.record.end, a.input_order) <
           std::tie(b.person_rank, b.record.start, b.record.end, b.input_order);
  });
  result.records.reserve(pending.size());
  for (auto& p : pending) result.records.push_back(std::move(p.record));
  return result;
}

ParseResult read_records_file(const std::filesystem::path& path, const ParseOptions& options) {
  std::ifstream in(path);
  if (!in) throw IngestError("cannot open record file " + path.string());
  return parse_records(in, options);
}

void write_records(std::ostream& out, std::span<const CareerRecord> records) {
  for (const auto& r : records) {
    out << r.person_id << '\t' << r.title_raw << '\t' << r.company << '\t' << r.start.to_string()
        << '\t' << (r.end_is_present ? std::string("present") : r.end.to_string()) << '\n';
  }
}

std::vector<Transition> extract_transitions(std::span<const CareerRecord> records,
                                            const NodeKeyFn& key_of) {
  std::vector<Transition> transitions;
  for (std::size_t i = 1; i < records.size(); ++i) {
    const auto& src = records[i - 1];
    const auto& dst = records[i];
    if (src.person_id != dst.person_id) continue;
    transitions.push_back({key_of(src), key_of(dst), src.tenure_months()});
  }
  return transitions;
}

}  // namespace job2vec
