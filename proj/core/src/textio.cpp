#include "job2vec/textio.hpp"

#include <charconv>
#include <fstream>
#include <stdexcept>
#include <system_error>

#include <fmt/format.h>

#include "job2vec/types.hpp"

namespace job2vec {

std::string NodeKey::title_text() const { return join_words(title); }

std::string NodeKey::label() const { return title_text() + "@" + company; }

std::string join_words(const std::vector<std::string>& words, char sep) {
  std::string out;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i > 0) out.push_back(sep);
    out += words[i];
  }
  return out;
}

std::vector<std::string> split_words(const std::string& text, char sep) {
  std::vector<std::string> out;
  for (auto part : split_fields(text, sep)) {
    if (!part.empty()) out.emplace_back(part);
  }
  return out;
}

std::string format_double(double value) { return fmt::format("{}", value); }

std::optional<double> parse_double(std::string_view text) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

std::optional<long long> parse_int(std::string_view text) {
  long long value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

std::vector<std::string_view> split_fields(std::string_view line, char sep) {
  std::vector<std::string_view> fields;
  std::size_t begin = 0;
  while (true) {
    auto pos = line.find(sep, begin);
    if (pos == std::string_view::npos) {
      fields.push_back(line.substr(begin));
      break;
    }
    fields.push_back(line.substr(begin, pos - begin));
    begin = pos + 1;
  }
  return fields;
}

std::string_view trim(std::string_view text) {
  constexpr std::string_view ws = " \t\r\n\f\v";
  auto first = text.find_first_not_of(ws);
  if (first == std::string_view::npos) return {};
  auto last = text.find_last_not_of(ws);
  return text.substr(first, last - first + 1);
}

void write_atomically(const std::filesystem::path& path,
                      const std::function<void(std::ostream&)>& writer) {
  auto tmp = path;
  tmp += ".tmp";
  std::error_code ec;
  try {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    writer(out);
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  } catch (...) {
    std::filesystem::remove(tmp, ec);
    throw;
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::string why = ec.message();
    std::filesystem::remove(tmp, ec);
    throw std::runtime_error("cannot rename " + tmp.string() + " to " + path.string() + ": " + why);
  }
}

}  // namespace job2vec
