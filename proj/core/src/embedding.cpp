#include "job2vec/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>

#include "job2vec/textio.hpp"

namespace job2vec {

EmbeddingTable EmbeddingTable::uniform(std::size_t rows, std::size_t dim, Rng& rng) {
  EmbeddingTable table(rows, dim);
  if (dim == 0) return table;
  const double half = 0.5 / static_cast<double>(dim);
  std::uniform_real_distribution<double> dist(-half, half);
  for (auto& v : table.data_) v = dist(rng);
  return table;
}

bool EmbeddingTable::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double cosine(std::span<const double> a, std::span<const double> b) {
  double na = norm(a);
  double nb = norm(b);
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot(a, b) / (na * nb);
}

void write_embeddings(std::ostream& out, const EmbeddingTable& table,
                      std::span<const std::string> keys) {
  if (keys.size() != table.rows())
    throw std::invalid_argument("embedding export needs one key per row");
  out << table.rows() << ' ' << table.dim() << '\n';
  for (std::size_t i = 0; i < table.rows(); ++i) {
    std::string key = keys[i];
    std::replace(key.begin(), key.end(), ' ', '_');
    out << key;
    for (double v : table.row(i)) out << ' ' << format_double(v);
    out << '\n';
  }
}

EmbeddingTable read_embeddings(std::istream& in, std::vector<std::string>* keys) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("embedding file is empty");
  auto header = split_fields(trim(line), ' ');
  auto count = header.size() == 2 ? parse_int(header[0]) : std::nullopt;
  auto dim = header.size() == 2 ? parse_int(header[1]) : std::nullopt;
  if (!count || !dim || *count < 0 || *dim < 0)
    throw std::runtime_error("malformed embedding header");

  EmbeddingTable table(static_cast<std::size_t>(*count), static_cast<std::size_t>(*dim));
  if (keys) keys->clear();
  for (std::size_t i = 0; i < table.rows(); ++i) {
    if (!std::getline(in, line))
      throw std::runtime_error(fmt::format("embedding file truncated at row {}", i));
    auto f = split_fields(trim(line), ' ');
    if (f.size() != table.dim() + 1)
      throw std::runtime_error(fmt::format("embedding row {} has {} values", i, f.size() - 1));
    if (keys) keys->emplace_back(f[0]);
    auto row = table.row(i);
    for (std::size_t k = 0; k < table.dim(); ++k) {
      auto v = parse_double(f[k + 1]);
      if (!v) throw std::runtime_error(fmt::format("bad value in embedding row {}", i));
      row[k] = *v;
    }
  }
  while (std::getline(in, line))
    if (!trim(line).empty()) throw std::runtime_error("trailing content after embedding rows");
  return table;
}

void save_embeddings(const std::filesystem::path& path, const EmbeddingTable& table,
                     std::span<const std::string> keys) {
  write_atomically(path, [&](std::ostream& out) { write_embeddings(out, table, keys); });
}

EmbeddingTable load_embeddings(const std::filesystem::path& path, std::vector<std::string>* keys) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open embedding file " + path.string());
  return read_embeddings(in, keys);
}

}  // namespace job2vec
