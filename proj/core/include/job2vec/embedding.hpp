#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace job2vec {

using Rng = std::mt19937_64;

// Dense row-major table of embedding vectors.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  EmbeddingTable(std::size_t rows, std::size_t dim) : rows_(rows), dim_(dim), data_(rows * dim) {}

  // Entries drawn uniformly from (-0.5/dim, 0.5/dim).
  static EmbeddingTable uniform(std::size_t rows, std::size_t dim, Rng& rng);

  std::size_t rows() const { return rows_; }
  std::size_t dim() const { return dim_; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * dim_, dim_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * dim_, dim_}; }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  bool all_finite() const;

  friend bool operator==(const EmbeddingTable&, const EmbeddingTable&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t dim_ = 0;
  std::vector<double> data_;
};

double dot(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> a);
// Zero when either vector has zero norm.
double cosine(std::span<const double> a, std::span<const double> b);

// Text format: "count dim" header, then "key v1 ... v_dim" per row. Spaces in
// keys are written as '_'.
void write_embeddings(std::ostream& out, const EmbeddingTable& table,
                      std::span<const std::string> keys);
EmbeddingTable read_embeddings(std::istream& in, std::vector<std::string>* keys = nullptr);
void save_embeddings(const std::filesystem::path& path, const EmbeddingTable& table,
                     std::span<const std::string> keys);
EmbeddingTable load_embeddings(const std::filesystem::path& path,
                               std::vector<std::string>* keys = nullptr);

}  // namespace job2vec
