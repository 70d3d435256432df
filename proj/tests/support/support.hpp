#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "job2vec/jobgraph.hpp"
#include "job2vec/types.hpp"

namespace job2vec::testing {

inline NodeKey key(const std::string& title, const std::string& company) {
  return NodeKey{split_words(title), company};
}

inline double relative_error(double a, double b) {
  double scale = std::max({std::abs(a), std::abs(b), 1e-8});
  return std::abs(a - b) / scale;
}

// Random directed graph with `nodes` nodes named t<i>@c<i%3> and edge
// probability `density`; weights are integers in [1, max_w].
inline JobGraph random_graph(std::size_t nodes, double density, int max_w, std::mt19937_64& rng,
                             bool durations = true) {
  JobGraph g;
  for (std::size_t i = 0; i < nodes; ++i)
    g.add_node(key("title" + std::to_string(i) + " role" + std::to_string(i % 4),
                   "c" + std::to_string(i % 3)));
  std::bernoulli_distribution has_edge(density);
  std::uniform_int_distribution<int> weight(1, max_w);
  std::uniform_real_distribution<double> years(0.0, 4.0);
  for (NodeId i = 0; i < nodes; ++i)
    for (NodeId j = 0; j < nodes; ++j) {
      if (i == j || !has_edge(rng)) continue;
      EdgeStats s;
      s.w = weight(rng);
      if (durations) s.t_avg_years = years(rng);
      g.set_edge(i, j, s);
    }
  return g;
}

// Directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("job2vec-test-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace job2vec::testing
