#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "job2vec/ingest.hpp"
#include "job2vec/types.hpp"

namespace job2vec {

struct EdgeStats {
  // Transition count for base edges, path-weight mass for extended edges.
  double w = 0.0;
  // Mean source tenure in years; absent when no duration was observed.
  std::optional<double> t_avg_years;
  // Path length that produced the edge (1 for base edges).
  int order = 1;

  friend bool operator==(const EdgeStats&, const EdgeStats&) = default;
};

struct EdgeRef {
  NodeId src = 0;
  NodeId dst = 0;

  friend auto operator<=>(const EdgeRef&, const EdgeRef&) = default;
};

struct Edge {
  NodeId src = 0;
  NodeId dst = 0;
  EdgeStats stats;
};

struct GraphDiagnostics {
  std::size_t transitions = 0;
  std::size_t self_loops_dropped = 0;
};

// Directed weighted graph over (normalized title, company) nodes. Node ids are
// dense and assigned in insertion order; edges iterate in (src, dst) order.
class JobGraph {
 public:
  using EdgeMap = std::map<std::pair<NodeId, NodeId>, EdgeStats>;

  NodeId add_node(const NodeKey& key);
  std::optional<NodeId> find(const NodeKey& key) const;
  const NodeKey& node(NodeId id) const { return nodes_.at(id); }
  std::size_t node_count() const { return nodes_.size(); }

  // Rejects self-loops, unknown endpoints and non-positive weights.
  void set_edge(NodeId src, NodeId dst, EdgeStats stats);
  const EdgeStats* edge(NodeId src, NodeId dst) const;
  const EdgeMap& edges() const { return edges_; }
  std::size_t edge_count() const { return edges_.size(); }
  double total_weight() const;

  // Semantic-view vocabulary over the words of node titles.
  std::size_t vocabulary_size() const { return words_.size(); }
  const std::string& word(WordId id) const { return words_.at(id); }
  std::optional<WordId> find_word(const std::string& word) const;
  // Word ids of a node's title in order, repeats included.
  std::span<const WordId> title_words(NodeId id) const { return title_words_.at(id); }

  // Same nodes and vocabulary, edge set replaced by `edges`.
  JobGraph with_edges(std::span<const EdgeRef> edges) const;

  const GraphDiagnostics& diagnostics() const { return diagnostics_; }
  GraphDiagnostics& diagnostics() { return diagnostics_; }

  friend bool operator==(const JobGraph& a, const JobGraph& b) {
    return a.nodes_ == b.nodes_ && a.edges_ == b.edges_;
  }

 private:
  std::vector<NodeKey> nodes_;
  std::map<NodeKey, NodeId> index_;
  EdgeMap edges_;
  std::vector<std::string> words_;
  std::map<std::string, WordId> word_index_;
  std::vector<std::vector<WordId>> title_words_;
  GraphDiagnostics diagnostics_;
};

// w_ij counts transitions i->j; t_avg_years is the mean source tenure over
// them. Self-transitions are dropped and counted in the diagnostics.
JobGraph build_graph(std::span<const Transition> transitions);

inline constexpr int kDefaultExtensionSteps = 2;
inline constexpr double kDefaultExtensionDiscount = 0.5;

struct ExtendedEdge {
  NodeId src = 0;
  NodeId dst = 0;
  double w = 0.0;
  int order = 1;
};

// Edge set extended with walks of length 2..k. Components are kept per
// (src, dst, order) so the base edges stay recoverable; merged() sums the
// orders of each pair into the edge set the topology view samples from.
class ExtendedEdgeSet {
 public:
  explicit ExtendedEdgeSet(std::vector<ExtendedEdge> components);

  std::span<const ExtendedEdge> components() const { return components_; }
  std::vector<ExtendedEdge> of_order(int order) const;
  std::vector<ExtendedEdge> merged() const;

 private:
  std::vector<ExtendedEdge> components_;
};

// For each l in 2..k adds (i, j) with weight lambda^(l-1) times the sum over
// all directed walks of length l from i to j of the product of base weights.
// Walks returning to their start are dropped (no self-loops).
ExtendedEdgeSet extend_k_steps(const JobGraph& graph, int k = kDefaultExtensionSteps,
                               double lambda = kDefaultExtensionDiscount);

class GraphFormatError : public std::runtime_error {
 public:
  GraphFormatError(std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

void write_graph(std::ostream& out, const JobGraph& graph);
JobGraph read_graph(std::istream& in);
void save_graph(const JobGraph& graph, const std::filesystem::path& path);
JobGraph load_graph(const std::filesystem::path& path);

}  // namespace job2vec
