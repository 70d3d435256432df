#include "job2vec/jobgraph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include <fmt/format.h>

#include "job2vec/textio.hpp"

namespace job2vec {

NodeId JobGraph::add_node(const NodeKey& key) {
  auto [it, inserted] = index_.try_emplace(key, static_cast<NodeId>(nodes_.size()));
  if (!inserted) return it->second;
  nodes_.push_back(key);
  std::vector<WordId> ids;
  ids.reserve(key.title.size());
  for (const auto& w : key.title) {
    auto [wit, fresh] = word_index_.try_emplace(w, static_cast<WordId>(words_.size()));
    if (fresh) words_.push_back(w);
    ids.push_back(wit->second);
  }
  title_words_.push_back(std::move(ids));
  return it->second;
}

std::optional<NodeId> JobGraph::find(const NodeKey& key) const {
  auto it = index_.find(key);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

void JobGraph::set_edge(NodeId src, NodeId dst, EdgeStats stats) {
  if (src >= nodes_.size() || dst >= nodes_.size())
    throw std::invalid_argument(fmt::format("edge {}->{} references an unknown node", src, dst));
  if (src == dst) throw std::invalid_argument(fmt::format("self-loop on node {}", src));
  if (!(stats.w > 0.0) || !std::isfinite(stats.w))
    throw std::invalid_argument(fmt::format("edge {}->{} has non-positive weight", src, dst));
  if (stats.order < 1) throw std::invalid_argument("edge order must be >= 1");
  if (stats.t_avg_years && !(*stats.t_avg_years >= 0.0))
    throw std::invalid_argument("edge duration must be >= 0");
  edges_[{src, dst}] = stats;
}

const EdgeStats* JobGraph::edge(NodeId src, NodeId dst) const {
  auto it = edges_.find({src, dst});
  return it == edges_.end() ? nullptr : &it->second;
}

double JobGraph::total_weight() const {
  double total = 0.0;
  for (const auto& [key, stats] : edges_) total += stats.w;
  return total;
}

std::optional<WordId> JobGraph::find_word(const std::string& word) const {
  auto it = word_index_.find(word);
  if (it == word_index_.end()) return std::nullopt;
  return it->second;
}

JobGraph JobGraph::with_edges(std::span<const EdgeRef> edges) const {
  JobGraph out = *this;
  out.edges_.clear();
  for (const auto& e : edges) {
    const auto* stats = edge(e.src, e.dst);
    if (stats == nullptr)
      throw std::invalid_argument(fmt::format("edge {}->{} is not in the graph", e.src, e.dst));
    out.edges_[{e.src, e.dst}] = *stats;
  }
  return out;
}

JobGraph build_graph(std::span<const Transition> transitions) {
  JobGraph graph;
  struct Accum {
    std::size_t count = 0;
    long long tenure_months = 0;
  };
  std::map<std::pair<NodeId, NodeId>, Accum> accum;
  for (const auto& t : transitions) {
    NodeId src = graph.add_node(t.src);
    NodeId dst = graph.add_node(t.dst);
    ++graph.diagnostics().transitions;
    if (src == dst) {
      ++graph.diagnostics().self_loops_dropped;
      continue;
    }
    auto& a = accum[{src, dst}];
    ++a.count;
    a.tenure_months += t.src_tenure_months;
  }
  for (const auto& [key, a] : accum) {
    double mean_years = static_cast<double>(a.tenure_months) / static_cast<double>(a.count) / 12.0;
    graph.set_edge(key.first, key.second, {static_cast<double>(a.count), mean_years, 1});
  }
  return graph;
}

ExtendedEdgeSet::ExtendedEdgeSet(std::vector<ExtendedEdge> components)
    : components_(std::move(components)) {
  std::sort(components_.begin(), components_.end(), [](const auto& a, const auto& b) {
    return std::tie(a.src, a.dst, a.order) < std::tie(b.src, b.dst, b.order);
  });
}

std::vector<ExtendedEdge> ExtendedEdgeSet::of_order(int order) const {
  std::vector<ExtendedEdge> out;
  for (const auto& c : components_)
    if (c.order == order) out.push_back(c);
  return out;
}

std::vector<ExtendedEdge> ExtendedEdgeSet::merged() const {
  std::vector<ExtendedEdge> out;
  for (const auto& c : components_) {
    if (!out.empty() && out.back().src == c.src && out.back().dst == c.dst) {
      out.back().w += c.w;
      out.back().order = std::min(out.back().order, c.order);
    } else {
      out.push_back(c);
    }
  }
  return out;
}

ExtendedEdgeSet extend_k_steps(const JobGraph& graph, int k, double lambda) {
  if (k < 1) throw std::invalid_argument("extension steps k must be >= 1");
  if (!(lambda > 0.0 && lambda <= 1.0)) throw std::invalid_argument("lambda must lie in (0, 1]");

  std::vector<std::vector<std::pair<NodeId, double>>> out_adj(graph.node_count());
  std::vector<ExtendedEdge> components;
  for (const auto& [key, stats] : graph.edges()) {
    out_adj[key.first].emplace_back(key.second, stats.w);
    components.push_back({key.first, key.second, stats.w, stats.order});
  }

  // walks[i] holds the walk-weight sums of the current length starting at i.
  std::vector<std::map<NodeId, double>> walks(graph.node_count());
  for (NodeId i = 0; i < graph.node_count(); ++i)
    for (auto [j, w] : out_adj[i]) walks[i][j] += w;

  double discount = 1.0;
  for (int l = 2; l <= k; ++l) {
    discount *= lambda;
    std::vector<std::map<NodeId, double>> next(graph.node_count());
    for (NodeId i = 0; i < graph.node_count(); ++i) {
      for (auto [mid, w_prefix] : walks[i])
        for (auto [j, w] : out_adj[mid]) next[i][j] += w_prefix * w;
      for (auto [j, w] : next[i])
        if (j != i) components.push_back({i, j, discount * w, l});
    }
    walks = std::move(next);
  }
  return ExtendedEdgeSet(std::move(components));
}

GraphFormatError::GraphFormatError(std::size_t line, const std::string& what)
    : std::runtime_error(fmt::format("graph file line {}: {}", line, what)), line_(line) {}

void write_graph(std::ostream& out, const JobGraph& graph) {
  out << "#nodes " << graph.node_count() << " #edges " << graph.edge_count() << '\n';
  for (NodeId i = 0; i < graph.node_count(); ++i) {
    const auto& key = graph.node(i);
    out << i << '\t' << key.title_text() << '\t' << key.company << '\n';
  }
  for (const auto& [key, stats] : graph.edges()) {
    out << key.first << '\t' << key.second << '\t' << format_double(stats.w) << '\t'
        << (stats.t_avg_years ? format_double(*stats.t_avg_years) : std::string("-")) << '\t'
        << stats.order << '\n';
  }
}

JobGraph read_graph(std::istream& in) {
  JobGraph graph;
  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&](const char* expecting) {
    if (!std::getline(in, line))
      throw GraphFormatError(line_no + 1, fmt::format("unexpected end of file, expected {}", expecting));
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
  };

  if (!std::getline(in, line)) return graph;
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (trim(line).empty() && in.peek() == std::char_traits<char>::eof()) return graph;

  auto header = split_fields(line, ' ');
  std::optional<long long> n_nodes, n_edges;
  if (header.size() == 4 && header[0] == "#nodes" && header[2] == "#edges") {
    n_nodes = parse_int(header[1]);
    n_edges = parse_int(header[3]);
  }
  if (!n_nodes || !n_edges || *n_nodes < 0 || *n_edges < 0)
    throw GraphFormatError(line_no, "malformed header, expected '#nodes N #edges M'");

  for (long long i = 0; i < *n_nodes; ++i) {
    next_line("a node line");
    auto f = split_fields(line, '\t');
    auto id = f.size() == 3 ? parse_int(f[0]) : std::nullopt;
    if (!id) throw GraphFormatError(line_no, "malformed node line");
    if (*id != i) throw GraphFormatError(line_no, fmt::format("node id {} out of order", *id));
    NodeKey key{split_words(std::string(f[1])), std::string(f[2])};
    if (key.title.empty()) throw GraphFormatError(line_no, "empty node title");
    if (graph.add_node(key) != static_cast<NodeId>(i))
      throw GraphFormatError(line_no, "duplicate node key");
  }
  for (long long e = 0; e < *n_edges; ++e) {
    next_line("an edge line");
    auto f = split_fields(line, '\t');
    if (f.size() != 5) throw GraphFormatError(line_no, "malformed edge line");
    auto src = parse_int(f[0]);
    auto dst = parse_int(f[1]);
    auto w = parse_double(f[2]);
    auto order = parse_int(f[4]);
    std::optional<double> t;
    if (f[3] != "-") {
      t = parse_double(f[3]);
      if (!t) throw GraphFormatError(line_no, "malformed duration");
    }
    if (!src || !dst || !w || !order || *src < 0 || *dst < 0)
      throw GraphFormatError(line_no, "malformed edge line");
    if (graph.edge(static_cast<NodeId>(*src), static_cast<NodeId>(*dst)) != nullptr)
      throw GraphFormatError(line_no, "duplicate edge");
    try {
      graph.set_edge(static_cast<NodeId>(*src), static_cast<NodeId>(*dst),
                     {*w, t, static_cast<int>(*order)});
    } catch (const std::invalid_argument& err) {
      throw GraphFormatError(line_no, err.what());
    }
  }
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) throw GraphFormatError(line_no, "trailing content after edges");
  }
  return graph;
}

void save_graph(const JobGraph& graph, const std::filesystem::path& path) {
  write_atomically(path, [&](std::ostream& out) { write_graph(out, graph); });
}

JobGraph load_graph(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open graph file " + path.string());
  return read_graph(in);
}

}  // namespace job2vec
