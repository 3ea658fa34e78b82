#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "infops/partition.hpp"

namespace infops {

using NodeId = std::size_t;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Directed edge; `rate` is the interaction rate (events per unit time) with
// which content posted by `src` is observed by `dst`.
struct Edge {
  NodeId src = 0;
  NodeId dst = 0;
  double rate = 1.0;

  bool operator==(const Edge&) const = default;
};

// Immutable directed weighted network on nodes 0..n-1.
//
// Edges are stored sorted by (src, dst). Out- and in-adjacency hold edge
// indices into `edges()`, so per-edge data (probabilities, visibilities) can
// be kept in plain vectors aligned with the edge list. The symmetrized
// neighbor lists treat an edge in either direction as an undirected link and
// are what the structural analytics use.
class Graph {
 public:
  // Throws InvalidArgument on n == 0, out-of-range endpoints, self-loops,
  // duplicate (src, dst) pairs, or negative / non-finite rates.
  Graph(std::size_t n, std::vector<Edge> edges, std::vector<std::string> labels = {});

  std::size_t node_count() const { return n_; }
  std::size_t edge_count() const { return edges_.size(); }

  std::span<const Edge> edges() const { return edges_; }
  const Edge& edge(std::size_t index) const { return edges_[index]; }

  // Indices of edges leaving / entering `node`, ordered by the other endpoint.
  std::span<const std::size_t> out_edges(NodeId node) const { return out_[node]; }
  std::span<const std::size_t> in_edges(NodeId node) const { return in_[node]; }

  // Sorted distinct neighbors ignoring direction.
  std::span<const NodeId> neighbors(NodeId node) const { return sym_[node]; }
  std::size_t undirected_degree(NodeId node) const { return sym_[node].size(); }
  std::size_t undirected_edge_count() const { return sym_edge_count_; }

  // Index of edge (src, dst) or edge_count() when absent.
  std::size_t find_edge(NodeId src, NodeId dst) const;
  bool has_edge(NodeId src, NodeId dst) const { return find_edge(src, dst) != edge_count(); }

  const std::vector<std::string>& labels() const { return labels_; }
  const std::string& label(NodeId node) const { return labels_[node]; }

  // Same structure with new per-edge rates (aligned with edges()).
  Graph with_rates(std::span<const double> rates) const;

  // Node i of the result is node perm[i] of this graph.
  Graph permuted(std::span<const NodeId> perm) const;

 private:
  std::size_t n_;
  std::vector<Edge> edges_;
  std::vector<std::string> labels_;
  std::vector<std::vector<std::size_t>> out_;
  std::vector<std::vector<std::size_t>> in_;
  std::vector<std::vector<NodeId>> sym_;
  std::size_t sym_edge_count_ = 0;
};

// Parses `src,dst[,rate]` lines. Node names are re-indexed densely in order of
// first appearance and kept as labels. Blank lines and `#` comments are
// skipped; CRLF is accepted. Throws ParseError carrying the line number.
Graph parse_edge_list(std::string_view text);
Graph read_edge_list(std::istream& in);
Graph load_edge_list_file(const std::string& path);

// Writes `label_src,label_dst,rate` lines that parse back to the same graph.
void write_edge_list(const Graph& g, std::ostream& out);
std::string format_edge_list(const Graph& g);

// `{ "labels": [...] }`
std::string label_map_json(const Graph& g);

// A[i][j] = rate of edge (i, j).
Matrix adjacency(const Graph& g);
// Directed 0/1 structure.
Matrix binary_adjacency(const Graph& g);
// Symmetrized 0/1 structure: 1 when an edge exists in either direction.
Matrix symmetric_adjacency(const Graph& g);
// D - A on the symmetrized 0/1 structure.
Matrix laplacian(const Graph& g);

// Largest eigenvalue modulus.
double spectral_radius(const Matrix& m);

// Component id per node on the symmetrized graph, ids in order of lowest member.
std::vector<std::size_t> connected_components(const Graph& g, std::size_t* count = nullptr);

// Ground-truth partition returned alongside a planted-partition graph.
struct PlantedGraph {
  Graph graph;
  Partition truth;
};

// k blocks of `size` nodes; each unordered pair is linked with probability
// p_in inside a block and p_out across blocks, emitting both directions.
// Requires 0 <= p_out < p_in <= 1.
PlantedGraph generate_planted_partition(std::size_t k, std::size_t size, double p_in, double p_out,
                                        std::uint64_t seed);

// Root 0 has `degree` children, every other internal node has degree-1
// children, so all internal nodes have undirected degree `degree`.
Graph generate_regular_tree(std::size_t degree, std::size_t depth);

// G(n, p); undirected graphs emit both directions of every sampled pair.
Graph generate_erdos_renyi(std::size_t n, double p, std::uint64_t seed, bool directed = false);

// Bidirectional helpers for fixtures.
Graph make_undirected(std::size_t n, std::span<const std::pair<NodeId, NodeId>> pairs, double rate = 1.0);
Graph complete_graph(std::size_t n, double rate = 1.0);
Graph path_graph(std::size_t n, double rate = 1.0);
Graph star_graph(std::size_t leaves, double rate = 1.0);

}  // namespace infops
