#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "infops/graph.hpp"

namespace infops {

// Per-node scores of one measure. `nodes` is empty when `values` covers every
// node in id order; rumor centrality fills it with the scored subset.
struct CentralityScores {
  std::string measure;
  std::map<std::string, double> params;
  std::vector<double> values;
  std::vector<NodeId> nodes;

  // Node with the highest score, lowest id on ties.
  NodeId argmax() const;
};

enum class DegreeDirection { In, Out, Total };

struct IterativeOptions {
  double tol = 1e-10;
  std::size_t max_iter = 10'000;
};

// In/out count directed edges; total counts distinct undirected neighbors.
CentralityScores degree_centrality(const Graph& g, DegreeDirection direction);

// Largest h such that the node has >= h neighbors of undirected degree >= h.
CentralityScores h_index(const Graph& g);

// (reachable - 1) / sum of BFS distances on the symmetrized graph; 0 if isolated.
CentralityScores closeness(const Graph& g);

// Brandes accumulation on the symmetrized unweighted graph, each unordered
// pair counted once.
CentralityScores betweenness(const Graph& g);

// Solves (I - alpha A^T) c = beta 1 on the directed 0/1 adjacency, i.e.
// c_i = beta + alpha * sum_j A_ji c_j. Requires alpha < 1 / rho(A).
CentralityScores bonacich(const Graph& g, double alpha, double beta);

// Dominant eigenvector of A^T (directed 0/1), unit sum, non-negative.
// The iteration runs on A^T + I, which has the same eigenvectors and a
// strictly dominant Perron root, so bipartite graphs converge too.
CentralityScores eigenvector_centrality(const Graph& g, IterativeOptions options = {});

// Stationary distribution of damping * P + (1 - damping) / n with P the
// row-normalized directed 0/1 adjacency; dangling rows jump uniformly.
CentralityScores pagerank(const Graph& g, double damping = 0.85, IterativeOptions options = {});

// Log of the number of infection orderings of the infected subgraph that
// start at each candidate source. Exact on trees; on other subgraphs the
// count is taken on the breadth-first tree of each candidate. Values align
// with `nodes`, the infected set in ascending id order.
CentralityScores rumor_centrality(const Graph& g, std::span<const NodeId> infected);

}  // namespace infops
