#pragma once

#include <cstdint>
#include <vector>

#include "infops/graph.hpp"
#include "infops/partition.hpp"

namespace infops {

// Spectral coordinates: row i is node i, column c is the eigenvector of the
// c-th smallest Laplacian eigenvalue.
struct Embedding {
  Matrix coords;
  std::vector<double> eigenvalues;
};

// Newman modularity on the symmetrized 0/1 graph. Throws on edgeless graphs.
double modularity(const Graph& g, const Partition& p);

// Louvain local moving plus aggregation, sweeping nodes in id order, then a
// polish on the original nodes (moves into an empty community allowed, plus
// pairwise community merges) alternating with Kernighan-Lin vertex-mover
// passes on graphs small enough for their O(n m) cost, until nothing strictly
// improves modularity.
Partition greedy_modularity(const Graph& g);

// Eigenvectors of L = D - A for the k smallest eigenvalues, unit norm, sign
// fixed so the first non-negligible component is positive.
Embedding spectral_embedding(const Graph& g, std::size_t k);

struct KMeansResult {
  std::vector<int> labels;
  double inertia = 0.0;
};

// Lloyd iterations from k-means++ seeding; the best of `restarts` runs by
// inertia is kept. Restart r draws from derive_seed(seed, r).
KMeansResult kmeans(const Matrix& points, std::size_t k, std::uint64_t seed, std::size_t restarts = 10);

// k-means (10 restarts) on the rows of the spectral embedding.
Partition spectral_clustering(const Graph& g, std::size_t k, std::uint64_t seed);

struct KSelection {
  std::size_t k = 0;
  double modularity = 0.0;
  Partition partition;
  std::vector<double> scores;  // modularity per k in [k_min, k_max]
};

// Spectral clustering for each k in [k_min, k_max]; keeps the partition of
// maximal modularity, smallest k on ties.
KSelection select_k(const Graph& g, std::size_t k_min, std::size_t k_max, std::uint64_t seed);

}  // namespace infops
