#include "infops/community.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "infops/error.hpp"
#include "infops/random.hpp"

namespace infops {

double modularity(const Graph& g, const Partition& p) {
  const std::size_t n = g.node_count();
  if (p.size() != n) throw InvalidArgument("partition does not cover every node");
  if (g.undirected_edge_count() == 0) throw InvalidArgument("modularity is undefined on a graph without edges");

  const double two_m = 2.0 * static_cast<double>(g.undirected_edge_count());
  std::vector<double> internal(p.k, 0.0), degree_sum(p.k, 0.0);
  for (NodeId i = 0; i < n; ++i) {
    const int c = p.labels[i];
    if (c < 0 || c >= p.k) throw InvalidArgument("partition label out of range");
    degree_sum[c] += static_cast<double>(g.undirected_degree(i));
    for (NodeId j : g.neighbors(i)) {
      if (p.labels[j] == c) internal[c] += 1.0;
    }
  }
  double q = 0.0;
  for (int c = 0; c < p.k; ++c) {
    const double frac = degree_sum[c] / two_m;
    q += internal[c] / two_m - frac * frac;
  }
  return q;
}

namespace {

// Undirected weighted multigraph level used by the Louvain loop. adj[i]
// holds (j, w) with j != i; self[i] is the total internal weight A_ii.
struct Level {
  std::vector<std::vector<std::pair<std::size_t, double>>> adj;
  std::vector<double> self;
  std::vector<double> strength;  // k_i = A_ii + sum_j A_ij
};

Level initial_level(const Graph& g) {
  Level lv;
  const std::size_t n = g.node_count();
  lv.adj.resize(n);
  lv.self.assign(n, 0.0);
  lv.strength.assign(n, 0.0);
  for (NodeId i = 0; i < n; ++i) {
    for (NodeId j : g.neighbors(i)) lv.adj[i].emplace_back(j, 1.0);
    lv.strength[i] = static_cast<double>(g.undirected_degree(i));
  }
  return lv;
}

// One round of local moving. Returns true if any node changed community.
bool local_moves(const Level& lv, double two_m, std::vector<std::size_t>& community) {
  const std::size_t n = lv.adj.size();
  std::vector<double> total(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) total[community[i]] += lv.strength[i];

  std::vector<double> link(n, 0.0);
  std::vector<std::size_t> touched;
  bool any_move = false;
  constexpr double kEps = 1e-12;

  bool improved = true;
  while (improved) {
    improved = false;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t home = community[i];
      const double ki = lv.strength[i];

      touched.clear();
      for (auto [j, w] : lv.adj[i]) {
        const std::size_t c = community[j];
        if (link[c] == 0.0) touched.push_back(c);
        link[c] += w;
      }
      total[home] -= ki;

      auto gain = [&](std::size_t c) { return link[c] - total[c] * ki / two_m; };
      std::size_t best = home;
      double best_gain = gain(home);
      std::sort(touched.begin(), touched.end());
      for (std::size_t c : touched) {
        if (c == home) continue;
        const double gc = gain(c);
        if (gc > best_gain + kEps) {
          best = c;
          best_gain = gc;
        }
      }
      total[best] += ki;
      for (std::size_t c : touched) link[c] = 0.0;
      link[home] = 0.0;

      if (best != home) {
        community[i] = best;
        improved = true;
        any_move = true;
      }
    }
  }
  return any_move;
}

// Kernighan-Lin style vertex mover: every node moves exactly once, each time
// taking the best available move even when it lowers Q, and the best
// partition seen along the way is kept. Escapes optima of single moves.
bool vertex_mover_pass(const Level& lv, double two_m, std::vector<std::size_t>& community) {
  const std::size_t n = lv.adj.size();
  std::vector<double> total(n, 0.0);
  std::vector<std::size_t> members(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    total[community[i]] += lv.strength[i];
    ++members[community[i]];
  }
  std::vector<bool> moved(n, false);
  std::vector<double> link(n, 0.0);
  std::vector<std::size_t> candidates;
  auto current = community;
  auto best_assignment = community;
  double delta = 0.0, best_delta = 0.0;

  for (std::size_t step = 0; step < n; ++step) {
    std::size_t free_label = n;
    for (std::size_t c = 0; c < n; ++c)
      if (members[c] == 0) {
        free_label = c;
        break;
      }
    double step_best = -std::numeric_limits<double>::infinity();
    std::size_t node = n, target = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (moved[i]) continue;
      const std::size_t home = current[i];
      const double ki = lv.strength[i];
      candidates.clear();
      for (auto [j, w] : lv.adj[i]) {
        if (link[current[j]] == 0.0) candidates.push_back(current[j]);
        link[current[j]] += w;
      }
      if (free_label != n && members[home] > 1) candidates.push_back(free_label);
      std::sort(candidates.begin(), candidates.end());
      const double stay = link[home] - (total[home] - ki) * ki / two_m;
      for (std::size_t c : candidates) {
        if (c == home) continue;
        const double dq = 2.0 * (link[c] - total[c] * ki / two_m - stay) / two_m;
        if (dq > step_best) {
          step_best = dq;
          node = i;
          target = c;
        }
      }
      for (std::size_t c : candidates) link[c] = 0.0;
      link[home] = 0.0;
    }
    if (node == n) break;
    const std::size_t home = current[node];
    total[home] -= lv.strength[node];
    total[target] += lv.strength[node];
    --members[home];
    ++members[target];
    current[node] = target;
    moved[node] = true;
    delta += step_best;
    if (delta > best_delta + 1e-12) {
      best_delta = delta;
      best_assignment = current;
    }
  }
  if (best_delta <= 0.0) return false;
  community = std::move(best_assignment);
  return true;
}

// Above this many node-edge products the vertex mover is skipped; a pass
// costs O(n m).
constexpr double kVertexMoverWork = 5e7;

// Polishes a partition of the original graph with single-node moves (an
// empty community included as a target) and pairwise community merges, each
// accepted only on a strict gain, until neither applies.
void refine(const Level& lv, double two_m, std::vector<std::size_t>& community) {
  const std::size_t n = lv.adj.size();
  constexpr double kEps = 1e-12;
  bool changed = true;
  while (changed) {
    changed = false;

    // node moves; labels stay in [0, n) so a free label always exists
    std::vector<double> total(n, 0.0);
    std::vector<std::size_t> members(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
      total[community[i]] += lv.strength[i];
      ++members[community[i]];
    }
    std::vector<std::size_t> free_labels;
    for (std::size_t c = n; c-- > 0;)
      if (members[c] == 0) free_labels.push_back(c);
    std::vector<double> link(n, 0.0);
    std::vector<std::size_t> candidates;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t home = community[i];
      const double ki = lv.strength[i];
      candidates.clear();
      for (auto [j, w] : lv.adj[i]) {
        if (link[community[j]] == 0.0) candidates.push_back(community[j]);
        link[community[j]] += w;
      }
      if (!free_labels.empty()) candidates.push_back(free_labels.back());
      std::sort(candidates.begin(), candidates.end());
      total[home] -= ki;
      auto gain = [&](std::size_t c) { return link[c] - total[c] * ki / two_m; };
      std::size_t best = home;
      double best_gain = gain(home);
      for (std::size_t c : candidates) {
        if (c != home && gain(c) > best_gain + kEps) {
          best = c;
          best_gain = gain(c);
        }
      }
      total[best] += ki;
      for (std::size_t c : candidates) link[c] = 0.0;
      link[home] = 0.0;
      if (best != home) {
        if (members[best] == 0) free_labels.pop_back();
        if (--members[home] == 0) free_labels.push_back(home);
        ++members[best];
        community[i] = best;
        changed = true;
      }
    }

    // best pairwise merge
    std::map<std::pair<std::size_t, std::size_t>, double> between;
    for (std::size_t i = 0; i < n; ++i)
      for (auto [j, w] : lv.adj[i])
        if (community[i] < community[j]) between[{community[i], community[j]}] += w;
    std::fill(total.begin(), total.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) total[community[i]] += lv.strength[i];
    double best_gain = kEps;
    std::pair<std::size_t, std::size_t> best_pair{n, n};
    for (const auto& [pair, w] : between) {
      // w counts each A-B edge once
      const double gain = 2.0 * w / two_m - 2.0 * total[pair.first] * total[pair.second] / (two_m * two_m);
      if (gain > best_gain) {
        best_gain = gain;
        best_pair = pair;
      }
    }
    if (best_pair.first != n) {
      for (auto& c : community)
        if (c == best_pair.second) c = best_pair.first;
      changed = true;
    }
  }
}

}  // namespace

Partition greedy_modularity(const Graph& g) {
  if (g.undirected_edge_count() == 0) throw InvalidArgument("greedy modularity needs at least one edge");
  const double two_m = 2.0 * static_cast<double>(g.undirected_edge_count());

  Level lv = initial_level(g);
  // node_to_group maps original nodes to the current level's nodes.
  std::vector<std::size_t> node_to_group(g.node_count());
  for (std::size_t i = 0; i < node_to_group.size(); ++i) node_to_group[i] = i;

  while (true) {
    const std::size_t n = lv.adj.size();
    std::vector<std::size_t> community(n);
    for (std::size_t i = 0; i < n; ++i) community[i] = i;
    if (!local_moves(lv, two_m, community)) break;

    // Dense relabel in order of first appearance.
    std::vector<std::size_t> dense(n, n);
    std::size_t groups = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (dense[community[i]] == n) dense[community[i]] = groups++;
      community[i] = dense[community[i]];
    }
    for (auto& grp : node_to_group) grp = community[grp];
    if (groups == n) break;

    Level next;
    next.adj.resize(groups);
    next.self.assign(groups, 0.0);
    next.strength.assign(groups, 0.0);
    std::vector<std::map<std::size_t, double>> merged(groups);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t ci = community[i];
      next.self[ci] += lv.self[i];
      next.strength[ci] += lv.strength[i];
      for (auto [j, w] : lv.adj[i]) {
        const std::size_t cj = community[j];
        if (cj == ci) {
          next.self[ci] += w;
        } else {
          merged[ci][cj] += w;
        }
      }
    }
    for (std::size_t c = 0; c < groups; ++c) {
      next.adj[c].assign(merged[c].begin(), merged[c].end());
    }
    lv = std::move(next);
  }

  const Level base = initial_level(g);
  const bool mover = static_cast<double>(g.node_count()) * two_m <= kVertexMoverWork;
  do {
    refine(base, two_m, node_to_group);
  } while (mover && vertex_mover_pass(base, two_m, node_to_group));
  std::vector<int> labels(node_to_group.begin(), node_to_group.end());
  return Partition::from_labels(labels);
}

Embedding spectral_embedding(const Graph& g, std::size_t k) {
  const std::size_t n = g.node_count();
  if (k < 1 || k > n) throw InvalidArgument("embedding dimension must satisfy 1 <= k <= n");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(laplacian(g));
  if (solver.info() != Eigen::Success) throw NumericalError("Laplacian eigen-decomposition failed");

  Embedding emb;
  emb.coords = solver.eigenvectors().leftCols(static_cast<Eigen::Index>(k));
  emb.eigenvalues.assign(solver.eigenvalues().data(), solver.eigenvalues().data() + k);
  for (Eigen::Index c = 0; c < emb.coords.cols(); ++c) {
    auto col = emb.coords.col(c);
    col.normalize();
    const double scale = col.cwiseAbs().maxCoeff();
    for (Eigen::Index r = 0; r < col.size(); ++r) {
      if (std::abs(col(r)) > 1e-9 * scale) {
        if (col(r) < 0) col = -col;
        break;
      }
    }
  }
  return emb;
}

namespace {

KMeansResult kmeans_once(const Matrix& x, std::size_t k, Rng& rng) {
  const auto n = static_cast<std::size_t>(x.rows());
  const Eigen::Index dims = x.cols();
  Matrix centers(static_cast<Eigen::Index>(k), dims);

  // k-means++ seeding.
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  std::vector<bool> chosen(n, false);
  std::size_t first = rng.below(n);
  centers.row(0) = x.row(static_cast<Eigen::Index>(first));
  chosen[first] = true;
  for (std::size_t c = 1; c < k; ++c) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], (x.row(static_cast<Eigen::Index>(i)) - centers.row(static_cast<Eigen::Index>(c - 1)))
                                  .squaredNorm());
      total += d2[i];
    }
    std::size_t pick = n;
    if (total > 0.0) {
      double target = rng.uniform() * total;
      for (std::size_t i = 0; i < n; ++i) {
        if (d2[i] <= 0.0) continue;
        pick = i;
        target -= d2[i];
        if (target < 0.0) break;
      }
    }
    if (pick == n) {
      // All remaining points coincide with a center; take an unused one.
      std::vector<std::size_t> unused;
      for (std::size_t i = 0; i < n; ++i)
        if (!chosen[i]) unused.push_back(i);
      pick = unused[rng.below(unused.size())];
    }
    chosen[pick] = true;
    centers.row(static_cast<Eigen::Index>(c)) = x.row(static_cast<Eigen::Index>(pick));
  }

  std::vector<int> labels(n, -1);
  std::vector<double> dist(n);
  for (int iter = 0; iter < 300; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < k; ++c) {
        const double d = (x.row(static_cast<Eigen::Index>(i)) - centers.row(static_cast<Eigen::Index>(c))).squaredNorm();
        if (d < best_d) {
          best_d = d;
          best = static_cast<int>(c);
        }
      }
      dist[i] = best_d;
      if (labels[i] != best) {
        labels[i] = best;
        changed = true;
      }
    }
    if (!changed && iter > 0) break;

    Matrix sums = Matrix::Zero(static_cast<Eigen::Index>(k), dims);
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      sums.row(labels[i]) += x.row(static_cast<Eigen::Index>(i));
      ++counts[labels[i]];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] > 0) {
        centers.row(static_cast<Eigen::Index>(c)) = sums.row(static_cast<Eigen::Index>(c)) / static_cast<double>(counts[c]);
        continue;
      }
      // Empty cluster: reseed at the point farthest from its center.
      const auto far = static_cast<std::size_t>(std::max_element(dist.begin(), dist.end()) - dist.begin());
      centers.row(static_cast<Eigen::Index>(c)) = x.row(static_cast<Eigen::Index>(far));
      dist[far] = 0.0;
    }
  }

  KMeansResult result{std::move(labels), 0.0};
  for (std::size_t i = 0; i < n; ++i) {
    result.inertia += (x.row(static_cast<Eigen::Index>(i)) - centers.row(result.labels[i])).squaredNorm();
  }
  return result;
}

}  // namespace

KMeansResult kmeans(const Matrix& points, std::size_t k, std::uint64_t seed, std::size_t restarts) {
  if (k < 1 || k > static_cast<std::size_t>(points.rows())) throw InvalidArgument("k-means needs 1 <= k <= n");
  if (restarts == 0) throw InvalidArgument("k-means needs at least one restart");
  KMeansResult best;
  best.inertia = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < restarts; ++r) {
    Rng rng(derive_seed(seed, r));
    KMeansResult run = kmeans_once(points, k, rng);
    if (run.inertia < best.inertia) best = std::move(run);
  }
  return best;
}

Partition spectral_clustering(const Graph& g, std::size_t k, std::uint64_t seed) {
  const Embedding emb = spectral_embedding(g, k);
  return Partition::from_labels(kmeans(emb.coords, k, seed, 10).labels);
}

KSelection select_k(const Graph& g, std::size_t k_min, std::size_t k_max, std::uint64_t seed) {
  if (k_min < 1 || k_min > k_max || k_max > g.node_count()) {
    throw InvalidArgument("select_k needs 1 <= k_min <= k_max <= n");
  }
  // One eigendecomposition serves every k; columns are nested.
  const Embedding full = spectral_embedding(g, k_max);
  KSelection sel;
  for (std::size_t k = k_min; k <= k_max; ++k) {
    const Matrix coords = full.coords.leftCols(static_cast<Eigen::Index>(k));
    Partition p = Partition::from_labels(kmeans(coords, k, seed, 10).labels);
    const double q = modularity(g, p);
    sel.scores.push_back(q);
    if (sel.k == 0 || q > sel.modularity) {
      sel.k = k;
      sel.modularity = q;
      sel.partition = std::move(p);
    }
  }
  return sel;
}

}  // namespace infops
