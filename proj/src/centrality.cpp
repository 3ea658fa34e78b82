#include "infops/centrality.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>

#include "infops/error.hpp"

namespace infops {

NodeId CentralityScores::argmax() const {
  if (values.empty()) throw InvalidArgument("argmax of empty score vector");
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return nodes.empty() ? best : nodes[best];
}

CentralityScores degree_centrality(const Graph& g, DegreeDirection direction) {
  CentralityScores s;
  s.values.resize(g.node_count());
  for (NodeId i = 0; i < g.node_count(); ++i) {
    switch (direction) {
      case DegreeDirection::In:
        s.values[i] = static_cast<double>(g.in_edges(i).size());
        break;
      case DegreeDirection::Out:
        s.values[i] = static_cast<double>(g.out_edges(i).size());
        break;
      case DegreeDirection::Total:
        s.values[i] = static_cast<double>(g.undirected_degree(i));
        break;
    }
  }
  s.measure = direction == DegreeDirection::In    ? "in-degree"
              : direction == DegreeDirection::Out ? "out-degree"
                                                  : "degree";
  return s;
}

CentralityScores h_index(const Graph& g) {
  CentralityScores s{.measure = "h-index"};
  s.values.resize(g.node_count());
  std::vector<std::size_t> nd;
  for (NodeId i = 0; i < g.node_count(); ++i) {
    nd.clear();
    for (NodeId j : g.neighbors(i)) nd.push_back(g.undirected_degree(j));
    std::sort(nd.begin(), nd.end(), std::greater<>());
    std::size_t h = 0;
    while (h < nd.size() && nd[h] >= h + 1) ++h;
    s.values[i] = static_cast<double>(h);
  }
  return s;
}

namespace {

constexpr auto kUnreached = static_cast<std::size_t>(-1);

// BFS from `source` on the symmetrized graph.
std::vector<std::size_t> bfs_distances(const Graph& g, NodeId source) {
  std::vector<std::size_t> dist(g.node_count(), kUnreached);
  std::queue<NodeId> q;
  dist[source] = 0;
  q.push(source);
  while (!q.empty()) {
    const NodeId u = q.front();
    q.pop();
    for (NodeId v : g.neighbors(u)) {
      if (dist[v] == kUnreached) {
        dist[v] = dist[u] + 1;
        q.push(v);
      }
    }
  }
  return dist;
}

}  // namespace

CentralityScores closeness(const Graph& g) {
  CentralityScores s{.measure = "closeness"};
  s.values.resize(g.node_count());
  for (NodeId i = 0; i < g.node_count(); ++i) {
    const auto dist = bfs_distances(g, i);
    std::size_t reached = 0;
    std::size_t total = 0;
    for (std::size_t d : dist) {
      if (d != kUnreached) {
        ++reached;
        total += d;
      }
    }
    s.values[i] = total == 0 ? 0.0 : static_cast<double>(reached - 1) / static_cast<double>(total);
  }
  return s;
}

CentralityScores betweenness(const Graph& g) {
  const std::size_t n = g.node_count();
  CentralityScores s{.measure = "betweenness"};
  s.values.assign(n, 0.0);

  std::vector<std::vector<NodeId>> preds(n);
  std::vector<double> sigma(n), delta(n);
  std::vector<std::size_t> dist(n);
  std::vector<NodeId> order;
  order.reserve(n);

  for (NodeId src = 0; src < n; ++src) {
    for (auto& p : preds) p.clear();
    std::fill(sigma.begin(), sigma.end(), 0.0);
    std::fill(delta.begin(), delta.end(), 0.0);
    std::fill(dist.begin(), dist.end(), kUnreached);
    order.clear();

    sigma[src] = 1.0;
    dist[src] = 0;
    std::queue<NodeId> q;
    q.push(src);
    while (!q.empty()) {
      const NodeId u = q.front();
      q.pop();
      order.push_back(u);
      for (NodeId v : g.neighbors(u)) {
        if (dist[v] == kUnreached) {
          dist[v] = dist[u] + 1;
          q.push(v);
        }
        if (dist[v] == dist[u] + 1) {
          sigma[v] += sigma[u];
          preds[v].push_back(u);
        }
      }
    }
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      const NodeId w = *it;
      for (NodeId v : preds[w]) delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
      if (w != src) s.values[w] += delta[w];
    }
  }
  // Every unordered pair was visited from both endpoints.
  for (double& v : s.values) v *= 0.5;
  return s;
}

CentralityScores bonacich(const Graph& g, double alpha, double beta) {
  const auto n = static_cast<Eigen::Index>(g.node_count());
  const Matrix a = binary_adjacency(g);
  const double rho = spectral_radius(a);
  if (alpha < 0.0 || (rho > 0.0 && alpha * rho >= 1.0)) {
    throw InvalidArgument("bonacich attenuation must satisfy 0 <= alpha < 1/rho(A) = " +
                          std::to_string(rho > 0 ? 1.0 / rho : INFINITY));
  }
  const Matrix system = Matrix::Identity(n, n) - alpha * a.transpose();
  Eigen::PartialPivLU<Matrix> lu(system);
  const Vector c = lu.solve(Vector::Constant(n, beta));
  if (!c.allFinite()) throw NumericalError("bonacich system is singular");

  CentralityScores s{.measure = "bonacich", .params = {{"alpha", alpha}, {"beta", beta}}};
  s.values.assign(c.data(), c.data() + n);
  return s;
}

CentralityScores eigenvector_centrality(const Graph& g, IterativeOptions options) {
  if (g.edge_count() == 0) throw InvalidArgument("eigenvector centrality needs at least one edge");
  const std::size_t n = g.node_count();
  std::vector<double> v(n, 1.0 / static_cast<double>(n)), av(n), next(n);

  // av = A^T v, i.e. av_j = sum over in-edges (i -> j) of v_i.
  auto apply = [&g, n](const std::vector<double>& x, std::vector<double>& out) {
    for (NodeId j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t e : g.in_edges(j)) acc += x[g.edge(e).src];
      out[j] = acc;
    }
  };

  for (std::size_t iter = 0; iter < options.max_iter; ++iter) {
    apply(v, av);
    const double lambda = std::accumulate(av.begin(), av.end(), 0.0);
    double residual = 0.0;
    for (std::size_t i = 0; i < n; ++i) residual = std::max(residual, std::abs(av[i] - lambda * v[i]));
    if (residual <= options.tol) {
      CentralityScores s{.measure = "eigenvector", .params = {{"eigenvalue", lambda}}};
      s.values = v;
      return s;
    }
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      next[i] = av[i] + v[i];
      total += next[i];
    }
    for (std::size_t i = 0; i < n; ++i) v[i] = next[i] / total;
  }
  throw ConvergenceError("eigenvector centrality did not converge in " + std::to_string(options.max_iter) +
                         " iterations");
}

CentralityScores pagerank(const Graph& g, double damping, IterativeOptions options) {
  if (!(damping > 0.0 && damping < 1.0)) throw InvalidArgument("pagerank damping must lie in (0, 1)");
  const std::size_t n = g.node_count();
  const double inv_n = 1.0 / static_cast<double>(n);
  std::vector<double> x(n, inv_n), next(n);

  for (std::size_t iter = 0; iter < options.max_iter; ++iter) {
    double dangling = 0.0;
    for (NodeId i = 0; i < n; ++i) {
      if (g.out_edges(i).empty()) dangling += x[i];
    }
    const double base = (1.0 - damping) * inv_n + damping * dangling * inv_n;
    std::fill(next.begin(), next.end(), base);
    for (NodeId i = 0; i < n; ++i) {
      const auto out = g.out_edges(i);
      if (out.empty()) continue;
      const double share = damping * x[i] / static_cast<double>(out.size());
      for (std::size_t e : out) next[g.edge(e).dst] += share;
    }
    const double total = std::accumulate(next.begin(), next.end(), 0.0);
    double change = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      next[i] /= total;
      change += std::abs(next[i] - x[i]);
    }
    x.swap(next);
    if (change < options.tol) {
      CentralityScores s{.measure = "pagerank", .params = {{"damping", damping}}};
      s.values = std::move(x);
      return s;
    }
  }
  throw ConvergenceError("pagerank did not converge in " + std::to_string(options.max_iter) + " iterations");
}

CentralityScores rumor_centrality(const Graph& g, std::span<const NodeId> infected) {
  std::vector<NodeId> nodes(infected.begin(), infected.end());
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  if (nodes.empty()) throw InvalidArgument("rumor centrality needs a nonempty infected set");
  for (NodeId v : nodes) {
    if (v >= g.node_count()) throw InvalidArgument("infected node out of range");
  }

  const std::size_t m = nodes.size();
  std::vector<std::size_t> local(g.node_count(), kUnreached);
  for (std::size_t i = 0; i < m; ++i) local[nodes[i]] = i;
  std::vector<std::vector<std::size_t>> adj(m);
  for (std::size_t i = 0; i < m; ++i) {
    for (NodeId v : g.neighbors(nodes[i])) {
      if (local[v] != kUnreached) adj[i].push_back(local[v]);
    }
  }

  const double log_m_factorial = std::lgamma(static_cast<double>(m) + 1.0);
  std::vector<std::size_t> parent(m), order, subtree(m);
  CentralityScores s{.measure = "rumor"};
  s.nodes = nodes;
  s.values.resize(m);

  for (std::size_t root = 0; root < m; ++root) {
    // BFS tree of the infected subgraph rooted at the candidate source.
    std::fill(parent.begin(), parent.end(), kUnreached);
    order.clear();
    parent[root] = root;
    order.push_back(root);
    for (std::size_t head = 0; head < order.size(); ++head) {
      for (std::size_t v : adj[order[head]]) {
        if (parent[v] == kUnreached) {
          parent[v] = order[head];
          order.push_back(v);
        }
      }
    }
    if (order.size() != m) throw InvalidArgument("infected set does not induce a connected subgraph");

    // R(v) = m! / prod_u |subtree(u)|
    std::fill(subtree.begin(), subtree.end(), 1);
    double log_count = log_m_factorial;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      log_count -= std::log(static_cast<double>(subtree[*it]));
      if (*it != root) subtree[parent[*it]] += subtree[*it];
    }
    s.values[root] = log_count;
  }
  return s;
}

}  // namespace infops
