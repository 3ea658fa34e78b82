#include "infops/graph.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <queue>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "infops/error.hpp"
#include "infops/random.hpp"

namespace infops {

Graph::Graph(std::size_t n, std::vector<Edge> edges, std::vector<std::string> labels)
    : n_(n), edges_(std::move(edges)), labels_(std::move(labels)) {
  if (n_ == 0) throw InvalidArgument("graph must have at least one node");
  if (labels_.empty()) {
    labels_.reserve(n_);
    for (std::size_t i = 0; i < n_; ++i) labels_.push_back(std::to_string(i));
  } else if (labels_.size() != n_) {
    throw InvalidArgument("label count does not match node count");
  }

  for (const Edge& e : edges_) {
    if (e.src >= n_ || e.dst >= n_) throw InvalidArgument("edge endpoint out of range");
    if (e.src == e.dst) throw InvalidArgument("self-loop on node " + std::to_string(e.src));
    if (!(e.rate >= 0.0) || !std::isfinite(e.rate)) throw InvalidArgument("edge rate must be finite and >= 0");
  }
  std::sort(edges_.begin(), edges_.end(),
            [](const Edge& a, const Edge& b) { return std::pair(a.src, a.dst) < std::pair(b.src, b.dst); });
  for (std::size_t i = 1; i < edges_.size(); ++i) {
    if (edges_[i].src == edges_[i - 1].src && edges_[i].dst == edges_[i - 1].dst) {
      throw InvalidArgument("duplicate edge " + std::to_string(edges_[i].src) + "->" +
                            std::to_string(edges_[i].dst));
    }
  }

  out_.assign(n_, {});
  in_.assign(n_, {});
  sym_.assign(n_, {});
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    out_[edges_[i].src].push_back(i);
    in_[edges_[i].dst].push_back(i);
    sym_[edges_[i].src].push_back(edges_[i].dst);
    sym_[edges_[i].dst].push_back(edges_[i].src);
  }
  for (auto& in : in_) {
    std::sort(in.begin(), in.end(), [this](std::size_t a, std::size_t b) { return edges_[a].src < edges_[b].src; });
  }
  for (auto& nb : sym_) {
    std::sort(nb.begin(), nb.end());
    nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
    sym_edge_count_ += nb.size();
  }
  sym_edge_count_ /= 2;
}

std::size_t Graph::find_edge(NodeId src, NodeId dst) const {
  if (src >= n_) return edges_.size();
  for (std::size_t idx : out_[src]) {
    if (edges_[idx].dst == dst) return idx;
  }
  return edges_.size();
}

Graph Graph::with_rates(std::span<const double> rates) const {
  if (rates.size() != edges_.size()) throw InvalidArgument("rate vector does not match edge count");
  std::vector<Edge> edges = edges_;
  for (std::size_t i = 0; i < edges.size(); ++i) edges[i].rate = rates[i];
  return Graph(n_, std::move(edges), labels_);
}

Graph Graph::permuted(std::span<const NodeId> perm) const {
  if (perm.size() != n_) throw InvalidArgument("permutation size does not match node count");
  std::vector<NodeId> inverse(n_, n_);
  for (std::size_t i = 0; i < n_; ++i) {
    if (perm[i] >= n_ || inverse[perm[i]] != n_) throw InvalidArgument("not a permutation");
    inverse[perm[i]] = i;
  }
  std::vector<Edge> edges;
  edges.reserve(edges_.size());
  for (const Edge& e : edges_) edges.push_back({inverse[e.src], inverse[e.dst], e.rate});
  std::vector<std::string> labels(n_);
  for (std::size_t i = 0; i < n_; ++i) labels[i] = labels_[perm[i]];
  return Graph(n_, std::move(edges), std::move(labels));
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

Graph parse_edge_list(std::string_view text) {
  std::unordered_map<std::string, NodeId> ids;
  std::vector<std::string> labels;
  std::vector<Edge> edges;
  std::unordered_map<std::uint64_t, std::size_t> seen;  // packed (src, dst) -> line

  auto intern = [&](std::string_view name) {
    auto [it, inserted] = ids.emplace(std::string(name), labels.size());
    if (inserted) labels.emplace_back(name);
    return it->second;
  };

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto end = text.find('\n', pos);
    std::string_view line = text.substr(pos, end == std::string_view::npos ? text.size() - pos : end - pos);
    pos = end == std::string_view::npos ? text.size() + 1 : end + 1;
    ++line_no;

    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      fields.push_back(trim(line.substr(start, comma == std::string_view::npos ? line.size() - start : comma - start)));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (fields.size() < 2 || fields.size() > 3) throw ParseError("expected src,dst[,rate]", line_no);
    for (auto f : fields) {
      if (f.empty()) throw ParseError("empty field", line_no);
    }

    double rate = 1.0;
    if (fields.size() == 3) {
      const auto f = fields[2];
      const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), rate);
      if (ec != std::errc() || ptr != f.data() + f.size() || !std::isfinite(rate)) {
        throw ParseError("invalid rate '" + std::string(f) + "'", line_no);
      }
      if (rate < 0.0) throw ParseError("negative rate", line_no);
    }
    if (fields[0] == fields[1]) throw ParseError("self-loop on '" + std::string(fields[0]) + "'", line_no);

    const NodeId src = intern(fields[0]);
    const NodeId dst = intern(fields[1]);
    const std::uint64_t key = (static_cast<std::uint64_t>(src) << 32) | dst;
    if (!seen.emplace(key, line_no).second) throw ParseError("duplicate edge", line_no);
    edges.push_back({src, dst, rate});
  }

  if (labels.empty()) throw ParseError("edge list contains no edges", 0);
  const std::size_t n = labels.size();
  return Graph(n, std::move(edges), std::move(labels));
}

Graph read_edge_list(std::istream& in) {
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_edge_list(buffer.str());
}

Graph load_edge_list_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open edge list '" + path + "'");
  return read_edge_list(in);
}

void write_edge_list(const Graph& g, std::ostream& out) {
  char buf[64];
  for (const Edge& e : g.edges()) {
    const auto res = std::to_chars(buf, buf + sizeof buf, e.rate);
    out << g.label(e.src) << ',' << g.label(e.dst) << ',' << std::string_view(buf, res.ptr - buf) << '\n';
  }
}

std::string format_edge_list(const Graph& g) {
  std::ostringstream out;
  write_edge_list(g, out);
  return out.str();
}

std::string label_map_json(const Graph& g) {
  return nlohmann::json{{"labels", g.labels()}}.dump();
}

Matrix adjacency(const Graph& g) {
  const auto n = static_cast<Eigen::Index>(g.node_count());
  Matrix a = Matrix::Zero(n, n);
  for (const Edge& e : g.edges()) a(e.src, e.dst) = e.rate;
  return a;
}

Matrix binary_adjacency(const Graph& g) {
  const auto n = static_cast<Eigen::Index>(g.node_count());
  Matrix a = Matrix::Zero(n, n);
  for (const Edge& e : g.edges()) a(e.src, e.dst) = 1.0;
  return a;
}

Matrix symmetric_adjacency(const Graph& g) {
  const auto n = static_cast<Eigen::Index>(g.node_count());
  Matrix a = Matrix::Zero(n, n);
  for (const Edge& e : g.edges()) {
    a(e.src, e.dst) = 1.0;
    a(e.dst, e.src) = 1.0;
  }
  return a;
}

Matrix laplacian(const Graph& g) {
  Matrix l = -symmetric_adjacency(g);
  for (NodeId i = 0; i < g.node_count(); ++i) {
    l(i, i) = static_cast<double>(g.undirected_degree(i));
  }
  return l;
}

double spectral_radius(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::EigenSolver<Matrix> solver(m, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) throw NumericalError("eigenvalue computation failed");
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

std::vector<std::size_t> connected_components(const Graph& g, std::size_t* count) {
  const std::size_t n = g.node_count();
  constexpr auto kUnset = static_cast<std::size_t>(-1);
  std::vector<std::size_t> comp(n, kUnset);
  std::size_t next = 0;
  std::queue<NodeId> frontier;
  for (NodeId s = 0; s < n; ++s) {
    if (comp[s] != kUnset) continue;
    comp[s] = next;
    frontier.push(s);
    while (!frontier.empty()) {
      const NodeId u = frontier.front();
      frontier.pop();
      for (NodeId v : g.neighbors(u)) {
        if (comp[v] == kUnset) {
          comp[v] = next;
          frontier.push(v);
        }
      }
    }
    ++next;
  }
  if (count) *count = next;
  return comp;
}

PlantedGraph generate_planted_partition(std::size_t k, std::size_t size, double p_in, double p_out,
                                        std::uint64_t seed) {
  if (k == 0 || size == 0) throw InvalidArgument("planted partition needs k >= 1 and size >= 1");
  if (!(p_out >= 0.0 && p_out < p_in && p_in <= 1.0)) {
    throw InvalidArgument("planted partition requires 0 <= p_out < p_in <= 1");
  }
  const std::size_t n = k * size;
  Rng rng(seed);
  std::vector<Edge> edges;
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>(i / size);
  for (NodeId u = 0; u < n; ++u) {
    for (NodeId v = u + 1; v < n; ++v) {
      const double p = labels[u] == labels[v] ? p_in : p_out;
      if (rng.uniform() < p) {
        edges.push_back({u, v, 1.0});
        edges.push_back({v, u, 1.0});
      }
    }
  }
  return {Graph(n, std::move(edges)), Partition::from_labels(labels)};
}

Graph generate_regular_tree(std::size_t degree, std::size_t depth) {
  if (degree == 0) throw InvalidArgument("tree degree must be >= 1");
  std::vector<Edge> edges;
  std::vector<NodeId> level{0};
  std::size_t n = 1;
  for (std::size_t d = 0; d < depth; ++d) {
    std::vector<NodeId> next;
    const std::size_t children = d == 0 ? degree : degree - 1;
    for (NodeId parent : level) {
      for (std::size_t c = 0; c < children; ++c) {
        const NodeId child = n++;
        edges.push_back({parent, child, 1.0});
        edges.push_back({child, parent, 1.0});
        next.push_back(child);
      }
    }
    if (next.empty()) break;
    level = std::move(next);
  }
  return Graph(n, std::move(edges));
}

Graph generate_erdos_renyi(std::size_t n, double p, std::uint64_t seed, bool directed) {
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("edge probability must lie in [0, 1]");
  Rng rng(seed);
  std::vector<Edge> edges;
  for (NodeId u = 0; u < n; ++u) {
    for (NodeId v = directed ? 0 : u + 1; v < n; ++v) {
      if (u == v) continue;
      if (rng.uniform() < p) {
        edges.push_back({u, v, 1.0});
        if (!directed) edges.push_back({v, u, 1.0});
      }
    }
  }
  return Graph(n, std::move(edges));
}

Graph make_undirected(std::size_t n, std::span<const std::pair<NodeId, NodeId>> pairs, double rate) {
  std::vector<Edge> edges;
  edges.reserve(2 * pairs.size());
  for (auto [u, v] : pairs) {
    edges.push_back({u, v, rate});
    edges.push_back({v, u, rate});
  }
  return Graph(n, std::move(edges));
}

Graph complete_graph(std::size_t n, double rate) {
  std::vector<std::pair<NodeId, NodeId>> pairs;
  for (NodeId u = 0; u < n; ++u)
    for (NodeId v = u + 1; v < n; ++v) pairs.emplace_back(u, v);
  return make_undirected(n, pairs, rate);
}

Graph path_graph(std::size_t n, double rate) {
  std::vector<std::pair<NodeId, NodeId>> pairs;
  for (NodeId u = 0; u + 1 < n; ++u) pairs.emplace_back(u, u + 1);
  return make_undirected(n, pairs, rate);
}

Graph star_graph(std::size_t leaves, double rate) {
  std::vector<std::pair<NodeId, NodeId>> pairs;
  for (NodeId v = 1; v <= leaves; ++v) pairs.emplace_back(0, v);
  return make_undirected(leaves + 1, pairs, rate);
}

Partition Partition::from_labels(const std::vector<int>& raw) {
  Partition p;
  p.labels.resize(raw.size());
  std::unordered_map<int, int> dense;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    auto [it, inserted] = dense.emplace(raw[i], static_cast<int>(dense.size()));
    p.labels[i] = it->second;
  }
  p.k = static_cast<int>(dense.size());
  return p;
}

double normalized_mutual_information(const Partition& a, const Partition& b) {
  if (a.size() != b.size()) throw InvalidArgument("partitions cover different node counts");
  const auto n = static_cast<double>(a.size());
  if (a.size() == 0) return 1.0;
  std::vector<double> joint(static_cast<std::size_t>(a.k) * b.k, 0.0);
  std::vector<double> pa(a.k, 0.0), pb(b.k, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    joint[static_cast<std::size_t>(a.labels[i]) * b.k + b.labels[i]] += 1.0;
    pa[a.labels[i]] += 1.0;
    pb[b.labels[i]] += 1.0;
  }
  auto entropy = [n](const std::vector<double>& counts) {
    double h = 0.0;
    for (double c : counts)
      if (c > 0) h -= (c / n) * std::log(c / n);
    return h;
  };
  const double ha = entropy(pa);
  const double hb = entropy(pb);
  if (ha == 0.0 && hb == 0.0) return 1.0;
  double mi = 0.0;
  for (int x = 0; x < a.k; ++x) {
    for (int y = 0; y < b.k; ++y) {
      const double c = joint[static_cast<std::size_t>(x) * b.k + y];
      if (c > 0) mi += (c / n) * std::log(c * n / (pa[x] * pb[y]));
    }
  }
  return mi / (0.5 * (ha + hb));
}

}  // namespace infops
