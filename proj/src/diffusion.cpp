#include "infops/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "infops/error.hpp"
#include "infops/random.hpp"

namespace infops {

std::size_t Cascade::reach() const {
  return static_cast<std::size_t>(
      std::count_if(activation_time.begin(), activation_time.end(), [](const auto& t) { return t.has_value(); }));
}

Cascade::Counts Cascade::counts(std::size_t step) const {
  Counts c;
  for (Compartment s : states.at(step)) {
    switch (s) {
      case Compartment::Susceptible: ++c.susceptible; break;
      case Compartment::Infected: ++c.infected; break;
      case Compartment::Recovered: ++c.recovered; break;
    }
  }
  return c;
}

std::size_t Cascade::peak_infected() const {
  std::size_t peak = 0;
  for (std::size_t t = 0; t < states.size(); ++t) peak = std::max(peak, counts(t).infected);
  return peak;
}

DiffusionParams DiffusionParams::independent_cascade(const Graph& g, double p) {
  DiffusionParams params;
  params.model = DiffusionModel::IndependentCascade;
  params.edge_weight.assign(g.edge_count(), p);
  return params;
}

DiffusionParams DiffusionParams::linear_threshold(const Graph& g) {
  DiffusionParams params;
  params.model = DiffusionModel::LinearThreshold;
  params.threshold_mode = ThresholdMode::Random;
  params.edge_weight.resize(g.edge_count());
  for (std::size_t e = 0; e < g.edge_count(); ++e) {
    params.edge_weight[e] = 1.0 / static_cast<double>(g.in_edges(g.edge(e).dst).size());
  }
  return params;
}

DiffusionParams DiffusionParams::linear_threshold(const Graph& g, double weight, std::vector<double> thresholds) {
  DiffusionParams params;
  params.model = DiffusionModel::LinearThreshold;
  params.edge_weight.assign(g.edge_count(), weight);
  params.threshold_mode = ThresholdMode::Fixed;
  params.thresholds = std::move(thresholds);
  return params;
}

void DiffusionParams::validate(const Graph& g) const {
  if (edge_weight.size() != g.edge_count()) throw InvalidArgument("edge parameter vector does not match edge count");
  for (double w : edge_weight) {
    if (!(w >= 0.0 && w <= 1.0)) throw InvalidArgument("edge probabilities / weights must lie in [0, 1]");
  }
  if (model == DiffusionModel::LinearThreshold) {
    for (NodeId j = 0; j < g.node_count(); ++j) {
      double total = 0.0;
      for (std::size_t e : g.in_edges(j)) total += edge_weight[e];
      if (total > 1.0 + 1e-12) {
        throw InvalidArgument("LT in-weights of node " + std::to_string(j) + " sum to " + std::to_string(total) +
                              " > 1");
      }
    }
    if (threshold_mode == ThresholdMode::Fixed && thresholds.size() != g.node_count()) {
      throw InvalidArgument("fixed LT thresholds must cover every node");
    }
  }
}

namespace {

std::vector<NodeId> checked_seeds(const Graph& g, std::span<const NodeId> seeds) {
  if (seeds.empty()) throw InvalidArgument("seed set must be nonempty");
  std::vector<NodeId> out(seeds.begin(), seeds.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  if (out.back() >= g.node_count()) throw InvalidArgument("seed node out of range");
  return out;
}

// Shared core for LT and IC. `record` may be null when only the final size is
// wanted. Returns the number of adopters.
std::size_t run_binary_cascade(const Graph& g, const DiffusionParams& params, const std::vector<NodeId>& seeds,
                               std::uint64_t seed, Cascade* record) {
  const std::size_t n = g.node_count();
  Rng rng(seed);
  std::vector<char> active(n, 0);
  std::vector<NodeId> frontier;
  for (NodeId s : seeds) {
    active[s] = 1;
    frontier.push_back(s);
  }
  std::size_t adopted = frontier.size();

  auto snapshot = [&](std::size_t step, const std::vector<NodeId>& fresh) {
    if (!record) return;
    for (NodeId v : fresh) record->activation_time[v] = step;
    std::vector<Compartment> st(n);
    for (NodeId v = 0; v < n; ++v) st[v] = active[v] ? Compartment::Infected : Compartment::Susceptible;
    record->states.push_back(std::move(st));
  };
  if (record) {
    record->states.clear();
    record->activation_time.assign(n, std::nullopt);
  }
  snapshot(0, frontier);

  if (params.model == DiffusionModel::IndependentCascade) {
    std::vector<char> live(g.edge_count());
    for (std::size_t e = 0; e < g.edge_count(); ++e) live[e] = rng.uniform() < params.edge_weight[e];
    for (std::size_t step = 1; !frontier.empty(); ++step) {
      std::vector<NodeId> next;
      for (NodeId u : frontier) {
        for (std::size_t e : g.out_edges(u)) {
          const NodeId v = g.edge(e).dst;
          if (!active[v] && live[e]) {
            active[v] = 1;
            next.push_back(v);
          }
        }
      }
      adopted += next.size();
      std::sort(next.begin(), next.end());
      if (!next.empty()) snapshot(step, next);
      frontier = std::move(next);
    }
    return adopted;
  }

  std::vector<double> threshold(n);
  if (params.threshold_mode == ThresholdMode::Random) {
    for (auto& t : threshold) t = rng.uniform();
  } else {
    threshold = params.thresholds;
  }
  for (std::size_t step = 1;; ++step) {
    std::vector<NodeId> next;
    for (NodeId j = 0; j < n; ++j) {
      if (active[j]) continue;
      double pressure = 0.0;
      bool exposed = false;
      for (std::size_t e : g.in_edges(j)) {
        if (active[g.edge(e).src]) {
          exposed = true;
          pressure += params.edge_weight[e];
        }
      }
      if (exposed && pressure >= threshold[j]) next.push_back(j);
    }
    if (next.empty()) break;
    for (NodeId v : next) active[v] = 1;
    adopted += next.size();
    snapshot(step, next);
  }
  return adopted;
}

}  // namespace

Cascade simulate_lt(const Graph& g, const DiffusionParams& params, std::span<const NodeId> seeds,
                    std::uint64_t seed) {
  if (params.model != DiffusionModel::LinearThreshold) throw InvalidArgument("parameters are not for the LT model");
  params.validate(g);
  Cascade c;
  run_binary_cascade(g, params, checked_seeds(g, seeds), seed, &c);
  return c;
}

Cascade simulate_ic(const Graph& g, const DiffusionParams& params, std::span<const NodeId> seeds,
                    std::uint64_t seed) {
  if (params.model != DiffusionModel::IndependentCascade) throw InvalidArgument("parameters are not for the IC model");
  params.validate(g);
  Cascade c;
  run_binary_cascade(g, params, checked_seeds(g, seeds), seed, &c);
  return c;
}

std::size_t cascade_size(const Graph& g, const DiffusionParams& params, std::span<const NodeId> seeds,
                         std::uint64_t seed) {
  return run_binary_cascade(g, params, checked_seeds(g, seeds), seed, nullptr);
}

SpreadEstimate expected_spread(const Graph& g, const DiffusionParams& params, std::span<const NodeId> seeds,
                               std::size_t replications, std::uint64_t seed) {
  if (replications == 0) throw InvalidArgument("replications must be >= 1");
  params.validate(g);
  const auto clean = checked_seeds(g, seeds);
  std::vector<double> sizes(replications);
  for (std::size_t r = 0; r < replications; ++r) {
    sizes[r] = static_cast<double>(run_binary_cascade(g, params, clean, derive_seed(seed, r), nullptr));
  }
  const double n = static_cast<double>(replications);
  const double mean = std::accumulate(sizes.begin(), sizes.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : sizes) ss += (x - mean) * (x - mean);
  const double se = replications > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
  return {mean, se};
}

std::vector<SirPoint> simulate_sir_ode(double beta, double gamma, double s0, double i0, double r0, double T,
                                       double dt) {
  if (!(dt > 0.0)) throw InvalidArgument("time step must be positive");
  if (!(T >= 0.0)) throw InvalidArgument("horizon must be >= 0");
  if (s0 < 0 || i0 < 0 || r0 < 0) throw InvalidArgument("compartment sizes must be >= 0");
  if (beta < 0 || gamma < 0) throw InvalidArgument("SIR rates must be >= 0");

  struct State {
    double s, i, r;
  };
  auto rhs = [beta, gamma](const State& x) {
    const double infection = beta * x.s * x.i;
    const double recovery = gamma * x.i;
    return State{-infection, infection - recovery, recovery};
  };
  auto axpy = [](const State& x, double h, const State& k) { return State{x.s + h * k.s, x.i + h * k.i, x.r + h * k.r}; };

  std::vector<SirPoint> out{{0.0, s0, i0, r0}};
  State x{s0, i0, r0};
  const auto steps = static_cast<std::size_t>(std::ceil(T / dt - 1e-9));
  for (std::size_t k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k) * dt;
    const double h = std::min(dt, T - t);
    const State k1 = rhs(x);
    const State k2 = rhs(axpy(x, h / 2, k1));
    const State k3 = rhs(axpy(x, h / 2, k2));
    const State k4 = rhs(axpy(x, h, k3));
    x.s += h / 6 * (k1.s + 2 * k2.s + 2 * k3.s + k4.s);
    x.i += h / 6 * (k1.i + 2 * k2.i + 2 * k3.i + k4.i);
    x.r += h / 6 * (k1.r + 2 * k2.r + 2 * k3.r + k4.r);
    out.push_back({t + h, x.s, x.i, x.r});
  }
  return out;
}

Cascade simulate_sir_network(const Graph& g, double beta, double gamma, std::span<const NodeId> seeds,
                             std::size_t T, std::uint64_t seed) {
  if (beta < 0 || gamma < 0 || std::isnan(beta) || std::isnan(gamma)) throw InvalidArgument("SIR rates must be >= 0");
  const auto clean = checked_seeds(g, seeds);
  const std::size_t n = g.node_count();
  const double p_recover = -std::expm1(-gamma);
  std::vector<double> p_infect(g.edge_count());
  for (std::size_t e = 0; e < g.edge_count(); ++e) p_infect[e] = -std::expm1(-beta * g.edge(e).rate);

  Rng rng(seed);
  Cascade c;
  c.activation_time.assign(n, std::nullopt);
  std::vector<Compartment> cur(n, Compartment::Susceptible);
  for (NodeId s : clean) {
    cur[s] = Compartment::Infected;
    c.activation_time[s] = 0;
  }
  c.states.push_back(cur);

  for (std::size_t step = 1; step <= T; ++step) {
    std::vector<Compartment> next = cur;
    std::size_t infected = 0;
    for (NodeId u = 0; u < n; ++u) {
      if (cur[u] != Compartment::Infected) continue;
      for (std::size_t e : g.out_edges(u)) {
        const NodeId v = g.edge(e).dst;
        if (cur[v] != Compartment::Susceptible) continue;
        if (rng.uniform() < p_infect[e] && next[v] == Compartment::Susceptible) {
          next[v] = Compartment::Infected;
          c.activation_time[v] = step;
        }
      }
      if (rng.uniform() < p_recover) next[u] = Compartment::Recovered;
    }
    for (Compartment s : next) infected += s == Compartment::Infected;
    cur = std::move(next);
    c.states.push_back(cur);
    if (infected == 0) break;
  }
  return c;
}

}  // namespace infops
