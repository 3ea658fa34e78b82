#include "infops/hawkes.hpp"

#include <cmath>
#include <numeric>

#include "infops/error.hpp"
#include "infops/random.hpp"

namespace infops {

double hawkes_branching_ratio(const Graph& g, const HawkesParams& params) {
  if (params.alpha == 0.0) return 0.0;
  if (params.beta_decay <= 0.0) return INFINITY;
  return params.alpha * (1.0 + spectral_radius(binary_adjacency(g))) / params.beta_decay;
}

void check_hawkes_stability(const Graph& g, const HawkesParams& params) {
  if (!(params.mu >= 0.0) || !(params.alpha >= 0.0) || !(params.beta_decay >= 0.0)) {
    throw InvalidArgument("Hawkes parameters mu, alpha, beta must be >= 0");
  }
  const double ratio = hawkes_branching_ratio(g, params);
  if (!(ratio < 1.0)) {
    throw NumericalError("unstable Hawkes parameters: branching ratio alpha*(1+rho(A))/beta = " +
                         std::to_string(ratio) + " >= 1");
  }
}

EventLog simulate_hawkes(const Graph& g, const HawkesParams& params, double T, std::uint64_t seed) {
  if (!(T >= 0.0)) throw InvalidArgument("horizon must be >= 0");
  check_hawkes_stability(g, params);

  const std::size_t n = g.node_count();
  Rng rng(seed);
  EventLog log;
  log.horizon = T;

  // excitation[j] is the sum of alpha * exp(-beta (t - t_k)) at time `now`.
  std::vector<double> excitation(n, 0.0);
  double excitation_total = 0.0;
  double now = 0.0;
  const double baseline_total = params.mu * static_cast<double>(n);

  auto decay_to = [&](double t) {
    if (excitation_total == 0.0) {
      now = t;
      return;
    }
    const double f = std::exp(-params.beta_decay * (t - now));
    excitation_total = 0.0;
    for (double& x : excitation) {
      x *= f;
      excitation_total += x;
    }
    now = t;
  };

  while (true) {
    // Intensities only decay between events, so the current total bounds
    // the total until the next acceptance.
    const double bound = baseline_total + excitation_total;
    if (bound <= 0.0) break;
    const double candidate = now + rng.exponential(bound);
    if (candidate > T) break;
    decay_to(candidate);
    const double total = baseline_total + excitation_total;
    if (rng.uniform() * bound > total) continue;

    // Pick the firing node proportional to its intensity.
    double target = rng.uniform() * total;
    NodeId node = n - 1;
    for (NodeId j = 0; j < n; ++j) {
      target -= params.mu + excitation[j];
      if (target < 0.0) {
        node = j;
        break;
      }
    }
    log.events.push_back({candidate, node});
    log.intensity_at_event.push_back(params.mu + excitation[node]);

    if (params.alpha > 0.0) {
      excitation[node] += params.alpha;
      excitation_total += params.alpha;
      for (std::size_t e : g.out_edges(node)) {
        excitation[g.edge(e).dst] += params.alpha;
        excitation_total += params.alpha;
      }
    }
  }
  return log;
}

ActivitySummary hawkes_total_events(const EventLog& log, double window) {
  if (!(window > 0.0)) throw InvalidArgument("activity window must be positive");
  ActivitySummary s;
  s.count = log.events.size();
  if (s.count == 0) return s;
  std::size_t best = 0;
  std::size_t hi = 0;
  for (std::size_t lo = 0; lo < log.events.size(); ++lo) {
    if (hi < lo) hi = lo;
    while (hi < log.events.size() && log.events[hi].time <= log.events[lo].time + window) ++hi;
    if (hi - lo > best) {
      best = hi - lo;
      s.peak_start = log.events[lo].time;
    }
  }
  s.peak_rate = static_cast<double>(best) / window;
  return s;
}

}  // namespace infops
