#pragma once

#include <cstdint>
#include <vector>

#include "infops/graph.hpp"

namespace infops {

struct HawkesParams {
  double mu = 0.1;          // baseline intensity per node
  double alpha = 0.0;       // jump added to an excited intensity per event
  double beta_decay = 1.0;  // exponential decay rate of excitation
};

struct HawkesEvent {
  double time;
  NodeId node;
};

// Events in strictly increasing time within [0, horizon].
struct EventLog {
  std::vector<HawkesEvent> events;
  double horizon = 0.0;
  // Intensity of the firing node just before each event; always >= mu.
  std::vector<double> intensity_at_event;
};

// An event at node i excites i itself and every out-neighbor of i, so the
// mean offspring matrix is (alpha / beta) * (I + A) with A the directed 0/1
// adjacency. Returns its spectral radius, alpha * (1 + rho(A)) / beta.
double hawkes_branching_ratio(const Graph& g, const HawkesParams& params);

// Throws InvalidArgument on negative parameters and NumericalError when the
// branching ratio is >= 1.
void check_hawkes_stability(const Graph& g, const HawkesParams& params);

// Multivariate Ogata thinning with the exact exponential-kernel recursion:
// lambda_j(t) = mu + alpha * sum over events of j and its in-neighbors of
// exp(-beta (t - t_k)).
EventLog simulate_hawkes(const Graph& g, const HawkesParams& params, double T, std::uint64_t seed);

struct ActivitySummary {
  std::size_t count = 0;
  double peak_rate = 0.0;     // max events in a window of `window` width / width
  double peak_start = 0.0;    // left edge of the busiest window
};

// Sliding windows are anchored at event times.
ActivitySummary hawkes_total_events(const EventLog& log, double window = 1.0);

}  // namespace infops
