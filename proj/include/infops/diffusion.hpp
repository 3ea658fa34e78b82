#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "infops/graph.hpp"

namespace infops {

enum class Compartment : std::uint8_t { Susceptible = 0, Infected = 1, Recovered = 2 };

// Per-node compartment at every recorded step. For LT/IC "Infected" means
// adopted and adoption is permanent.
struct Cascade {
  std::vector<std::vector<Compartment>> states;
  std::vector<std::optional<std::size_t>> activation_time;

  std::size_t steps() const { return states.size(); }
  // Nodes that were ever infected / adopted.
  std::size_t reach() const;
  struct Counts {
    std::size_t susceptible = 0, infected = 0, recovered = 0;
  };
  Counts counts(std::size_t step) const;
  std::size_t peak_infected() const;
};

enum class DiffusionModel { IndependentCascade, LinearThreshold };
enum class ThresholdMode { Fixed, Random };

// Edge-aligned parameters for the binary-state models.
// IC reads `edge_weight` as p_ij; LT reads it as w_ij (influence of src on
// dst) and needs sum over in-edges <= 1 at every node.
struct DiffusionParams {
  DiffusionModel model = DiffusionModel::IndependentCascade;
  std::vector<double> edge_weight;
  ThresholdMode threshold_mode = ThresholdMode::Random;
  std::vector<double> thresholds;  // used by ThresholdMode::Fixed

  static DiffusionParams independent_cascade(const Graph& g, double p);
  // w_ij = 1 / in-degree(j)
  static DiffusionParams linear_threshold(const Graph& g);
  static DiffusionParams linear_threshold(const Graph& g, double weight, std::vector<double> thresholds);

  // Throws InvalidArgument when a model invariant does not hold.
  void validate(const Graph& g) const;
};

// Synchronous rounds: an inactive node adopts once the active in-neighbor
// weight reaches its threshold (and at least one in-neighbor is active).
// Random mode draws thresholds ~ U[0,1] from `seed`.
Cascade simulate_lt(const Graph& g, const DiffusionParams& params, std::span<const NodeId> seeds,
                    std::uint64_t seed);

// Generation-based cascade: each newly active node gets one Bernoulli(p_ij)
// attempt per inactive out-neighbor. The coin of every edge is drawn up front
// in edge order, so runs that share `seed` are coupled across seed sets.
Cascade simulate_ic(const Graph& g, const DiffusionParams& params, std::span<const NodeId> seeds,
                    std::uint64_t seed);

// Final adopter count only, for the Monte Carlo hot path.
std::size_t cascade_size(const Graph& g, const DiffusionParams& params, std::span<const NodeId> seeds,
                         std::uint64_t seed);

struct SpreadEstimate {
  double mean = 0.0;
  double std_error = 0.0;
};

// Replication r uses derive_seed(seed, r).
SpreadEstimate expected_spread(const Graph& g, const DiffusionParams& params, std::span<const NodeId> seeds,
                               std::size_t replications, std::uint64_t seed);

struct SirPoint {
  double t, s, i, r;
};

// RK4 on dS = -beta S I, dI = beta S I - gamma I, dR = gamma I. Samples every
// step; the final step is shortened to land on T.
std::vector<SirPoint> simulate_sir_ode(double beta, double gamma, double s0, double i0, double r0, double T,
                                       double dt);

// Discrete-time (dt = 1) networked SIR for T steps. Per step every infected
// node infects each susceptible out-neighbor with probability
// 1 - exp(-beta * rate) and then recovers with probability 1 - exp(-gamma);
// gamma = +inf means recovery after exactly one infectious step.
Cascade simulate_sir_network(const Graph& g, double beta, double gamma, std::span<const NodeId> seeds,
                             std::size_t T, std::uint64_t seed);

}  // namespace infops
