#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "infops/graph.hpp"

namespace infops {

// Opinion per node, each in [0, 1].
using OpinionState = std::vector<double>;

enum class ShiftKind { Linear, Bounded };

// g(x) = omega * x, or for bounded confidence omega * x when |x| <= epsilon
// (boundary inclusive) and 0 otherwise.
struct ShiftFunction {
  ShiftKind kind = ShiftKind::Linear;
  double omega = 1.0;
  double epsilon = 1.0;

  static ShiftFunction linear(double omega) { return {ShiftKind::Linear, omega, 1.0}; }
  static ShiftFunction bounded(double omega, double epsilon) { return {ShiftKind::Bounded, omega, epsilon}; }

  double operator()(double x) const {
    if (kind == ShiftKind::Bounded && !(std::abs(x) <= epsilon)) return 0.0;
    return omega * x;
  }
  void validate() const;
};

// Nodes whose opinion is pinned. They keep influencing their out-neighbors.
struct StubbornSet {
  std::map<NodeId, double> pinned;

  bool contains(NodeId v) const { return pinned.contains(v); }
  bool empty() const { return pinned.empty(); }
};

// An external account posting `content` at `rate` to each of its targets.
struct AgentForce {
  double rate = 0.0;
  std::vector<NodeId> targets;
  double content = 0.0;
};

// Mutable controls seen by the dynamics; a Controller may rewrite them at
// every control boundary.
struct ControlState {
  std::vector<double> agent_content;    // one per AgentForce
  std::vector<double> edge_visibility;  // d_ij per edge, 1 = fully visible
};

// Called as controller(t, theta, controls) before the first step of every
// control interval.
using Controller = std::function<void(double, std::span<const double>, ControlState&)>;

struct IntegrationOptions {
  double h = 0.01;
  std::size_t sample_every = 10;
  std::size_t control_every = 10;
  bool clamp = true;
};

struct OpinionTrajectory {
  std::vector<double> times;
  std::vector<OpinionState> states;
  std::vector<std::vector<double>> agent_content;  // controls in force at each sample

  const OpinionState& final_state() const { return states.back(); }
};

// RK4 on
//   dtheta_j/dt = sum_{i->j} d_ij lambda_ij g(theta_i - theta_j)
//               + sum_a lambda_a [j in targets_a] g(c_a - theta_j)
// with stubborn derivatives masked and opinions clamped to [0, 1] after each
// step. The final step is shortened to land exactly on T.
OpinionTrajectory integrate(const Graph& g, const OpinionState& theta0, const ShiftFunction& shift,
                            const StubbornSet& stubborn, std::span<const AgentForce> agents, double T,
                            const IntegrationOptions& options = {}, const Controller& controller = {});

struct SteadyState {
  OpinionState theta;
  // No anchors at all: theta is the consensus the dynamics conserve.
  bool degenerate = false;
};

// Fixed point of the linear dynamics with stubborn nodes and constant agents
// as anchors. Every free node must be downstream of an anchor; with no
// anchors at all a unique consensus is returned (needs theta0) and flagged.
SteadyState steady_state_linear(const Graph& g, const StubbornSet& stubborn, const ShiftFunction& shift,
                                std::span<const AgentForce> agents = {},
                                const std::optional<OpinionState>& theta0 = std::nullopt);

struct OpinionStats {
  double mean = 0.0;
  double variance = 0.0;  // population variance
};

OpinionStats opinion_statistics(std::span<const double> theta);

}  // namespace infops
