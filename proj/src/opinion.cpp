#include "infops/opinion.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include "infops/error.hpp"

namespace infops {

void ShiftFunction::validate() const {
  if (!(omega > 0.0) || !std::isfinite(omega)) throw InvalidArgument("persuasion strength omega must be > 0");
  if (kind == ShiftKind::Bounded && !(epsilon > 0.0 && epsilon <= 1.0)) {
    throw InvalidArgument("confidence threshold epsilon must lie in (0, 1]");
  }
}

namespace {

void check_theta(const Graph& g, const OpinionState& theta) {
  if (theta.size() != g.node_count()) throw InvalidArgument("opinion vector does not match node count");
  for (double x : theta) {
    if (!(x >= 0.0 && x <= 1.0)) throw InvalidArgument("opinions must lie in [0, 1]");
  }
}

void check_stubborn(const Graph& g, const StubbornSet& stubborn) {
  for (auto [v, x] : stubborn.pinned) {
    if (v >= g.node_count()) throw InvalidArgument("stubborn node out of range");
    if (!(x >= 0.0 && x <= 1.0)) throw InvalidArgument("stubborn opinion must lie in [0, 1]");
  }
}

void check_agents(const Graph& g, std::span<const AgentForce> agents) {
  for (const auto& a : agents) {
    if (!(a.rate >= 0.0) || !std::isfinite(a.rate)) throw InvalidArgument("agent rate must be finite and >= 0");
    for (NodeId t : a.targets) {
      if (t >= g.node_count()) throw InvalidArgument("agent target out of range");
    }
  }
}

class Dynamics {
 public:
  Dynamics(const Graph& g, const ShiftFunction& shift, const StubbornSet& stubborn,
           std::span<const AgentForce> agents)
      : g_(g), shift_(shift), agents_(agents), mask_(g.node_count(), 1.0) {
    for (auto [v, x] : stubborn.pinned) mask_[v] = 0.0;
  }

  void operator()(const std::vector<double>& theta, const ControlState& ctrl, std::vector<double>& out) const {
    const std::size_t n = g_.node_count();
    for (NodeId j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t e : g_.in_edges(j)) {
        const Edge& edge = g_.edge(e);
        acc += ctrl.edge_visibility[e] * edge.rate * shift_(theta[edge.src] - theta[j]);
      }
      out[j] = acc;
    }
    for (std::size_t a = 0; a < agents_.size(); ++a) {
      const auto& agent = agents_[a];
      if (agent.rate == 0.0) continue;
      for (NodeId j : agent.targets) out[j] += agent.rate * shift_(ctrl.agent_content[a] - theta[j]);
    }
    for (NodeId j = 0; j < n; ++j) {
      if (mask_[j] == 0.0) out[j] = 0.0;
    }
  }

 private:
  const Graph& g_;
  const ShiftFunction& shift_;
  std::span<const AgentForce> agents_;
  std::vector<double> mask_;
};

}  // namespace

OpinionTrajectory integrate(const Graph& g, const OpinionState& theta0, const ShiftFunction& shift,
                            const StubbornSet& stubborn, std::span<const AgentForce> agents, double T,
                            const IntegrationOptions& options, const Controller& controller) {
  shift.validate();
  check_theta(g, theta0);
  check_stubborn(g, stubborn);
  check_agents(g, agents);
  if (!(options.h > 0.0)) throw InvalidArgument("step size h must be > 0");
  if (!(T >= 0.0) || !std::isfinite(T)) throw InvalidArgument("horizon T must be finite and >= 0");
  if (options.sample_every == 0 || options.control_every == 0) {
    throw InvalidArgument("sampling and control intervals must be >= 1 step");
  }

  const std::size_t n = g.node_count();
  Dynamics rhs(g, shift, stubborn, agents);
  ControlState ctrl;
  ctrl.edge_visibility.assign(g.edge_count(), 1.0);
  for (const auto& a : agents) ctrl.agent_content.push_back(a.content);

  std::vector<double> theta = theta0;
  for (auto [v, x] : stubborn.pinned) theta[v] = x;

  OpinionTrajectory traj;
  auto sample = [&](double t) {
    traj.times.push_back(t);
    traj.states.push_back(theta);
    traj.agent_content.push_back(ctrl.agent_content);
  };

  const auto steps = static_cast<std::size_t>(std::ceil(T / options.h - 1e-9));
  if (controller && steps == 0) controller(0.0, theta, ctrl);
  sample(0.0);

  std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);
  for (std::size_t k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k) * options.h;
    const double h = k + 1 == steps ? T - t : options.h;
    if (controller && k % options.control_every == 0) controller(t, theta, ctrl);

    rhs(theta, ctrl, k1);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = theta[i] + 0.5 * h * k1[i];
    rhs(tmp, ctrl, k2);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = theta[i] + 0.5 * h * k2[i];
    rhs(tmp, ctrl, k3);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = theta[i] + h * k3[i];
    rhs(tmp, ctrl, k4);
    for (std::size_t i = 0; i < n; ++i) {
      double x = theta[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
      if (!std::isfinite(x)) throw NumericalError("opinion state became non-finite at t = " + std::to_string(t));
      if (options.clamp) x = std::clamp(x, 0.0, 1.0);
      theta[i] = x;
    }
    if ((k + 1) % options.sample_every == 0 || k + 1 == steps) sample(t + h);
  }
  return traj;
}

SteadyState steady_state_linear(const Graph& g, const StubbornSet& stubborn, const ShiftFunction& shift,
                                std::span<const AgentForce> agents, const std::optional<OpinionState>& theta0) {
  if (shift.kind != ShiftKind::Linear) throw InvalidArgument("closed-form steady state needs a linear shift");
  shift.validate();
  check_stubborn(g, stubborn);
  check_agents(g, agents);
  if (theta0) check_theta(g, *theta0);

  const std::size_t n = g.node_count();
  constexpr auto kNone = static_cast<std::size_t>(-1);
  std::vector<std::size_t> slot(n, kNone);  // position among free nodes
  std::vector<NodeId> free_nodes;
  for (NodeId v = 0; v < n; ++v) {
    if (!stubborn.contains(v)) {
      slot[v] = free_nodes.size();
      free_nodes.push_back(v);
    }
  }

  SteadyState result;
  result.theta.assign(n, 0.0);
  for (auto [v, x] : stubborn.pinned) result.theta[v] = x;
  if (free_nodes.empty()) return result;

  // Anchored = downstream of a stubborn node or a target of an active agent.
  std::vector<char> anchored(n, 0);
  std::queue<NodeId> q;
  bool any_anchor = false;
  auto mark = [&](NodeId v) {
    if (!anchored[v]) {
      anchored[v] = 1;
      q.push(v);
    }
  };
  for (auto [v, x] : stubborn.pinned) mark(v), any_anchor = true;
  for (const auto& a : agents) {
    if (a.rate <= 0.0) continue;
    for (NodeId t : a.targets) mark(t), any_anchor = true;
  }
  while (!q.empty()) {
    const NodeId u = q.front();
    q.pop();
    for (std::size_t e : g.out_edges(u)) {
      if (g.edge(e).rate > 0.0) mark(g.edge(e).dst);
    }
  }

  const auto m = static_cast<Eigen::Index>(free_nodes.size());
  if (!any_anchor) {
    // Consensus: the left null vector pi of the in-rate Laplacian is
    // conserved (pi . theta constant), so the limit is pi . theta0 / sum(pi).
    Matrix lap = Matrix::Zero(m, m);
    for (const Edge& e : g.edges()) {
      lap(e.dst, e.dst) += e.rate;
      lap(e.dst, e.src) -= e.rate;
    }
    Eigen::FullPivLU<Matrix> lu(lap.transpose());
    lu.setThreshold(1e-10);
    const Matrix kernel = lu.kernel();
    if (lu.dimensionOfKernel() != 1) {
      throw InvalidArgument("no stubborn anchor and no unique consensus: " +
                            std::to_string(lu.dimensionOfKernel()) + " independent closed groups");
    }
    if (!theta0) throw InvalidArgument("consensus steady state needs the initial opinions");
    Vector pi = kernel.col(0);
    pi /= pi.sum();
    double value = 0.0;
    for (NodeId v = 0; v < n; ++v) value += pi(static_cast<Eigen::Index>(v)) * (*theta0)[v];
    result.theta.assign(n, std::clamp(value, 0.0, 1.0));
    result.degenerate = true;
    return result;
  }

  for (NodeId v : free_nodes) {
    if (!anchored[v]) throw InvalidArgument("node " + std::to_string(v) + " is in a free component with no anchor");
  }

  // Row j: (sum of incoming rates) theta_j - sum_free lambda_ij theta_i = anchors.
  Matrix system = Matrix::Zero(m, m);
  Vector rhs = Vector::Zero(m);
  for (const Edge& e : g.edges()) {
    const std::size_t row = slot[e.dst];
    if (row == kNone) continue;
    const auto r = static_cast<Eigen::Index>(row);
    system(r, r) += e.rate;
    if (slot[e.src] == kNone) {
      rhs(r) += e.rate * stubborn.pinned.at(e.src);
    } else {
      system(r, static_cast<Eigen::Index>(slot[e.src])) -= e.rate;
    }
  }
  for (const auto& a : agents) {
    if (a.rate <= 0.0) continue;
    for (NodeId t : a.targets) {
      if (slot[t] == kNone) continue;
      const auto r = static_cast<Eigen::Index>(slot[t]);
      system(r, r) += a.rate;
      rhs(r) += a.rate * a.content;
    }
  }
  const Vector solution = system.partialPivLu().solve(rhs);
  if (!solution.allFinite()) throw NumericalError("steady-state system is singular");
  for (Eigen::Index r = 0; r < m; ++r) result.theta[free_nodes[static_cast<std::size_t>(r)]] = solution(r);
  return result;
}

OpinionStats opinion_statistics(std::span<const double> theta) {
  if (theta.empty()) throw InvalidArgument("opinion statistics of an empty vector");
  // Welford update.
  double mean = 0.0, m2 = 0.0;
  std::size_t k = 0;
  for (double x : theta) {
    ++k;
    const double delta = x - mean;
    mean += delta / static_cast<double>(k);
    m2 += delta * (x - mean);
  }
  return {mean, m2 / static_cast<double>(k)};
}

}  // namespace infops
