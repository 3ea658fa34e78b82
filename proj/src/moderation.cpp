#include "infops/moderation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "infops/error.hpp"
#include "infops/random.hpp"

namespace infops {

std::vector<double> edge_contributions(const Graph& g, std::span<const double> theta, const ShiftFunction& shift,
                                       const Objective& objective, const StubbornSet& stubborn) {
  if (theta.size() != g.node_count()) throw InvalidArgument("opinion vector does not match node count");
  const auto w = objective_gradient(objective, theta);
  std::vector<double> s(g.edge_count(), 0.0);
  for (std::size_t e = 0; e < g.edge_count(); ++e) {
    const Edge& edge = g.edge(e);
    if (stubborn.contains(edge.dst)) continue;
    s[e] = w[edge.dst] * edge.rate * shift(theta[edge.src] - theta[edge.dst]);
  }
  return s;
}

VisibilityPolicy shadowban_step(const Graph& g, std::span<const double> theta, const ShiftFunction& shift,
                                const Objective& objective, double budget, const StubbornSet& stubborn) {
  if (!(budget >= 0.0)) throw InvalidArgument("suppression budget must be >= 0");
  const auto s = edge_contributions(g, theta, shift, objective, stubborn);

  std::vector<std::size_t> harmful;
  for (std::size_t e = 0; e < s.size(); ++e) {
    if (s[e] < 0.0) harmful.push_back(e);
  }
  std::stable_sort(harmful.begin(), harmful.end(), [&](std::size_t a, std::size_t b) { return s[a] < s[b]; });

  VisibilityPolicy policy;
  policy.budget = budget;
  policy.visibility.assign(s.size(), 1.0);
  double left = budget;
  for (std::size_t e : harmful) {
    if (left <= 0.0) break;
    const double cut = std::min(1.0, left);
    policy.visibility[e] = 1.0 - cut;
    policy.suppression += cut;
    left -= cut;
  }
  for (std::size_t e = 0; e < s.size(); ++e) policy.rate += policy.visibility[e] * s[e];
  return policy;
}

ModeratedRun run_moderated(const Graph& g, const OpinionState& theta0, const ShiftFunction& shift,
                           const Objective& objective, double budget, double T, const ModerationOptions& options) {
  if (!(budget >= 0.0)) throw InvalidArgument("suppression budget must be >= 0");
  if (!objective.on_opinions()) throw InvalidArgument("moderation objective must be an opinion functional");

  ModeratedRun run;
  Controller controller = [&](double t, std::span<const double> theta, ControlState& ctrl) {
    auto policy = shadowban_step(g, theta, shift, objective, budget, options.stubborn);
    ctrl.edge_visibility = policy.visibility;
    run.policy_times.push_back(t);
    run.policies.push_back(std::move(policy));
  };
  run.trajectory =
      integrate(g, theta0, shift, options.stubborn, options.agents, T, options.integration, controller);
  run.value = evaluate(objective, run.trajectory);
  return run;
}

std::string format_policy_csv(const Graph& g, const ModeratedRun& run, bool last_only) {
  std::ostringstream out;
  out.precision(17);
  out << "step,time,src,dst,d\n";
  const std::size_t first = last_only && !run.policies.empty() ? run.policies.size() - 1 : 0;
  for (std::size_t k = first; k < run.policies.size(); ++k) {
    const auto& d = run.policies[k].visibility;
    for (std::size_t e = 0; e < d.size(); ++e) {
      out << k << ',' << run.policy_times[k] << ',' << g.edge(e).src << ',' << g.edge(e).dst << ',' << d[e] << '\n';
    }
  }
  return out.str();
}

namespace {

void mean_and_error(const std::vector<std::size_t>& counts, double& mean, double& std_error) {
  const double r = static_cast<double>(counts.size());
  mean = 0.0;
  for (auto c : counts) mean += static_cast<double>(c);
  mean /= r;
  double ss = 0.0;
  for (auto c : counts) ss += (static_cast<double>(c) - mean) * (static_cast<double>(c) - mean);
  std_error = counts.size() > 1 ? std::sqrt(ss / (r - 1.0) / r) : 0.0;
}

}  // namespace

DampingResult hawkes_damping(const Graph& g, const HawkesParams& params, double damp, double T,
                             std::size_t replications, std::uint64_t seed) {
  if (!(damp >= 0.0 && damp <= 1.0)) throw InvalidArgument("damping factor must lie in [0, 1]");
  if (replications == 0) throw InvalidArgument("replications must be >= 1");
  HawkesParams damped = params;
  damped.alpha = damp * params.alpha;
  check_hawkes_stability(g, params);
  check_hawkes_stability(g, damped);

  DampingResult result;
  result.baseline_counts.resize(replications);
  result.damped_counts.resize(replications);
  for (std::size_t r = 0; r < replications; ++r) {
    const auto s = derive_seed(seed, r);
    result.baseline_counts[r] = simulate_hawkes(g, params, T, s).events.size();
    result.damped_counts[r] = simulate_hawkes(g, damped, T, s).events.size();
  }
  mean_and_error(result.baseline_counts, result.baseline_mean, result.baseline_std_error);
  mean_and_error(result.damped_counts, result.damped_mean, result.damped_std_error);
  return result;
}

}  // namespace infops
