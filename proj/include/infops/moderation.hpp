#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "infops/graph.hpp"
#include "infops/hawkes.hpp"
#include "infops/objective.hpp"
#include "infops/opinion.hpp"

namespace infops {

// Edge visibility d_e in [0, 1], aligned with g.edges().
struct VisibilityPolicy {
  std::vector<double> visibility;
  double budget = 0.0;
  double suppression = 0.0;  // sum_e (1 - d_e), never above budget
  double rate = 0.0;         // edge part of d score / dt under this policy
};

// s_e = w_dst * lambda_e * g(theta_src - theta_dst) with w the objective's
// score gradient. Stubborn destinations contribute 0.
std::vector<double> edge_contributions(const Graph& g, std::span<const double> theta, const ShiftFunction& shift,
                                       const Objective& objective, const StubbornSet& stubborn = {});

// Maximizes sum_e d_e s_e over the box with sum_e (1 - d_e) <= budget: the
// most negative contributions are switched off first (lowest edge index on
// ties), the marginal edge fractionally.
VisibilityPolicy shadowban_step(const Graph& g, std::span<const double> theta, const ShiftFunction& shift,
                                const Objective& objective, double budget, const StubbornSet& stubborn = {});

struct ModerationOptions {
  IntegrationOptions integration{};
  StubbornSet stubborn;
  std::vector<AgentForce> agents;  // campaign agents held at fixed content
};

struct ModeratedRun {
  OpinionTrajectory trajectory;
  double value = 0.0;  // objective functional at T
  std::vector<double> policy_times;
  std::vector<VisibilityPolicy> policies;
};

// Receding-horizon moderation: shadowban_step is re-solved at every control
// boundary and held until the next one.
ModeratedRun run_moderated(const Graph& g, const OpinionState& theta0, const ShiftFunction& shift,
                           const Objective& objective, double budget, double T, const ModerationOptions& options = {});

// `step,src,dst,d` rows, one block per control step (or the last one only).
std::string format_policy_csv(const Graph& g, const ModeratedRun& run, bool last_only = false);

struct DampingResult {
  double baseline_mean = 0.0;
  double baseline_std_error = 0.0;
  double damped_mean = 0.0;
  double damped_std_error = 0.0;
  std::vector<std::size_t> baseline_counts;
  std::vector<std::size_t> damped_counts;
};

// Paired replications: replication r uses the same stream for alpha and
// damp * alpha.
DampingResult hawkes_damping(const Graph& g, const HawkesParams& params, double damp, double T,
                             std::size_t replications, std::uint64_t seed);

}  // namespace infops
