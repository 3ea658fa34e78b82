#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "infops/diffusion.hpp"
#include "infops/graph.hpp"
#include "infops/objective.hpp"
#include "infops/opinion.hpp"

namespace infops {

struct ConstantContent {
  double value = 1.0;
  bool operator==(const ConstantContent&) const = default;
};
// Content re-chosen every control interval at the edges of the targets'
// confidence intervals.
struct NudgingContent {
  bool operator==(const NudgingContent&) const = default;
};
using ContentPolicy = std::variant<ConstantContent, NudgingContent>;

struct CampaignAgent {
  double rate = 1.0;
  ContentPolicy policy = NudgingContent{};
  std::vector<NodeId> targets;

  bool operator==(const CampaignAgent&) const = default;
};

// Influence campaign: agents, their targets (d_ai = 1 for listed targets) and
// the assignment budget M with content bounds [content_lo, content_hi].
struct CampaignPlan {
  std::vector<CampaignAgent> agents;
  std::size_t budget = 0;
  double content_lo = 0.0;
  double content_hi = 1.0;

  std::size_t assignments() const;
  // Checks rates, bounds, duplicate / out-of-range targets and the budget.
  void validate(const Graph& g) const;

  // `{ "agents": [{ "rate", "policy": "nudging" | {"constant": v}, "targets" }],
  //    "budget": M }`; optional "content_bounds": [lo, hi].
  static CampaignPlan from_json(std::string_view text);
  std::string to_json() const;

  bool operator==(const CampaignPlan&) const = default;
};

struct SeedSelection {
  std::vector<NodeId> seeds;
  std::vector<double> marginal_gains;
  double spread = 0.0;  // estimate for the full selection
};

// CELF lazy greedy on the Monte Carlo spread. Every evaluation uses the same
// replication streams, so the estimate is itself a fixed set function and
// lazy re-evaluation is exact for it. Ties go to the lowest node id.
SeedSelection greedy_seed_selection(const Graph& g, const DiffusionParams& params, std::size_t budget,
                                    std::size_t replications = 1000, std::uint64_t seed = 0);

// Chen et al. degree discount on undirected degrees with uniform IC
// probability p: dd_v = d_v - 2 t_v - (d_v - t_v) t_v p.
SeedSelection degree_discount(const Graph& g, std::size_t budget, double p);

struct LinearCampaignOptions {
  double agent_rate = 1.0;
  double content_lo = 0.0;
  double content_hi = 1.0;
  StubbornSet stubborn;
};

struct CampaignOptimum {
  CampaignPlan plan;
  double value = 0.0;           // objective functional of the plan
  std::vector<double> history;  // value after each accepted assignment, [0] = no assignments
};

// Linear dynamics: constant agents at content_hi (maximize) or content_lo
// (minimize); assignments added greedily by steady-state objective, each one
// accepted only if it strictly improves.
CampaignOptimum optimize_targets_linear(const Graph& g, const OpinionState& theta0, std::size_t agent_count,
                                        std::size_t budget, const Objective& objective,
                                        const ShiftFunction& shift, const LinearCampaignOptions& options = {});

// Candidate content set {theta_i - eps, theta_i, theta_i + eps} over targets,
// the first floats just past each edge and the previous content, clipped to
// [lo, hi]; the candidate maximizing
// sum_i w_i g(c - theta_i) wins, ties toward the previous content.
double nudging_policy(std::span<const double> theta, std::span<const NodeId> targets, const ShiftFunction& shift,
                      std::span<const double> weights, double previous, double lo = 0.0, double hi = 1.0);

struct CampaignRunOptions {
  IntegrationOptions integration{};
  StubbornSet stubborn;
};

struct CampaignRun {
  OpinionTrajectory trajectory;
  double value = 0.0;  // objective functional at T
};

// Closed-loop integration; nudging content is refreshed every control
// interval from the current state.
CampaignRun run_campaign(const Graph& g, const OpinionState& theta0, const CampaignPlan& plan,
                         const ShiftFunction& shift, const Objective& objective, double T,
                         const CampaignRunOptions& options = {});

struct RolloutCampaignOptions {
  double agent_rate = 1.0;
  ContentPolicy policy = NudgingContent{};
  double content_lo = 0.0;
  double content_hi = 1.0;
  std::size_t rollout_steps = 100;
  CampaignRunOptions run{};
};

// Greedy target assignment scored by short closed-loop rollouts, for
// dynamics without a closed-form steady state.
CampaignOptimum optimize_targets_rollout(const Graph& g, const OpinionState& theta0, std::size_t agent_count,
                                         std::size_t budget, const Objective& objective,
                                         const ShiftFunction& shift, const RolloutCampaignOptions& options = {});

}  // namespace infops
