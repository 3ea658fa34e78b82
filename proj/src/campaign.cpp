#include "infops/campaign.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <set>

#include <nlohmann/json.hpp>

#include "infops/error.hpp"

namespace infops {

using nlohmann::json;

std::size_t CampaignPlan::assignments() const {
  std::size_t total = 0;
  for (const auto& a : agents) total += a.targets.size();
  return total;
}

void CampaignPlan::validate(const Graph& g) const {
  if (!(content_lo >= 0.0 && content_lo <= content_hi && content_hi <= 1.0)) {
    throw InvalidArgument("content bounds must satisfy 0 <= lo <= hi <= 1");
  }
  for (std::size_t a = 0; a < agents.size(); ++a) {
    const auto& agent = agents[a];
    if (!(agent.rate >= 0.0) || !std::isfinite(agent.rate)) throw InvalidArgument("agent rate must be finite and >= 0");
    if (const auto* c = std::get_if<ConstantContent>(&agent.policy)) {
      if (!(c->value >= content_lo && c->value <= content_hi)) {
        throw InvalidArgument("constant content of agent " + std::to_string(a) + " lies outside the content bounds");
      }
    }
    std::set<NodeId> seen;
    for (NodeId t : agent.targets) {
      if (t >= g.node_count()) throw InvalidArgument("agent target out of range");
      if (!seen.insert(t).second) throw InvalidArgument("agent " + std::to_string(a) + " targets a node twice");
    }
  }
  if (assignments() > budget) {
    throw InvalidArgument("plan uses " + std::to_string(assignments()) + " assignments, budget is " +
                          std::to_string(budget));
  }
}

CampaignPlan CampaignPlan::from_json(std::string_view text) {
  CampaignPlan plan;
  try {
    const json doc = json::parse(text);
    plan.budget = doc.at("budget").get<std::size_t>();
    if (doc.contains("content_bounds")) {
      plan.content_lo = doc["content_bounds"].at(0).get<double>();
      plan.content_hi = doc["content_bounds"].at(1).get<double>();
    }
    for (const auto& a : doc.at("agents")) {
      CampaignAgent agent;
      agent.rate = a.value("rate", 1.0);
      const auto& policy = a.at("policy");
      if (policy.is_string()) {
        if (policy.get<std::string>() != "nudging") throw InvalidArgument("unknown agent policy " + policy.dump());
        agent.policy = NudgingContent{};
      } else {
        agent.policy = ConstantContent{policy.at("constant").get<double>()};
      }
      agent.targets = a.value("targets", std::vector<NodeId>{});
      plan.agents.push_back(std::move(agent));
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("invalid plan JSON: ") + e.what(), 0);
  }
  return plan;
}

std::string CampaignPlan::to_json() const {
  json doc;
  doc["budget"] = budget;
  doc["content_bounds"] = {content_lo, content_hi};
  doc["agents"] = json::array();
  for (const auto& a : agents) {
    json entry;
    entry["rate"] = a.rate;
    if (const auto* c = std::get_if<ConstantContent>(&a.policy)) {
      entry["policy"] = {{"constant", c->value}};
    } else {
      entry["policy"] = "nudging";
    }
    entry["targets"] = a.targets;
    doc["agents"].push_back(std::move(entry));
  }
  return doc.dump(2);
}

SeedSelection greedy_seed_selection(const Graph& g, const DiffusionParams& params, std::size_t budget,
                                    std::size_t replications, std::uint64_t seed) {
  if (budget == 0) throw InvalidArgument("seed budget must be >= 1");
  params.validate(g);
  const std::size_t n = g.node_count();
  budget = std::min(budget, n);

  std::vector<NodeId> chosen;
  auto spread_with = [&](NodeId v) {
    std::vector<NodeId> s = chosen;
    s.push_back(v);
    return expected_spread(g, params, s, replications, seed).mean;
  };

  struct Entry {
    double gain;
    NodeId node;
    std::size_t round;
  };
  auto worse = [](const Entry& a, const Entry& b) {
    if (a.gain != b.gain) return a.gain < b.gain;
    return a.node > b.node;
  };
  std::priority_queue<Entry, std::vector<Entry>, decltype(worse)> queue(worse);
  for (NodeId v = 0; v < n; ++v) queue.push({spread_with(v), v, 0});

  SeedSelection sel;
  double current = 0.0;
  while (sel.seeds.size() < budget && !queue.empty()) {
    Entry top = queue.top();
    queue.pop();
    if (top.round == chosen.size()) {
      chosen.push_back(top.node);
      sel.seeds.push_back(top.node);
      sel.marginal_gains.push_back(top.gain);
      current += top.gain;
      continue;
    }
    top.gain = spread_with(top.node) - current;
    top.round = chosen.size();
    queue.push(top);
  }
  sel.spread = expected_spread(g, params, sel.seeds, replications, seed).mean;
  return sel;
}

SeedSelection degree_discount(const Graph& g, std::size_t budget, double p) {
  if (budget == 0) throw InvalidArgument("seed budget must be >= 1");
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("propagation probability must lie in [0, 1]");
  const std::size_t n = g.node_count();
  budget = std::min(budget, n);

  std::vector<double> degree(n), score(n);
  std::vector<std::size_t> selected_neighbors(n, 0);
  std::vector<char> taken(n, 0);
  for (NodeId v = 0; v < n; ++v) score[v] = degree[v] = static_cast<double>(g.undirected_degree(v));

  SeedSelection sel;
  for (std::size_t round = 0; round < budget; ++round) {
    NodeId best = n;
    for (NodeId v = 0; v < n; ++v) {
      if (!taken[v] && (best == n || score[v] > score[best])) best = v;
    }
    taken[best] = 1;
    sel.seeds.push_back(best);
    sel.marginal_gains.push_back(score[best]);
    for (NodeId u : g.neighbors(best)) {
      if (taken[u]) continue;
      const double t = static_cast<double>(++selected_neighbors[u]);
      score[u] = degree[u] - 2.0 * t - (degree[u] - t) * t * p;
    }
  }
  return sel;
}

namespace {

std::vector<AgentForce> constant_forces(const CampaignPlan& plan) {
  std::vector<AgentForce> forces;
  for (const auto& a : plan.agents) {
    forces.push_back({a.rate, a.targets, std::get<ConstantContent>(a.policy).value});
  }
  return forces;
}

// Shared greedy loop over (agent, node) assignments. `score_plan` returns the
// objective functional of a plan or nullopt when the plan is not evaluable.
template <class Evaluate>
CampaignOptimum greedy_assign(const Graph& g, CampaignPlan plan, const Objective& objective, Evaluate&& score_plan) {
  const std::size_t n = g.node_count();
  if (plan.budget > n * plan.agents.size()) {
    throw InvalidArgument("budget exceeds the number of possible (agent, node) assignments");
  }
  CampaignOptimum best;
  const auto base = score_plan(plan);
  double best_score = base ? objective.score(*base) : -std::numeric_limits<double>::infinity();
  best.value = base.value_or(std::numeric_limits<double>::quiet_NaN());
  best.history.push_back(best.value);

  std::vector<std::vector<char>> assigned(plan.agents.size(), std::vector<char>(n, 0));
  for (std::size_t used = 0; used < plan.budget; ++used) {
    std::optional<std::pair<std::size_t, NodeId>> pick;
    double pick_score = best_score;
    double pick_value = best.value;
    for (std::size_t a = 0; a < plan.agents.size(); ++a) {
      for (NodeId v = 0; v < n; ++v) {
        if (assigned[a][v]) continue;
        plan.agents[a].targets.push_back(v);
        const auto value = score_plan(plan);
        plan.agents[a].targets.pop_back();
        if (!value) continue;
        const double s = objective.score(*value);
        if (s > pick_score + 1e-12 * std::max(1.0, std::abs(pick_score))) {
          pick = {a, v};
          pick_score = s;
          pick_value = *value;
        }
      }
    }
    if (!pick) break;
    assigned[pick->first][pick->second] = 1;
    plan.agents[pick->first].targets.push_back(pick->second);
    best_score = pick_score;
    best.value = pick_value;
    best.history.push_back(pick_value);
  }
  for (auto& a : plan.agents) std::sort(a.targets.begin(), a.targets.end());
  best.plan = std::move(plan);
  return best;
}

}  // namespace

CampaignOptimum optimize_targets_linear(const Graph& g, const OpinionState& theta0, std::size_t agent_count,
                                        std::size_t budget, const Objective& objective,
                                        const ShiftFunction& shift, const LinearCampaignOptions& options) {
  if (objective.kind != ObjectiveKind::FinalMean) {
    throw InvalidArgument("linear target optimization supports the final-mean objective only");
  }
  if (shift.kind != ShiftKind::Linear) throw InvalidArgument("linear target optimization needs a linear shift");

  CampaignPlan plan;
  plan.budget = budget;
  plan.content_lo = options.content_lo;
  plan.content_hi = options.content_hi;
  const double content = objective.sense == Sense::Maximize ? options.content_hi : options.content_lo;
  for (std::size_t a = 0; a < agent_count; ++a) plan.agents.push_back({options.agent_rate, ConstantContent{content}, {}});
  plan.validate(g);

  auto score_plan = [&](const CampaignPlan& p) -> std::optional<double> {
    try {
      const auto forces = constant_forces(p);
      const auto ss = steady_state_linear(g, options.stubborn, shift, forces, theta0);
      return evaluate(objective, ss.theta);
    } catch (const InvalidArgument&) {
      return std::nullopt;
    }
  };
  return greedy_assign(g, std::move(plan), objective, score_plan);
}

double nudging_policy(std::span<const double> theta, std::span<const NodeId> targets, const ShiftFunction& shift,
                      std::span<const double> weights, double previous, double lo, double hi) {
  if (targets.empty()) throw InvalidArgument("nudging policy needs at least one target");
  if (weights.size() != theta.size()) throw InvalidArgument("gradient weights do not match the state");

  auto value = [&](double c) {
    double acc = 0.0;
    for (NodeId i : targets) acc += weights[i] * shift(c - theta[i]);
    return acc;
  };
  // Confidence-interval edge of theta_i nudged inward until it is inside in
  // floating point as well.
  auto edge = [&](double x, double dir) {
    double c = x + dir * shift.epsilon;
    while (std::abs(c - x) > shift.epsilon) c = std::nextafter(c, x);
    return c;
  };
  // First value past the edge. With a negative weight the sup sits just
  // outside the interval, where g drops to 0.
  auto outside = [&](double c, double x, double dir) {
    // step by an ulp of the largest operand; near 0 a single ulp of c would
    // not move c - x at all
    const double scale = std::max({std::abs(c), std::abs(x), shift.epsilon});
    const double ulp = std::nextafter(scale, HUGE_VAL) - scale;
    while (std::abs(c - x) <= shift.epsilon) c += dir * ulp;
    return c;
  };

  std::vector<double> candidates{std::clamp(previous, lo, hi)};
  for (NodeId i : targets) {
    if (i >= theta.size()) throw InvalidArgument("nudging target out of range");
    const double x = theta[i];
    candidates.push_back(std::clamp(x, lo, hi));
    if (shift.kind == ShiftKind::Bounded) {
      const double down = edge(x, -1.0), up = edge(x, +1.0);
      candidates.push_back(std::clamp(down, lo, hi));
      candidates.push_back(std::clamp(up, lo, hi));
      candidates.push_back(std::clamp(outside(down, x, -1.0), lo, hi));
      candidates.push_back(std::clamp(outside(up, x, +1.0), lo, hi));
    } else {
      candidates.push_back(lo);
      candidates.push_back(hi);
    }
  }

  double best = candidates.front();
  double best_value = value(best);
  for (double c : candidates) {
    const double v = value(c);
    const double tol = 1e-12 * std::max(1e-300, std::max(std::abs(v), std::abs(best_value)));
    if (v > best_value + tol) {
      best = c;
      best_value = v;
    } else if (std::abs(v - best_value) <= tol && std::abs(c - previous) < std::abs(best - previous)) {
      best = c;
    }
  }
  return best;
}

CampaignRun run_campaign(const Graph& g, const OpinionState& theta0, const CampaignPlan& plan,
                         const ShiftFunction& shift, const Objective& objective, double T,
                         const CampaignRunOptions& options) {
  plan.validate(g);
  if (!objective.on_opinions()) throw InvalidArgument("campaign objective must be an opinion functional");
  if (theta0.size() != g.node_count()) throw InvalidArgument("opinion vector does not match node count");

  std::vector<AgentForce> forces;
  std::vector<std::size_t> nudgers;
  for (std::size_t a = 0; a < plan.agents.size(); ++a) {
    const auto& agent = plan.agents[a];
    AgentForce f{agent.rate, agent.targets, 0.0};
    if (const auto* c = std::get_if<ConstantContent>(&agent.policy)) {
      f.content = c->value;
    } else {
      double mean = 0.0;
      for (NodeId t : agent.targets) mean += theta0[t];
      f.content = agent.targets.empty() ? 0.5 * (plan.content_lo + plan.content_hi)
                                        : mean / static_cast<double>(agent.targets.size());
      f.content = std::clamp(f.content, plan.content_lo, plan.content_hi);
      if (!agent.targets.empty() && agent.rate > 0.0) nudgers.push_back(a);
    }
    forces.push_back(std::move(f));
  }

  Controller controller;
  if (!nudgers.empty()) {
    controller = [&](double, std::span<const double> theta, ControlState& ctrl) {
      const auto weights = objective_gradient(objective, theta);
      for (std::size_t a : nudgers) {
        ctrl.agent_content[a] = nudging_policy(theta, plan.agents[a].targets, shift, weights, ctrl.agent_content[a],
                                               plan.content_lo, plan.content_hi);
      }
    };
  }

  CampaignRun run;
  run.trajectory = integrate(g, theta0, shift, options.stubborn, forces, T, options.integration, controller);
  run.value = evaluate(objective, run.trajectory);
  return run;
}

CampaignOptimum optimize_targets_rollout(const Graph& g, const OpinionState& theta0, std::size_t agent_count,
                                         std::size_t budget, const Objective& objective,
                                         const ShiftFunction& shift, const RolloutCampaignOptions& options) {
  if (!objective.on_opinions()) throw InvalidArgument("campaign objective must be an opinion functional");
  CampaignPlan plan;
  plan.budget = budget;
  plan.content_lo = options.content_lo;
  plan.content_hi = options.content_hi;
  for (std::size_t a = 0; a < agent_count; ++a) plan.agents.push_back({options.agent_rate, options.policy, {}});
  plan.validate(g);

  const double horizon = static_cast<double>(options.rollout_steps) * options.run.integration.h;
  auto score_plan = [&](const CampaignPlan& p) -> std::optional<double> {
    return run_campaign(g, theta0, p, shift, objective, horizon, options.run).value;
  };
  return greedy_assign(g, std::move(plan), objective, score_plan);
}

}  // namespace infops
