#include <doctest.h>

#include <cmath>

#include "infops/campaign.hpp"
#include "infops/error.hpp"
#include "oracles.hpp"

using namespace infops;

namespace {

const Objective kMaxMean = Objective::parse("final-mean-max");
const Objective kMinMean = Objective::parse("final-mean-min");

}  // namespace

TEST_CASE("objective names round trip") {
  for (const char* name : {"final-mean-max", "final-mean-min", "final-variance-max", "final-variance-min", "reach",
                           "peak-infection", "total-events"})
    CHECK(Objective::parse(name).name() == name);
  CHECK(Objective::parse("final-mean") == kMaxMean);
  CHECK_THROWS_AS(Objective::parse("nope"), InvalidArgument);
}

TEST_CASE("evaluate") {
  Cascade all;
  all.activation_time.assign(4, std::size_t{0});
  all.states.push_back(std::vector<Compartment>(4, Compartment::Infected));
  CHECK(evaluate(Objective::parse("reach"), all) == 4.0);
  OpinionTrajectory tr;
  tr.times = {0.0, 1.0};
  tr.states = {OpinionState(3, 0.5), OpinionState(3, 0.5)};
  CHECK(evaluate(kMaxMean, tr) == 0.5);
  CHECK(evaluate(Objective::parse("final-variance-min"), tr) == 0.0);
  const std::vector<SirPoint> series{{0, 0.9, 0.1, 0}, {1, 0.7, 0.25, 0.05}, {2, 0.6, 0.2, 0.2}};
  CHECK(evaluate(Objective::parse("peak-infection"), std::span<const SirPoint>(series)) == 0.25);
  CHECK_THROWS_AS(evaluate(kMaxMean, all), InvalidArgument);
  EventLog log;
  log.events = {{0.5, 0}, {1.5, 1}};
  CHECK(evaluate(Objective::parse("total-events"), log) == 2.0);
}

TEST_CASE("plan JSON") {
  CampaignPlan p;
  p.agents = {{1.5, NudgingContent{}, {0, 2}}, {1.0, ConstantContent{0.8}, {1}}};
  p.budget = 3;
  const auto q = CampaignPlan::from_json(p.to_json());
  CHECK(q == p);
  CHECK(q.assignments() == 3);
  const auto r = CampaignPlan::from_json(
      R"({"agents":[{"rate":1,"policy":{"constant":0.9},"targets":[1]},{"rate":2,"policy":"nudging","targets":[0]}],"budget":2})");
  CHECK(std::get<ConstantContent>(r.agents[0].policy).value == 0.9);
  CHECK(std::holds_alternative<NudgingContent>(r.agents[1].policy));
  CHECK_THROWS_AS(CampaignPlan::from_json("{"), ParseError);

  const auto g = path_graph(3);
  CampaignPlan over = p;
  over.budget = 2;
  CHECK_THROWS_AS(over.validate(g), InvalidArgument);
  CampaignPlan dup = p;
  dup.agents[0].targets = {1, 1};
  CHECK_THROWS_AS(dup.validate(g), InvalidArgument);
  CampaignPlan out = p;
  out.agents[1].targets = {7};
  CHECK_THROWS_AS(out.validate(g), InvalidArgument);
}

TEST_CASE("degree discount") {
  SUBCASE("budget 1 picks the maximum degree node") {
    const auto g = make_undirected(5, std::vector<std::pair<NodeId, NodeId>>{{0, 1}, {1, 2}, {1, 3}, {3, 4}});
    CHECK(degree_discount(g, 1, 0.1).seeds == std::vector<NodeId>{1});
  }
  SUBCASE("5-clique second pick discount") {
    const auto s = degree_discount(complete_graph(5), 2, 0.1);
    CHECK(s.seeds == std::vector<NodeId>{0, 1});
    CHECK(s.marginal_gains[1] == doctest::Approx(1.7));
  }
  SUBCASE("disjoint stars give distinct centers first") {
    std::vector<std::pair<NodeId, NodeId>> pairs;
    for (NodeId c : {0u, 4u, 8u})
      for (NodeId l = 1; l <= 3; ++l) pairs.emplace_back(c, c + l);
    const auto s = degree_discount(make_undirected(12, pairs), 3, 0.2);
    CHECK(s.seeds == std::vector<NodeId>{0, 4, 8});
  }
}

TEST_CASE("greedy seed selection") {
  SUBCASE("deterministic spread picks hubs of separate stars") {
    std::vector<std::pair<NodeId, NodeId>> pairs;
    for (NodeId l = 1; l <= 4; ++l) pairs.emplace_back(0, l);
    for (NodeId l = 6; l <= 8; ++l) pairs.emplace_back(5, l);
    const auto g = make_undirected(9, pairs);
    const auto s = greedy_seed_selection(g, DiffusionParams::independent_cascade(g, 1.0), 2, 20, 1);
    CHECK(s.seeds == std::vector<NodeId>{0, 5});
    CHECK(s.marginal_gains == std::vector<double>{5.0, 4.0});
    CHECK(s.spread == 9.0);
  }
  SUBCASE("marginal gains do not increase") {
    Rng rng(2);
    for (int trial = 0; trial < 5; ++trial) {
      const auto g = oracle::random_directed(12, 40, 0.25, rng);
      const auto s = greedy_seed_selection(g, DiffusionParams::independent_cascade(g, 0.3), 4, 300, trial);
      for (std::size_t k = 1; k < s.marginal_gains.size(); ++k)
        CHECK(s.marginal_gains[k] <= s.marginal_gains[k - 1] + 1e-12);
    }
  }
}

TEST_CASE("linear target optimization") {
  const auto shift = ShiftFunction::linear(1.0);
  const OpinionState theta0{0.2, 0.4, 0.1};
  LinearCampaignOptions opts;
  opts.stubborn.pinned[0] = 0.2;
  const auto g = path_graph(3);
  SUBCASE("budget 0 is the uncontrolled steady state") {
    const auto r = optimize_targets_linear(g, theta0, 1, 0, kMaxMean, shift, opts);
    CHECK(r.plan.assignments() == 0);
    const auto ss = steady_state_linear(g, opts.stubborn, shift);
    CHECK(r.value == doctest::Approx(opinion_statistics(ss.theta).mean));
  }
  SUBCASE("single assignment matches exhaustive search") {
    const auto r = optimize_targets_linear(g, theta0, 1, 1, kMaxMean, shift, opts);
    double best = -1;
    for (NodeId v = 0; v < 3; ++v) {
      const std::vector<AgentForce> a{{1.0, {v}, 1.0}};
      best = std::max(best, opinion_statistics(steady_state_linear(g, opts.stubborn, shift, a).theta).mean);
    }
    CHECK(r.value == doctest::Approx(best).epsilon(1e-12));
    const std::vector<AgentForce> a{{1.0, r.plan.agents[0].targets, 1.0}};
    CHECK(std::abs(opinion_statistics(steady_state_linear(g, opts.stubborn, shift, a).theta).mean - r.value) < 1e-8);
  }
  SUBCASE("history never decreases") {
    const auto r = optimize_targets_linear(complete_graph(6), OpinionState(6, 0.3), 2, 5, kMaxMean, shift, opts);
    for (std::size_t k = 1; k < r.history.size(); ++k) CHECK(r.history[k] >= r.history[k - 1]);
  }
  SUBCASE("minimize uses the low content and lowers the mean") {
    const auto r = optimize_targets_linear(g, theta0, 1, 2, kMinMean, shift, opts);
    CHECK(std::get<ConstantContent>(r.plan.agents[0].policy).value == 0.0);
    CHECK(r.value <= r.history.front());
  }
  SUBCASE("budget above n times agents") {
    CHECK_THROWS_AS(optimize_targets_linear(g, theta0, 1, 4, kMaxMean, shift, opts), InvalidArgument);
  }
}

TEST_CASE("nudging policy") {
  const auto shift = ShiftFunction::bounded(1.0, 0.2);
  const std::vector<double> theta{0.3};
  const std::vector<NodeId> targets{0};
  CHECK(nudging_policy(theta, targets, shift, std::vector<double>{1.0}, 0.0) == doctest::Approx(0.5));
  CHECK(nudging_policy(theta, targets, shift, std::vector<double>{-1.0}, 0.0) == doctest::Approx(0.1));
  CHECK(nudging_policy(theta, targets, shift, std::vector<double>{0.0}, 0.77) == 0.77);
  // clipped to the content bounds
  const double c = nudging_policy(std::vector<double>{0.95}, targets, shift, std::vector<double>{1.0}, 0.0);
  CHECK(c == 1.0);
  CHECK_THROWS_AS(nudging_policy(theta, {}, shift, std::vector<double>{1.0}, 0.0), InvalidArgument);

  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> th(4), w(4);
    for (auto& x : th) x = rng.uniform();
    for (auto& x : w) x = rng.uniform(-1.0, 1.0);
    const std::vector<NodeId> all{0, 1, 2, 3};
    const double best = nudging_policy(th, all, shift, w, 0.5);
    CHECK(best >= 0.0);
    CHECK(best <= 1.0);
    auto score = [&](double x) {
      double s = 0;
      for (int i = 0; i < 4; ++i) s += w[i] * shift(x - th[i]);
      return s;
    };
    // no grid point does better
    for (int k = 0; k <= 1000; ++k) CHECK(score(k / 1000.0) <= score(best) + 1e-12);
  }
}

TEST_CASE("run campaign") {
  const auto g = complete_graph(6);
  const OpinionState theta0{0.2, 0.25, 0.3, 0.35, 0.3, 0.2};
  const auto shift = ShiftFunction::bounded(1.0, 0.2);
  SUBCASE("no assignments equals plain integration bit for bit") {
    CampaignPlan empty;
    const auto r = run_campaign(g, theta0, empty, shift, kMaxMean, 3.0);
    const auto tr = integrate(g, theta0, shift, {}, {}, 3.0);
    CHECK(r.trajectory.states == tr.states);
    CampaignPlan silent;
    silent.agents = {{0.0, NudgingContent{}, {0, 1}}};
    silent.budget = 2;
    CHECK(run_campaign(g, theta0, silent, shift, kMaxMean, 3.0).trajectory.states == tr.states);
  }
  SUBCASE("nudging beats a constant extreme on a confidence-bounded population") {
    CampaignPlan nudge, extreme;
    nudge.agents = {{2.0, NudgingContent{}, {0, 1, 2}}};
    extreme.agents = {{2.0, ConstantContent{1.0}, {0, 1, 2}}};
    nudge.budget = extreme.budget = 3;
    const double a = run_campaign(g, theta0, nudge, shift, kMaxMean, 5.0).value;
    const double b = run_campaign(g, theta0, extreme, shift, kMaxMean, 5.0).value;
    CHECK(a > b);
  }
  SUBCASE("nudging content stays within epsilon of a single target") {
    CampaignPlan p;
    p.agents = {{1.0, NudgingContent{}, {0}}};
    p.budget = 1;
    const auto r = run_campaign(Graph(1, {}), {0.3}, p, shift, kMaxMean, 2.0);
    for (std::size_t k = 0; k < r.trajectory.times.size(); ++k) {
      const double c = r.trajectory.agent_content[k][0];
      CHECK(c >= 0.0);
      CHECK(c <= 1.0);
      CHECK(std::abs(c - r.trajectory.states[k][0]) <= 0.2 + 1e-12);
    }
  }
}

TEST_CASE("rollout optimization improves on the uncontrolled run") {
  const auto g = complete_graph(5);
  const OpinionState theta0{0.2, 0.3, 0.25, 0.35, 0.3};
  RolloutCampaignOptions opts;
  opts.rollout_steps = 50;
  const auto r = optimize_targets_rollout(g, theta0, 1, 2, kMaxMean, ShiftFunction::bounded(1.0, 0.2), opts);
  CHECK(r.plan.assignments() <= 2);
  CHECK(r.history.front() <= r.value);
  for (std::size_t k = 1; k < r.history.size(); ++k) CHECK(r.history[k] > r.history[k - 1]);
}
