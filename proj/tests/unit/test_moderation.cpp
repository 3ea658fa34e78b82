#include <doctest.h>

#include <cmath>

#include "infops/error.hpp"
#include "infops/moderation.hpp"
#include "infops/random.hpp"
#include "oracles.hpp"

using namespace infops;

namespace {

const Objective kMaxMean = Objective::parse("final-mean-max");
const Objective kMinVar = Objective::parse("final-variance-min");

// Two 4-cliques around 0.15 and 0.85 joined by two bridges.
Graph two_clusters() {
  std::vector<std::pair<NodeId, NodeId>> pairs;
  for (NodeId base : {0u, 4u})
    for (NodeId i = 0; i < 4; ++i)
      for (NodeId j = i + 1; j < 4; ++j) pairs.emplace_back(base + i, base + j);
  pairs.emplace_back(0, 4);
  pairs.emplace_back(3, 7);
  return make_undirected(8, pairs);
}

const OpinionState kClusters{0.1, 0.15, 0.2, 0.15, 0.8, 0.85, 0.9, 0.85};

}  // namespace

TEST_CASE("edge contributions") {
  const Graph g(2, {{0, 1, 2.0}, {1, 0, 1.0}});
  const std::vector<double> theta{0.8, 0.2};
  const auto s = edge_contributions(g, theta, ShiftFunction::linear(1.0), kMaxMean);
  // w = 1/2; edge 0->1 pulls node 1 up, edge 1->0 pulls node 0 down
  CHECK(s[0] == doctest::Approx(0.5 * 2.0 * 0.6));
  CHECK(s[1] == doctest::Approx(0.5 * 1.0 * -0.6));
  StubbornSet st;
  st.pinned[0] = 0.8;
  CHECK(edge_contributions(g, theta, ShiftFunction::linear(1.0), kMaxMean, st)[1] == 0.0);
}

TEST_CASE("shadowban step") {
  const auto g = complete_graph(3);
  const std::vector<double> theta{0.1, 0.5, 0.9};
  const auto shift = ShiftFunction::linear(1.0);
  SUBCASE("zero budget keeps everything visible") {
    const auto p = shadowban_step(g, theta, shift, kMaxMean, 0.0);
    CHECK(p.visibility == std::vector<double>(g.edge_count(), 1.0));
    CHECK(p.suppression == 0.0);
  }
  SUBCASE("large budget suppresses exactly the harmful edges") {
    const auto p = shadowban_step(g, theta, shift, kMaxMean, 100.0);
    const auto s = edge_contributions(g, theta, shift, kMaxMean);
    for (std::size_t e = 0; e < s.size(); ++e) CHECK(p.visibility[e] == (s[e] < 0 ? 0.0 : 1.0));
  }
  SUBCASE("fractional marginal edge and budget respected") {
    const auto p = shadowban_step(g, theta, shift, kMaxMean, 1.5);
    CHECK(p.suppression == doctest::Approx(1.5));
    int fractional = 0;
    for (double d : p.visibility) {
      CHECK(d >= 0.0);
      CHECK(d <= 1.0);
      fractional += d > 0.0 && d < 1.0;
    }
    CHECK(fractional == 1);
  }
  SUBCASE("matches vertex enumeration on random small fixtures") {
    Rng rng(17);
    for (int trial = 0; trial < 40; ++trial) {
      const auto h = oracle::random_directed(4, 8, 0.5, rng);
      if (h.edge_count() == 0) continue;
      std::vector<double> th(4);
      for (auto& x : th) x = rng.uniform();
      const double budget = rng.uniform(0.0, 3.0);
      const auto obj = trial % 2 ? kMaxMean : kMinVar;
      const auto p = shadowban_step(h, th, shift, obj, budget);
      const auto s = edge_contributions(h, th, shift, obj);
      CHECK(p.rate == doctest::Approx(oracle::best_vertex_rate(s, budget)).epsilon(1e-12));
      CHECK(p.suppression <= budget + 1e-12);
      for (std::size_t e = 0; e < s.size(); ++e)
        if (s[e] >= 0) CHECK(p.visibility[e] == 1.0);
    }
  }
  CHECK_THROWS_AS(shadowban_step(g, theta, shift, kMaxMean, -1.0), InvalidArgument);
}

TEST_CASE("moderated runs") {
  const auto g = two_clusters();
  const auto shift = ShiftFunction::linear(1.0);
  SUBCASE("zero budget equals unmoderated integration") {
    const auto m = run_moderated(g, kClusters, shift, kMinVar, 0.0, 2.0);
    const auto tr = integrate(g, kClusters, shift, {}, {}, 2.0);
    CHECK(m.trajectory.states == tr.states);
  }
  SUBCASE("variance minimization does not end above the unmoderated run") {
    const auto m = run_moderated(g, kClusters, shift, kMinVar, 4.0, 3.0);
    const auto tr = integrate(g, kClusters, shift, {}, {}, 3.0);
    CHECK(m.value <= opinion_statistics(tr.final_state()).variance + 1e-12);
  }
  SUBCASE("every edge harmful and fully suppressible: frozen") {
    // maximize the mean while a low node pulls a high one down
    const Graph h(2, {{0, 1, 1.0}});
    const auto m = run_moderated(h, {0.1, 0.9}, shift, kMaxMean, 5.0, 4.0);
    CHECK(m.trajectory.final_state() == OpinionState{0.1, 0.9});
  }
  SUBCASE("more budget never hurts here") {
    double prev = -1.0;
    for (double b : {0.0, 1.0, 2.0, 4.0, 8.0}) {
      const double v = run_moderated(g, kClusters, shift, kMinVar, b, 3.0).value;
      if (prev >= 0) CHECK(v <= prev + 1e-12);
      prev = v;
    }
  }
  SUBCASE("policy csv") {
    const auto m = run_moderated(g, kClusters, shift, kMinVar, 1.0, 0.2);
    const auto csv = format_policy_csv(g, m, true);
    CHECK(csv.rfind("step,time,src,dst,d\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + static_cast<long>(g.edge_count()));
  }
}

TEST_CASE("hawkes damping") {
  const auto g = complete_graph(3);
  const HawkesParams p{0.2, 0.2, 1.0};
  SUBCASE("damp = 1 reproduces the baseline") {
    const auto r = hawkes_damping(g, p, 1.0, 20, 50, 3);
    CHECK(r.baseline_counts == r.damped_counts);
  }
  SUBCASE("damp = 0 is the Poisson baseline") {
    const auto r = hawkes_damping(g, p, 0.0, 20, 400, 3);
    CHECK(std::abs(r.damped_mean - 3 * 0.2 * 20) <= 3 * r.damped_std_error);
  }
  SUBCASE("single node reduction ratio") {
    const Graph one(1, {});
    const HawkesParams q{1.0, 0.5, 1.0};
    const double T = 400;
    const auto r = hawkes_damping(one, q, 0.4, T, 400, 9);
    // stationary means mu T / (1 - n) on a long horizon
    const double base = T / (1 - 0.5), damped = T / (1 - 0.2);
    CHECK(std::abs(r.baseline_mean - base) <= 3 * r.baseline_std_error + 0.01 * base);
    CHECK(std::abs(r.damped_mean - damped) <= 3 * r.damped_std_error + 0.01 * damped);
    const double ratio = r.damped_mean / r.baseline_mean;
    CHECK(ratio == doctest::Approx((1 - 0.5) / (1 - 0.2)).epsilon(0.05));
  }
  SUBCASE("unstable or bad factor") {
    CHECK_THROWS_AS(hawkes_damping(g, {0.2, 0.5, 1.0}, 0.1, 10, 5, 1), NumericalError);
    CHECK_THROWS_AS(hawkes_damping(g, p, 1.5, 10, 5, 1), InvalidArgument);
  }
}
