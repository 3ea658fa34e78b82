// One PASS/FAIL line per acceptance criterion; exit status is the failure count.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

#include "infops/attribution.hpp"
#include "infops/campaign.hpp"
#include "infops/centrality.hpp"
#include "infops/community.hpp"
#include "infops/diffusion.hpp"
#include "infops/hawkes.hpp"
#include "infops/moderation.hpp"
#include "infops/opinion.hpp"
#include "infops/pipeline.hpp"
#include "oracles.hpp"

using namespace infops;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Check {
  bool ok = true;
  std::string first_failure;

  void expect(bool cond, const std::string& what) {
    if (!cond && ok) first_failure = what;
    ok = ok && cond;
  }
};

bool close_rel(double a, double b, double tol) { return std::abs(a - b) <= tol * std::max(1.0, std::abs(b)); }

// Uniformly chosen distinct ordered pairs.
Graph random_digraph(std::size_t n, std::size_t m, Rng& rng) {
  std::vector<Edge> all;
  for (NodeId i = 0; i < n; ++i)
    for (NodeId j = 0; j < n; ++j)
      if (i != j) all.push_back({i, j, 1.0});
  rng.shuffle(all.begin(), all.end());
  all.resize(std::min(m, all.size()));
  return Graph(n, all);
}

bool connected(const Graph& g) {
  std::size_t c = 0;
  connected_components(g, &c);
  return c == 1;
}

Check criterion1() {
  Check c;
  const auto t0 = Clock::now();
  std::vector<Graph> family;
  for (std::size_t n = 2; n <= 5; ++n)
    for (auto& g : oracle::all_undirected_graphs(n)) family.push_back(std::move(g));
  Rng rng(101);
  for (std::size_t n = 6; n <= 8; ++n)
    for (int k = 0; k < 30; ++k) family.push_back(oracle::random_undirected(n, 0.35, rng));

  for (const auto& g : family) {
    const auto b = betweenness(g).values, bo = oracle::betweenness(g);
    const auto cl = closeness(g).values, co = oracle::closeness(g);
    for (NodeId v = 0; v < g.node_count(); ++v) {
      c.expect(close_rel(b[v], bo[v], 1e-9), "betweenness");
      c.expect(close_rel(cl[v], co[v], 1e-9), "closeness");
    }
    const double rho = spectral_radius(binary_adjacency(g));
    const double alpha = rho > 0 ? 0.8 / rho : 0.5;
    const auto bc = bonacich(g, alpha, 1.0).values, bco = oracle::bonacich(g, alpha, 1.0);
    for (NodeId v = 0; v < g.node_count(); ++v) c.expect(close_rel(bc[v], bco[v], 1e-9), "bonacich");
  }
  for (std::size_t n = 2; n <= 8; ++n)
    for (int k = 0; k < 20; ++k) {
      const auto t = oracle::random_tree(n, rng);
      std::vector<NodeId> all(n);
      std::iota(all.begin(), all.end(), 0);
      const auto r = rumor_centrality(t, all).values;
      const auto ro = oracle::rumor(t, all);
      for (std::size_t i = 0; i < n; ++i) c.expect(std::abs(r[i] - ro[i]) <= 1e-9, "rumor");
    }
  const double secs = seconds_since(t0);
  c.expect(secs < 10.0, "runtime " + std::to_string(secs) + " s");
  return c;
}

Check criterion2() {
  Check c;
  const auto t0 = Clock::now();
  int good = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto pg = generate_planted_partition(3, 15, 0.9, 0.02, seed);
    const auto sel = select_k(pg.graph, 2, 6, seed);
    good += sel.k == 3 && normalized_mutual_information(sel.partition, pg.truth) >= 0.95;
  }
  c.expect(good >= 18, "planted recovery " + std::to_string(good) + "/20");
  Rng rng(202);
  for (int k = 0; k < 50; ++k) {
    const std::size_t n = 6 + rng.below(15);
    const auto g = oracle::random_undirected(n, 1.5 / static_cast<double>(n), rng);
    std::size_t comps = 0;
    connected_components(g, &comps);
    const auto emb = spectral_embedding(g, n);
    std::size_t zeros = 0;
    for (double ev : emb.eigenvalues) zeros += std::abs(ev) < 1e-8;
    c.expect(zeros == comps, "zero eigenvalue multiplicity");
  }
  const double secs = seconds_since(t0);
  c.expect(secs < 30.0, "runtime " + std::to_string(secs) + " s");
  return c;
}

Check criterion3() {
  Check c;
  std::vector<std::pair<NodeId, NodeId>> pairs;
  for (NodeId base : {0u, 4u})
    for (NodeId i = 0; i < 4; ++i)
      for (NodeId j = i + 1; j < 4; ++j) pairs.emplace_back(base + i, base + j);
  c.expect(modularity(make_undirected(8, pairs), Partition::from_labels({0, 0, 0, 0, 1, 1, 1, 1})) == 0.5,
           "two cliques Q");
  Rng rng(303);
  int done = 0;
  while (done < 20) {
    const auto g = oracle::random_undirected(8, 0.4, rng);
    if (g.edge_count() == 0) continue;
    ++done;
    const double q = modularity(g, greedy_modularity(g));
    c.expect(q >= oracle::best_modularity(g) - 0.02, "greedy modularity gap");
  }
  return c;
}

Check criterion4() {
  Check c;
  Rng rng(404);
  for (int k = 0; k < 40; ++k) {
    const std::size_t n = 3 + rng.below(4);
    const auto g = random_digraph(n, 1 + rng.below(6), rng);
    const double p = rng.uniform(0.1, 0.9);
    const auto t = oracle::live_edge_table(g, std::vector<double>(g.edge_count(), p));
    const std::vector<NodeId> seeds{static_cast<NodeId>(rng.below(n))};
    const auto e = expected_spread(g, DiffusionParams::independent_cascade(g, p), seeds, 5000, 1000 + k);
    const double exact = t.spread(1u << seeds[0]);
    c.expect(std::abs(e.mean - exact) <= 3 * e.std_error + 1e-12, "IC vs live-edge");
  }
  for (const auto& pt : simulate_sir_ode(3.0, 0.7, 0.995, 0.005, 0.0, 40.0, 0.01))
    c.expect(std::abs(pt.s + pt.i + pt.r - 1.0) <= 1e-9, "SIR conservation");
  const double beta = 0.8, i0 = 0.02;
  for (const auto& pt : simulate_sir_ode(beta, 0.0, 1.0 - i0, i0, 0.0, 15.0, 0.001)) {
    const double ex = std::exp(beta * pt.t);
    c.expect(std::abs(pt.i - i0 * ex / (1 - i0 + i0 * ex)) <= 1e-6, "SI logistic");
  }
  return c;
}

Check criterion5() {
  Check c;
  const auto t0 = Clock::now();
  Rng rng(505);
  for (int k = 0; k < 50; ++k) {
    const std::size_t n = 4 + rng.below(7);
    const auto g = random_digraph(n, 6 + rng.below(11), rng);
    const double p = k % 2 ? 0.5 : 0.2;
    const std::size_t budget = 1 + rng.below(3);
    const auto sel =
        greedy_seed_selection(g, DiffusionParams::independent_cascade(g, p), budget, 1000, derive_seed(5, k));
    const auto t = oracle::live_edge_table(g, std::vector<double>(g.edge_count(), p));
    std::uint32_t mask = 0;
    for (NodeId s : sel.seeds) mask |= 1u << s;
    const double opt = oracle::optimal_spread(t, n, budget);
    c.expect(t.spread(mask) >= (1.0 - 1.0 / std::exp(1.0)) * opt, "greedy below (1-1/e) OPT");
  }
  const double secs = seconds_since(t0);
  c.expect(secs < 300.0, "runtime " + std::to_string(secs) + " s");
  return c;
}

Check criterion6() {
  Check c;
  // two nodes, asymmetric rates: gap decays at omega (l01 + l10), weighted mean conserved
  {
    const double l01 = 0.6, l10 = 1.1, omega = 0.9;
    const Graph g(2, {{0, 1, l01}, {1, 0, l10}});
    const OpinionState th0{0.85, 0.15};
    const auto tr = integrate(g, th0, ShiftFunction::linear(omega), {}, {}, 3.0);
    const double m0 = (l01 * th0[0] + l10 * th0[1]) / (l01 + l10);
    for (std::size_t k = 0; k < tr.times.size(); ++k) {
      const auto& s = tr.states[k];
      c.expect(std::abs((s[0] - s[1]) - 0.7 * std::exp(-omega * (l01 + l10) * tr.times[k])) <= 1e-6,
               "two-node gap");
      c.expect(std::abs((l01 * s[0] + l10 * s[1]) / (l01 + l10) - m0) <= 1e-6, "two-node weighted mean");
    }
  }
  // RK4 order
  {
    const Graph g(2, {{0, 1, 1.0}, {1, 0, 1.0}});
    const double exact = 0.8 * std::exp(-2.0 * 2.0);
    auto err = [&](double h) {
      const auto tr = integrate(g, {0.9, 0.1}, ShiftFunction::linear(1.0), {}, {}, 2.0, {h, 1, 1, false});
      return std::abs((tr.final_state()[0] - tr.final_state()[1]) - exact);
    };
    const double ratio = err(0.1) / err(0.05);
    c.expect(ratio >= 12.0 && ratio <= 20.0, "RK4 ratio " + std::to_string(ratio));
  }
  // bounded confidence freeze: every gap above epsilon
  {
    const OpinionState th0{0.05, 0.3, 0.55, 0.8};
    const auto tr = integrate(complete_graph(4), th0, ShiftFunction::bounded(1.0, 0.2), {}, {}, 50.0);
    for (const auto& s : tr.states) c.expect(s == th0, "bounded freeze");
  }
  // consensus and mean conservation on connected symmetric fixtures
  Rng rng(606);
  int fixtures = 0;
  while (fixtures < 5) {
    const auto g = oracle::random_undirected(20, 0.2, rng);
    if (!connected(g)) continue;
    ++fixtures;
    OpinionState th0(20);
    for (auto& x : th0) x = rng.uniform();
    const auto tr = integrate(g, th0, ShiftFunction::linear(1.0), {}, {}, 100.0, {0.01, 100, 10, true});
    c.expect(opinion_statistics(tr.final_state()).variance <= 1e-6, "DeGroot consensus");
    const auto bc = integrate(g, th0, ShiftFunction::bounded(1.0, 0.3), {}, {}, 10.0, {0.01, 10, 10, true});
    const double m0 = opinion_statistics(th0).mean;
    for (std::size_t k = 1; k < bc.times.size(); ++k)
      c.expect(std::abs(opinion_statistics(bc.states[k]).mean - m0) <= 1e-8 * bc.times[k], "mean drift");
  }
  return c;
}

Check criterion7() {
  Check c;
  int wins = 0;
  const auto shift = ShiftFunction::bounded(1.0, 0.2);
  const auto objective = Objective::parse("final-mean-max");
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Graph g = generate_erdos_renyi(20, 0.2, seed);
    for (std::uint64_t bump = 1000; !connected(g); ++bump) g = generate_erdos_renyi(20, 0.2, seed + bump);
    Rng rng(derive_seed(700, seed));
    OpinionState th0(20);
    for (auto& x : th0) x = rng.uniform(0.2, 0.4);
    std::vector<NodeId> nodes(20);
    std::iota(nodes.begin(), nodes.end(), 0);
    rng.shuffle(nodes.begin(), nodes.end());
    std::vector<NodeId> targets(nodes.begin(), nodes.begin() + 5);
    std::sort(targets.begin(), targets.end());
    CampaignPlan nudge, extreme;
    nudge.agents = {{1.0, NudgingContent{}, targets}};
    extreme.agents = {{1.0, ConstantContent{1.0}, targets}};
    nudge.budget = extreme.budget = targets.size();
    const double a = run_campaign(g, th0, nudge, shift, objective, 10.0).value;
    const double b = run_campaign(g, th0, extreme, shift, objective, 10.0).value;
    wins += a > b;
  }
  c.expect(wins == 10, "nudging wins " + std::to_string(wins) + "/10");
  return c;
}

Check criterion8() {
  Check c;
  Rng rng(808);
  const std::vector<Objective> objectives{Objective::parse("final-mean-max"), Objective::parse("final-mean-min"),
                                          Objective::parse("final-variance-min"),
                                          Objective::parse("final-variance-max")};
  for (int k = 0; k < 200; ++k) {
    const std::size_t n = 2 + rng.below(4);
    const auto g = random_digraph(n, 1 + rng.below(8), rng);
    OpinionState th(n);
    for (auto& x : th) x = rng.uniform();
    const auto shift = k % 3 ? ShiftFunction::bounded(1.0, rng.uniform(0.1, 1.0)) : ShiftFunction::linear(1.0);
    const auto& obj = objectives[k % objectives.size()];
    const double budget = k % 5 == 0 ? std::floor(rng.uniform(0.0, 4.0)) : rng.uniform(0.0, 4.0);
    const auto p = shadowban_step(g, th, shift, obj, budget);
    const auto s = edge_contributions(g, th, shift, obj);
    c.expect(std::abs(p.rate - oracle::best_vertex_rate(s, budget)) <= 1e-12 * std::max(1.0, std::abs(p.rate)),
             "vertex enumeration");
    double used = 0;
    for (double d : p.visibility) {
      c.expect(d >= 0.0 && d <= 1.0, "visibility range");
      used += 1.0 - d;
    }
    c.expect(used <= budget + 1e-12, "budget");
  }
  const auto g = generate_planted_partition(2, 6, 0.8, 0.1, 8).graph;
  OpinionState th0(g.node_count());
  for (auto& x : th0) x = rng.uniform();
  const auto shift = ShiftFunction::bounded(1.0, 0.4);
  const auto m = run_moderated(g, th0, shift, objectives[2], 0.0, 5.0);
  const auto tr = integrate(g, th0, shift, {}, {}, 5.0);
  c.expect(m.trajectory.states == tr.states && m.trajectory.times == tr.times, "B = 0 bit identity");
  return c;
}

Check criterion9() {
  Check c;
  {
    const auto g = complete_graph(4);
    const double mu = 0.3, T = 20;
    double sum = 0, sq = 0;
    const int runs = 1000;
    for (int r = 0; r < runs; ++r) {
      const double k = static_cast<double>(simulate_hawkes(g, {mu, 0.0, 1.0}, T, derive_seed(900, r)).events.size());
      sum += k;
      sq += k * k;
    }
    const double mean = sum / runs, se = std::sqrt((sq / runs - mean * mean) / (runs - 1));
    c.expect(std::abs(mean - 4 * mu * T) <= 3 * se, "Poisson mean");
  }
  {
    const Graph one(1, {});
    const double mu = 0.5, alpha = 0.5, beta = 1.0, T = 1000;
    double sum = 0, sq = 0;
    const int runs = 300;
    for (int r = 0; r < runs; ++r) {
      const double k =
          static_cast<double>(simulate_hawkes(one, {mu, alpha, beta}, T, derive_seed(901, r)).events.size());
      sum += k;
      sq += k * k;
    }
    const double mean = sum / runs, se = std::sqrt((sq / runs - mean * mean) / (runs - 1));
    c.expect(std::abs(mean - mu * T / (1 - alpha / beta)) <= 3 * se, "self-excitation mean");
  }
  {
    const auto g = complete_graph(3);
    const auto a = simulate_hawkes(g, {0.2, 0.2, 1.0}, 100, 42), b = simulate_hawkes(g, {0.2, 0.2, 1.0}, 100, 42);
    bool same = a.events.size() == b.events.size();
    for (std::size_t k = 0; same && k < a.events.size(); ++k)
      same = a.events[k].time == b.events[k].time && a.events[k].node == b.events[k].node &&
             a.intensity_at_event[k] == b.intensity_at_event[k];
    c.expect(same, "bit reproducibility");
  }
  return c;
}

// Integer-valued game on n players where players 0 and 1 are interchangeable
// and player n-1 is a dummy.
CoalitionValue planted_game(std::size_t n, Rng& rng) {
  const std::size_t free_bits = n - 1;
  std::vector<double> table(std::size_t{1} << free_bits);
  for (auto& v : table) v = static_cast<double>(static_cast<int>(rng.below(41)) - 20);
  return [table, free_bits](Coalition s) {
    s &= (Coalition{1} << free_bits) - 1;  // drop the dummy
    if ((s & 3) == 2) s ^= 3;              // {1} -> {0}
    return table[s];
  };
}

Check criterion10() {
  Check c;
  Rng rng(1010);
  for (int k = 0; k < 100; ++k) {
    const std::size_t n = 3 + rng.below(6);
    const auto game = planted_game(n, rng);
    const auto r = shapley_exact(n, game);
    double sum = 0;
    for (double v : r.values) sum += v;
    c.expect(std::abs(sum - r.lift()) <= 1e-9, "efficiency");
    c.expect(r.values[0] == r.values[1], "symmetry");
    c.expect(r.values[n - 1] == 0.0, "dummy");
  }
  for (int k = 0; k < 5; ++k) {
    std::vector<double> table(256);
    for (auto& v : table) v = rng.uniform(-1.0, 1.0);
    const CoalitionValue game = [&table](Coalition s) { return table[s]; };
    const auto exact = shapley_exact(8, game);
    const auto mc = shapley_mc(8, game, 5000, derive_seed(1011, k));
    for (std::size_t i = 0; i < 8; ++i)
      c.expect(std::abs(mc.values[i] - exact.values[i]) <= 3 * mc.std_error[i], "MC within 3 stderr");
    const auto small = shapley_mc(8, game, 2500, derive_seed(1012, k));
    const auto big = shapley_mc(8, game, 10000, derive_seed(1013, k));
    for (std::size_t i = 0; i < 8; ++i) {
      const double ratio = big.std_error[i] / small.std_error[i];
      c.expect(ratio >= 0.4 && ratio <= 0.6, "stderr ratio " + std::to_string(ratio));
    }
  }
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Check criterion11() {
  Check c;
  auto config = RunConfig::load(std::string(INFOPS_FIXTURE_DIR) + "/pipeline_planted.json");
  std::string manifests[2];
  for (int k = 0; k < 2; ++k) {
    const auto dir = fs::temp_directory_path() / ("infops_acceptance_" + std::to_string(k));
    fs::remove_all(dir);
    config.set("output_dir", dir.string());
    const auto r = run(config);
    c.expect(r.exit_code == kExitOk, "pipeline exit " + std::to_string(r.exit_code) + " " + r.error);
    manifests[k] = slurp(dir / "manifest.json");
  }
  c.expect(!manifests[0].empty() && manifests[0] == manifests[1], "manifests differ");
  return c;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Check()>>> criteria{
      {"C1 centrality oracles", criterion1},     {"C2 spectral pipeline", criterion2},
      {"C3 modularity", criterion3},             {"C4 diffusion correctness", criterion4},
      {"C5 greedy guarantee", criterion5},       {"C6 opinion dynamics", criterion6},
      {"C7 nudging beats extremism", criterion7}, {"C8 shadow-ban optimality", criterion8},
      {"C9 hawkes", criterion9},                 {"C10 shapley", criterion10},
      {"C11 determinism", criterion11},
  };
  int failures = 0;
  for (const auto& [name, fn] : criteria) {
    const auto t0 = Clock::now();
    Check c;
    try {
      c = fn();
    } catch (const std::exception& e) {
      c.ok = false;
      c.first_failure = std::string("exception: ") + e.what();
    }
    std::printf("%s %-30s %7.2fs%s%s\n", c.ok ? "PASS" : "FAIL", name, seconds_since(t0),
                c.ok ? "" : "  ", c.first_failure.c_str());
    std::fflush(stdout);
    failures += !c.ok;
  }
  return failures;
}
