#include <doctest.h>

#include <cmath>

#include "infops/error.hpp"
#include "infops/hawkes.hpp"
#include "infops/random.hpp"

using namespace infops;

namespace {

// Exact finite-horizon mean count of a univariate exponential Hawkes process
// started empty: E N(T) = mu T / (1 - n) - mu n (1 - e^{-(beta - alpha) T}) / ((1 - n)(beta - alpha)).
double finite_mean(double mu, double alpha, double beta, double T) {
  const double n = alpha / beta;
  return mu * T / (1 - n) - mu * n * (1 - std::exp(-(beta - alpha) * T)) / ((1 - n) * (beta - alpha));
}

}  // namespace

TEST_CASE("stability") {
  const Graph single(1, {});
  CHECK(hawkes_branching_ratio(single, {0.1, 0.5, 1.0}) == doctest::Approx(0.5));
  CHECK_THROWS_AS(check_hawkes_stability(single, {0.1, 1.0, 1.0}), NumericalError);
  // complete K4: rho = 3, ratio alpha * 4 / beta
  CHECK(hawkes_branching_ratio(complete_graph(4), {0.1, 0.2, 1.0}) == doctest::Approx(0.8));
  CHECK_THROWS_AS(simulate_hawkes(complete_graph(4), {0.1, 0.3, 1.0}, 10, 1), NumericalError);
  CHECK_THROWS_AS(check_hawkes_stability(single, {-0.1, 0.0, 1.0}), InvalidArgument);
}

TEST_CASE("poisson limit and intensity floor") {
  const auto g = complete_graph(3);
  double sum = 0, sq = 0;
  const int runs = 1000;
  for (int r = 0; r < runs; ++r) {
    const auto log = simulate_hawkes(g, {0.5, 0.0, 1.0}, 10, derive_seed(4, r));
    const double c = static_cast<double>(log.events.size());
    sum += c;
    sq += c * c;
  }
  const double mean = sum / runs;
  const double se = std::sqrt((sq / runs - mean * mean) / (runs - 1));
  CHECK(std::abs(mean - 3 * 0.5 * 10) <= 3 * se);

  const auto log = simulate_hawkes(g, {0.2, 0.15, 1.0}, 50, 3);
  REQUIRE(log.intensity_at_event.size() == log.events.size());
  for (std::size_t k = 0; k < log.events.size(); ++k) {
    CHECK(log.intensity_at_event[k] >= 0.2);
    if (k) CHECK(log.events[k].time > log.events[k - 1].time);
    CHECK(log.events[k].time <= 50.0);
  }
}

TEST_CASE("self-excitation mean matches the finite-horizon formula") {
  const Graph single(1, {});
  const double mu = 0.5, alpha = 0.6, beta = 1.0, T = 50;
  double sum = 0, sq = 0;
  const int runs = 2000;
  for (int r = 0; r < runs; ++r) {
    const double c = static_cast<double>(simulate_hawkes(single, {mu, alpha, beta}, T, derive_seed(8, r)).events.size());
    sum += c;
    sq += c * c;
  }
  const double mean = sum / runs;
  const double se = std::sqrt((sq / runs - mean * mean) / (runs - 1));
  CHECK(std::abs(mean - finite_mean(mu, alpha, beta, T)) <= 3 * se);
}

TEST_CASE("bit reproducible per seed") {
  const auto g = complete_graph(3);
  const auto a = simulate_hawkes(g, {0.3, 0.2, 1.0}, 30, 77);
  const auto b = simulate_hawkes(g, {0.3, 0.2, 1.0}, 30, 77);
  REQUIRE(a.events.size() == b.events.size());
  for (std::size_t k = 0; k < a.events.size(); ++k) {
    CHECK(a.events[k].time == b.events[k].time);
    CHECK(a.events[k].node == b.events[k].node);
  }
}

TEST_CASE("activity summary") {
  CHECK(hawkes_total_events(EventLog{}).count == 0);
  CHECK(hawkes_total_events(EventLog{}).peak_rate == 0.0);
  EventLog log;
  log.horizon = 20;
  for (int k = 0; k < 5; ++k) log.events.push_back({1.0 + 2.0 * k, 0});   // sparse
  for (int k = 0; k < 5; ++k) log.events.push_back({12.0 + 0.1 * k, 0});  // burst
  std::sort(log.events.begin(), log.events.end(), [](auto& x, auto& y) { return x.time < y.time; });
  const auto s = hawkes_total_events(log, 1.0);
  CHECK(s.count == 10);
  CHECK(s.peak_rate == doctest::Approx(5.0));
  CHECK(s.peak_start == doctest::Approx(12.0));
}
