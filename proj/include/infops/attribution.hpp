#pragma once

#include <cstdint>
#include <functional>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "infops/campaign.hpp"
#include "infops/objective.hpp"

namespace infops {

// Coalition as a bitmask over actor indices (bit i = actor i).
using Coalition = std::uint64_t;
using CoalitionValue = std::function<double(Coalition)>;

constexpr std::size_t kMaxExactActors = 12;
constexpr std::size_t kMaxActors = 63;

struct ShapleyResult {
  std::vector<double> values;
  std::vector<double> std_error;  // zero in exact mode
  double grand = 0.0;             // e(N)
  double empty = 0.0;             // e(empty set)
  double lift() const { return grand - empty; }
};

// Enumerates all 2^n coalitions once; each marginal gets weight
// |S|! (n - |S| - 1)! / n!.
ShapleyResult shapley_exact(std::size_t actors, const CoalitionValue& value);

// Mean marginal contribution over `samples` uniform permutations; the
// per-actor standard error is the sample std of the marginals / sqrt(samples).
ShapleyResult shapley_mc(std::size_t actors, const CoalitionValue& value, std::size_t samples, std::uint64_t seed);

// Memo table in front of a coalition evaluator. Thread-safe.
class MemoizedGame {
 public:
  explicit MemoizedGame(CoalitionValue inner, bool enabled = true);

  double operator()(Coalition s) const;
  std::size_t evaluations() const { return evaluations_; }
  CoalitionValue as_function() const;

 private:
  CoalitionValue inner_;
  bool enabled_;
  mutable std::mutex mutex_;
  mutable std::unordered_map<Coalition, double> cache_;
  mutable std::size_t evaluations_ = 0;
};

enum class ShapleyMode { Exact, MonteCarlo };

struct AttributionOptions {
  ShapleyMode mode = ShapleyMode::Exact;
  std::size_t samples = 1000;
  std::uint64_t seed = 0;
  bool memoize = true;
  CampaignRunOptions run{};
};

struct Attribution {
  std::vector<std::string> actors;
  std::vector<double> shapley;
  std::vector<double> std_error;
  double lift = 0.0;

  std::string to_json() const;
};

// Actors are the plan's agents; agents outside a coalition run at rate 0.
// The coalition value is the raw objective functional at T.
Attribution attribute_campaign(const Graph& g, const OpinionState& theta0, const CampaignPlan& plan,
                               const ShiftFunction& shift, const Objective& objective, double T,
                               const AttributionOptions& options = {});

}  // namespace infops
