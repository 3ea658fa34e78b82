#include "infops/attribution.hpp"

#include <bit>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "infops/error.hpp"
#include "infops/random.hpp"

namespace infops {

ShapleyResult shapley_exact(std::size_t actors, const CoalitionValue& value) {
  if (actors == 0) throw InvalidArgument("attribution needs at least one actor");
  if (actors > kMaxExactActors) {
    throw InvalidArgument("exact Shapley supports at most " + std::to_string(kMaxExactActors) + " actors, got " +
                          std::to_string(actors));
  }
  const std::size_t n = actors;
  const Coalition full = (Coalition{1} << n) - 1;
  std::vector<double> v(full + 1);
  for (Coalition s = 0; s <= full; ++s) v[s] = value(s);

  // weight[k] = k! (n-k-1)! / n!
  std::vector<double> weight(n);
  for (std::size_t k = 0; k < n; ++k) {
    long double w = 1.0L / static_cast<long double>(n);
    for (std::size_t j = 1; j <= k; ++j) w *= static_cast<long double>(j) / static_cast<long double>(n - j);
    weight[k] = static_cast<double>(w);
  }

  ShapleyResult result;
  result.values.assign(n, 0.0);
  result.std_error.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const Coalition bit = Coalition{1} << i;
    // Sum marginals per coalition size first, then weight.
    std::vector<double> by_size(n, 0.0);
    for (Coalition s = 0; s <= full; ++s) {
      if (s & bit) continue;
      by_size[static_cast<std::size_t>(std::popcount(s))] += v[s | bit] - v[s];
    }
    double c = 0.0;
    for (std::size_t k = 0; k < n; ++k) c += weight[k] * by_size[k];
    result.values[i] = c;
  }
  result.grand = v[full];
  result.empty = v[0];
  return result;
}

ShapleyResult shapley_mc(std::size_t actors, const CoalitionValue& value, std::size_t samples, std::uint64_t seed) {
  if (actors == 0) throw InvalidArgument("attribution needs at least one actor");
  if (actors > kMaxActors) throw InvalidArgument("too many actors for a 64-bit coalition mask");
  if (samples == 0) throw InvalidArgument("samples must be >= 1");
  const std::size_t n = actors;

  std::vector<double> mean(n, 0.0), m2(n, 0.0);
  std::vector<std::size_t> order(n);
  Rng rng(seed);
  ShapleyResult result;
  result.empty = value(0);
  for (std::size_t k = 0; k < samples; ++k) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(order.begin(), order.end());
    Coalition s = 0;
    double prev = result.empty;
    for (std::size_t i : order) {
      s |= Coalition{1} << i;
      const double cur = value(s);
      const double x = cur - prev;
      prev = cur;
      const double delta = x - mean[i];
      mean[i] += delta / static_cast<double>(k + 1);
      m2[i] += delta * (x - mean[i]);
    }
    result.grand = prev;
  }
  result.values = mean;
  result.std_error.assign(n, 0.0);
  if (samples > 1) {
    const double r = static_cast<double>(samples);
    for (std::size_t i = 0; i < n; ++i) result.std_error[i] = std::sqrt(m2[i] / (r - 1.0) / r);
  }
  return result;
}

MemoizedGame::MemoizedGame(CoalitionValue inner, bool enabled) : inner_(std::move(inner)), enabled_(enabled) {}

double MemoizedGame::operator()(Coalition s) const {
  if (enabled_) {
    std::lock_guard lock(mutex_);
    if (auto it = cache_.find(s); it != cache_.end()) return it->second;
  }
  const double v = inner_(s);
  std::lock_guard lock(mutex_);
  ++evaluations_;
  if (enabled_) cache_[s] = v;
  return v;
}

CoalitionValue MemoizedGame::as_function() const {
  return [this](Coalition s) { return (*this)(s); };
}

std::string Attribution::to_json() const {
  nlohmann::json doc;
  doc["actors"] = actors;
  doc["shapley"] = shapley;
  doc["stderr"] = std_error;
  doc["lift"] = lift;
  return doc.dump(2);
}

Attribution attribute_campaign(const Graph& g, const OpinionState& theta0, const CampaignPlan& plan,
                               const ShiftFunction& shift, const Objective& objective, double T,
                               const AttributionOptions& options) {
  plan.validate(g);
  const std::size_t n = plan.agents.size();
  if (n == 0) throw InvalidArgument("attribution needs at least one campaign agent");
  if (n > kMaxActors) throw InvalidArgument("too many campaign agents for attribution");

  MemoizedGame game(
      [&](Coalition s) {
        CampaignPlan silenced = plan;
        for (std::size_t a = 0; a < n; ++a) {
          if (!(s & (Coalition{1} << a))) silenced.agents[a].rate = 0.0;
        }
        return run_campaign(g, theta0, silenced, shift, objective, T, options.run).value;
      },
      options.memoize);

  const auto result = options.mode == ShapleyMode::Exact ? shapley_exact(n, game.as_function())
                                                         : shapley_mc(n, game.as_function(), options.samples,
                                                                      options.seed);
  Attribution out;
  for (std::size_t a = 0; a < n; ++a) out.actors.push_back("agent-" + std::to_string(a));
  out.shapley = result.values;
  out.std_error = result.std_error;
  out.lift = result.lift();
  return out;
}

}  // namespace infops
