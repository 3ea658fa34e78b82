#include "infops/objective.hpp"

#include <algorithm>

#include "infops/error.hpp"

namespace infops {

Objective Objective::parse(std::string_view name) {
  if (name == "final-mean" || name == "final-mean-max") return {ObjectiveKind::FinalMean, Sense::Maximize};
  if (name == "final-mean-min") return {ObjectiveKind::FinalMean, Sense::Minimize};
  if (name == "final-variance-max") return {ObjectiveKind::FinalVariance, Sense::Maximize};
  if (name == "final-variance-min") return {ObjectiveKind::FinalVariance, Sense::Minimize};
  if (name == "reach") return {ObjectiveKind::Reach, Sense::Maximize};
  if (name == "peak-infection") return {ObjectiveKind::PeakInfection, Sense::Maximize};
  if (name == "total-events") return {ObjectiveKind::TotalEvents, Sense::Maximize};
  throw InvalidArgument("unknown objective '" + std::string(name) + "'");
}

std::string Objective::name() const {
  const bool max = sense == Sense::Maximize;
  switch (kind) {
    case ObjectiveKind::FinalMean: return max ? "final-mean-max" : "final-mean-min";
    case ObjectiveKind::FinalVariance: return max ? "final-variance-max" : "final-variance-min";
    case ObjectiveKind::Reach: return max ? "reach" : "reach-min";
    case ObjectiveKind::PeakInfection: return max ? "peak-infection" : "peak-infection-min";
    case ObjectiveKind::TotalEvents: return max ? "total-events" : "total-events-min";
  }
  return "unknown";
}

std::vector<double> objective_gradient(const Objective& objective, std::span<const double> theta) {
  if (!objective.on_opinions()) throw InvalidArgument("objective '" + objective.name() + "' is not an opinion functional");
  const std::size_t n = theta.size();
  if (n == 0) throw InvalidArgument("gradient of an empty state");
  const double sign = objective.sense == Sense::Maximize ? 1.0 : -1.0;
  const double inv_n = 1.0 / static_cast<double>(n);
  std::vector<double> w(n, sign * inv_n);
  if (objective.kind == ObjectiveKind::FinalVariance) {
    double mean = 0.0;
    for (double x : theta) mean += x;
    mean *= inv_n;
    for (std::size_t i = 0; i < n; ++i) w[i] = sign * 2.0 * (theta[i] - mean) * inv_n;
  }
  return w;
}

namespace {

[[noreturn]] void mismatch(const Objective& objective, const char* artifact) {
  throw InvalidArgument("objective '" + objective.name() + "' cannot be evaluated on " + artifact);
}

}  // namespace

double evaluate(const Objective& objective, std::span<const double> final_opinions) {
  if (final_opinions.empty()) throw InvalidArgument("empty opinion state");
  const auto stats = opinion_statistics(final_opinions);
  switch (objective.kind) {
    case ObjectiveKind::FinalMean: return stats.mean;
    case ObjectiveKind::FinalVariance: return stats.variance;
    default: mismatch(objective, "an opinion state");
  }
}

double evaluate(const Objective& objective, const OpinionTrajectory& trajectory) {
  if (trajectory.states.empty()) throw InvalidArgument("empty trajectory");
  return evaluate(objective, std::span<const double>(trajectory.final_state()));
}

double evaluate(const Objective& objective, const Cascade& cascade) {
  switch (objective.kind) {
    case ObjectiveKind::Reach: return static_cast<double>(cascade.reach());
    case ObjectiveKind::PeakInfection: return static_cast<double>(cascade.peak_infected());
    default: mismatch(objective, "a cascade");
  }
}

double evaluate(const Objective& objective, const EventLog& log) {
  if (objective.kind != ObjectiveKind::TotalEvents) mismatch(objective, "an event log");
  return static_cast<double>(log.events.size());
}

double evaluate(const Objective& objective, std::span<const SirPoint> series) {
  if (objective.kind != ObjectiveKind::PeakInfection) mismatch(objective, "a compartment series");
  if (series.empty()) throw InvalidArgument("empty compartment series");
  double peak = series.front().i;
  for (const auto& p : series) peak = std::max(peak, p.i);
  return peak;
}

}  // namespace infops
