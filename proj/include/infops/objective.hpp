#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "infops/diffusion.hpp"
#include "infops/hawkes.hpp"
#include "infops/opinion.hpp"

namespace infops {

enum class ObjectiveKind { FinalMean, FinalVariance, Reach, PeakInfection, TotalEvents };
enum class Sense { Maximize, Minimize };

// Effectiveness functional e(.) plus the direction an optimizer pushes it.
struct Objective {
  ObjectiveKind kind = ObjectiveKind::FinalMean;
  Sense sense = Sense::Maximize;

  // Accepts final-mean[-max|-min], final-variance-max, final-variance-min,
  // reach, peak-infection, total-events.
  static Objective parse(std::string_view name);
  std::string name() const;

  bool on_opinions() const { return kind == ObjectiveKind::FinalMean || kind == ObjectiveKind::FinalVariance; }
  // Larger is better for the optimizer.
  double score(double value) const { return sense == Sense::Maximize ? value : -value; }

  bool operator==(const Objective&) const = default;
};

// d score / d theta_i at the given state: +-1/n for the mean and
// +-2 (theta_i - mean) / n for the variance.
std::vector<double> objective_gradient(const Objective& objective, std::span<const double> theta);

// Raw functional value (not sign-adjusted). Each overload accepts only the
// objective kinds that read its artifact and throws InvalidArgument otherwise.
double evaluate(const Objective& objective, std::span<const double> final_opinions);
double evaluate(const Objective& objective, const OpinionTrajectory& trajectory);
double evaluate(const Objective& objective, const Cascade& cascade);  // reach, peak-infection
double evaluate(const Objective& objective, const EventLog& log);     // total-events
double evaluate(const Objective& objective, std::span<const SirPoint> series);  // peak-infection

}  // namespace infops
