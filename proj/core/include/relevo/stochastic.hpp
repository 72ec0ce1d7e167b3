#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "relevo/intensity.hpp"
#include "relevo/rng.hpp"
#include "relevo/time.hpp"

namespace relevo {

inline constexpr double kNoHorizon = std::numeric_limits<double>::infinity();

// Waiting time from a fixed origin to the next event of a nonhomogeneous
// Poisson process with the given intensity: cdf(tau) = 1 - exp(-Lambda(s, s+tau)).
// With a constant intensity this is the ordinary exponential distribution.
// Holds a pointer; the intensity must outlive the distribution.
class NonhomExp {
 public:
  NonhomExp(const IntensityFunction& intensity, TimePoint origin)
      : intensity_(&intensity), origin_(origin) {}

  double cdf(Duration tau) const;

  // Inverse-cdf draw: u ~ U(0,1), then the tau solving
  // Lambda(origin, origin+tau) = -ln(1-u). nullopt when the mass available
  // before the horizon falls short (no arrival within the horizon).
  std::optional<Duration> sample(RngStream& rng, Duration horizon = kNoHorizon) const;

  TimePoint origin() const { return origin_; }
  const IntensityFunction& intensity() const { return *intensity_; }

 private:
  const IntensityFunction* intensity_;
  TimePoint origin_;
};

// Distribution of the number of tuples per insertion (or deletion) event.
// Sizes are positive integers; probabilities sum to one.
class BatchDistribution {
 public:
  BatchDistribution();  // point mass at 1
  explicit BatchDistribution(std::vector<std::pair<int, double>> support);

  double mean() const { return mean_; }
  int sample(RngStream& rng) const;
  const std::vector<std::pair<int, double>>& support() const { return support_; }
  bool is_unit() const { return support_.size() == 1 && support_[0].first == 1; }

 private:
  std::vector<std::pair<int, double>> support_;
  std::vector<double> cumulative_;
  double mean_ = 1.0;
};

struct BatchEvent {
  TimePoint time;
  int size;
};

// Event times of a compound Poisson process over (s, f], each with an IID
// batch-size draw. Event times come from successive interarrival samples.
std::vector<BatchEvent> simulate_nhpp(const IntensityFunction& intensity,
                                      const BatchDistribution& batch, TimePoint s, TimePoint f,
                                      RngStream& rng);

// E[number of tuples inserted in (s, f]] = E[batch] * Lambda(s, f).
double expected_insertions(const IntensityFunction& intensity, const BatchDistribution& batch,
                           TimePoint s, TimePoint f);

}  // namespace relevo
