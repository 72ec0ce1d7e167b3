#include "relevo/stochastic.hpp"

#include <algorithm>
#include <cmath>

#include "relevo/errors.hpp"

namespace relevo {

double NonhomExp::cdf(Duration tau) const {
  if (tau < 0.0) throw NegativeDuration("cdf: negative waiting time");
  return -std::expm1(-intensity_->integrate(origin_, origin_ + tau));
}

std::optional<Duration> NonhomExp::sample(RngStream& rng, Duration horizon) const {
  const double target = -std::log(rng.uniform_pos());
  return intensity_->invert(origin_, target, horizon);
}

BatchDistribution::BatchDistribution() : support_{{1, 1.0}}, cumulative_{1.0}, mean_(1.0) {}

BatchDistribution::BatchDistribution(std::vector<std::pair<int, double>> support)
    : support_(std::move(support)) {
  if (support_.empty()) throw EmptyList("batch distribution needs at least one size");
  std::sort(support_.begin(), support_.end());
  double total = 0.0;
  mean_ = 0.0;
  for (const auto& [size, p] : support_) {
    if (size < 1) throw Error("batch sizes must be positive integers");
    if (p < 0.0) throw Error("batch probabilities must be nonnegative");
    total += p;
    mean_ += size * p;
    cumulative_.push_back(total);
  }
  if (std::fabs(total - 1.0) > 1e-12) {
    throw Error("batch probabilities must sum to 1");
  }
  cumulative_.back() = 1.0;
}

int BatchDistribution::sample(RngStream& rng) const {
  if (support_.size() == 1) return support_[0].first;
  const double u = rng.uniform01();
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  const size_t i = std::min(static_cast<size_t>(it - cumulative_.begin()),
                            support_.size() - 1);
  return support_[i].first;
}

std::vector<BatchEvent> simulate_nhpp(const IntensityFunction& intensity,
                                      const BatchDistribution& batch, TimePoint s, TimePoint f,
                                      RngStream& rng) {
  if (f < s) throw Error("simulate_nhpp: horizon precedes start");
  std::vector<BatchEvent> events;
  TimePoint t = s;
  while (true) {
    const auto tau = NonhomExp(intensity, t).sample(rng, f - t);
    if (!tau) break;
    t += *tau;
    if (t > f) break;
    events.push_back({t, batch.sample(rng)});
  }
  return events;
}

double expected_insertions(const IntensityFunction& intensity, const BatchDistribution& batch,
                           TimePoint s, TimePoint f) {
  return batch.mean() * intensity.integrate(s, f);
}

}  // namespace relevo
