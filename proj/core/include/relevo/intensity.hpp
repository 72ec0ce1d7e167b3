#pragma once

#include <optional>
#include <vector>

#include "relevo/time.hpp"

namespace relevo {

// One polynomial piece of a rate function over the half-open interval
// [start, end). Coefficients are in the local variable u = t - start:
// value(t) = sum_k coeffs[k] * (t - start)^k.
struct Segment {
  double start = 0.0;
  double end = 0.0;
  std::vector<double> coeffs;

  double value_at(double t) const;
  // Exact integral over [a, b], which must lie within [start, end].
  double integral(double a, double b) const;
  // Smallest b in [a, end] with integral(a, b) == mass, or nullopt if the
  // piece holds less mass than that.
  std::optional<double> solve_mass(double a, double mass) const;
  // Lower bound of the value over [start, end] (exact for degree <= 3,
  // endpoint check above that).
  double min_value() const;
};

// Instantaneous event rate over model time, in events/day.
//
// Three shapes cover the models in this library: a constant rate, a
// piecewise-polynomial rate over a bounded window, and a recurrent rate
// repeating a piecewise-polynomial base with a fixed period (the weekly
// profiles used throughout). Rates are validated nonnegative at
// construction; instances are immutable and safe to share across threads.
class IntensityFunction {
 public:
  static constexpr int kDefaultMaxDegree = 3;

  static IntensityFunction constant(double rate);
  // Segments must partition [segments.front().start, segments.back().end)
  // with no gaps or overlaps.
  static IntensityFunction piecewise(std::vector<Segment> segments,
                                     int max_degree = kDefaultMaxDegree);
  // Base segments must cover exactly [0, period_days).
  static IntensityFunction recurrent(double period_days, std::vector<Segment> base,
                                     int max_degree = kDefaultMaxDegree);

  double eval(TimePoint t) const;

  // Exact integral of the rate over [s, e] via per-segment antiderivatives.
  // For recurrent functions, whole periods reuse the precomputed one-period
  // mass, so the cost is independent of e - s. Throws OutOfDomain when
  // [s, e] leaves a non-recurrent piecewise domain.
  double integrate(TimePoint s, TimePoint e) const;

  // Smallest tau >= 0 with integrate(s, s + tau) == target, or nullopt when
  // [s, s + horizon] holds less mass than target. Walks segments and solves
  // within the final one, so the cost matches integrate's.
  std::optional<Duration> invert(TimePoint s, double target, double horizon) const;

  // Pointwise scaling by k >= 0 (NegativeScale otherwise).
  IntensityFunction scaled(double k) const;

  // Pointwise sum. Constants, piecewise functions, and recurrent functions
  // with a common period combine exactly; a recurrent summand restricted to
  // a bounded piecewise domain is unrolled over it. EmptyList /
  // IncompatibleIntensities on violations.
  static IntensityFunction sum(const std::vector<IntensityFunction>& fs);

  // alpha such that *this == alpha * base pointwise, when structurally
  // provable. Used for the proportional-intensity closed form.
  std::optional<double> ratio_to(const IntensityFunction& base) const;

  bool is_constant() const { return kind_ == Kind::kConstant; }
  bool is_recurrent() const { return kind_ == Kind::kRecurrent; }
  bool is_zero() const;
  // Constant rate if this function is a constant, else nullopt.
  std::optional<double> constant_rate() const;
  double period() const { return period_; }
  double period_mass() const { return period_mass_; }
  const std::vector<Segment>& segments() const { return segments_; }

  // Domain of definition; [-inf, +inf] except for plain piecewise functions.
  double domain_start() const;
  double domain_end() const;

  // Ordered points of [s, e] where the active polynomial piece changes,
  // including s and e. Intended for quadrature over products; cost is
  // proportional to the number of pieces in the span.
  std::vector<double> breakpoints(TimePoint s, TimePoint e) const;

  // Coefficients of the polynomial in u = tau - t that equals this function
  // on [t, next breakpoint). Enables exact integrals of products.
  std::vector<double> local_poly(TimePoint t) const;

 private:
  enum class Kind { kConstant, kPiecewise, kRecurrent };

  IntensityFunction() = default;
  void init_cumulative();
  // Integral of the piecewise body from segments_.front().start to t.
  double body_cumulative(double t) const;
  size_t segment_index(double t) const;

  Kind kind_ = Kind::kConstant;
  double rate_ = 0.0;                // kConstant
  std::vector<Segment> segments_;   // kPiecewise body / kRecurrent base
  std::vector<double> cum_;         // prefix masses of segments_
  double period_ = 0.0;             // kRecurrent
  double period_mass_ = 0.0;
};

}  // namespace relevo
