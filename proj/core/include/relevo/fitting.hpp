#pragma once

#include <array>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "relevo/intensity.hpp"
#include "relevo/stochastic.hpp"
#include "relevo/time.hpp"

namespace relevo {

enum class EventOp : char { kInsert = 'i', kDelete = 'd', kModify = 'm' };

struct Event {
  TimePoint time = 0.0;
  int count = 1;
  EventOp op = EventOp::kInsert;
};

// Timestamped event log with nondecreasing times.
struct EventLog {
  std::vector<Event> events;
  std::string source;

  void validate() const;  // monotone times, positive counts
  EventLog filtered(EventOp op) const;
  size_t total_count(EventOp op) const;
};

// Greedy left-to-right clustering: an event extends the current cluster when
// it has the same op and follows the previous arrival by less than `window`.
// The cluster keeps the first arrival's timestamp and the summed count.
// Idempotent for a fixed window.
EventLog batch_events(const EventLog& log, Duration window);

// 1 / mean interarrival time, events per day.
double fit_homogeneous(const EventLog& log);

// Weekly segmentation: blocks of (weekday set, start hour, end hour) that
// partition the week. A block may cover several weekdays; its rate is then
// pooled across them.
struct SegmentationBlock {
  std::array<bool, 7> days{};  // Monday = 0
  double start_hours = 0.0;
  double end_hours = 24.0;
};

struct SegmentationSpec {
  std::vector<SegmentationBlock> blocks;

  void validate() const;  // blocks partition [0, one week)
  // Index of the block containing the week phase of t; -1 when uncovered.
  int block_of(TimePoint t) const;
  // Weekly 0/1 indicator of one block, for exact active-duration integrals.
  IntensityFunction indicator(size_t block) const;
  // Weekly rate profile from per-block levels.
  IntensityFunction to_intensity(const std::vector<double>& rates) const;
};

// Per-block rate = events in block / active block duration over the log
// span, as a recurrent weekly intensity.
IntensityFunction fit_rpc(const EventLog& log, const SegmentationSpec& seg);

// Empirical batch-size frequencies.
BatchDistribution fit_batch_distribution(const EventLog& log);

// u_n = Lambda(t_{n-1}, t_n): unit-exponential under a correct model.
std::vector<double> rescale_interarrivals(const EventLog& log,
                                          const IntensityFunction& intensity);

struct KsResult {
  double d_n = 0.0;
  size_t n = 0;
  std::map<double, double> thresholds;  // alpha -> X(alpha)/sqrt(n)
  std::map<double, bool> reject_at;

  bool rejected(double alpha) const { return reject_at.at(alpha); }
};

// Asymptotic two-sided X(alpha) factors used throughout.
inline constexpr std::array<std::pair<double, double>, 4> kKsFactors = {
    {{0.1, 1.22}, {0.05, 1.36}, {0.01, 1.63}, {0.005, 1.73}}};

// Two-sided Kolmogorov-Smirnov statistic of the sample against a cdf,
// with the asymptotic thresholds above (used descriptively even at small n).
KsResult ks_test(std::vector<double> sample, const std::function<double(double)>& cdf);

// Runs of consecutive size-1 events before each multi-tuple event (the
// trailing censored run is dropped).
std::vector<int> extract_runs(const EventLog& log);

// KS of the run lengths against Geometric(p) on {0,1,...} with
// p = fraction of size-1 events: tests that batch sizes are IID.
KsResult runs_test(const EventLog& log);

// cdf of the unit exponential, the reference for rescaled interarrivals.
double exp1_cdf(double x);

}  // namespace relevo
