#include "relevo/fitting.hpp"

#include <algorithm>
#include <cmath>

#include "relevo/errors.hpp"

namespace relevo {

void EventLog::validate() const {
  TimePoint last = -std::numeric_limits<double>::infinity();
  for (const auto& e : events) {
    if (e.time < last) throw Error("event log times must be nondecreasing");
    if (e.count < 1) throw Error("event counts must be positive");
    last = e.time;
  }
}

EventLog EventLog::filtered(EventOp op) const {
  EventLog out;
  out.source = source;
  for (const auto& e : events) {
    if (e.op == op) out.events.push_back(e);
  }
  return out;
}

size_t EventLog::total_count(EventOp op) const {
  size_t n = 0;
  for (const auto& e : events) {
    if (e.op == op) n += static_cast<size_t>(e.count);
  }
  return n;
}

EventLog batch_events(const EventLog& log, Duration window) {
  if (window <= 0.0) throw Error("batching window must be positive");
  log.validate();
  EventLog out;
  out.source = log.source;
  TimePoint last = 0.0;  // most recent arrival of the open cluster
  for (const auto& e : log.events) {
    if (!out.events.empty() && e.op == out.events.back().op && e.time - last < window) {
      out.events.back().count += e.count;
      last = e.time;
      continue;
    }
    out.events.push_back(e);
    last = e.time;
  }
  return out;
}

double fit_homogeneous(const EventLog& log) {
  if (log.events.size() < 2) throw TooFewEvents("need at least two events to fit a rate");
  const double span = log.events.back().time - log.events.front().time;
  if (span <= 0.0) throw TooFewEvents("event log spans zero time");
  return static_cast<double>(log.events.size() - 1) / span;
}

void SegmentationSpec::validate() const {
  if (blocks.empty()) throw ConfigError("segmentation needs at least one block");
  double covered = 0.0;
  for (const auto& b : blocks) {
    if (b.end_hours <= b.start_hours || b.start_hours < 0.0 || b.end_hours > 24.0) {
      throw ConfigError("segmentation block hours out of range");
    }
    int days = 0;
    for (bool d : b.days) days += d ? 1 : 0;
    if (days == 0) throw ConfigError("segmentation block covers no weekday");
    covered += days * (b.end_hours - b.start_hours) / 24.0;
  }
  if (std::fabs(covered - 7.0) > 1e-9) {
    throw ConfigError("segmentation blocks must partition the week");
  }
  for (int dow = 0; dow < 7; ++dow) {
    for (double h : {0.25, 5.9, 11.5, 17.9, 23.5}) {
      int owners = 0;
      for (const auto& b : blocks) {
        if (b.days[dow] && h >= b.start_hours && h < b.end_hours) ++owners;
      }
      if (owners > 1) throw ConfigError("segmentation blocks overlap");
    }
  }
}

int SegmentationSpec::block_of(TimePoint t) const {
  const double phase = cycle_phase(t, kWeekDays);
  const int dow = std::min(6, static_cast<int>(phase));
  const double hour = (phase - dow) * 24.0;
  for (size_t i = 0; i < blocks.size(); ++i) {
    const auto& b = blocks[i];
    if (b.days[dow] && hour >= b.start_hours && hour < b.end_hours) {
      return static_cast<int>(i);
    }
  }
  return -1;
}

IntensityFunction SegmentationSpec::indicator(size_t block) const {
  return to_intensity([&] {
    std::vector<double> rates(blocks.size(), 0.0);
    rates.at(block) = 1.0;
    return rates;
  }());
}

IntensityFunction SegmentationSpec::to_intensity(const std::vector<double>& rates) const {
  if (rates.size() != blocks.size()) {
    throw DimensionMismatch("one rate per segmentation block required");
  }
  std::vector<double> bounds = {0.0, 7.0};
  for (const auto& b : blocks) {
    for (int dow = 0; dow < 7; ++dow) {
      if (!b.days[dow]) continue;
      bounds.push_back(dow + b.start_hours / 24.0);
      bounds.push_back(dow + b.end_hours / 24.0);
    }
  }
  std::sort(bounds.begin(), bounds.end());
  bounds.erase(std::unique(bounds.begin(), bounds.end(),
                           [](double x, double y) { return std::fabs(x - y) < 1e-12; }),
               bounds.end());
  std::vector<Segment> segs;
  for (size_t i = 0; i + 1 < bounds.size(); ++i) {
    const double mid = 0.5 * (bounds[i] + bounds[i + 1]);
    const int owner = block_of(mid);
    if (owner < 0) throw ConfigError("segmentation leaves part of the week uncovered");
    segs.push_back({bounds[i], bounds[i + 1], {rates[static_cast<size_t>(owner)]}});
  }
  return IntensityFunction::recurrent(kWeekDays, std::move(segs));
}

IntensityFunction fit_rpc(const EventLog& log, const SegmentationSpec& seg) {
  seg.validate();
  if (log.events.size() < 2) throw TooFewEvents("need at least two events to fit rates");
  const TimePoint lo = log.events.front().time;
  const TimePoint hi = log.events.back().time;

  std::vector<double> counts(seg.blocks.size(), 0.0);
  for (const auto& e : log.events) {
    const int b = seg.block_of(e.time);
    if (b >= 0) counts[static_cast<size_t>(b)] += 1.0;  // events, not tuples
  }
  std::vector<double> rates(seg.blocks.size(), 0.0);
  for (size_t b = 0; b < seg.blocks.size(); ++b) {
    const double active = seg.indicator(b).integrate(lo, hi);
    if (active <= 0.0) {
      if (counts[b] > 0.0) throw EmptyBlockDuration("events in a block with zero duration");
      rates[b] = 0.0;
      continue;
    }
    rates[b] = counts[b] / active;
  }
  return seg.to_intensity(rates);
}

BatchDistribution fit_batch_distribution(const EventLog& log) {
  std::map<int, double> freq;
  double total = 0.0;
  for (const auto& e : log.events) {
    freq[e.count] += 1.0;
    total += 1.0;
  }
  if (total == 0.0) throw TooFewEvents("empty log");
  std::vector<std::pair<int, double>> support;
  for (auto& [size, count] : freq) support.emplace_back(size, count / total);
  // Guard the sum-to-one invariant against accumulated roundoff.
  double sum = 0.0;
  for (auto& [size, p] : support) sum += p;
  for (auto& [size, p] : support) p /= sum;
  return BatchDistribution(std::move(support));
}

std::vector<double> rescale_interarrivals(const EventLog& log,
                                          const IntensityFunction& intensity) {
  if (log.events.size() < 2) throw TooFewEvents("need at least two events to rescale");
  std::vector<double> u;
  u.reserve(log.events.size() - 1);
  for (size_t i = 1; i < log.events.size(); ++i) {
    u.push_back(intensity.integrate(log.events[i - 1].time, log.events[i].time));
  }
  return u;
}

KsResult ks_test(std::vector<double> sample, const std::function<double(double)>& cdf) {
  if (sample.empty()) throw EmptySample("KS test needs a nonempty sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (size_t k = 0; k < sample.size(); ++k) {
    const double fx = cdf(sample[k]);
    d = std::max(d, std::max(std::fabs((k + 1) / n - fx), std::fabs(k / n - fx)));
  }
  KsResult r;
  r.d_n = d;
  r.n = sample.size();
  for (const auto& [alpha, factor] : kKsFactors) {
    const double threshold = factor / std::sqrt(n);
    r.thresholds[alpha] = threshold;
    r.reject_at[alpha] = d > threshold;
  }
  return r;
}

std::vector<int> extract_runs(const EventLog& log) {
  std::vector<int> runs;
  int current = 0;
  for (const auto& e : log.events) {
    if (e.count == 1) {
      ++current;
    } else {
      runs.push_back(current);
      current = 0;
    }
  }
  return runs;  // the trailing run has no terminating multi-event
}

KsResult runs_test(const EventLog& log) {
  const std::vector<int> runs = extract_runs(log);
  if (runs.empty()) throw NoMultiEvents("runs test needs at least one multi-tuple event");
  size_t singles = 0;
  for (const auto& e : log.events) singles += e.count == 1 ? 1 : 0;
  const double p = static_cast<double>(singles) / static_cast<double>(log.events.size());

  std::vector<double> sample(runs.begin(), runs.end());
  // Run length ~ Geometric on {0,1,...}: F(k) = 1 - p^(k+1).
  return ks_test(std::move(sample), [p](double x) {
    if (x < 0.0) return 0.0;
    return 1.0 - std::pow(p, std::floor(x) + 1.0);
  });
}

double exp1_cdf(double x) { return x <= 0.0 ? 0.0 : -std::expm1(-x); }

}  // namespace relevo
