#include "relevo/policy.hpp"

#include <cmath>
#include <functional>

#include "relevo/errors.hpp"

namespace relevo {
namespace {

// Crossings are located far below the documented 1-second resolution so
// that the residue cannot accumulate across hundreds of refreshes.
constexpr Duration kResolution = 1e-9;

// Earliest f in (s, t_end] with trigger(f) >= level, or nullopt. The trigger
// must be nondecreasing in f; that is spot-checked during the search.
std::optional<TimePoint> first_crossing(const std::function<double(TimePoint)>& trigger,
                                        double level, TimePoint s, TimePoint t_end) {
  double lo = s, hi = std::min(s + std::max(kResolution, (t_end - s) / 1024.0), t_end);
  double trig_lo = 0.0;
  // Grow the bracket until the trigger clears the level.
  while (true) {
    const double trig_hi = trigger(hi);
    if (trig_hi < trig_lo - 1e-9 * (1.0 + std::fabs(trig_lo))) {
      throw Error("policy trigger is not monotone");
    }
    if (trig_hi >= level) break;
    if (hi >= t_end) return std::nullopt;
    trig_lo = trig_hi;
    lo = hi;
    hi = std::min(hi + 2.0 * (hi - s) + kResolution, t_end);
  }
  while (hi - lo > kResolution) {
    const double mid = 0.5 * (lo + hi);
    (trigger(mid) >= level ? hi : lo) = mid;
  }
  return hi;
}

}  // namespace

const char* policy_name(const Policy& p) {
  if (std::holds_alternative<UspPolicy>(p)) return "usp";
  if (std::holds_alternative<ThresholdPolicy>(p)) return "threshold";
  return "fa";
}

Duration usp_interval(double lambda_ref, double multiplier) {
  if (!(lambda_ref > 0.0)) throw NonpositiveRate("usp_interval needs a positive rate");
  if (!(multiplier > 0.0)) throw Error("usp_interval needs a positive multiplier");
  return multiplier / lambda_ref;
}

double threshold_from_M(double lambda_ref, double multiplier) {
  if (!(lambda_ref > 0.0)) throw NonpositiveRate("threshold_from_M needs a positive rate");
  return multiplier * multiplier / (2.0 * lambda_ref);
}

double fa_pi_from_M(double multiplier) { return -std::expm1(-multiplier); }

Schedule generate_schedule(const Policy& policy, const ModelSet& ms,
                           const std::string& relation, const CostSpec& cost, TimePoint t0,
                           TimePoint t_end, const AlterationState& fa_state) {
  if (!(t_end > t0)) throw Error("schedule horizon is empty");
  const auto& model = ms.relation(relation);
  Schedule out;
  out.t0 = t0;
  out.t_end = t_end;

  if (const auto* usp = std::get_if<UspPolicy>(&policy)) {
    const double lambda_ref = model.insertion.integrate(t0, t_end) / (t_end - t0);
    const Duration step = usp_interval(lambda_ref, usp->multiplier);
    for (int k = 1; t0 + k * step <= t_end; ++k) out.refreshes.push_back(t0 + k * step);
    return out;
  }

  TimePoint s = t0;
  while (s < t_end) {
    std::optional<TimePoint> next;
    if (const auto* th = std::get_if<ThresholdPolicy>(&policy)) {
      next = first_crossing(
          [&](TimePoint f) { return insertion_obsolescence(ms, relation, cost.g_ins, s, f); },
          th->threshold, s, t_end);
    } else {
      const auto& fa = std::get<FirstAlterationPolicy>(policy);
      const AlterationState state = fa_state.dependent_counts.empty()
                                        ? AlterationState{model.dependent_counts}
                                        : fa_state;
      next = first_crossing(
          [&](TimePoint f) { return first_alteration(ms, relation, state, s, f); }, fa.pi, s,
          t_end);
    }
    if (!next) break;  // trigger can no longer fire before the horizon
    out.refreshes.push_back(*next);
    s = *next;
  }
  return out;
}

ScheduleCost evaluate_schedule(const Schedule& schedule, const CostSpec& spec,
                               const ModelSet& ms, const std::string& relation) {
  ScheduleCost out;
  TimePoint prev = schedule.t0;
  for (const TimePoint b : schedule.refreshes) {
    if (b <= prev || b > schedule.t_end) {
      throw UnorderedSchedule("refresh times must increase within the horizon");
    }
    const double c_u = expected_transcription_cost(ms, relation, spec, prev, b);
    const double c_o = obsolescence(ms, relation, spec, prev, b).total;
    out.transcription += c_u;
    out.obsolescence += c_o;
    out.total += spec.alpha * c_u + (1.0 - spec.alpha) * c_o;
    prev = b;
    ++out.refresh_count;
  }
  if (prev < schedule.t_end) {
    const double c_o = obsolescence(ms, relation, spec, prev, schedule.t_end).total;
    out.obsolescence += c_o;
    out.total += (1.0 - spec.alpha) * c_o;
  }
  return out;
}

ScheduleCost evaluate_schedule_trace(const Schedule& schedule, const CostSpec& spec,
                                     const EventLog& log) {
  if (log.events.empty()) throw EmptyTrace("trace evaluation needs a nonempty event log");
  log.validate();
  ScheduleCost out;
  size_t next_event = 0;
  TimePoint prev = schedule.t0;

  std::vector<TimePoint> bounds = schedule.refreshes;
  const bool trailing = bounds.empty() || bounds.back() < schedule.t_end;
  if (trailing) bounds.push_back(schedule.t_end);

  for (size_t i = 0; i < bounds.size(); ++i) {
    const TimePoint b = bounds[i];
    if (b <= prev || b > schedule.t_end) {
      throw UnorderedSchedule("refresh times must increase within the horizon");
    }
    double obsolescence_here = 0.0;
    double transferred = 0.0;
    while (next_event < log.events.size() && log.events[next_event].time <= b) {
      const Event& e = log.events[next_event];
      if (e.time > prev) {
        transferred += e.count;
        switch (e.op) {
          case EventOp::kInsert:
            obsolescence_here += e.count * spec.g_ins.g(prev, b, e.time);
            break;
          case EventOp::kDelete:
            obsolescence_here += e.count * spec.g_del.g(prev, b, e.time);
            break;
          case EventOp::kModify:
            break;  // counted in the transfer, no realized weight
        }
      }
      ++next_event;
    }
    const bool is_refresh = !(trailing && i + 1 == bounds.size());
    out.obsolescence += obsolescence_here;
    if (is_refresh) {
      const double c_u = spec.setup_c + spec.beta * transferred;
      out.transcription += c_u;
      out.total += spec.alpha * c_u + (1.0 - spec.alpha) * obsolescence_here;
      ++out.refresh_count;
    } else {
      out.total += (1.0 - spec.alpha) * obsolescence_here;
    }
    prev = b;
  }
  return out;
}

}  // namespace relevo
