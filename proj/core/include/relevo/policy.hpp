#pragma once

#include <string>
#include <variant>
#include <vector>

#include "relevo/cost.hpp"
#include "relevo/evolution.hpp"
#include "relevo/fitting.hpp"

namespace relevo {

// Refresh every M / lambda_ref days, ignoring the model shape.
struct UspPolicy {
  double multiplier = 1.0;  // M
};

// Refresh when expected insertion obsolescence since the last sync exceeds
// the threshold.
struct ThresholdPolicy {
  double threshold = 0.0;  // Pi
};

// Refresh when the probability of any change since the last sync exceeds pi.
struct FirstAlterationPolicy {
  double pi = 0.5;
};

using Policy = std::variant<UspPolicy, ThresholdPolicy, FirstAlterationPolicy>;

const char* policy_name(const Policy& p);

// M / lambda days between refreshes.
Duration usp_interval(double lambda_ref, double multiplier);

// Pi = M^2 / (2 lambda): the threshold whose schedule matches USP(M) on a
// homogeneous model with unit weights.
double threshold_from_M(double lambda_ref, double multiplier);

// pi = 1 - e^-M: with insertions only and a homogeneous rate, Z(s, s+M/lambda)
// equals M, so this calibrates the first-alteration policy to USP(M).
double fa_pi_from_M(double multiplier);

struct Schedule {
  std::vector<TimePoint> refreshes;  // strictly increasing, within (t0, t_end]
  TimePoint t0 = 0.0;
  TimePoint t_end = 0.0;
};

// Deterministic schedule: after a refresh at s, the next refresh is the
// earliest time the policy trigger fires, located by bisection on the
// monotone trigger to 1-second resolution. A trigger that cannot fire before
// t_end ends the schedule early. The first-alteration policy freezes the
// model's time-s state (histograms, cardinality, dependent counts); pass
// fa_state to override the dependent counts stored on the model.
Schedule generate_schedule(const Policy& policy, const ModelSet& ms,
                           const std::string& relation, const CostSpec& cost, TimePoint t0,
                           TimePoint t_end, const AlterationState& fa_state = {});

struct ScheduleCost {
  double total = 0.0;          // alpha-weighted, per the total-cost formula
  double transcription = 0.0;  // unweighted sum of per-refresh C_u
  double obsolescence = 0.0;   // unweighted sum of per-interval C_o
  int refresh_count = 0;
};

// Expected cost of a schedule under the model.
ScheduleCost evaluate_schedule(const Schedule& schedule, const CostSpec& spec,
                               const ModelSet& ms, const std::string& relation);

// Realized cost on a concrete event log: g applied at the actual event
// times, counts taken from the log. Modify events enter the transferred
// tuple counts; their obsolescence needs value-level data a log does not
// carry, so it is not included.
ScheduleCost evaluate_schedule_trace(const Schedule& schedule, const CostSpec& spec,
                                     const EventLog& log);

}  // namespace relevo
