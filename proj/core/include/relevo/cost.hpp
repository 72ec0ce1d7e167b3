#pragma once

#include <map>
#include <string>
#include <variant>
#include <vector>

#include "relevo/evolution.hpp"
#include "relevo/matrix.hpp"
#include "relevo/relation.hpp"

namespace relevo {

// Importance a user assigns to an event at time t, accumulated to the
// evaluation point: g(s, f, t) = flat + integral of a over [t, f]. a is
// typically a piecewise-constant weekly profile (work hours vs off hours);
// the flat term expresses a per-event weight independent of timing.
struct ObsolescenceWeight {
  IntensityFunction a = IntensityFunction::constant(1.0);
  double flat = 0.0;

  double g(TimePoint s, TimePoint f, TimePoint t) const;
  ObsolescenceWeight scaled(double k) const { return {a.scaled(k), flat * k}; }
  static ObsolescenceWeight zero() { return {IntensityFunction::constant(0.0), 0.0}; }
};

// Weekly importance profile: weight a1 inside the listed blocks, a2
// elsewhere. Blocks are (weekday, start hour, end hour).
struct WeeklyBlock {
  int dow = 0;
  double start_hours = 0.0;
  double end_hours = 24.0;
};
IntensityFunction weekly_weight(const std::vector<WeeklyBlock>& blocks, double a1, double a2);

// Modification cost metrics. Cost matrices need c[u][u] = 0; the
// squared-error metric needs numeric state labels (or a random-walk model).
struct SquaredErrorMetric {
  double k = 1.0;
  // Random walks only: use the legacy second-moment form
  // Gamma*(sigma2 + 2*Gamma*delta^2) instead of the compound-Poisson one
  // (they differ when delta != 0 and Gamma != 1).
  bool legacy_walk_moment = false;
};
struct CostMatrixMetric {
  Matrix costs;
};
// Every value change costs 1: the cost-matrix special case that needs no
// explicit matrix (and so no up-front domain size).
struct UnitCostMetric {};
using ModificationMetric = std::variant<SquaredErrorMetric, CostMatrixMetric, UnitCostMetric>;

// Unit off-diagonal costs as an explicit matrix.
CostMatrixMetric unit_cost_matrix(size_t states);

struct CostSpec {
  double alpha = 0.0;   // weight of transcription vs obsolescence in the total
  double setup_c = 0.0; // fixed transcription setup cost
  double beta = 0.0;    // per-tuple transfer cost
  ObsolescenceWeight g_ins;
  ObsolescenceWeight g_del;
  std::map<std::string, ModificationMetric> metrics;  // per attribute
};

// Expected obsolescence from insertions in (s, f]: only tuples still
// present at f count, so
// E[batch] * integral of lambda(t) p(t, f) g_ins(s, f, t) dt.
// Without deletions the survival factor drops and each piecewise segment
// product integrates exactly.
double insertion_obsolescence(const ModelSet& ms, const std::string& relation,
                              const ObsolescenceWeight& g_ins, TimePoint s, TimePoint f);

// Expected obsolescence from deletions of time-s tuples in (s, f]:
// |R(s)| * integral of mu~(t) exp(-M~(s, t)) g_del(s, f, t) dt, the exact
// expectation of g at the realized deletion times. For flat weights this is
// |R(s)| (1 - e^-M~) g.
double deletion_obsolescence(const ModelSet& ms, const std::string& relation,
                             const ObsolescenceWeight& g_del, TimePoint s, TimePoint f);

// Expected obsolescence from modifications of surviving tuples, summed over
// the attributes listed in `metrics`.
double modification_obsolescence(const ModelSet& ms, const std::string& relation,
                                 const std::map<std::string, ModificationMetric>& metrics,
                                 TimePoint s, TimePoint f);

struct ObsolescenceBreakdown {
  double insertion = 0.0;
  double deletion = 0.0;
  double modification = 0.0;
  double total = 0.0;
};
ObsolescenceBreakdown obsolescence(const ModelSet& ms, const std::string& relation,
                                   const CostSpec& spec, TimePoint s, TimePoint f);

// c + beta * (inserted surviving + modified surviving + deleted).
double transcription_cost(double setup_c, double beta, double inserted_surviving,
                          double modified_surviving, double deleted);

// Expectation form, fed by the evolution-module means.
double expected_transcription_cost(const ModelSet& ms, const std::string& relation,
                                   const CostSpec& spec, TimePoint s, TimePoint f);

// Total cost of a refresh schedule through time t:
// sum over refreshes of alpha*C_u + (1-alpha)*C_o, plus the trailing
// partial-interval obsolescence. Refresh times must be strictly increasing
// within (t0, t]. Per-interval expectations reuse the time-s snapshot
// (cardinality and histograms), which is exact for insertion-only models
// and a stationarity approximation otherwise.
double total_cost(const std::vector<TimePoint>& refreshes, const CostSpec& spec,
                  const ModelSet& ms, const std::string& relation, TimePoint t0, TimePoint t);

}  // namespace relevo
