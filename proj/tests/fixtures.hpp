#pragma once

// Shared model fixtures: the weekly posting-rate profile used throughout
// (workday blocks plus flat weekend days) and small model-set builders.

#include <array>
#include <vector>

#include "relevo/fitting.hpp"
#include "relevo/relation.hpp"

namespace fixtures {

using namespace relevo;

// Weekly recurrent piecewise-constant profile: five three-hour off-hour
// blocks plus a work-hours block on each weekday, and one flat block per
// weekend day. Rates are events/day within each block.
struct WeeklyRates {
  // Workday blocks [0,3), [3,6), [6,9), [9,18), [18,21), [21,24) hours.
  std::array<double, 6> workday;
  double saturday;
  double sunday;
};

inline IntensityFunction weekly_profile(const WeeklyRates& r) {
  const double h = 1.0 / 24.0;
  std::vector<Segment> base;
  for (int day = 0; day < 5; ++day) {
    const double d0 = day;
    base.push_back({d0 + 0 * h, d0 + 3 * h, {r.workday[0]}});
    base.push_back({d0 + 3 * h, d0 + 6 * h, {r.workday[1]}});
    base.push_back({d0 + 6 * h, d0 + 9 * h, {r.workday[2]}});
    base.push_back({d0 + 9 * h, d0 + 18 * h, {r.workday[3]}});
    base.push_back({d0 + 18 * h, d0 + 21 * h, {r.workday[4]}});
    base.push_back({d0 + 21 * h, d0 + 24 * h, {r.workday[5]}});
  }
  base.push_back({5.0, 6.0, {r.saturday}});
  base.push_back({6.0, 7.0, {r.sunday}});
  return IntensityFunction::recurrent(7.0, std::move(base));
}

// The fitted weekly profile of the posting data set (events/day).
inline IntensityFunction posting_rate_profile() {
  return weekly_profile({{2.40, 5.96, 6.04, 7.50, 3.03, 2.41}, 1.50, 1.15});
}

// The compound (batched) variant of the same profile.
inline IntensityFunction posting_rate_profile_compound() {
  return weekly_profile({{2.40, 5.96, 5.59, 7.11, 3.03, 2.33}, 1.45, 1.15});
}

// Matching segmentation: 6 pooled weekday blocks + Saturday + Sunday.
inline SegmentationSpec posting_segmentation() {
  SegmentationSpec seg;
  const std::array<bool, 7> weekdays = {true, true, true, true, true, false, false};
  for (const auto& [lo, hi] :
       std::vector<std::pair<double, double>>{{0, 3}, {3, 6}, {6, 9}, {9, 18}, {18, 21}, {21, 24}}) {
    seg.blocks.push_back({weekdays, lo, hi});
  }
  seg.blocks.push_back({{false, false, false, false, false, true, false}, 0.0, 24.0});
  seg.blocks.push_back({{false, false, false, false, false, false, true}, 0.0, 24.0});
  return seg;
}

// Observed posting batch sizes: mostly singletons.
inline BatchDistribution posting_batches() {
  return BatchDistribution({{1, 536.0 / 557.0}, {2, 19.0 / 557.0}, {3, 2.0 / 557.0}});
}

// One-relation model set with constant rates.
inline ModelSet single_relation(double lambda, double mu, double cardinality,
                                TimePoint reference_time = 0.0) {
  ModelSet ms;
  RelationModel r;
  r.name = "R";
  r.insertion = IntensityFunction::constant(lambda);
  r.deletion = IntensityFunction::constant(mu);
  r.cardinality = cardinality;
  ms.relations.emplace("R", std::move(r));
  ms.graph.add_relation("R");
  ms.reference_time = reference_time;
  return ms;
}

}  // namespace fixtures
