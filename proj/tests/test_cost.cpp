#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "relevo/cost.hpp"
#include "relevo/errors.hpp"

using namespace relevo;

namespace {

ObsolescenceWeight unit_weight() { return {IntensityFunction::constant(1.0), 0.0}; }

ObsolescenceWeight flat_weight(double w) { return {IntensityFunction::constant(0.0), w}; }

}  // namespace

TEST_CASE("insertion obsolescence closed forms") {
  // Homogeneous rate, unit weight: lambda (f-s)^2 / 2.
  const auto ms = fixtures::single_relation(4.57, 0.0, 0.0);
  CHECK(insertion_obsolescence(ms, "R", unit_weight(), 0.0, 1.0) == doctest::Approx(2.285));
  CHECK(insertion_obsolescence(ms, "R", unit_weight(), 3.0, 3.0) == 0.0);

  const auto ms2 = fixtures::single_relation(2.0, 0.0, 0.0);
  CHECK(insertion_obsolescence(ms2, "R", unit_weight(), 0.0, 3.0) ==
        doctest::Approx(0.5 * 2.0 * 9.0));

  // Monotone nondecreasing in f.
  double last = 0.0;
  for (int i = 1; i <= 20; ++i) {
    const double v = insertion_obsolescence(ms, "R", unit_weight(), 0.0, 0.2 * i);
    CHECK(v >= last);
    last = v;
  }
}

TEST_CASE("insertion obsolescence with weekly weights matches quadrature") {
  ModelSet ms = fixtures::single_relation(0.0, 0.0, 0.0);
  ms.relations.at("R").insertion = fixtures::posting_rate_profile();
  ms.relations.at("R").batch = fixtures::posting_batches();

  const IntensityFunction a =
      weekly_weight({{0, 9.0, 18.0}, {1, 9.0, 18.0}, {2, 9.0, 18.0}, {3, 9.0, 18.0},
                     {4, 9.0, 18.0}},
                    4.0, 1.0);
  const ObsolescenceWeight g{a, 0.0};

  const auto& lambda = ms.relations.at("R").insertion;
  const double s = 0.3, f = 8.1;
  const double expected = fixtures::posting_batches().mean() *
                          oracle::integrate(
                              [&](double t) {
                                return lambda.eval(t) *
                                       oracle::integrate_intensity(a, t, f, 1e-10);
                              },
                              s, f, 1e-8);
  CHECK(insertion_obsolescence(ms, "R", g, s, f) == doctest::Approx(expected).epsilon(1e-6));

  // Doubling the weight doubles the cost exactly.
  CHECK(insertion_obsolescence(ms, "R", g.scaled(2.0), s, f) ==
        doctest::Approx(2.0 * insertion_obsolescence(ms, "R", g, s, f)).epsilon(1e-12));
}

TEST_CASE("deletion obsolescence") {
  const auto ms = fixtures::single_relation(0.0, std::log(2.0), 100.0);

  // Zero weight: the page-monitor choice (deleted entries carry no cost).
  CHECK(deletion_obsolescence(ms, "R", ObsolescenceWeight::zero(), 0.0, 1.0) == 0.0);

  // Flat terminal weight 1: expected deleted tuples, |R|(1 - e^-M).
  CHECK(deletion_obsolescence(ms, "R", flat_weight(1.0), 0.0, 1.0) ==
        doctest::Approx(50.0).epsilon(1e-12));

  CHECK(deletion_obsolescence(ms, "R", unit_weight(), 2.0, 2.0) == 0.0);
  // No deletion process at all.
  const auto still = fixtures::single_relation(1.0, 0.0, 100.0);
  CHECK(deletion_obsolescence(still, "R", unit_weight(), 0.0, 5.0) == 0.0);

  // Against direct quadrature: weight at the deletion-time density
  // mu e^(-mu t) (f - t).
  const auto busy = fixtures::single_relation(0.0, 0.8, 40.0);
  const double expected = 40.0 * oracle::integrate(
                                     [&](double t) {
                                       return 0.8 * std::exp(-0.8 * t) * (2.5 - t);
                                     },
                                     0.0, 2.5, 1e-12);
  CHECK(deletion_obsolescence(busy, "R", unit_weight(), 0.0, 2.5) ==
        doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("modification obsolescence") {
  // Frozen chain: zero cost.
  ModelSet frozen = fixtures::single_relation(0.0, 0.0, 10.0);
  Matrix flip(2, 2);
  flip(0, 1) = 1.0;
  flip(1, 0) = 1.0;
  frozen.relations.at("R").attributes.emplace(
      "A", AttributeSpec{MarkovAttribute({"a", "b"}, {1.0, 1.0}, flip,
                                         IntensityFunction::constant(0.0)),
                         {{"a", 10.0}},
                         {}});
  const std::map<std::string, ModificationMetric> unit = {{"A", UnitCostMetric{}}};
  CHECK(modification_obsolescence(frozen, "R", unit, 0.0, 5.0) == doctest::Approx(0.0));

  // Crawler lump with theta Gamma = ln 2 and a 10-tuple histogram at
  // "unchanged": 10 * (1 - 0.5) = 5.
  ModelSet crawler = fixtures::single_relation(0.0, 0.0, 10.0);
  crawler.relations.at("R").attributes.emplace(
      "A", AttributeSpec{BinaryLumpAttribute{1.0, 0.0, IntensityFunction::constant(1.0)},
                         {{"unchanged", 10.0}},
                         {}});
  CHECK(modification_obsolescence(crawler, "R", unit, 0.0, std::log(2.0)) ==
        doctest::Approx(5.0));
  // The explicit unit matrix is the same metric.
  const std::map<std::string, ModificationMetric> explicit_unit = {{"A", unit_cost_matrix(2)}};
  CHECK(modification_obsolescence(crawler, "R", explicit_unit, 0.0, std::log(2.0)) ==
        doctest::Approx(5.0));

  // Random-walk squared error, delta = 0: k Gamma sigma^2 per tuple.
  ModelSet walk = fixtures::single_relation(0.0, 0.0, 7.0);
  walk.relations.at("R").attributes.emplace(
      "A", AttributeSpec{RandomWalkAttribute{0.0, 4.0, IntensityFunction::constant(2.0)},
                         {},
                         {}});
  const std::map<std::string, ModificationMetric> sq = {{"A", SquaredErrorMetric{1.0, false}}};
  CHECK(modification_obsolescence(walk, "R", sq, 0.0, 1.0) == doctest::Approx(8.0 * 7.0));

  // Squared error over numeric finite states equals the explicit sum.
  ModelSet numeric = fixtures::single_relation(0.0, 0.0, 6.0);
  Matrix p3(3, 3);
  p3(0, 1) = 1.0;
  p3(1, 0) = 0.5;
  p3(1, 2) = 0.5;
  p3(2, 1) = 1.0;
  numeric.relations.at("R").attributes.emplace(
      "A", AttributeSpec{MarkovAttribute({"10", "20", "30"}, {1.0, 1.0, 1.0}, p3,
                                         IntensityFunction::constant(0.7)),
                         {{"10", 2.0}, {"20", 3.0}, {"30", 1.0}},
                         {}});
  const auto& spec = numeric.relations.at("R").attributes.at("A");
  const Matrix pm = model_transition_matrix(spec.model, 0.0, 1.0);
  double expected = 0.0;
  const double values[] = {10.0, 20.0, 30.0};
  const double counts[] = {2.0, 3.0, 1.0};
  for (int u = 0; u < 3; ++u) {
    for (int v = 0; v < 3; ++v) {
      expected += counts[u] * pm(u, v) * (values[v] - values[u]) * (values[v] - values[u]);
    }
  }
  const std::map<std::string, ModificationMetric> sq2 = {{"A", SquaredErrorMetric{1.0, false}}};
  CHECK(modification_obsolescence(numeric, "R", sq2, 0.0, 1.0) ==
        doctest::Approx(expected).epsilon(1e-10));

  const std::map<std::string, ModificationMetric> missing = {{"B", UnitCostMetric{}}};
  CHECK_THROWS_AS(modification_obsolescence(numeric, "R", missing, 0.0, 1.0), MissingModel);
}

TEST_CASE("transcription cost") {
  CHECK(transcription_cost(2.5, 1.0, 0, 0, 0) == doctest::Approx(2.5));
  CHECK(transcription_cost(0.0, 1.0, 3, 2, 5) == doctest::Approx(10.0));
  CHECK(transcription_cost(1.0, 0.1, 3, 2, 5) == doctest::Approx(2.0));
  CHECK_THROWS_AS(transcription_cost(0.0, 1.0, -1, 0, 0), Error);

  // Expectation form on a homogeneous model: c + beta (X + deleted).
  const auto ms = fixtures::single_relation(2.0, 1.0, 10.0);
  CostSpec spec;
  spec.setup_c = 1.0;
  spec.beta = 0.5;
  const double dt = std::log(2.0);
  const double x = 2.0 * 0.5;       // (lambda/mu)(1 - e^-mu dt) with alpha = 1... mu = 1
  const double deleted = 10.0 * 0.5;
  CHECK(expected_transcription_cost(ms, "R", spec, 0.0, dt) ==
        doctest::Approx(1.0 + 0.5 * (x + deleted)));
}

TEST_CASE("total cost over a schedule") {
  const auto ms = fixtures::single_relation(2.0, 0.0, 0.0);
  CostSpec spec;
  spec.alpha = 0.25;
  spec.setup_c = 1.0;
  spec.beta = 0.0;
  spec.g_ins = unit_weight();

  // Empty schedule: trailing obsolescence only.
  const double horizon = 3.0;
  const double pure = (1.0 - spec.alpha) * insertion_obsolescence(ms, "R", spec.g_ins, 0.0, 3.0);
  CHECK(total_cost({}, spec, ms, "R", 0.0, horizon) == doctest::Approx(pure));

  // Two refreshes, hand-computed: intervals (0,1], (1,2.5], (2.5,3].
  const auto iota = [&](double s, double f) { return 0.5 * 2.0 * (f - s) * (f - s); };
  const double by_hand = spec.alpha * (1.0 + 1.0) +
                         (1.0 - spec.alpha) * (iota(0, 1) + iota(1, 2.5) + iota(2.5, 3.0));
  CHECK(total_cost({1.0, 2.5}, spec, ms, "R", 0.0, 3.0) == doctest::Approx(by_hand));

  // Pure transcription weighting punishes every refresh.
  CostSpec alpha1 = spec;
  alpha1.alpha = 1.0;
  CHECK(total_cost({}, alpha1, ms, "R", 0.0, 3.0) == doctest::Approx(0.0));
  CHECK(total_cost({1.0}, alpha1, ms, "R", 0.0, 3.0) > 0.0);

  CHECK_THROWS_AS(total_cost({2.0, 1.0}, spec, ms, "R", 0.0, 3.0), UnorderedSchedule);
  CHECK_THROWS_AS(total_cost({4.0}, spec, ms, "R", 0.0, 3.0), UnorderedSchedule);
}

TEST_CASE("obsolescence breakdown adds up") {
  ModelSet ms = fixtures::single_relation(2.0, 0.4, 10.0);
  Matrix flip(2, 2);
  flip(0, 1) = 1.0;
  flip(1, 0) = 1.0;
  ms.relations.at("R").attributes.emplace(
      "A", AttributeSpec{MarkovAttribute({"a", "b"}, {1.0, 1.0}, flip,
                                         IntensityFunction::constant(0.5)),
                         {{"a", 6.0}, {"b", 4.0}},
                         {}});
  CostSpec spec;
  spec.g_ins = unit_weight();
  spec.g_del = unit_weight();
  spec.metrics = {{"A", UnitCostMetric{}}};
  const auto b = obsolescence(ms, "R", spec, 0.0, 2.0);
  CHECK(b.total == doctest::Approx(b.insertion + b.deletion + b.modification));
  CHECK(b.insertion > 0.0);
  CHECK(b.deletion > 0.0);
  CHECK(b.modification > 0.0);
  const auto at_start = obsolescence(ms, "R", spec, 1.5, 1.5);
  CHECK(at_start.total == 0.0);
}
