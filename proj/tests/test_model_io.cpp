#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "fixtures.hpp"
#include "relevo/errors.hpp"
#include "relevo/evolution.hpp"
#include "relevo/model_io.hpp"

using namespace relevo;

namespace {

const char* kModelJson = R"({
  "reference_time": "2001-01-01T00:00:00Z",
  "relations": {
    "R": {
      "insertion": {"type": "recurrent", "period_days": 7,
        "segments": [
          {"start": "Mon 00:00", "end": "Sat 00:00", "coeffs": [4.0]},
          {"start": "Sat 00:00", "end": "Sun 00:00", "coeffs": [1.5]},
          {"start": "Sun 00:00", "end": "Mon 00:00", "coeffs": [1.0]}
        ]},
      "batch": [[1, 0.962], [2, 0.034], [3, 0.004]],
      "deletion": {"type": "constant", "rate": 0.25},
      "cardinality": 10,
      "attributes": {
        "status": {
          "model": {"type": "binary", "theta": 1.0, "theta_prime": 0.5,
                    "intensity": {"type": "constant", "rate": 2.0}},
          "histogram": {"unchanged": 8, "changed": 2}
        }
      }
    },
    "S": {
      "deletion": {"type": "constant", "rate": 0.1},
      "cardinality": 20
    }
  },
  "graph": {"edges": [{"from": "R", "to": "S", "multiplicity": 2}]}
})";

}  // namespace

TEST_CASE("model config round trip") {
  const ModelSet ms = parse_model_set(kModelJson);
  CHECK(ms.reference_time == doctest::Approx(0.0));
  CHECK(ms.relation("R").cardinality == 10.0);
  CHECK(ms.relation("R").batch.mean() == doctest::Approx(1.042).epsilon(0.001));
  CHECK(ms.relation("R").insertion.eval(0.5) == doctest::Approx(4.0));
  CHECK(ms.relation("R").insertion.eval(6.5) == doctest::Approx(1.0));
  CHECK(ms.graph.direct_edges("R").at("S") == 2);

  // Effective deletion rate: 0.25 + 2 * 0.1.
  CHECK(*effective_deletion_intensity(ms, "R").constant_rate() == doctest::Approx(0.45));

  const ModelSet again = parse_model_set(serialize_model_set(ms));
  CHECK(serialize_model_set(again) == serialize_model_set(ms));
  CHECK(expected_cardinality(again, "R", 0.0, 2.0) ==
        doctest::Approx(expected_cardinality(ms, "R", 0.0, 2.0)));
  const auto h1 = expected_histogram(ms, "R", "status", 0.0, 1.0);
  const auto h2 = expected_histogram(again, "R", "status", 0.0, 1.0);
  CHECK(h1.at("changed") == doctest::Approx(h2.at("changed")));
}

TEST_CASE("intensity json round trips") {
  for (const auto& f : {IntensityFunction::constant(4.57),
                        fixtures::posting_rate_profile(),
                        IntensityFunction::piecewise({{0.0, 2.0, {1.0, 0.5, 0.0, 0.125}}})}) {
    const auto back = parse_intensity(serialize_intensity(f));
    CHECK(serialize_intensity(back) == serialize_intensity(f));
    for (double t : {0.1, 0.9, 1.7}) CHECK(back.eval(t) == doctest::Approx(f.eval(t)));
  }
}

TEST_CASE("config errors carry context") {
  CHECK_THROWS_AS(parse_model_set("{not json"), ConfigError);
  CHECK_THROWS_AS(parse_model_set(R"({"relations": 3})"), ConfigError);
  CHECK_THROWS_AS(parse_intensity(R"({"type": "mystery"})"), ConfigError);
  // Cycles surface at validation.
  CHECK_THROWS_AS(parse_model_set(R"({
    "relations": {"A": {"cardinality": 1}, "B": {"cardinality": 1}},
    "graph": {"edges": [{"from": "A", "to": "B"}, {"from": "B", "to": "A"}]}
  })"),
                  CycleDetected);
  // Histogram totals must match the cardinality.
  CHECK_THROWS_AS(parse_model_set(R"({
    "relations": {"R": {"cardinality": 5, "attributes": {"A": {
      "model": {"type": "binary", "theta": 1, "theta_prime": 0},
      "histogram": {"unchanged": 1}
    }}}}
  })"),
                  ConfigError);
}

TEST_CASE("cost spec parsing") {
  const CostSpec spec = parse_cost_spec(R"({
    "alpha": 0.8, "setup_c": 1.0, "beta": 0.01,
    "work_hours": [
      {"dow": "Mon", "start": "09:00", "end": "18:00"},
      {"dow": "Tue", "start": "09:00", "end": "18:00"}
    ],
    "a1": 4.0, "a2": 1.0,
    "g_del": {"a1": 0.0, "a2": 0.0, "flat": 1.0},
    "metrics": {
      "status": {"type": "unit"},
      "price": {"type": "squared_error", "k": 0.5},
      "grade": {"type": "matrix", "costs": [[0, 2], [1, 0]]}
    }
  })");
  CHECK(spec.alpha == 0.8);
  CHECK(spec.g_ins.a.eval(0.5) == doctest::Approx(4.0));   // Monday noon
  CHECK(spec.g_ins.a.eval(3.5) == doctest::Approx(1.0));   // Thursday noon
  CHECK(spec.g_del.flat == 1.0);
  CHECK(spec.g_del.a.is_zero());
  CHECK(spec.metrics.size() == 3);
  CHECK(std::holds_alternative<UnitCostMetric>(spec.metrics.at("status")));
  CHECK(std::get<SquaredErrorMetric>(spec.metrics.at("price")).k == 0.5);
  CHECK(std::get<CostMatrixMetric>(spec.metrics.at("grade")).costs(0, 1) == 2.0);

  CHECK_THROWS_AS(parse_cost_spec(R"({"alpha": 2.0})"), ConfigError);
  CHECK_THROWS_AS(
      parse_cost_spec(R"({"metrics": {"A": {"type": "matrix", "costs": [[1]]}}})"),
      ConfigError);
}

TEST_CASE("event log csv round trip") {
  EventLog log;
  log.events.push_back({*parse_iso8601("2000-11-09T00:10:00Z"), 1, EventOp::kInsert});
  log.events.push_back({*parse_iso8601("2000-11-09T13:43:19Z"), 3, EventOp::kInsert});
  log.events.push_back({*parse_iso8601("2000-11-10T02:00:00Z"), 1, EventOp::kDelete});
  log.events.push_back({*parse_iso8601("2000-11-10T02:00:00Z"), 2, EventOp::kModify});

  const std::string path = "/tmp/relevo_test_log.csv";
  save_event_log(path, log);
  const EventLog back = load_event_log(path);
  REQUIRE(back.events.size() == log.events.size());
  for (size_t i = 0; i < log.events.size(); ++i) {
    CHECK(back.events[i].time == doctest::Approx(log.events[i].time).epsilon(1e-9));
    CHECK(back.events[i].count == log.events[i].count);
    CHECK(back.events[i].op == log.events[i].op);
  }
  std::remove(path.c_str());

  // Defaults: bare timestamps mean one insertion.
  const std::string bare = "/tmp/relevo_test_bare.csv";
  write_file(bare, "timestamp\n2000-11-09T00:10:00Z\n0.75\n");
  const EventLog defaults = load_event_log(bare);
  REQUIRE(defaults.events.size() == 2);
  CHECK(defaults.events[1].time == doctest::Approx(0.75));
  CHECK(defaults.events[1].count == 1);
  CHECK(defaults.events[1].op == EventOp::kInsert);
  std::remove(bare.c_str());
}

TEST_CASE("segmentation json") {
  const SegmentationSpec seg = parse_segmentation(R"({
    "blocks": [
      {"days": ["Mon","Tue","Wed","Thu","Fri"], "start": "00:00", "end": "09:00"},
      {"days": ["Mon","Tue","Wed","Thu","Fri"], "start": "09:00", "end": "18:00"},
      {"days": ["Mon","Tue","Wed","Thu","Fri"], "start": "18:00", "end": "24:00"},
      {"days": ["Sat","Sun"]}
    ]
  })");
  CHECK(seg.blocks.size() == 4);
  CHECK(seg.block_of(0.5) == 1);
  CHECK(seg.block_of(5.5) == 3);
}

TEST_CASE("sim config") {
  const SimConfig cfg = parse_sim_config(R"({
    "model": {"relations": {"R": {"insertion": {"type": "constant", "rate": 2.0}}}},
    "horizon_days": 3.5,
    "replications": 64,
    "seed": 9
  })");
  CHECK(cfg.t_end == doctest::Approx(3.5));
  CHECK(cfg.replications == 64);
  CHECK(cfg.seed == 9);
  CHECK_THROWS_AS(parse_sim_config(R"({"horizon_days": 1})"), ConfigError);
}
