// Acceptance suite: one check per release criterion, one PASS/FAIL line
// each. Exit status is the number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <vector>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "relevo/cost.hpp"
#include "relevo/evolution.hpp"
#include "relevo/fitting.hpp"
#include "relevo/model_io.hpp"
#include "relevo/policy.hpp"
#include "relevo/simulator.hpp"

using namespace relevo;

namespace {

struct Check {
  int id;
  std::string name;
  std::function<bool(std::ostream&)> run;
};

// --- 1: refresh interval and threshold from the posting-rate fit ---------

bool check_interval_threshold(std::ostream& out) {
  // The empirical mean interarrival is 5:15:19; the corresponding rate
  // prints as 4.57/day at two decimals.
  EventLog log;
  const double gap = 18919.0 / kSecondsPerDay;
  for (int i = 0; i < 4; ++i) log.events.push_back({i * gap, 1, EventOp::kInsert});
  const double lambda = fit_homogeneous(log);

  const bool rate_ok = std::fabs(lambda - 4.57) <= 0.005;
  const double interval_seconds = usp_interval(lambda, 1.0) * kSecondsPerDay;
  const bool interval_ok = std::fabs(interval_seconds - 18919.0) <= 1.0;
  const double pi = threshold_from_M(4.57, 1.0);
  const bool threshold_ok = std::fabs(pi - 0.109) <= 0.0005;

  out << "lambda=" << lambda << "/day (4.57 at 2 decimals: " << (rate_ok ? "yes" : "NO")
      << "), usp interval=" << format_hms(usp_interval(lambda, 1.0)) << " vs 5:15:19"
      << " (literal 4.57 gives " << format_hms(usp_interval(4.57, 1.0))
      << "), threshold=" << pi << " vs 0.109";
  return rate_ok && interval_ok && threshold_ok;
}

// --- 2: KS threshold table ------------------------------------------------

bool check_ks_thresholds(std::ostream& out) {
  std::vector<double> s580(580, 0.5), s557(557, 0.5);
  const auto cdf = [](double x) { return std::clamp(x, 0.0, 1.0); };
  const double t580 = ks_test(s580, cdf).thresholds.at(0.005);
  const double t557 = ks_test(s557, cdf).thresholds.at(0.1);
  out << "1.73/sqrt(580)=" << t580 << " vs 0.0718, 1.22/sqrt(557)=" << t557 << " vs 0.0517";
  return std::fabs(t580 - 0.0718) <= 1e-4 && std::fabs(t557 - 0.0517) <= 1e-4;
}

// --- 3: homogeneous cardinality closed form vs simulation ------------------

bool check_homogeneous_cardinality(std::ostream& out) {
  const auto ms = fixtures::single_relation(2.0, 1.0, 10.0);
  const double horizon = std::log(2.0);
  const double analytic = expected_cardinality(ms, "R", 0.0, horizon);

  SimConfig cfg;
  cfg.models = ms;
  cfg.t_end = horizon;
  cfg.replications = 100000;
  cfg.seed = 301;
  const auto s = run_summaries(cfg, {{SimQuery::Kind::kCardinality, "R", "", "", nullptr}});
  out << "analytic=" << analytic << ", simulated=" << s[0].mean << " +- " << s[0].std_error;
  return std::fabs(analytic - 6.0) <= 1e-9 &&
         std::fabs(s[0].mean - analytic) <= 3.0 * s[0].std_error;
}

// --- 4: binary-lump closed form vs the 2x2 matrix exponential --------------

bool check_binary_equivalence(std::ostream& out) {
  RngStream rng(401, 0);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double theta = 5.0 * rng.uniform01();
    const double theta_prime = 5.0 * rng.uniform01();
    const double mass = 6.0 * rng.uniform01();
    const BinaryLumpAttribute lump{theta, theta_prime, IntensityFunction::constant(mass)};
    const auto [same, changed] = lump.transition(0.0, 1.0);
    const Matrix p = lump.as_markov().transition_matrix(0.0, 1.0);
    worst = std::max(worst, std::fabs(p(0, 0) - same));
    worst = std::max(worst, std::fabs(p(0, 1) - changed));
  }
  out << "max |closed form - expm| = " << worst;
  return worst < 1e-10;
}

// --- 5: time-rescaling pipeline on the weekly profile ----------------------

bool check_rescaling_pipeline(std::ostream& out) {
  const auto weekly = fixtures::posting_rate_profile();
  const double horizon = 26.0 * 7.0;
  int rpc_accepted = 0, homogeneous_rejected = 0;
  bool first_run_accepts = false;
  const int trials = 100;
  for (int trial = 0; trial < trials; ++trial) {
    RngStream rng(500 + trial, 0);
    EventLog log;
    TimePoint t = 0.0;
    while (true) {
      const auto tau = NonhomExp(weekly, t).sample(rng, horizon - t);
      if (!tau) break;
      t += *tau;
      log.events.push_back({t, 1, EventOp::kInsert});
    }
    const auto u = rescale_interarrivals(log, weekly);
    const bool accept = !ks_test(u, exp1_cdf).rejected(0.05);
    rpc_accepted += accept ? 1 : 0;
    if (trial == 0) first_run_accepts = accept;

    const auto flat = IntensityFunction::constant(fit_homogeneous(log));
    const auto u_flat = rescale_interarrivals(log, flat);
    homogeneous_rejected += ks_test(u_flat, exp1_cdf).rejected(0.05) ? 1 : 0;
  }
  out << "true model accepted in " << rpc_accepted << "/100 (seeded run: "
      << (first_run_accepts ? "accepted" : "REJECTED") << "), homogeneous fit rejected in "
      << homogeneous_rejected << "/100";
  return first_run_accepts && homogeneous_rejected >= 90;
}

// --- 6: threshold(M^2/2 lambda) vs USP(M) schedules -------------------------

bool check_calibration_equivalence(std::ostream& out) {
  const double lambda = 4.57;
  const auto ms = fixtures::single_relation(lambda, 0.0, 0.0);
  CostSpec spec;
  spec.g_ins = {IntensityFunction::constant(1.0), 0.0};

  double worst_seconds = 0.0;
  bool counts_match = true;
  for (double m : {0.5, 1.0, 2.0, 4.0}) {
    const auto usp = generate_schedule(UspPolicy{m}, ms, "R", spec, 0.0, 30.0);
    const auto thr = generate_schedule(ThresholdPolicy{threshold_from_M(lambda, m)}, ms, "R",
                                       spec, 0.0, 30.0);
    if (usp.refreshes.size() != thr.refreshes.size()) {
      counts_match = false;
      out << "M=" << m << ": " << usp.refreshes.size() << " vs " << thr.refreshes.size()
          << " refreshes; ";
      continue;
    }
    for (size_t i = 0; i < usp.refreshes.size(); ++i) {
      worst_seconds = std::max(
          worst_seconds, std::fabs(usp.refreshes[i] - thr.refreshes[i]) * kSecondsPerDay);
    }
  }
  out << "max schedule deviation " << worst_seconds << "s over M in {0.5,1,2,4}";
  return counts_match && worst_seconds <= 1.0;
}

// --- 7: oracle agreement battery -------------------------------------------

struct BatteryCase {
  ModelSet ms;
  CostSpec cost;
  double horizon;
};

AttributeSpec random_finite_attribute(RngStream& rng, int cardinality, int domain) {
  std::vector<std::string> states;
  for (int v = 0; v < domain; ++v) states.push_back(std::to_string(10 * (v + 1)));
  std::vector<double> exits;
  Matrix probs(domain, domain);
  for (int u = 0; u < domain; ++u) {
    exits.push_back(0.1 + 0.5 * rng.uniform01());
    double total = 0.0;
    std::vector<double> row(domain, 0.0);
    for (int v = 0; v < domain; ++v) {
      if (v != u) total += (row[v] = 0.1 + rng.uniform01());
    }
    for (int v = 0; v < domain; ++v) {
      if (v != u) probs(u, v) = row[v] / total;
    }
  }
  AttributeSpec spec{MarkovAttribute(states, exits, probs,
                                     IntensityFunction::constant(0.2 + 0.6 * rng.uniform01())),
                     {},
                     {}};
  // Deterministic integral histogram summing to the cardinality.
  int remaining = cardinality;
  for (int v = 0; v < domain; ++v) {
    const int take = v + 1 == domain ? remaining
                                     : std::min(remaining, 1 + static_cast<int>(
                                                               rng.below(remaining + 1)));
    spec.histogram[states[v]] = take;
    remaining -= take;
  }
  return spec;
}

// Parent relations are sized so that sampling w live parents is essentially
// never blocked within the horizon (the analytic hazards presume available
// references).
int parent_size(int cardinality) { return std::max(30, 3 * cardinality); }

BatteryCase make_battery_case(int index, RngStream& rng) {
  BatteryCase c;
  c.horizon = 0.4 + 0.8 * rng.uniform01();
  const int shape = index % 4;

  RelationModel r;
  r.name = "R";
  const double lambda = 1.0 + 4.0 * rng.uniform01();
  r.insertion = (index % 3 == 0)
                    ? fixtures::posting_rate_profile().scaled(lambda / 4.0)
                    : IntensityFunction::constant(lambda);
  if (index % 5 == 0) {
    r.batch = fixtures::posting_batches();
  }
  r.deletion = IntensityFunction::constant(0.1 + 0.3 * rng.uniform01());
  const int cardinality = 6 + static_cast<int>(rng.below(10));
  r.cardinality = cardinality;
  if (index % 4 == 2) {
    // Content-independent overwrites with a shared clock rate.
    const int domain = 2 + index % 3;
    std::vector<std::string> states;
    std::vector<double> omega(domain);
    double total = 0.0;
    for (int v = 0; v < domain; ++v) {
      states.push_back(std::to_string(10 * (v + 1)));
      total += (omega[v] = 0.2 + rng.uniform01());
    }
    for (double& w : omega) w /= total;
    const std::vector<double> exits(domain, 0.2 + 0.4 * rng.uniform01());
    AttributeSpec spec{OverwriteAttribute(states, omega, exits,
                                          IntensityFunction::constant(0.3 + 0.4 * rng.uniform01())),
                       {},
                       {}};
    int remaining = cardinality;
    for (int v = 0; v < domain; ++v) {
      const int take = v + 1 == domain
                           ? remaining
                           : std::min(remaining, 1 + static_cast<int>(rng.below(remaining + 1)));
      spec.histogram[states[v]] = take;
      remaining -= take;
    }
    r.attributes.emplace("A", std::move(spec));
  } else {
    r.attributes.emplace("A", random_finite_attribute(rng, cardinality, 2 + index % 3));
  }
  if (index % 2 == 1) {
    // A second, change-flag attribute; every tuple starts unchanged, so the
    // per-attribute independence product is exact.
    r.attributes.emplace(
        "B", AttributeSpec{BinaryLumpAttribute{0.2 + 0.5 * rng.uniform01(),
                                               0.3 * rng.uniform01(),
                                               IntensityFunction::constant(0.5)},
                           {{"unchanged", static_cast<double>(cardinality)}},
                           {{"unchanged", 1.0}}});
  }

  const int parents = parent_size(cardinality);
  c.ms.reference_time = 0.0;
  if (shape == 1) {
    // Chain R -> S.
    RelationModel s;
    s.name = "S";
    s.deletion = IntensityFunction::constant(0.05 + 0.15 * rng.uniform01());
    s.cardinality = parents;
    c.ms.relations.emplace("S", std::move(s));
    c.ms.graph.add_edge("R", "S", 1);
    r.dependent_counts = {{"S", static_cast<double>(cardinality)}};
  } else if (shape == 2) {
    // Double edge to S plus a single edge to M.
    RelationModel s;
    s.name = "S";
    s.deletion = IntensityFunction::constant(0.05 + 0.15 * rng.uniform01());
    s.cardinality = parents;
    RelationModel m;
    m.name = "M";
    m.deletion = IntensityFunction::constant(0.05 + 0.1 * rng.uniform01());
    m.cardinality = parents;
    c.ms.relations.emplace("S", std::move(s));
    c.ms.relations.emplace("M", std::move(m));
    c.ms.graph.add_edge("R", "S", 2);
    c.ms.graph.add_edge("R", "M", 1);
    r.dependent_counts = {{"S", static_cast<double>(std::min(parents, 2 * cardinality))},
                          {"M", static_cast<double>(cardinality)}};
  } else if (shape == 3) {
    // Three-level chain R -> S -> T with unit multiplicities.
    RelationModel s;
    s.name = "S";
    s.deletion = IntensityFunction::constant(0.05 + 0.15 * rng.uniform01());
    s.cardinality = parents;
    RelationModel t;
    t.name = "T";
    t.deletion = IntensityFunction::constant(0.05 + 0.1 * rng.uniform01());
    t.cardinality = parents;
    c.ms.relations.emplace("S", std::move(s));
    c.ms.relations.emplace("T", std::move(t));
    c.ms.graph.add_edge("R", "S", 1);
    c.ms.graph.add_edge("S", "T", 1);
    r.dependent_counts = {{"S", static_cast<double>(cardinality)},
                          {"T", static_cast<double>(cardinality)}};
  }
  c.ms.relations.emplace("R", std::move(r));
  c.ms.graph.add_relation("R");

  // Keep the change probability away from 1 so the Bernoulli comparison
  // stays informative at the replication count used.
  while (first_alteration(c.ms, "R", 0.0, c.horizon) > 0.985 && c.horizon > 0.05) {
    c.horizon *= 0.7;
  }

  c.cost.g_ins = {index % 2 == 0
                      ? IntensityFunction::constant(1.0)
                      : weekly_weight({{0, 9, 18}, {1, 9, 18}, {2, 9, 18}, {3, 9, 18},
                                       {4, 9, 18}},
                                      4.0, 1.0),
                  0.0};
  c.cost.g_del = {IntensityFunction::constant(0.5 + rng.uniform01()), 0.1};
  c.cost.metrics = {{"A", UnitCostMetric{}}};
  return c;
}

bool check_agreement_battery(std::ostream& out) {
  RngStream rng(700, 0);
  int checks = 0, failures = 0;
  std::ostringstream failed_detail;

  for (int index = 0; index < 20; ++index) {
    const BatteryCase c = make_battery_case(index, rng);
    const double s = 0.0, f = c.horizon;

    std::vector<SimQuery> queries = {
        {SimQuery::Kind::kCardinality, "R", "", "", nullptr},
        {SimQuery::Kind::kSurvival, "R", "", "", nullptr},
        {SimQuery::Kind::kFirstAlteration, "R", "", "", nullptr},
        {SimQuery::Kind::kUnmodified, "R", "", "", nullptr},
        {SimQuery::Kind::kInsertionObsolescence, "R", "", "", &c.cost},
        {SimQuery::Kind::kDeletionObsolescence, "R", "", "", &c.cost},
        {SimQuery::Kind::kModificationObsolescence, "R", "", "", &c.cost},
    };
    const auto& states = model_states(c.ms.relation("R").attributes.at("A").model);
    for (const auto& v : states) {
      queries.push_back({SimQuery::Kind::kHistogramValue, "R", "A", v, nullptr});
    }

    std::vector<double> expected;
    expected.push_back(expected_cardinality(c.ms, "R", s, f));
    expected.push_back(survival_prob(c.ms, "R", s, f));
    expected.push_back(first_alteration(c.ms, "R", s, f));
    expected.push_back(surviving_unmodified_mean(c.ms, "R", s, f).unmodified);
    expected.push_back(insertion_obsolescence(c.ms, "R", c.cost.g_ins, s, f));
    expected.push_back(deletion_obsolescence(c.ms, "R", c.cost.g_del, s, f));
    expected.push_back(modification_obsolescence(c.ms, "R", c.cost.metrics, s, f));
    const Histogram hist = expected_histogram(c.ms, "R", "A", s, f);
    for (const auto& v : states) expected.push_back(hist.at(v));

    SimConfig cfg;
    cfg.models = c.ms;
    cfg.t_end = f;
    cfg.replications = 100000;
    cfg.seed = 7000 + static_cast<std::uint64_t>(index);
    const auto summaries = run_summaries(cfg, queries);

    for (size_t q = 0; q < queries.size(); ++q) {
      ++checks;
      const double se = std::max(summaries[q].std_error, 1e-12);
      if (std::fabs(summaries[q].mean - expected[q]) > 3.0 * se) {
        ++failures;
        failed_detail << " [case " << index << " query " << q << ": " << expected[q] << " vs "
                      << summaries[q].mean << " +- " << se << "]";
      }
    }
  }
  out << checks << " checks, " << failures << " beyond 3 SE ("
      << 100.0 * (checks - failures) / checks << "% within)" << failed_detail.str();
  return failures * 20 <= checks;  // at least 95% within 3 SE
}

// --- 8: random-walk second moment vs Monte Carlo ----------------------------

bool check_random_walk_moments(std::ostream& out) {
  RngStream param_rng(801, 0);
  bool corrected_ok = true;
  bool legacy_variant_refuted = false;
  for (int trial = 0; trial < 10; ++trial) {
    const double mass = 0.3 + 3.7 * param_rng.uniform01();
    const double delta = -2.0 + 4.0 * param_rng.uniform01();
    const double sigma2 = 0.2 + 2.0 * param_rng.uniform01();
    const RandomWalkAttribute walk{delta, sigma2, IntensityFunction::constant(mass)};
    const double corrected = walk.moments(0.0, 0.0, 1.0).change_second_moment;
    const double legacy = walk.moments(0.0, 0.0, 1.0, true).change_second_moment;

    RngStream rng(802 + static_cast<std::uint64_t>(trial), 0);
    const int n = 1000000;
    double sum = 0.0, sum_sq = 0.0;
    const double sigma = std::sqrt(sigma2);
    for (int i = 0; i < n; ++i) {
      double change = 0.0;
      double clock = rng.exponential();
      while (clock <= mass) {
        change += delta + sigma * rng.normal();
        clock += rng.exponential();
      }
      const double sq = change * change;
      sum += sq;
      sum_sq += sq * sq;
    }
    const double mean = sum / n;
    const double se = std::sqrt(std::max(sum_sq / n - mean * mean, 0.0) / n);
    if (std::fabs(mean - corrected) > 3.0 * se) {
      corrected_ok = false;
      out << " [corrected form off at Gamma=" << mass << " delta=" << delta << "]";
    }
    if (std::fabs(delta) > 0.05 && std::fabs(mean - legacy) > 3.0 * se) {
      legacy_variant_refuted = true;
    }
  }
  out << (corrected_ok ? "corrected form within 3 SE on all 10 draws" : "corrected form FAILED")
      << "; legacy variant beyond 3 SE for at least one nonzero delta: "
      << (legacy_variant_refuted ? "yes" : "NO");
  return corrected_ok && legacy_variant_refuted;
}

// --- 9: periodic integration fast path ---------------------------------------

bool check_fast_periodic_integration(std::ostream& out) {
  const auto weekly = fixtures::posting_rate_profile();
  const double periods = 1e4;
  const double span = periods * 7.0;
  const double one = weekly.integrate(0.0, 7.0);

  const double fast = weekly.integrate(0.0, span);
  const bool exact = std::fabs(fast - periods * one) <= 1e-10 * periods * one;

  using clock = std::chrono::steady_clock;
  const int fast_calls = 20000;
  const auto t0 = clock::now();
  double sink = 0.0;
  for (int i = 0; i < fast_calls; ++i) sink += weekly.integrate(0.25 * i * 1e-7, span);
  const auto t1 = clock::now();
  const double naive = oracle::integrate_recurrent_naive(weekly, 0.0, span);
  const auto t2 = clock::now();

  const double fast_ns =
      std::chrono::duration<double, std::nano>(t1 - t0).count() / fast_calls;
  const double naive_ns = std::chrono::duration<double, std::nano>(t2 - t1).count();
  const double speedup = naive_ns / fast_ns;
  const bool same_value = std::fabs(naive - fast) <= 1e-9 * fast;

  out << "value match " << (exact ? "1e-10" : "FAILED") << ", naive agrees: "
      << (same_value ? "yes" : "no") << ", speedup x" << static_cast<long>(speedup)
      << " (sink " << std::fmod(sink, 10.0) << ")";
  return exact && same_value && speedup >= 100.0;
}

// --- 10: desk-scale substitution note ----------------------------------------

bool check_runbook(std::ostream& out) {
  // The posting data set behind the published D_n values and cost curves is
  // not distributed; those numbers are covered by the property checks above
  // plus a documented runbook for user-supplied logs.
  std::ifstream readme(std::string(RELEVO_SOURCE_DIR) + "/README.md");
  if (!readme) {
    out << "README.md missing";
    return false;
  }
  std::stringstream ss;
  ss << readme.rdbuf();
  const std::string text = ss.str();
  const bool has_runbook = text.find("## Runbook") != std::string::npos;
  out << "criteria 5 and 7 stand in for the unpublished data set; runbook "
      << (has_runbook ? "present" : "MISSING") << " in README.md";
  return has_runbook;
}

}  // namespace

int main() {
  const std::vector<Check> checks = {
      {1, "refresh interval 5:15:19 and threshold 0.109", check_interval_threshold},
      {2, "KS rejection thresholds 0.0718 and 0.0517", check_ks_thresholds},
      {3, "homogeneous cardinality: analytic 6.0 vs simulation", check_homogeneous_cardinality},
      {4, "binary-lump closed form vs matrix exponential", check_binary_equivalence},
      {5, "time-rescaling pipeline over 26 weeks", check_rescaling_pipeline},
      {6, "threshold/USP schedule calibration", check_calibration_equivalence},
      {7, "analytic vs Monte Carlo agreement battery", check_agreement_battery},
      {8, "random-walk second moment", check_random_walk_moments},
      {9, "periodic integration fast path", check_fast_periodic_integration},
      {10, "desk-scale substitution documented", check_runbook},
  };

  int failures = 0;
  for (const auto& check : checks) {
    const auto start = std::chrono::steady_clock::now();
    std::ostringstream detail;
    bool ok = false;
    try {
      ok = check.run(detail);
    } catch (const std::exception& e) {
      detail << "exception: " << e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("[%s] criterion %2d: %s (%.1fs) -- %s\n", ok ? "PASS" : "FAIL", check.id,
                check.name.c_str(), secs, detail.str().c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
  }
  if (failures == 0) {
    std::printf("all %zu criteria passed\n", checks.size());
  } else {
    std::printf("%d criteria FAILED\n", failures);
  }
  return failures;
}
