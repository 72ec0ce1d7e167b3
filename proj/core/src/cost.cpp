#include "relevo/cost.hpp"

#include <algorithm>
#include <cmath>

#include "piecewise_quad.hpp"
#include "relevo/errors.hpp"

namespace relevo {
namespace {

std::vector<double> poly_antiderivative(const std::vector<double>& c) {
  std::vector<double> out(c.size() + 1, 0.0);
  for (size_t k = 0; k < c.size(); ++k) out[k + 1] = c[k] / static_cast<double>(k + 1);
  return out;
}

double poly_eval(const std::vector<double>& c, double u) {
  double v = 0.0;
  for (size_t k = c.size(); k-- > 0;) v = v * u + c[k];
  return v;
}

std::vector<double> poly_mul(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> out(a.size() + b.size() - 1, 0.0);
  for (size_t i = 0; i < a.size(); ++i) {
    for (size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  }
  return out;
}

std::vector<double> merge_breaks(std::vector<double> a, const std::vector<double>& b) {
  a.insert(a.end(), b.begin(), b.end());
  std::sort(a.begin(), a.end());
  std::vector<double> out;
  for (double x : a) {
    if (out.empty() || x - out.back() > 1e-12 * (1.0 + std::fabs(x))) out.push_back(x);
  }
  return out;
}

// integral over [s, f] of rate(t) * g(s, f, t) dt, exactly: both factors are
// piecewise polynomials, so each merged piece contributes a closed-form
// polynomial integral. Walks the pieces right to left, carrying
// W(t) = integral of a over [t, f].
double integrate_rate_times_g(const IntensityFunction& rate, const ObsolescenceWeight& g,
                              TimePoint s, TimePoint f) {
  if (f <= s) return 0.0;
  double total = g.flat * rate.integrate(s, f);
  const std::vector<double> breaks = merge_breaks(rate.breakpoints(s, f), g.a.breakpoints(s, f));
  double carried = 0.0;  // W at the right end of the current piece
  for (size_t i = breaks.size() - 1; i-- > 0;) {
    const double lo = breaks[i], hi = breaks[i + 1];
    const double len = hi - lo;
    const std::vector<double> rate_poly = rate.local_poly(lo);
    const std::vector<double> a_anti = poly_antiderivative(g.a.local_poly(lo));
    // W(lo + u) = carried + A(len) - A(u) as a polynomial in u.
    std::vector<double> weight = a_anti;
    for (double& c : weight) c = -c;
    weight[0] += carried + poly_eval(a_anti, len);
    const std::vector<double> integrand_anti = poly_antiderivative(poly_mul(rate_poly, weight));
    total += poly_eval(integrand_anti, len);
    carried = weight[0];  // W at lo
  }
  return total;
}

std::vector<double> numeric_states(const std::vector<std::string>& states) {
  std::vector<double> out;
  out.reserve(states.size());
  for (const auto& s : states) {
    size_t pos = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != s.size()) {
      throw Error("squared-error metric needs numeric state labels; got '" + s + "'");
    }
    out.push_back(v);
  }
  return out;
}

}  // namespace

double ObsolescenceWeight::g(TimePoint s, TimePoint f, TimePoint t) const {
  (void)s;
  return flat + a.integrate(t, f);
}

IntensityFunction weekly_weight(const std::vector<WeeklyBlock>& blocks, double a1, double a2) {
  std::vector<double> bounds = {0.0, 7.0};
  for (const auto& b : blocks) {
    if (b.dow < 0 || b.dow > 6 || b.start_hours < 0.0 || b.end_hours > 24.0 ||
        b.end_hours <= b.start_hours) {
      throw ConfigError("weekly block out of range");
    }
    bounds.push_back(b.dow + b.start_hours / 24.0);
    bounds.push_back(b.dow + b.end_hours / 24.0);
  }
  std::sort(bounds.begin(), bounds.end());
  bounds.erase(std::unique(bounds.begin(), bounds.end(),
                           [](double x, double y) { return std::fabs(x - y) < 1e-12; }),
               bounds.end());
  std::vector<Segment> segs;
  for (size_t i = 0; i + 1 < bounds.size(); ++i) {
    const double mid = 0.5 * (bounds[i] + bounds[i + 1]);
    bool inside = false;
    for (const auto& b : blocks) {
      if (mid >= b.dow + b.start_hours / 24.0 && mid < b.dow + b.end_hours / 24.0) {
        inside = true;
        break;
      }
    }
    segs.push_back({bounds[i], bounds[i + 1], {inside ? a1 : a2}});
  }
  return IntensityFunction::recurrent(7.0, std::move(segs));
}

CostMatrixMetric unit_cost_matrix(size_t states) {
  Matrix m(states, states, 1.0);
  for (size_t i = 0; i < states; ++i) m(i, i) = 0.0;
  return {std::move(m)};
}

double insertion_obsolescence(const ModelSet& ms, const std::string& relation,
                              const ObsolescenceWeight& g_ins, TimePoint s, TimePoint f) {
  const auto& model = ms.relation(relation);
  if (f <= s) return 0.0;

  // Only tuples still present at f contribute (the b(r) <= f < d(r)
  // condition), so the insertion density carries the survival factor. With
  // no deletions it cancels and the piecewise products integrate exactly.
  if (!model.memoryless()) {
    const auto& life = *model.lifespan;
    std::vector<double> knots;
    for (const auto& [age, p] : life.cdf_knots) {
      (void)p;
      if (f - age > s && f - age < f) knots.push_back(f - age);
    }
    auto breaks = internal::merge_breaks(
        {model.insertion.breakpoints(s, f), g_ins.a.breakpoints(s, f), std::move(knots)});
    internal::refine_by_mass(breaks, {&model.insertion, &g_ins.a}, 1.0);
    return model.batch.mean() *
           internal::integrate_pieces(breaks, [&](double t) {
             return model.insertion.eval(t) * (1.0 - life.cdf(f - t)) * g_ins.g(s, f, t);
           });
  }

  const IntensityFunction mu = effective_deletion_intensity(ms, relation);
  if (mu.is_zero()) {
    return model.batch.mean() * integrate_rate_times_g(model.insertion, g_ins, s, f);
  }
  auto breaks = internal::merge_breaks(
      {model.insertion.breakpoints(s, f), g_ins.a.breakpoints(s, f), mu.breakpoints(s, f)});
  internal::refine_by_mass(breaks, {&model.insertion, &g_ins.a, &mu}, 1.0);
  return model.batch.mean() *
         internal::integrate_pieces(breaks, [&](double t) {
           return model.insertion.eval(t) * std::exp(-mu.integrate(t, f)) * g_ins.g(s, f, t);
         });
}

double deletion_obsolescence(const ModelSet& ms, const std::string& relation,
                             const ObsolescenceWeight& g_del, TimePoint s, TimePoint f) {
  const auto& model = ms.relation(relation);
  if (f <= s || model.cardinality == 0.0) return 0.0;
  if (!model.memoryless()) {
    throw UnsupportedModel("deletion obsolescence needs memoryless lifespans");
  }
  const IntensityFunction mu = effective_deletion_intensity(ms, relation);
  if (mu.is_zero()) return 0.0;
  // Deletion-time density of a time-s tuple: mu~(t) exp(-M~(s,t)).
  auto breaks =
      internal::merge_breaks({mu.breakpoints(s, f), g_del.a.breakpoints(s, f)});
  internal::refine_by_mass(breaks, {&mu, &g_del.a}, 1.0);
  return model.cardinality *
         internal::integrate_pieces(breaks, [&](double t) {
           return mu.eval(t) * std::exp(-mu.integrate(s, t)) * g_del.g(s, f, t);
         });
}

double modification_obsolescence(const ModelSet& ms, const std::string& relation,
                                 const std::map<std::string, ModificationMetric>& metrics,
                                 TimePoint s, TimePoint f) {
  const auto& model = ms.relation(relation);
  if (model.cardinality == 0.0 || metrics.empty()) return 0.0;
  const double p_surv = survival_prob(ms, relation, s, f);
  double total = 0.0;

  for (const auto& [attr, metric] : metrics) {
    const auto attr_it = model.attributes.find(attr);
    if (attr_it == model.attributes.end()) {
      throw MissingModel("no modification model for attribute " + attr);
    }
    const AttributeSpec& spec = attr_it->second;

    if (const auto* walk = std::get_if<RandomWalkAttribute>(&spec.model)) {
      const auto* sq = std::get_if<SquaredErrorMetric>(&metric);
      if (!sq) throw UnsupportedModel("random walks support only the squared-error metric");
      const auto m = walk->moments(0.0, s, f, sq->legacy_walk_moment);
      total += p_surv * model.cardinality * sq->k * m.change_second_moment;
      continue;
    }

    if (spec.histogram.empty()) {
      throw MissingHistogram("modification cost needs the histogram of " + attr);
    }
    const auto& states = model_states(spec.model);
    const Matrix p = model_transition_matrix(spec.model, s, f);

    if (std::holds_alternative<UnitCostMetric>(metric)) {
      for (size_t u = 0; u < states.size(); ++u) {
        const auto hit = spec.histogram.find(states[u]);
        if (hit == spec.histogram.end() || hit->second == 0.0) continue;
        total += p_surv * hit->second * (1.0 - p(u, u));
      }
    } else if (const auto* cm = std::get_if<CostMatrixMetric>(&metric)) {
      if (cm->costs.rows() != states.size() || cm->costs.cols() != states.size()) {
        throw DimensionMismatch("cost matrix shape disagrees with the domain of " + attr);
      }
      for (size_t u = 0; u < states.size(); ++u) {
        const auto hit = spec.histogram.find(states[u]);
        if (hit == spec.histogram.end() || hit->second == 0.0) continue;
        double per_tuple = 0.0;
        for (size_t v = 0; v < states.size(); ++v) per_tuple += p(u, v) * cm->costs(u, v);
        total += p_surv * hit->second * per_tuple;
      }
    } else {
      const auto& sq = std::get<SquaredErrorMetric>(metric);
      const std::vector<double> value = numeric_states(states);
      for (size_t u = 0; u < states.size(); ++u) {
        const auto hit = spec.histogram.find(states[u]);
        if (hit == spec.histogram.end() || hit->second == 0.0) continue;
        double accum = 0.0;
        for (size_t v = 0; v < states.size(); ++v) {
          accum += (value[v] * value[v] - 2.0 * value[u] * value[v]) * p(u, v);
        }
        total += p_surv * hit->second * sq.k * (accum + value[u] * value[u]);
      }
    }
  }
  return total;
}

ObsolescenceBreakdown obsolescence(const ModelSet& ms, const std::string& relation,
                                   const CostSpec& spec, TimePoint s, TimePoint f) {
  ObsolescenceBreakdown b;
  b.insertion = insertion_obsolescence(ms, relation, spec.g_ins, s, f);
  b.deletion = deletion_obsolescence(ms, relation, spec.g_del, s, f);
  b.modification = modification_obsolescence(ms, relation, spec.metrics, s, f);
  b.total = b.insertion + b.deletion + b.modification;
  return b;
}

double transcription_cost(double setup_c, double beta, double inserted_surviving,
                          double modified_surviving, double deleted) {
  if (inserted_surviving < 0.0 || modified_surviving < 0.0 || deleted < 0.0) {
    throw Error("transcription counts must be nonnegative");
  }
  return setup_c + beta * (inserted_surviving + modified_surviving + deleted);
}

double expected_transcription_cost(const ModelSet& ms, const std::string& relation,
                                   const CostSpec& spec, TimePoint s, TimePoint f) {
  const auto& model = ms.relation(relation);
  const double inserted = model.batch.mean() * surviving_insertions_mean(ms, relation, s, f);
  double modified = 0.0;
  double survivors;
  if (model.attributes.empty() || model.cardinality == 0.0) {
    survivors = model.memoryless() ? survival_prob(ms, relation, s, f) * model.cardinality
                                   : expected_cardinality(ms, relation, s, f) - inserted;
  } else {
    const auto split = surviving_unmodified_mean(ms, relation, s, f);
    survivors = split.unmodified + split.modified;
    modified = split.modified;
  }
  const double deleted = model.cardinality - survivors;
  return transcription_cost(spec.setup_c, spec.beta, inserted, modified, deleted);
}

double total_cost(const std::vector<TimePoint>& refreshes, const CostSpec& spec,
                  const ModelSet& ms, const std::string& relation, TimePoint t0, TimePoint t) {
  TimePoint prev = t0;
  double total = 0.0;
  for (const TimePoint b : refreshes) {
    if (b <= prev || b > t) throw UnorderedSchedule("refresh times must increase within (t0, t]");
    total += spec.alpha * expected_transcription_cost(ms, relation, spec, prev, b) +
             (1.0 - spec.alpha) * obsolescence(ms, relation, spec, prev, b).total;
    prev = b;
  }
  if (prev < t) {
    total += (1.0 - spec.alpha) * obsolescence(ms, relation, spec, prev, t).total;
  }
  return total;
}

}  // namespace relevo
