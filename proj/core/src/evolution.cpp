#include "relevo/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "piecewise_quad.hpp"
#include "relevo/errors.hpp"

namespace relevo {
namespace {

using internal::integrate_pieces;
using internal::kGlNode;
using internal::kGlWeight;
using internal::merge_breaks;
using internal::refine_by_mass;

double survivor_tail_ratio(const GeneralLifespan& life, double age, double dt) {
  const double at_s = 1.0 - life.cdf(age);
  if (at_s <= 0.0) return 0.0;
  return (1.0 - life.cdf(age + dt)) / at_s;
}

}  // namespace

IntensityFunction effective_deletion_intensity(const ModelSet& ms, const std::string& relation) {
  const auto weights = ms.graph.has_relation(relation)
                           ? ms.graph.closure(relation)
                           : std::map<std::string, double>{{relation, 1.0}};
  std::vector<IntensityFunction> parts;
  for (const auto& [name, w] : weights) {
    parts.push_back(ms.relation(name).deletion.scaled(w));
  }
  return IntensityFunction::sum(parts);
}

double survival_prob(const ModelSet& ms, const std::string& relation, TimePoint s, TimePoint f) {
  const auto& model = ms.relation(relation);
  if (!model.memoryless()) {
    throw UnsupportedModel("survival_prob needs memoryless lifespans; see expected_cardinality");
  }
  return std::exp(-effective_deletion_intensity(ms, relation).integrate(s, f));
}

double survival_prob_sampled(const ModelSet& ms,
                             const std::vector<std::string>& closure_relations,
                             const std::vector<std::vector<double>>& w_samples, TimePoint s,
                             TimePoint f) {
  if (w_samples.empty()) {
    throw MissingMultiplicityData("the general survival path needs multiplicity samples");
  }
  std::vector<double> masses;
  for (const auto& name : closure_relations) {
    masses.push_back(ms.relation(name).deletion.integrate(s, f));
  }
  double total = 0.0;
  for (const auto& sample : w_samples) {
    if (sample.size() != masses.size()) {
      throw DimensionMismatch("multiplicity sample length disagrees with the closure");
    }
    double exponent = 0.0;
    for (size_t i = 0; i < masses.size(); ++i) exponent += sample[i] * masses[i];
    total += std::exp(-exponent);
  }
  return total / static_cast<double>(w_samples.size());
}

double surviving_insertions_mean(const ModelSet& ms, const std::string& relation, TimePoint s,
                                 TimePoint f) {
  const auto& model = ms.relation(relation);
  if (f <= s) return 0.0;

  if (!model.memoryless()) {
    const auto& life = *model.lifespan;
    auto breaks = model.insertion.breakpoints(s, f);
    // The lifespan tail has kinks at f - knot_age.
    std::vector<double> knots;
    for (const auto& [age, p] : life.cdf_knots) {
      (void)p;
      const double t = f - age;
      if (t > s && t < f) knots.push_back(t);
    }
    breaks = merge_breaks({std::move(breaks), std::move(knots)});
    const IntensityFunction* controls[] = {&model.insertion};
    std::vector<const IntensityFunction*> ctrl(controls, controls + 1);
    refine_by_mass(breaks, ctrl, 1.0);
    return integrate_pieces(breaks, [&](double t) {
      return model.insertion.eval(t) * (1.0 - life.cdf(f - t));
    });
  }

  const IntensityFunction mu = effective_deletion_intensity(ms, relation);
  const double lambda_mass = model.insertion.integrate(s, f);
  if (mu.is_zero()) return lambda_mass;

  if (const auto alpha = mu.ratio_to(model.insertion); alpha && *alpha > 0.0) {
    return -std::expm1(-*alpha * lambda_mass) / *alpha;
  }

  auto breaks = merge_breaks({model.insertion.breakpoints(s, f), mu.breakpoints(s, f)});
  std::vector<const IntensityFunction*> ctrl = {&model.insertion, &mu};
  refine_by_mass(breaks, ctrl, 1.0);
  return integrate_pieces(breaks, [&](double t) {
    return model.insertion.eval(t) * std::exp(-mu.integrate(t, f));
  });
}

double expected_cardinality(const ModelSet& ms, const std::string& relation, TimePoint s,
                            TimePoint f) {
  const auto& model = ms.relation(relation);
  const double inserted = model.batch.mean() * surviving_insertions_mean(ms, relation, s, f);

  if (!model.memoryless()) {
    if (!ms.graph.isolated(relation)) {
      throw UnsupportedModel("general lifespans need an isolated relation");
    }
    if (model.cardinality > 0.0 && model.lifespan->ages.empty()) {
      throw MissingState("general lifespan needs the tuple-age table");
    }
    double survivors = 0.0;
    if (!model.lifespan->ages.empty()) {
      double mean_ratio = 0.0;
      for (double age : model.lifespan->ages) {
        mean_ratio += survivor_tail_ratio(*model.lifespan, age, f - s);
      }
      mean_ratio /= static_cast<double>(model.lifespan->ages.size());
      survivors = model.cardinality * mean_ratio;
    }
    return survivors + inserted;
  }

  return survival_prob(ms, relation, s, f) * model.cardinality + inserted;
}

double compound_deletion_mean(const RelationModel& model, TimePoint s, TimePoint f) {
  return model.deletion_batch.mean() * model.deletion.integrate(s, f);
}

Histogram expected_histogram(const ModelSet& ms, const std::string& relation,
                             const std::string& attribute, TimePoint s, TimePoint f) {
  const auto& model = ms.relation(relation);
  const auto attr_it = model.attributes.find(attribute);
  if (attr_it == model.attributes.end()) {
    throw MissingAttributeModel("no model for attribute " + attribute + " of " + relation);
  }
  const AttributeSpec& spec = attr_it->second;
  if (!has_finite_domain(spec.model)) {
    throw UnsupportedModel("expected_histogram needs a finite attribute domain");
  }
  const auto& states = model_states(spec.model);
  const size_t n = states.size();

  // Survivors: p_R(s,f) * histogram row-through P(s,f).
  const double p_surv = survival_prob(ms, relation, s, f);
  const Matrix p_sf = model_transition_matrix(spec.model, s, f);
  std::vector<double> counts(n, 0.0);
  for (size_t u = 0; u < n; ++u) {
    const auto hit = spec.histogram.find(states[u]);
    const double h = hit == spec.histogram.end() ? 0.0 : hit->second;
    if (h == 0.0) continue;
    for (size_t v = 0; v < n; ++v) counts[v] += p_surv * h * p_sf(u, v);
  }

  // Insertions: stream omega through P(t,f), weighted by survival from t.
  if (f > s && !model.insertion.is_zero()) {
    const std::vector<double> omega = spec.insertion_distribution();
    const IntensityFunction mu = effective_deletion_intensity(ms, relation);
    const IntensityFunction& gamma = model_gamma(spec.model);
    auto breaks = merge_breaks({model.insertion.breakpoints(s, f), mu.breakpoints(s, f),
                                gamma.breakpoints(s, f)});
    std::vector<const IntensityFunction*> ctrl = {&model.insertion, &mu, &gamma};
    refine_by_mass(breaks, ctrl, 1.0);

    std::vector<double> inserted(n, 0.0);
    std::vector<double> pushed(n);
    for (size_t i = 0; i + 1 < breaks.size(); ++i) {
      const double mid = 0.5 * (breaks[i] + breaks[i + 1]);
      const double half = 0.5 * (breaks[i + 1] - breaks[i]);
      for (int k = 0; k < 16; ++k) {
        const double t = mid + half * kGlNode[k];
        const double weight =
            kGlWeight[k] * half * model.insertion.eval(t) * std::exp(-mu.integrate(t, f));
        if (weight == 0.0) continue;
        const Matrix p_tf = model_transition_matrix(spec.model, t, f);
        std::fill(pushed.begin(), pushed.end(), 0.0);
        for (size_t u = 0; u < n; ++u) {
          if (omega[u] == 0.0) continue;
          for (size_t v = 0; v < n; ++v) pushed[v] += omega[u] * p_tf(u, v);
        }
        for (size_t v = 0; v < n; ++v) inserted[v] += weight * pushed[v];
      }
    }
    const double batch_mean = model.batch.mean();
    for (size_t v = 0; v < n; ++v) counts[v] += batch_mean * inserted[v];
  }

  Histogram out;
  for (size_t v = 0; v < n; ++v) out[states[v]] = counts[v];
  return out;
}

double first_alteration(const ModelSet& ms, const std::string& relation,
                        const AlterationState& state, TimePoint s, TimePoint f) {
  const auto& model = ms.relation(relation);
  double z = model.insertion.integrate(s, f);

  const auto weights = ms.graph.has_relation(relation)
                           ? ms.graph.closure(relation)
                           : std::map<std::string, double>{{relation, 1.0}};
  for (const auto& [name, w] : weights) {
    (void)w;
    double dependents;
    if (name == relation) {
      dependents = model.cardinality;
    } else {
      const auto it = state.dependent_counts.find(name);
      if (it == state.dependent_counts.end()) {
        throw MissingState("first_alteration needs D(R," + name + ",s)");
      }
      dependents = it->second;
    }
    z += dependents * ms.relation(name).deletion.integrate(s, f);
  }

  for (const auto& [attr, spec] : model.attributes) {
    double exit_mass;  // h(R,A,s)
    if (has_finite_domain(spec.model)) {
      if (spec.histogram.empty() && model.cardinality > 0.0) {
        throw MissingState("first_alteration needs the histogram of " + attr);
      }
      const auto& states = model_states(spec.model);
      exit_mass = 0.0;
      for (size_t v = 0; v < states.size(); ++v) {
        const auto hit = spec.histogram.find(states[v]);
        if (hit != spec.histogram.end()) exit_mass += hit->second * model_exit_rate(spec.model, v);
      }
    } else {
      exit_mass = model.cardinality;  // random walk: unit relative exit rate
    }
    z += exit_mass * model_gamma(spec.model).integrate(s, f);
  }
  return -std::expm1(-z);
}

double first_alteration(const ModelSet& ms, const std::string& relation, TimePoint s,
                        TimePoint f) {
  return first_alteration(ms, relation, {ms.relation(relation).dependent_counts}, s, f);
}

UnmodifiedSplit surviving_unmodified_mean(const ModelSet& ms, const std::string& relation,
                                          TimePoint s, TimePoint f) {
  const auto& model = ms.relation(relation);
  const double p_surv = survival_prob(ms, relation, s, f);
  const double survivors = p_surv * model.cardinality;
  if (model.attributes.empty() || model.cardinality == 0.0) {
    return {survivors, 0.0};
  }

  // Per-attribute probability that a random tuple keeps its value; the
  // compound probability is exact for one attribute and an independence
  // product across several.
  double keep_all = 1.0;
  for (const auto& [attr, spec] : model.attributes) {
    double keep = 0.0;
    if (has_finite_domain(spec.model)) {
      if (spec.histogram.empty()) {
        throw MissingHistogram("surviving_unmodified_mean needs the histogram of " + attr);
      }
      const auto& states = model_states(spec.model);
      const Matrix p = model_transition_matrix(spec.model, s, f);
      for (size_t v = 0; v < states.size(); ++v) {
        const auto hit = spec.histogram.find(states[v]);
        if (hit != spec.histogram.end()) keep += hit->second * p(v, v);
      }
      keep /= model.cardinality;
    } else {
      // Continuous steps never return exactly: unchanged means no event.
      keep = std::exp(-model_gamma(spec.model).integrate(s, f));
    }
    keep_all *= keep;
  }
  const double unmodified = survivors * keep_all;
  return {unmodified, survivors - unmodified};
}

}  // namespace relevo
