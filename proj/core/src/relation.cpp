#include "relevo/relation.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "relevo/errors.hpp"

namespace relevo {

double GeneralLifespan::cdf(double age) const {
  if (cdf_knots.empty() || age < cdf_knots.front().first) return 0.0;
  if (age >= cdf_knots.back().first) return cdf_knots.back().second;
  // Last knot with knot.age <= age; ties resolve to the highest p
  // (right-continuity at jumps).
  size_t lo = 0, hi = cdf_knots.size() - 1;
  while (hi - lo > 1) {
    const size_t mid = (lo + hi) / 2;
    (cdf_knots[mid].first <= age ? lo : hi) = mid;
  }
  const auto& [x0, p0] = cdf_knots[lo];
  const auto& [x1, p1] = cdf_knots[hi];
  if (x1 <= x0) return p1;
  if (cdf_knots[hi].first <= age) return p1;
  return p0 + (p1 - p0) * (age - x0) / (x1 - x0);
}

double GeneralLifespan::quantile(double p) const {
  if (cdf_knots.empty() || p <= cdf_knots.front().second) return cdf_knots.front().first;
  for (size_t i = 1; i < cdf_knots.size(); ++i) {
    const auto& [x0, p0] = cdf_knots[i - 1];
    const auto& [x1, p1] = cdf_knots[i];
    if (p <= p1) {
      if (p1 <= p0) return x1;
      return x0 + (x1 - x0) * (p - p0) / (p1 - p0);
    }
  }
  return cdf_knots.back().first;
}

void GeneralLifespan::sketch_ages() {
  if (ages.size() <= kSketchQuantiles) return;
  std::vector<double> sorted = ages;
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> sketch(kSketchQuantiles);
  const size_t n = sorted.size();
  for (size_t q = 0; q < kSketchQuantiles; ++q) {
    // Midpoint rule keeps the sketch mean close to the sample mean.
    const double pos = (q + 0.5) / kSketchQuantiles * n;
    sketch[q] = sorted[std::min(n - 1, static_cast<size_t>(pos))];
  }
  ages = std::move(sketch);
}

void GeneralLifespan::validate() const {
  if (cdf_knots.empty()) throw ConfigError("general lifespan needs cdf knots");
  double last_age = -1.0, last_p = -1.0;
  for (const auto& [age, p] : cdf_knots) {
    if (age < last_age || p < last_p) {
      throw ConfigError("lifespan cdf knots must be nondecreasing");
    }
    if (p < 0.0 || p > 1.0) throw ConfigError("lifespan cdf values must lie in [0,1]");
    last_age = age;
    last_p = p;
  }
  if (cdf_knots.front().second > 1e-9) throw ConfigError("lifespan cdf must start at 0");
  if (std::fabs(cdf_knots.back().second - 1.0) > 1e-9) {
    throw ConfigError("lifespan cdf must reach 1");
  }
  for (double a : ages) {
    if (a < 0.0) throw ConfigError("tuple ages must be nonnegative");
  }
}

std::vector<double> AttributeSpec::insertion_distribution() const {
  const auto& states = model_states(model);
  std::vector<double> dist(states.size(), 0.0);
  double total = 0.0;
  if (insertion_values.empty()) {
    for (size_t i = 0; i < states.size(); ++i) {
      const auto it = histogram.find(states[i]);
      dist[i] = it == histogram.end() ? 0.0 : it->second;
      total += dist[i];
    }
    if (total <= 0.0) {
      // Nothing observed: fall back to uniform.
      std::fill(dist.begin(), dist.end(), 1.0 / static_cast<double>(states.size()));
      return dist;
    }
  } else {
    for (size_t i = 0; i < states.size(); ++i) {
      const auto it = insertion_values.find(states[i]);
      dist[i] = it == insertion_values.end() ? 0.0 : it->second;
      total += dist[i];
    }
    if (total <= 0.0) throw ConfigError("insertion value distribution sums to zero");
  }
  for (double& d : dist) d /= total;
  return dist;
}

void RelationModel::validate() const {
  if (cardinality < 0.0) throw ConfigError("cardinality must be nonnegative");
  for (const auto& [attr, spec] : attributes) {
    if (spec.histogram.empty()) continue;
    double total = 0.0;
    for (const auto& [value, count] : spec.histogram) {
      if (count < 0.0) throw ConfigError("histogram counts must be nonnegative");
      if (has_finite_domain(spec.model)) {
        const auto& states = model_states(spec.model);
        if (std::find(states.begin(), states.end(), value) == states.end()) {
          throw ConfigError("histogram value " + value + " outside the domain of " + attr);
        }
      }
      total += count;
    }
    if (std::fabs(total - cardinality) > 1e-6 * (1.0 + cardinality)) {
      throw ConfigError("histogram of " + attr + " does not sum to the cardinality of " + name);
    }
  }
  if (lifespan) lifespan->validate();
}

void DependencyGraph::add_relation(const std::string& name) {
  if (edges_.count(name)) return;
  edges_[name];
  order_.push_back(name);
}

void DependencyGraph::add_edge(const std::string& from, const std::string& to,
                               int multiplicity) {
  if (multiplicity < 1) throw ConfigError("edge multiplicity must be positive");
  if (from == to) throw ConfigError("self edges are not allowed");
  add_relation(from);
  add_relation(to);
  edges_[from][to] += multiplicity;
}

bool DependencyGraph::has_relation(const std::string& name) const {
  return edges_.count(name) > 0;
}

bool DependencyGraph::isolated(const std::string& name) const {
  const auto it = edges_.find(name);
  if (it == edges_.end()) return true;
  if (!it->second.empty()) return false;
  for (const auto& [from, outgoing] : edges_) {
    (void)from;
    if (outgoing.count(name)) return false;
  }
  return true;
}

const std::map<std::string, int>& DependencyGraph::direct_edges(const std::string& from) const {
  const auto it = edges_.find(from);
  if (it == edges_.end()) throw MissingRelation("unknown relation: " + from);
  return it->second;
}

void DependencyGraph::validate() const {
  // Colors: 0 unvisited, 1 on stack, 2 done.
  std::map<std::string, int> color;
  std::function<void(const std::string&)> visit = [&](const std::string& node) {
    color[node] = 1;
    for (const auto& [next, w] : edges_.at(node)) {
      (void)w;
      const int c = color[next];
      if (c == 1) throw CycleDetected("dependency cycle through " + next);
      if (c == 0) visit(next);
    }
    color[node] = 2;
  };
  for (const auto& name : order_) {
    if (color[name] == 0) visit(name);
  }
}

std::map<std::string, double> DependencyGraph::closure(const std::string& relation) const {
  if (!has_relation(relation)) throw MissingRelation("unknown relation: " + relation);
  validate();
  std::map<std::string, double> weight;
  weight[relation] = 1.0;
  // DFS accumulating path products; termination is guaranteed by acyclicity.
  std::function<void(const std::string&, double)> spread = [&](const std::string& node,
                                                               double w) {
    for (const auto& [next, mult] : edges_.at(node)) {
      weight[next] += w * mult;
      spread(next, w * mult);
    }
  };
  spread(relation, 1.0);
  return weight;
}

const RelationModel& ModelSet::relation(const std::string& name) const {
  const auto it = relations.find(name);
  if (it == relations.end()) throw MissingRelation("unknown relation: " + name);
  return it->second;
}

void ModelSet::validate() const {
  graph.validate();
  for (const auto& [name, model] : relations) {
    model.validate();
    if (model.lifespan && !graph.isolated(name)) {
      // Non-exponential lifespans only work without referential integrity.
      throw UnsupportedModel(
          "general lifespans cannot be combined with dependency edges: " + name);
    }
  }
  for (const auto& name : graph.relations()) {
    if (!relations.count(name)) {
      throw MissingRelation("graph references unmodeled relation: " + name);
    }
  }
}

}  // namespace relevo
