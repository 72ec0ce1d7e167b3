#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "relevo/markov.hpp"
#include "relevo/stochastic.hpp"

namespace relevo {

// Value -> count at some reference time. Expected histograms carry
// fractional counts.
using Histogram = std::map<std::string, double>;

// Tuple lifetimes with a general (non-memoryless) age distribution, usable
// for single relations only. The cdf is piecewise linear between knots;
// duplicate ages express jumps (evaluation is right-continuous). The age
// table holds the tuple ages at the reference time, either in full or as a
// midpoint quantile sketch: averages over the sketch track the full table
// to within one part in 2 * kSketchQuantiles of the age distribution.
struct GeneralLifespan {
  std::vector<std::pair<double, double>> cdf_knots;  // (age, G(age)), G(0)=0, G->1
  std::vector<double> ages;                          // ages at the reference time

  static constexpr size_t kSketchQuantiles = 256;

  double cdf(double age) const;
  // Smallest age with cdf(age) >= p.
  double quantile(double p) const;
  // Replaces the age table by its quantile sketch when it is larger.
  void sketch_ages();
  void validate() const;
};

// One modifiable attribute of a relation: its modification model, the value
// histogram at the reference time, and the value distribution of newly
// inserted tuples (empty = use the normalized histogram).
struct AttributeSpec {
  AttributeModel model;
  Histogram histogram;
  std::map<std::string, double> insertion_values;

  std::vector<double> insertion_distribution() const;  // indexed like model_states
};

// Per-relation evolution parameters, anchored at a reference time s: the
// insertion process, intrinsic deletions, lifespan law, attribute models,
// and the state snapshot (cardinality and histograms) at s.
struct RelationModel {
  std::string name;
  IntensityFunction insertion = IntensityFunction::constant(0.0);
  BatchDistribution batch;
  IntensityFunction deletion = IntensityFunction::constant(0.0);
  BatchDistribution deletion_batch;  // compound-deletion alternative only
  std::optional<GeneralLifespan> lifespan;
  double cardinality = 0.0;
  std::map<std::string, AttributeSpec> attributes;
  // Optional snapshot of D(R,S,s): tuples of each closure relation S whose
  // deletion would delete a tuple of R. Feeds first-alteration predictions.
  std::map<std::string, double> dependent_counts;

  bool memoryless() const { return !lifespan.has_value(); }
  void validate() const;  // histogram totals must match the cardinality
};

// Referential-integrity structure: an edge R -> S with multiplicity w means
// every tuple of R is deleted when any of w fixed tuples of S is deleted.
// Multigraph edges between the same pair fold into one weighted edge.
class DependencyGraph {
 public:
  void add_relation(const std::string& name);
  void add_edge(const std::string& from, const std::string& to, int multiplicity);

  bool has_relation(const std::string& name) const;
  // True when no dependency edge touches the relation (or it is unknown).
  bool isolated(const std::string& name) const;
  const std::vector<std::string>& relations() const { return order_; }
  const std::map<std::string, int>& direct_edges(const std::string& from) const;

  // Throws CycleDetected when the graph has a directed cycle.
  void validate() const;

  // Effective multiplicities over the reachability closure S(R): for each
  // reachable S the sum over paths of the product of edge multiplicities,
  // with R itself carrying weight 1. Lemma-style fixed-multiplicity
  // semantics: the double edge of a diamond counts twice.
  std::map<std::string, double> closure(const std::string& relation) const;

 private:
  std::vector<std::string> order_;
  std::map<std::string, std::map<std::string, int>> edges_;
};

// A set of relation models plus the dependency graph: the full model
// configuration every prediction works from.
struct ModelSet {
  std::map<std::string, RelationModel> relations;
  DependencyGraph graph;
  TimePoint reference_time = 0.0;

  const RelationModel& relation(const std::string& name) const;  // MissingRelation
  void validate() const;
};

}  // namespace relevo
