#pragma once

#include <map>
#include <string>
#include <vector>

#include "relevo/relation.hpp"

namespace relevo {

// Effective deletion intensity mu~_R(t) = sum over the closure S(R) of
// w(R,S) * mu_S(t), with R itself at weight 1. Fixed-multiplicity semantics.
IntensityFunction effective_deletion_intensity(const ModelSet& ms, const std::string& relation);

// Probability that a tuple of R(s) survives through f:
// exp(-integral of mu~ over [s,f]). Memoryless lifespans only.
double survival_prob(const ModelSet& ms, const std::string& relation, TimePoint s, TimePoint f);

// General-multiplicity path: joint samples of the multiplicity vector
// w(r, S) over `closure_relations`, averaged as
// mean over samples of exp(-sum_S w_S * M_S(s, f)).
double survival_prob_sampled(const ModelSet& ms,
                             const std::vector<std::string>& closure_relations,
                             const std::vector<std::vector<double>>& w_samples, TimePoint s,
                             TimePoint f);

// Lambda~(s,f) = integral over (s,f] of lambda(t) * p(t,f) dt: the expected
// number of insertion events whose tuples survive through f. Multiply by
// E[batch] for tuple counts. Uses the closed form
// (1 - exp(-alpha * Lambda)) / alpha when mu~ = alpha * lambda, and the
// lifespan tail integral for general lifespans.
double surviving_insertions_mean(const ModelSet& ms, const std::string& relation, TimePoint s,
                                 TimePoint f);

// E[|R(f)|] = p_R(s,f) |R(s)| + E[batch] * Lambda~(s,f); for general
// lifespans the survivor term averages conditional tail ratios over the age
// table.
double expected_cardinality(const ModelSet& ms, const std::string& relation, TimePoint s,
                            TimePoint f);

// Compound-deletion alternative: E[deleted tuples] = E[batch-] * M_R(s,f).
// Only sound for stable or steadily growing relations.
double compound_deletion_mean(const RelationModel& model, TimePoint s, TimePoint f);

// Expected value histogram of attribute A at time f: survivors transformed
// by P(s,f) plus insertions streamed through P(t,f), weighted by survival
// from their insertion time.
Histogram expected_histogram(const ModelSet& ms, const std::string& relation,
                             const std::string& attribute, TimePoint s, TimePoint f);

// Frozen time-s counts feeding the first-alteration bound: D(R,S,s) is the
// number of tuples of S whose deletion would delete some tuple of R.
// D(R,R,s) is the relation's own cardinality and is filled in automatically.
struct AlterationState {
  std::map<std::string, double> dependent_counts;
};

// Probability of any change to R in (s,f]: 1 - exp(-Z(s,f)) with
// Z = Lambda_R + sum_S D(R,S,s) M_S + sum_A h(R,A,s) Gamma_A and
// h = sum_v hist_A(v) * ell_v. D and h are frozen at s; for long intervals
// this is an approximation.
double first_alteration(const ModelSet& ms, const std::string& relation,
                        const AlterationState& state, TimePoint s, TimePoint f);

// Convenience overload using the dependent counts stored on the model.
double first_alteration(const ModelSet& ms, const std::string& relation, TimePoint s,
                        TimePoint f);

struct UnmodifiedSplit {
  double unmodified;  // E[Y-]: survivors whose modifiable values at f equal those at s
  double modified;    // E[Y+] = E[Y] - E[Y-]
};

// Survivor split by modification status. With several modifiable attributes
// the per-attribute value distributions are treated as independent.
UnmodifiedSplit surviving_unmodified_mean(const ModelSet& ms, const std::string& relation,
                                          TimePoint s, TimePoint f);

}  // namespace relevo
