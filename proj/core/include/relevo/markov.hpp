#pragma once

#include <string>
#include <variant>
#include <vector>

#include "relevo/intensity.hpp"
#include "relevo/matrix.hpp"
#include "relevo/rng.hpp"
#include "relevo/time.hpp"

namespace relevo {

// Attribute modification as a finite-state Markov chain on the transformed
// time axis: from value u, the next transition event fires with clock rate
// ell_u * gamma(t), and jumps to v with probability P(u, v). Diagonal mass in
// the supplied P folds into the exit rates (the generator is unchanged), so
// stored jumps always move.
class MarkovAttribute {
 public:
  static constexpr size_t kMaxStates = 4096;

  MarkovAttribute(std::vector<std::string> states, std::vector<double> exit_rates,
                  Matrix transition_probs, IntensityFunction gamma);

  // P(s, f) = exp(Gamma(s, f) * Q). Rows sum to 1 within 1e-9; entries are
  // clamped to [0, 1].
  Matrix transition_matrix(TimePoint s, TimePoint f) const;

  // Block-level chain for a partition of the states (lists of state
  // indices). Throws NotLumpable, naming the violating blocks, when the
  // block exit rates are not constant within a block (tolerance 1e-9).
  MarkovAttribute lumped(const std::vector<std::vector<size_t>>& blocks,
                         std::vector<std::string> block_names = {}) const;

  size_t state_count() const { return states_.size(); }
  const std::vector<std::string>& states() const { return states_; }
  size_t state_index(const std::string& name) const;  // UnknownValue if absent
  double exit_rate(size_t u) const { return exit_rates_[u]; }
  const Matrix& generator() const { return q_; }
  const IntensityFunction& gamma() const { return gamma_; }

  // Destination of one jump out of u (inverse-cdf draw on the jump row).
  size_t sample_jump(size_t u, RngStream& rng) const;

 private:
  std::vector<std::string> states_;
  std::vector<double> exit_rates_;  // after folding self-loops
  Matrix jumps_;                    // zero diagonal, rows sum to 1 where exit > 0
  Matrix q_;
  IntensityFunction gamma_;
};

// Two-state lumping of a large domain: 0 = still the time-s value,
// 1 = changed. theta is the exit rate from unchanged, theta_prime the return
// rate; the web-crawler case is theta_prime = 0.
struct BinaryLumpAttribute {
  double theta = 0.0;
  double theta_prime = 0.0;
  IntensityFunction gamma = IntensityFunction::constant(1.0);

  // (p_same, p_changed) over (s, f]; closed form, no matrix exponential.
  std::pair<double, double> transition(TimePoint s, TimePoint f) const;
  std::pair<double, double> transition_by_mass(double big_gamma) const;
  MarkovAttribute as_markov() const;
};

// Numeric attribute modified by IID steps with mean delta and variance
// sigma2 at each transition event.
struct RandomWalkAttribute {
  double delta = 0.0;
  double sigma2 = 0.0;
  IntensityFunction gamma = IntensityFunction::constant(1.0);

  struct Moments {
    double mean;                  // E[A(f)]
    double change_second_moment;  // E[(A(f) - A(s))^2]
  };
  // The compound-Poisson second moment is Gamma*sigma2 + Gamma*delta^2 +
  // Gamma^2*delta^2. With legacy_variant set, the alternative form
  // Gamma*(sigma2 + 2*Gamma*delta^2) is returned instead: it treats the
  // event count as having variance Gamma^2 rather than Gamma, so the two
  // differ whenever delta != 0 and Gamma != 1.
  Moments moments(double x0, TimePoint s, TimePoint f, bool legacy_variant = false) const;
  Moments moments_by_mass(double x0, double big_gamma, bool legacy_variant = false) const;
};

// At each transition event the value is redrawn from omega, ignoring the
// prior value; a draw may repeat the current value. The closed-form
// transition probabilities treat the value after at least one event as
// omega-distributed, which is exact when all values share one clock rate
// (exit_rates uniform); the embedded chain from as_markov() is exact in
// general and coincides in that regime.
class OverwriteAttribute {
 public:
  OverwriteAttribute(std::vector<std::string> states, std::vector<double> omega,
                     std::vector<double> exit_rates, IntensityFunction gamma);

  double transition(size_t u, size_t v, TimePoint s, TimePoint f) const;
  double transition(const std::string& u, const std::string& v, TimePoint s, TimePoint f) const;
  Matrix transition_matrix(TimePoint s, TimePoint f) const;

  // Equivalent jump chain: exit rates ell_v * (1 - omega(v)), jump
  // probabilities omega(v) / (1 - omega(u)).
  MarkovAttribute as_markov() const;

  const std::vector<std::string>& states() const { return states_; }
  size_t state_index(const std::string& name) const;
  const std::vector<double>& omega() const { return omega_; }
  const std::vector<double>& exit_rates() const { return exit_rates_; }
  const IntensityFunction& gamma() const { return gamma_; }

 private:
  std::vector<std::string> states_;
  std::vector<double> omega_;
  std::vector<double> exit_rates_;
  IntensityFunction gamma_;
};

// Joint transition probability of independently varying attributes:
// the product of per-attribute probabilities. The joint rate matrix is never
// materialized.
double compound_transition(const std::vector<const MarkovAttribute*>& attrs,
                           const std::vector<size_t>& from, const std::vector<size_t>& to,
                           TimePoint s, TimePoint f);

// One attribute's modification model.
using AttributeModel =
    std::variant<MarkovAttribute, BinaryLumpAttribute, RandomWalkAttribute, OverwriteAttribute>;

// Finite-domain views shared by the prediction code. RandomWalkAttribute has
// no finite domain; these throw UnsupportedModel for it.
bool has_finite_domain(const AttributeModel& model);
const std::vector<std::string>& model_states(const AttributeModel& model);
Matrix model_transition_matrix(const AttributeModel& model, TimePoint s, TimePoint f);
// Relative exit rate of a state, after overwrite folding (no-op rewrites do
// not count as alterations).
double model_exit_rate(const AttributeModel& model, size_t state);
const IntensityFunction& model_gamma(const AttributeModel& model);

}  // namespace relevo
