#include "relevo/markov.hpp"

#include <algorithm>
#include <cmath>

#include "relevo/errors.hpp"

namespace relevo {

MarkovAttribute::MarkovAttribute(std::vector<std::string> states,
                                 std::vector<double> exit_rates, Matrix transition_probs,
                                 IntensityFunction gamma)
    : states_(std::move(states)),
      exit_rates_(std::move(exit_rates)),
      gamma_(std::move(gamma)) {
  const size_t n = states_.size();
  if (n == 0) throw Error("markov attribute needs at least one state");
  if (n > kMaxStates) {
    throw UnsupportedModel(
        "domain too large for a dense chain; use lumping, a random walk, or overwrites");
  }
  if (exit_rates_.size() != n || transition_probs.rows() != n || transition_probs.cols() != n) {
    throw DimensionMismatch("markov attribute shapes disagree");
  }
  jumps_ = Matrix(n, n);
  for (size_t u = 0; u < n; ++u) {
    if (exit_rates_[u] < 0.0) throw Error("exit rates must be nonnegative");
    double off = 0.0;
    for (size_t v = 0; v < n; ++v) {
      if (u == v) continue;
      const double p = transition_probs(u, v);
      if (p < -1e-12) throw Error("transition probabilities must be nonnegative");
      off += std::max(p, 0.0);
    }
    if (exit_rates_[u] == 0.0) continue;
    const double diag = transition_probs(u, u);
    if (std::fabs(off + diag - 1.0) > 1e-9) {
      throw Error("transition probability row does not sum to 1: state " + states_[u]);
    }
    // Fold self-transition mass into the exit rate.
    exit_rates_[u] *= off;
    if (off > 0.0) {
      for (size_t v = 0; v < n; ++v) {
        if (u != v) jumps_(u, v) = std::max(transition_probs(u, v), 0.0) / off;
      }
    }
  }
  q_ = Matrix(n, n);
  for (size_t u = 0; u < n; ++u) {
    for (size_t v = 0; v < n; ++v) {
      if (u == v) continue;
      q_(u, v) = exit_rates_[u] * jumps_(u, v);
    }
    q_(u, u) = -exit_rates_[u];
  }
}

Matrix MarkovAttribute::transition_matrix(TimePoint s, TimePoint f) const {
  Matrix scaled = q_;
  scaled *= gamma_.integrate(s, f);
  return expm_stochastic(std::move(scaled));
}

size_t MarkovAttribute::state_index(const std::string& name) const {
  const auto it = std::find(states_.begin(), states_.end(), name);
  if (it == states_.end()) throw UnknownValue("unknown state: " + name);
  return static_cast<size_t>(it - states_.begin());
}

size_t MarkovAttribute::sample_jump(size_t u, RngStream& rng) const {
  const size_t n = states_.size();
  double u01 = rng.uniform01();
  for (size_t v = 0; v < n; ++v) {
    if (v == u) continue;
    u01 -= jumps_(u, v);
    if (u01 < 0.0) return v;
  }
  // Roundoff tail: return the last reachable state.
  for (size_t v = n; v-- > 0;) {
    if (v != u && jumps_(u, v) > 0.0) return v;
  }
  return u;
}

MarkovAttribute MarkovAttribute::lumped(const std::vector<std::vector<size_t>>& blocks,
                                        std::vector<std::string> block_names) const {
  const size_t n = states_.size();
  const size_t m = blocks.size();
  std::vector<size_t> owner(n, m);
  for (size_t b = 0; b < m; ++b) {
    for (size_t u : blocks[b]) {
      if (u >= n || owner[u] != m) throw Error("blocks must partition the states");
      owner[u] = b;
    }
  }
  for (size_t u = 0; u < n; ++u) {
    if (owner[u] == m) throw Error("blocks must partition the states");
  }

  // Block exit rates must be constant within each source block.
  Matrix rates(m, m);
  for (size_t b = 0; b < m; ++b) {
    for (size_t c = 0; c < m; ++c) {
      if (b == c) continue;
      bool first = true;
      double common = 0.0;
      for (size_t u : blocks[b]) {
        double sum = 0.0;
        for (size_t v : blocks[c]) sum += q_(u, v);
        if (first) {
          common = sum;
          first = false;
        } else if (std::fabs(sum - common) > 1e-9 * (1.0 + std::fabs(common))) {
          throw NotLumpable("blocks " + std::to_string(b) + " -> " + std::to_string(c) +
                            " violate lumpability by " + std::to_string(sum - common));
        }
      }
      rates(b, c) = common;
    }
  }

  if (block_names.empty()) {
    for (const auto& block : blocks) {
      std::string name;
      for (size_t u : block) {
        if (!name.empty()) name += '+';
        name += states_[u];
      }
      block_names.push_back(std::move(name));
    }
  }

  std::vector<double> exits(m, 0.0);
  Matrix probs(m, m);
  for (size_t b = 0; b < m; ++b) {
    for (size_t c = 0; c < m; ++c) {
      if (b != c) exits[b] += rates(b, c);
    }
    if (exits[b] > 0.0) {
      for (size_t c = 0; c < m; ++c) {
        if (b != c) probs(b, c) = rates(b, c) / exits[b];
      }
    }
  }
  return MarkovAttribute(std::move(block_names), std::move(exits), std::move(probs), gamma_);
}

std::pair<double, double> BinaryLumpAttribute::transition(TimePoint s, TimePoint f) const {
  return transition_by_mass(gamma.integrate(s, f));
}

std::pair<double, double> BinaryLumpAttribute::transition_by_mass(double big_gamma) const {
  const double total = theta + theta_prime;
  if (total <= 0.0) return {1.0, 0.0};
  const double p_same = (theta_prime + theta * std::exp(-total * big_gamma)) / total;
  return {p_same, 1.0 - p_same};
}

MarkovAttribute BinaryLumpAttribute::as_markov() const {
  Matrix p(2, 2);
  p(0, 1) = 1.0;
  p(1, 0) = 1.0;
  return MarkovAttribute({"unchanged", "changed"}, {theta, theta_prime}, std::move(p), gamma);
}

RandomWalkAttribute::Moments RandomWalkAttribute::moments(double x0, TimePoint s, TimePoint f,
                                                          bool legacy_variant) const {
  return moments_by_mass(x0, gamma.integrate(s, f), legacy_variant);
}

RandomWalkAttribute::Moments RandomWalkAttribute::moments_by_mass(double x0, double big_gamma,
                                                                  bool legacy_variant) const {
  const double g = big_gamma;
  Moments m;
  m.mean = x0 + g * delta;
  if (legacy_variant) {
    m.change_second_moment = g * (sigma2 + 2.0 * g * delta * delta);
  } else {
    // Var[sum] = E[N] sigma2 + Var[N] delta^2 with N ~ Poisson(Gamma), plus
    // the squared mean.
    m.change_second_moment = g * sigma2 + g * delta * delta + g * g * delta * delta;
  }
  return m;
}

OverwriteAttribute::OverwriteAttribute(std::vector<std::string> states, std::vector<double> omega,
                                       std::vector<double> exit_rates, IntensityFunction gamma)
    : states_(std::move(states)),
      omega_(std::move(omega)),
      exit_rates_(std::move(exit_rates)),
      gamma_(std::move(gamma)) {
  const size_t n = states_.size();
  if (n == 0) throw Error("overwrite attribute needs at least one state");
  if (omega_.size() != n || exit_rates_.size() != n) {
    throw DimensionMismatch("overwrite attribute shapes disagree");
  }
  double total = 0.0;
  for (double w : omega_) {
    if (w < 0.0) throw Error("overwrite distribution must be nonnegative");
    total += w;
  }
  if (std::fabs(total - 1.0) > 1e-12) throw Error("overwrite distribution must sum to 1");
  for (double l : exit_rates_) {
    if (l < 0.0) throw Error("exit rates must be nonnegative");
  }
}

double OverwriteAttribute::transition(size_t u, size_t v, TimePoint s, TimePoint f) const {
  if (u >= states_.size() || v >= states_.size()) throw UnknownValue("state index out of range");
  const double stay = std::exp(-exit_rates_[u] * gamma_.integrate(s, f));
  if (u == v) return stay * (1.0 - omega_[u]) + omega_[u];
  return (1.0 - stay) * omega_[v];
}

double OverwriteAttribute::transition(const std::string& u, const std::string& v, TimePoint s,
                                      TimePoint f) const {
  return transition(state_index(u), state_index(v), s, f);
}

Matrix OverwriteAttribute::transition_matrix(TimePoint s, TimePoint f) const {
  const size_t n = states_.size();
  const double mass = gamma_.integrate(s, f);
  Matrix p(n, n);
  for (size_t u = 0; u < n; ++u) {
    const double stay = std::exp(-exit_rates_[u] * mass);
    for (size_t v = 0; v < n; ++v) {
      p(u, v) = (u == v) ? stay * (1.0 - omega_[u]) + omega_[u] : (1.0 - stay) * omega_[v];
    }
  }
  return p;
}

size_t OverwriteAttribute::state_index(const std::string& name) const {
  const auto it = std::find(states_.begin(), states_.end(), name);
  if (it == states_.end()) throw UnknownValue("unknown state: " + name);
  return static_cast<size_t>(it - states_.begin());
}

MarkovAttribute OverwriteAttribute::as_markov() const {
  const size_t n = states_.size();
  std::vector<double> exits(n);
  Matrix p(n, n);
  for (size_t u = 0; u < n; ++u) {
    exits[u] = exit_rates_[u] * (1.0 - omega_[u]);
    if (omega_[u] >= 1.0) continue;  // absorbing: every overwrite repeats u
    for (size_t v = 0; v < n; ++v) {
      if (u != v) p(u, v) = omega_[v] / (1.0 - omega_[u]);
    }
  }
  return MarkovAttribute(states_, std::move(exits), std::move(p), gamma_);
}

double compound_transition(const std::vector<const MarkovAttribute*>& attrs,
                           const std::vector<size_t>& from, const std::vector<size_t>& to,
                           TimePoint s, TimePoint f) {
  if (attrs.empty()) throw EmptyList("compound transition needs at least one attribute");
  if (from.size() != attrs.size() || to.size() != attrs.size()) {
    throw DimensionMismatch("compound transition index lists disagree with attribute count");
  }
  double prob = 1.0;
  for (size_t i = 0; i < attrs.size(); ++i) {
    prob *= attrs[i]->transition_matrix(s, f)(from[i], to[i]);
  }
  return prob;
}

bool has_finite_domain(const AttributeModel& model) {
  return !std::holds_alternative<RandomWalkAttribute>(model);
}

const std::vector<std::string>& model_states(const AttributeModel& model) {
  if (const auto* m = std::get_if<MarkovAttribute>(&model)) return m->states();
  if (const auto* o = std::get_if<OverwriteAttribute>(&model)) return o->states();
  if (std::holds_alternative<BinaryLumpAttribute>(model)) {
    static const std::vector<std::string> kBinary = {"unchanged", "changed"};
    return kBinary;
  }
  throw UnsupportedModel("random-walk attributes have no finite domain");
}

Matrix model_transition_matrix(const AttributeModel& model, TimePoint s, TimePoint f) {
  if (const auto* m = std::get_if<MarkovAttribute>(&model)) return m->transition_matrix(s, f);
  if (const auto* o = std::get_if<OverwriteAttribute>(&model)) return o->transition_matrix(s, f);
  if (const auto* b = std::get_if<BinaryLumpAttribute>(&model)) {
    const auto [same, changed] = b->transition(s, f);
    Matrix p(2, 2);
    p(0, 0) = same;
    p(0, 1) = changed;
    const auto reverse = BinaryLumpAttribute{b->theta_prime, b->theta, b->gamma}.transition(s, f);
    p(1, 1) = reverse.first;
    p(1, 0) = reverse.second;
    return p;
  }
  throw UnsupportedModel("random-walk attributes have no transition matrix");
}

double model_exit_rate(const AttributeModel& model, size_t state) {
  if (const auto* m = std::get_if<MarkovAttribute>(&model)) return m->exit_rate(state);
  if (const auto* o = std::get_if<OverwriteAttribute>(&model)) {
    return o->exit_rates()[state] * (1.0 - o->omega()[state]);
  }
  if (const auto* b = std::get_if<BinaryLumpAttribute>(&model)) {
    return state == 0 ? b->theta : b->theta_prime;
  }
  return 1.0;  // random walk: every event alters the value
}

const IntensityFunction& model_gamma(const AttributeModel& model) {
  if (const auto* m = std::get_if<MarkovAttribute>(&model)) return m->gamma();
  if (const auto* o = std::get_if<OverwriteAttribute>(&model)) return o->gamma();
  if (const auto* b = std::get_if<BinaryLumpAttribute>(&model)) return b->gamma;
  return std::get<RandomWalkAttribute>(model).gamma;
}

}  // namespace relevo
