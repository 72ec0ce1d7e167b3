#include "relevo/intensity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "relevo/errors.hpp"

namespace relevo {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kBoundaryTol = 1e-9;

double poly_value(const std::vector<double>& c, double u) {
  double v = 0.0;
  for (size_t k = c.size(); k-- > 0;) v = v * u + c[k];
  return v;
}

// p(u) with u = t - start rebased to u' = t - (start + delta):
// c'_j = sum_{k>=j} C(k,j) c_k delta^(k-j).
std::vector<double> shift_poly(const std::vector<double>& c, double delta) {
  const size_t n = c.size();
  std::vector<double> out(n, 0.0);
  for (size_t j = 0; j < n; ++j) {
    double binom = 1.0;  // C(k, j), built up incrementally over k
    double powd = 1.0;   // delta^(k-j)
    for (size_t k = j; k < n; ++k) {
      out[j] += binom * powd * c[k];
      powd *= delta;
      binom = binom * static_cast<double>(k + 1) / static_cast<double>(k + 1 - j);
    }
  }
  return out;
}

bool all_zero(const std::vector<double>& c) {
  return std::all_of(c.begin(), c.end(), [](double x) { return x == 0.0; });
}

}  // namespace

double Segment::value_at(double t) const { return poly_value(coeffs, t - start); }

double Segment::integral(double a, double b) const {
  const double ua = a - start;
  const double ub = b - start;
  double va = 0.0, vb = 0.0;
  for (size_t k = coeffs.size(); k-- > 0;) {
    const double c = coeffs[k] / static_cast<double>(k + 1);
    va = va * ua + c;
    vb = vb * ub + c;
  }
  return vb * ub - va * ua;
}

std::optional<double> Segment::solve_mass(double a, double mass) const {
  if (mass <= 0.0) return a;
  const double total = integral(a, end);
  if (mass > total) {
    // Absorb roundoff at the segment boundary.
    if (mass - total <= 1e-9 * (1.0 + mass)) return end;
    return std::nullopt;
  }
  if (coeffs.size() == 1) {
    const double c0 = coeffs[0];
    if (c0 <= 0.0) return std::nullopt;  // zero rate cannot accumulate mass
    return a + mass / c0;
  }
  // Monotone in b, so plain bisection is safe.
  double lo = a, hi = end;
  for (int it = 0; it < 80 && hi - lo > 1e-13 * (1.0 + std::fabs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    (integral(a, mid) < mass ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double Segment::min_value() const {
  const double len = end - start;
  double m = std::min(poly_value(coeffs, 0.0), poly_value(coeffs, len));
  const size_t d = coeffs.size() - 1;
  if (d == 2) {
    const double u = -coeffs[1] / (2.0 * coeffs[2]);
    if (u > 0.0 && u < len) m = std::min(m, poly_value(coeffs, u));
  } else if (d == 3) {
    // Roots of the derivative c1 + 2 c2 u + 3 c3 u^2.
    const double a = 3.0 * coeffs[3], b = 2.0 * coeffs[2], c = coeffs[1];
    const double disc = b * b - 4.0 * a * c;
    if (a != 0.0 && disc >= 0.0) {
      const double sq = std::sqrt(disc);
      for (double u : {(-b - sq) / (2.0 * a), (-b + sq) / (2.0 * a)}) {
        if (u > 0.0 && u < len) m = std::min(m, poly_value(coeffs, u));
      }
    } else if (a == 0.0 && b != 0.0) {
      const double u = -c / b;
      if (u > 0.0 && u < len) m = std::min(m, poly_value(coeffs, u));
    }
  }
  return m;
}

IntensityFunction IntensityFunction::constant(double rate) {
  if (!(rate >= 0.0) || !std::isfinite(rate)) {
    throw InvalidIntensity("constant intensity must have a finite nonnegative rate");
  }
  IntensityFunction f;
  f.kind_ = Kind::kConstant;
  f.rate_ = rate;
  return f;
}

IntensityFunction IntensityFunction::piecewise(std::vector<Segment> segments, int max_degree) {
  if (segments.empty()) throw InvalidIntensity("piecewise intensity needs at least one segment");
  std::sort(segments.begin(), segments.end(),
            [](const Segment& a, const Segment& b) { return a.start < b.start; });
  for (size_t i = 0; i < segments.size(); ++i) {
    Segment& seg = segments[i];
    if (seg.coeffs.empty()) seg.coeffs.push_back(0.0);
    if (static_cast<int>(seg.coeffs.size()) - 1 > max_degree) {
      throw InvalidIntensity("segment degree exceeds the configured maximum");
    }
    if (!(seg.end > seg.start)) throw InvalidIntensity("segment interval is empty");
    if (i + 1 < segments.size()) {
      const double gap = segments[i + 1].start - seg.end;
      if (std::fabs(gap) > kBoundaryTol * (1.0 + std::fabs(seg.end))) {
        throw InvalidIntensity(gap > 0 ? "gap between piecewise segments"
                                       : "overlapping piecewise segments");
      }
      segments[i + 1].start = seg.end;
    }
    double scale = 1.0;
    for (double c : seg.coeffs) scale = std::max(scale, std::fabs(c));
    if (seg.min_value() < -kBoundaryTol * scale) {
      throw InvalidIntensity("intensity is negative inside a segment");
    }
  }
  IntensityFunction f;
  f.kind_ = Kind::kPiecewise;
  f.segments_ = std::move(segments);
  f.init_cumulative();
  return f;
}

IntensityFunction IntensityFunction::recurrent(double period_days, std::vector<Segment> base,
                                               int max_degree) {
  if (!(period_days > 0.0)) throw InvalidIntensity("recurrent period must be positive");
  IntensityFunction body = piecewise(std::move(base), max_degree);
  std::vector<Segment> segs = std::move(body.segments_);
  if (std::fabs(segs.front().start) > kBoundaryTol ||
      std::fabs(segs.back().end - period_days) > kBoundaryTol * (1.0 + period_days)) {
    throw InvalidIntensity("recurrent base must cover exactly [0, period)");
  }
  segs.front().start = 0.0;
  segs.back().end = period_days;
  IntensityFunction f;
  f.kind_ = Kind::kRecurrent;
  f.period_ = period_days;
  f.segments_ = std::move(segs);
  f.init_cumulative();
  return f;
}

void IntensityFunction::init_cumulative() {
  cum_.assign(segments_.size() + 1, 0.0);
  for (size_t i = 0; i < segments_.size(); ++i) {
    cum_[i + 1] = cum_[i] + segments_[i].integral(segments_[i].start, segments_[i].end);
  }
  period_mass_ = cum_.back();
}

size_t IntensityFunction::segment_index(double t) const {
  // Last segment whose start is <= t.
  size_t lo = 0, hi = segments_.size();
  while (hi - lo > 1) {
    const size_t mid = (lo + hi) / 2;
    (segments_[mid].start <= t ? lo : hi) = mid;
  }
  return lo;
}

double IntensityFunction::body_cumulative(double t) const {
  if (t <= segments_.front().start) return 0.0;
  if (t >= segments_.back().end) return period_mass_;
  const size_t i = segment_index(t);
  return cum_[i] + segments_[i].integral(segments_[i].start, t);
}

double IntensityFunction::eval(TimePoint t) const {
  switch (kind_) {
    case Kind::kConstant:
      return rate_;
    case Kind::kPiecewise: {
      if (t < domain_start() || t >= domain_end()) return 0.0;
      return segments_[segment_index(t)].value_at(t);
    }
    case Kind::kRecurrent: {
      const double phase = cycle_phase(t, period_);
      return segments_[segment_index(phase)].value_at(phase);
    }
  }
  return 0.0;
}

double IntensityFunction::integrate(TimePoint s, TimePoint e) const {
  if (e < s) throw OutOfDomain("integrate: interval end precedes start");
  switch (kind_) {
    case Kind::kConstant:
      return rate_ * (e - s);
    case Kind::kPiecewise: {
      const double a = domain_start(), b = domain_end();
      if (s < a - kBoundaryTol || e > b + kBoundaryTol) {
        throw OutOfDomain("integrate: interval leaves the piecewise domain");
      }
      return body_cumulative(std::min(e, b)) - body_cumulative(std::max(s, a));
    }
    case Kind::kRecurrent: {
      const auto cumulative = [this](double t) {
        return std::floor(t / period_) * period_mass_ + body_cumulative(cycle_phase(t, period_));
      };
      return cumulative(e) - cumulative(s);
    }
  }
  return 0.0;
}

std::optional<Duration> IntensityFunction::invert(TimePoint s, double target,
                                                  double horizon) const {
  if (target < 0.0) throw OutOfDomain("invert: negative target mass");
  if (target == 0.0) return 0.0;
  switch (kind_) {
    case Kind::kConstant: {
      if (rate_ <= 0.0) return std::nullopt;
      const double tau = target / rate_;
      if (tau > horizon) return std::nullopt;
      return tau;
    }
    case Kind::kPiecewise: {
      // Treated as zero outside the domain: no mass ever accumulates there.
      const double limit = std::min(std::isfinite(horizon) ? s + horizon : domain_end(),
                                    domain_end());
      if (body_cumulative(limit) - body_cumulative(std::max(s, domain_start())) < target) {
        return std::nullopt;
      }
      double remaining = target;
      for (size_t i = segment_index(std::max(s, domain_start())); i < segments_.size(); ++i) {
        const double a = std::max(s, segments_[i].start);
        const double here = segments_[i].integral(a, segments_[i].end);
        if (remaining <= here) {
          const auto b = segments_[i].solve_mass(a, remaining);
          if (b) return *b - s;
        }
        remaining -= here;
      }
      return domain_end() - s;  // roundoff spill; mass was verified available
    }
    case Kind::kRecurrent: {
      if (period_mass_ <= 0.0) return std::nullopt;
      if (std::isfinite(horizon) && integrate(s, s + horizon) < target) return std::nullopt;
      const double phase = cycle_phase(s, period_);
      // Walks the base from start_phase; mass must fit within the base end.
      const auto walk = [this](double start_phase, double mass) {
        for (size_t i = segment_index(start_phase); i < segments_.size(); ++i) {
          const double a = std::max(start_phase, segments_[i].start);
          const double here = segments_[i].integral(a, segments_[i].end);
          if (mass <= here) {
            if (const auto b = segments_[i].solve_mass(a, mass)) return *b;
          }
          mass -= here;
        }
        return period_;
      };
      const double first = period_mass_ - body_cumulative(phase);
      if (target <= first) return walk(phase, target) - phase;
      double remaining = target - first;
      const double whole = std::floor(remaining / period_mass_);
      remaining -= whole * period_mass_;
      return (period_ - phase) + whole * period_ + walk(0.0, remaining);
    }
  }
  return std::nullopt;
}

IntensityFunction IntensityFunction::scaled(double k) const {
  if (!(k >= 0.0)) throw NegativeScale("scale factor must be nonnegative");
  IntensityFunction f(*this);
  f.rate_ *= k;
  for (auto& seg : f.segments_) {
    for (double& c : seg.coeffs) c *= k;
  }
  f.init_cumulative();
  return f;
}

bool IntensityFunction::is_zero() const {
  if (kind_ == Kind::kConstant) return rate_ == 0.0;
  for (const auto& seg : segments_) {
    if (!all_zero(seg.coeffs)) return false;
  }
  return true;
}

std::optional<double> IntensityFunction::constant_rate() const {
  if (kind_ == Kind::kConstant) return rate_;
  return std::nullopt;
}

double IntensityFunction::domain_start() const {
  return kind_ == Kind::kPiecewise ? segments_.front().start : -kInf;
}

double IntensityFunction::domain_end() const {
  return kind_ == Kind::kPiecewise ? segments_.back().end : kInf;
}

namespace {

// Sorted, deduplicated interval boundaries.
std::vector<double> merge_boundaries(const std::vector<std::vector<double>>& lists) {
  std::vector<double> all;
  for (const auto& l : lists) all.insert(all.end(), l.begin(), l.end());
  std::sort(all.begin(), all.end());
  std::vector<double> out;
  for (double x : all) {
    if (out.empty() || x - out.back() > 1e-12 * (1.0 + std::fabs(x))) out.push_back(x);
  }
  return out;
}

std::vector<double> segment_boundaries(const std::vector<Segment>& segs) {
  std::vector<double> b;
  b.reserve(segs.size() + 1);
  for (const auto& s : segs) b.push_back(s.start);
  b.push_back(segs.back().end);
  return b;
}

// The polynomial (local to `at`) of the segment list covering point `at`.
std::vector<double> poly_at(const std::vector<Segment>& segs, double at) {
  for (const auto& s : segs) {
    if (at >= s.start - 1e-12 && at < s.end) return shift_poly(s.coeffs, at - s.start);
  }
  return {0.0};
}

void add_into(std::vector<double>& acc, const std::vector<double>& c) {
  if (acc.size() < c.size()) acc.resize(c.size(), 0.0);
  for (size_t i = 0; i < c.size(); ++i) acc[i] += c[i];
}

// Copies of a recurrent base unrolled over [lo, hi).
std::vector<Segment> unroll_recurrent(const IntensityFunction& f, double lo, double hi) {
  std::vector<Segment> out;
  const double T = f.period();
  for (double k = std::floor(lo / T);; k += 1.0) {
    const double off = k * T;
    if (off >= hi) break;
    for (const auto& seg : f.segments()) {
      const double a = std::max(lo, off + seg.start);
      const double b = std::min(hi, off + seg.end);
      if (b <= a) continue;
      out.push_back({a, b, shift_poly(seg.coeffs, a - (off + seg.start))});
    }
  }
  return out;
}

}  // namespace

IntensityFunction IntensityFunction::sum(const std::vector<IntensityFunction>& fs) {
  if (fs.empty()) throw EmptyList("sum of intensities needs at least one term");
  if (fs.size() == 1) return fs.front();

  double const_total = 0.0;
  std::vector<const IntensityFunction*> recurrents;
  std::vector<const IntensityFunction*> bounded;
  for (const auto& f : fs) {
    switch (f.kind_) {
      case Kind::kConstant:
        const_total += f.rate_;
        break;
      case Kind::kRecurrent:
        recurrents.push_back(&f);
        break;
      case Kind::kPiecewise:
        bounded.push_back(&f);
        break;
    }
  }
  if (recurrents.empty() && bounded.empty()) return constant(const_total);

  double period = 0.0;
  for (const auto* r : recurrents) {
    if (period == 0.0) {
      period = r->period_;
    } else if (std::fabs(r->period_ - period) > 1e-12 * period) {
      throw IncompatibleIntensities("cannot sum recurrent intensities with different periods");
    }
  }

  // Bounded summands force a bounded result over the common domain.
  std::vector<std::vector<Segment>> parts;
  double lo, hi;
  bool result_recurrent;
  if (!bounded.empty()) {
    lo = -kInf;
    hi = kInf;
    for (const auto* p : bounded) {
      lo = std::max(lo, p->domain_start());
      hi = std::min(hi, p->domain_end());
    }
    if (!(hi > lo)) throw IncompatibleIntensities("piecewise summands have disjoint domains");
    for (const auto* p : bounded) {
      auto segs = p->segments_;
      std::vector<Segment> clipped;
      for (auto& s : segs) {
        const double a = std::max(lo, s.start), b = std::min(hi, s.end);
        if (b <= a) continue;
        clipped.push_back({a, b, shift_poly(s.coeffs, a - s.start)});
      }
      parts.push_back(std::move(clipped));
    }
    for (const auto* r : recurrents) parts.push_back(unroll_recurrent(*r, lo, hi));
    result_recurrent = false;
  } else {
    lo = 0.0;
    hi = period;
    for (const auto* r : recurrents) parts.push_back(r->segments_);
    result_recurrent = true;
  }

  std::vector<std::vector<double>> boundary_lists;
  for (const auto& p : parts) boundary_lists.push_back(segment_boundaries(p));
  const std::vector<double> bounds = merge_boundaries(boundary_lists);

  std::vector<Segment> merged;
  for (size_t i = 0; i + 1 < bounds.size(); ++i) {
    const double a = bounds[i], b = bounds[i + 1];
    std::vector<double> coeffs = {const_total};
    for (const auto& p : parts) add_into(coeffs, poly_at(p, a));
    merged.push_back({a, b, std::move(coeffs)});
  }
  const int degree_cap = 64;  // summands were validated already
  return result_recurrent ? recurrent(period, std::move(merged), degree_cap)
                          : piecewise(std::move(merged), degree_cap);
}

std::optional<double> IntensityFunction::ratio_to(const IntensityFunction& base) const {
  if (is_zero()) return 0.0;
  if (kind_ == Kind::kConstant && base.kind_ == Kind::kConstant) {
    if (base.rate_ == 0.0) return std::nullopt;
    return rate_ / base.rate_;
  }

  // Compare on a common refinement of one cycle / the shared domain.
  const IntensityFunction* a = this;
  const IntensityFunction* b = &base;
  double lo, hi;
  if (a->kind_ == Kind::kRecurrent || b->kind_ == Kind::kRecurrent) {
    const IntensityFunction* rec = a->kind_ == Kind::kRecurrent ? a : b;
    const IntensityFunction* other = rec == a ? b : a;
    if (other->kind_ == Kind::kPiecewise) return std::nullopt;
    if (other->kind_ == Kind::kRecurrent &&
        std::fabs(other->period_ - rec->period_) > 1e-12 * rec->period_) {
      return std::nullopt;
    }
    lo = 0.0;
    hi = rec->period_;
  } else {
    if (a->domain_start() != b->domain_start() || a->domain_end() != b->domain_end()) {
      if (a->kind_ == Kind::kPiecewise && b->kind_ == Kind::kPiecewise) return std::nullopt;
    }
    const IntensityFunction* pw = a->kind_ == Kind::kPiecewise ? a : b;
    lo = pw->domain_start();
    hi = pw->domain_end();
  }

  const auto pieces = [&](const IntensityFunction& f) -> std::vector<Segment> {
    switch (f.kind_) {
      case Kind::kConstant:
        return {{lo, hi, {f.rate_}}};
      case Kind::kPiecewise:
        return f.segments_;
      case Kind::kRecurrent:
        return unroll_recurrent(f, lo, hi);
    }
    return {};
  };
  const auto pa = pieces(*a), pb = pieces(*b);
  const std::vector<double> bounds =
      merge_boundaries({segment_boundaries(pa), segment_boundaries(pb)});

  std::optional<double> alpha;
  for (size_t i = 0; i + 1 < bounds.size(); ++i) {
    std::vector<double> ca = poly_at(pa, bounds[i]);
    std::vector<double> cb = poly_at(pb, bounds[i]);
    const size_t n = std::max(ca.size(), cb.size());
    ca.resize(n, 0.0);
    cb.resize(n, 0.0);
    for (size_t k = 0; k < n; ++k) {
      if (cb[k] == 0.0) {
        if (std::fabs(ca[k]) > 1e-12) return std::nullopt;
        continue;
      }
      const double r = ca[k] / cb[k];
      if (!alpha) {
        alpha = r;
      } else if (std::fabs(r - *alpha) > 1e-9 * (1.0 + std::fabs(*alpha))) {
        return std::nullopt;
      }
    }
  }
  return alpha ? alpha : std::optional<double>(0.0);
}

std::vector<double> IntensityFunction::local_poly(TimePoint t) const {
  switch (kind_) {
    case Kind::kConstant:
      return {rate_};
    case Kind::kPiecewise: {
      if (t < domain_start() || t >= domain_end()) return {0.0};
      const Segment& seg = segments_[segment_index(t)];
      return shift_poly(seg.coeffs, t - seg.start);
    }
    case Kind::kRecurrent: {
      const double phase = cycle_phase(t, period_);
      const Segment& seg = segments_[segment_index(phase)];
      return shift_poly(seg.coeffs, phase - seg.start);
    }
  }
  return {0.0};
}

std::vector<double> IntensityFunction::breakpoints(TimePoint s, TimePoint e) const {
  std::vector<double> out = {s};
  if (kind_ == Kind::kPiecewise) {
    for (const auto& seg : segments_) {
      if (seg.start > s && seg.start < e) out.push_back(seg.start);
    }
  } else if (kind_ == Kind::kRecurrent) {
    for (double k = std::floor(s / period_);; k += 1.0) {
      const double off = k * period_;
      if (off >= e) break;
      for (const auto& seg : segments_) {
        const double t = off + seg.start;
        if (t > s && t < e) out.push_back(t);
      }
    }
  }
  out.push_back(e);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace relevo
