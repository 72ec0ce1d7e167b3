#pragma once

// Internal quadrature helpers shared by the prediction and cost code:
// composite Gauss-Legendre between the breakpoints of piecewise-smooth
// integrands, with mass-capped refinement so exponential factors are
// resolved by a fixed-order rule.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "relevo/intensity.hpp"

namespace relevo::internal {

// 16-point Gauss-Legendre rule on [-1, 1].
inline constexpr double kGlNode[16] = {
    -0.9894009349916499, -0.9445750230732326, -0.8656312023878318, -0.7554044083550030,
    -0.6178762444026438, -0.4580167776572274, -0.2816035507792589, -0.0950125098376374,
    0.0950125098376374,  0.2816035507792589,  0.4580167776572274,  0.6178762444026438,
    0.7554044083550030,  0.8656312023878318,  0.9445750230732326,  0.9894009349916499};
inline constexpr double kGlWeight[16] = {
    0.0271524594117541, 0.0622535239386479, 0.0951585116824928, 0.1246289712555339,
    0.1495959888165767, 0.1691565193950025, 0.1826034150449236, 0.1894506104550685,
    0.1894506104550685, 0.1826034150449236, 0.1691565193950025, 0.1495959888165767,
    0.1246289712555339, 0.0951585116824928, 0.0622535239386479, 0.0271524594117541};

inline std::vector<double> merge_breaks(std::vector<std::vector<double>> lists) {
  std::vector<double> all;
  for (auto& l : lists) all.insert(all.end(), l.begin(), l.end());
  std::sort(all.begin(), all.end());
  std::vector<double> out;
  for (double x : all) {
    if (out.empty() || x - out.back() > 1e-12 * (1.0 + std::fabs(x))) out.push_back(x);
  }
  return out;
}

// Splits pieces until each carries at most `cap` mass of every control
// intensity.
inline void refine_by_mass(std::vector<double>& breaks,
                           const std::vector<const IntensityFunction*>& controls, double cap) {
  std::vector<double> out;
  out.push_back(breaks.front());
  for (size_t i = 0; i + 1 < breaks.size(); ++i) {
    const double a = breaks[i], b = breaks[i + 1];
    int splits = 1;
    for (const auto* g : controls) {
      const double mass = g->integrate(a, b);
      splits = std::max(splits, static_cast<int>(std::ceil(mass / cap)));
    }
    splits = std::min(splits, 4096);
    for (int k = 1; k <= splits; ++k) out.push_back(a + (b - a) * k / splits);
  }
  breaks = std::move(out);
}

inline double integrate_pieces(const std::vector<double>& breaks,
                               const std::function<double(double)>& f) {
  double total = 0.0;
  for (size_t i = 0; i + 1 < breaks.size(); ++i) {
    const double mid = 0.5 * (breaks[i] + breaks[i + 1]);
    const double half = 0.5 * (breaks[i + 1] - breaks[i]);
    double piece = 0.0;
    for (int k = 0; k < 16; ++k) piece += kGlWeight[k] * f(mid + half * kGlNode[k]);
    total += piece * half;
  }
  return total;
}

}  // namespace relevo::internal
