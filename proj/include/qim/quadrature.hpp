#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace qim {

template <typename Real = double>
struct QuadratureRule {
  std::vector<Real> nodes;    // ascending, inside (0,1)
  std::vector<Real> weights;  // sum to 1
};

/// Gauss-Legendre rule mapped to (0,1). Nodes by Newton iteration on P_n with
/// the usual Chebyshev-like initial guesses.
template <typename Real = double>
QuadratureRule<Real> gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: need at least one node");
  QuadratureRule<Real> rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int k = 0; k < (n + 1) / 2; ++k) {
    Real x = std::cos(std::numbers::pi_v<Real> * (Real(k) + Real(0.75)) / (Real(n) + Real(0.5)));
    Real dp = 0;
    for (int iter = 0; iter < 100; ++iter) {
      // Legendre recurrence for P_n(x) and P_n'(x)
      Real p0 = 1, p1 = x;
      for (int j = 2; j <= n; ++j) {
        const Real p2 = ((2 * j - 1) * x * p1 - (j - 1) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1);
      const Real dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < Real(1e-16)) break;
    }
    const Real w = Real(2) / ((1 - x * x) * dp * dp);
    // x is the k-th root from the top on [-1,1]; map to (0,1) ascending
    rule.nodes[k] = (Real(1) - x) / 2;
    rule.nodes[n - 1 - k] = (Real(1) + x) / 2;
    rule.weights[k] = w / 2;
    rule.weights[n - 1 - k] = w / 2;
  }
  return rule;
}

/// Pairwise (cascade) summation; deterministic regardless of how the terms
/// were produced.
template <typename Real>
Real pairwise_sum(const std::vector<Real>& terms, std::size_t begin, std::size_t end) {
  const std::size_t n = end - begin;
  if (n <= 8) {
    Real s = 0;
    for (std::size_t i = begin; i < end; ++i) s += terms[i];
    return s;
  }
  const std::size_t mid = begin + n / 2;
  return pairwise_sum(terms, begin, mid) + pairwise_sum(terms, mid, end);
}

template <typename Real>
Real pairwise_sum(const std::vector<Real>& terms) {
  return pairwise_sum(terms, 0, terms.size());
}

}  // namespace qim
