#pragma once

#include <cmath>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "qim/hermitian.hpp"
#include "qim/model.hpp"
#include "qim/random.hpp"

namespace qim {

inline constexpr double default_sandwich_slack = 1e-10;
inline constexpr double default_witness_slack = 1e-10;

/// A symmetric form perturbation of a model Hamiltonian.
template <typename Real = double>
struct Perturbation {
  Perturbation(const ModelHamiltonian<Real>& base_model, HermitianOperator<Real> matrix)
      : x(std::move(matrix)), base(base_model) {
    if (x.dim() != base.dim())
      throw std::invalid_argument("Perturbation: dimension does not match the base model");
  }

  HermitianOperator<Real> x;
  ModelHamiltonian<Real> base;
};

/// Relative-bound witness pair (a, b) for |<psi, X psi>| <= a <psi, H psi> + b |psi|^2.
template <typename Real = double>
struct RelativeBound {
  Real a = 0;
  Real b = 0;
};

/// Relative form norm |H^{-1/2} X H^{-1/2}|_inf. Computed in the eigenbasis of
/// H by entrywise division with sqrt(e_i e_j), which keeps X = H at norm
/// exactly 1 in floating point.
template <typename Real>
Real relative_norm(const HermitianOperator<Real>& x, const HermitianOperator<Real>& h) {
  if (x.dim() != h.dim())
    throw std::invalid_argument("relative_norm: dimension mismatch");
  const SpectralDecomposition<Real> hs = spectral(h);
  if (!(hs.eigenvalues.minCoeff() > Real(0))) {
    std::ostringstream msg;
    msg << "relative_norm: H must be positive definite (min eigenvalue "
        << hs.eigenvalues.minCoeff() << ")";
    throw std::invalid_argument(msg.str());
  }
  ComplexMatrix<Real> w = hs.eigenvectors.adjoint() * x.entries() * hs.eigenvectors;
  for (Eigen::Index i = 0; i < w.rows(); ++i)
    for (Eigen::Index j = 0; j < w.cols(); ++j)
      w(i, j) /= std::sqrt(hs.eigenvalues[i] * hs.eigenvalues[j]);
  return spectral(HermitianOperator<Real>::symmetrized(std::move(w)))
      .eigenvalues.cwiseAbs()
      .maxCoeff();
}

template <typename Real>
Real relative_norm(const Perturbation<Real>& x, const HermitianOperator<Real>& h) {
  return relative_norm(x.x, h);
}

/// Canonical witness (|X|_0, 0); always valid in finite dimension.
template <typename Real>
RelativeBound<Real> canonical_bound(const Perturbation<Real>& x) {
  return {relative_norm(x.x, x.base.h0()), Real(0)};
}

/// True iff |X|_0 < threshold (strict: the admission balls are open).
/// threshold defaults to a0 = 1 - beta0 of the base model.
template <typename Real>
bool is_small(const Perturbation<Real>& x, std::optional<Real> threshold = std::nullopt) {
  const Real t = threshold.value_or(x.base.admission_radius());
  if (!(t > Real(0) && t <= Real(1)))
    throw std::invalid_argument("is_small: threshold must lie in (0,1]");
  return relative_norm(x.x, x.base.h0()) < t;
}

/// Form sum H_X = H0 + X (the KLMN construction, which in finite dimension is
/// matrix addition; positivity for |X|_0 < 1 is what remains to check).
template <typename Real>
HermitianOperator<Real> klmn(const Perturbation<Real>& x) {
  return x.base.h0() + x.x;
}

namespace detail {

/// Validate a witness pair. The b = 0 case is exhaustively decided by the
/// norm; b > 0 witnesses are sampled on the H0 eigenbasis plus 64 seeded
/// random directions.
template <typename Real>
bool witness_valid(const Perturbation<Real>& x, const RelativeBound<Real>& bound,
                   Real slack = Real(default_witness_slack)) {
  if (!(bound.a >= Real(0)) || !(bound.b >= Real(0))) return false;
  const Real norm0 = relative_norm(x.x, x.base.h0());
  if (bound.a >= norm0 * (Real(1) - slack)) return true;
  const auto& hs = x.base.h0_spectral();
  const Eigen::Index dim = x.base.dim();
  const auto satisfied = [&](const ComplexVector<Real>& psi) {
    const Real xv = (psi.adjoint() * x.x.entries() * psi)[0].real();
    const Real hv = (psi.adjoint() * x.base.h0().entries() * psi)[0].real();
    const Real nv = psi.squaredNorm();
    return std::abs(xv) <= bound.a * hv + bound.b * nv + slack * std::max(Real(1), hv);
  };
  for (Eigen::Index k = 0; k < dim; ++k) {
    if (!satisfied(hs.eigenvectors.col(k))) return false;
  }
  Xoshiro256pp rng(fnv1a64("witness-validation"));
  for (int k = 0; k < 64; ++k) {
    if (!satisfied(random_unit_vector<Real>(rng, dim))) return false;
  }
  return true;
}

}  // namespace detail

/// Per-index report of -b + (1-a) e_n(H0) <= e_n(H_X) <= b + (1+a) e_n(H0).
template <typename Real = double>
struct EigenvalueSandwichReport {
  RealVector<Real> lower;
  RealVector<Real> observed;
  RealVector<Real> upper;
  bool holds = false;
  Real max_violation = 0;
};

template <typename Real>
EigenvalueSandwichReport<Real> eigenvalue_sandwich(const Perturbation<Real>& x,
                                                   const RelativeBound<Real>& bound,
                                                   Real slack = Real(default_sandwich_slack)) {
  if (!detail::witness_valid(x, bound))
    throw std::invalid_argument("eigenvalue_sandwich: (a,b) is not a valid witness for X");
  const RealVector<Real>& e0 = x.base.h0_spectral().eigenvalues;
  EigenvalueSandwichReport<Real> report;
  report.lower = ((Real(1) - bound.a) * e0.array() - bound.b).matrix();
  report.upper = ((Real(1) + bound.a) * e0.array() + bound.b).matrix();
  report.observed = spectral(klmn(x)).eigenvalues;
  report.holds = true;
  for (Eigen::Index n = 0; n < e0.size(); ++n) {
    const Real scale = std::max({Real(1), std::abs(report.lower[n]), std::abs(report.upper[n])});
    const Real viol = std::max(report.lower[n] - report.observed[n],
                               report.observed[n] - report.upper[n]) /
                      scale;
    report.max_violation = std::max(report.max_violation, viol);
    if (viol > slack) report.holds = false;
  }
  return report;
}

/// e^{b beta} Tr e^{-(1-a) beta H0} >= Tr e^{-beta H_X} >= e^{-b beta} Tr e^{-(1+a) beta H0}.
template <typename Real = double>
struct TraceBoundReport {
  Real upper = 0;
  Real middle = 0;
  Real lower = 0;
  bool holds = false;
};

template <typename Real>
TraceBoundReport<Real> trace_bound_check(const Perturbation<Real>& x, Real beta,
                                         const RelativeBound<Real>& bound,
                                         Real slack = Real(default_sandwich_slack)) {
  if (!(beta > Real(0))) throw std::invalid_argument("trace_bound_check: beta must be positive");
  if (!detail::witness_valid(x, bound))
    throw std::invalid_argument("trace_bound_check: (a,b) is not a valid witness for X");
  const RealVector<Real>& e0 = x.base.h0_spectral().eigenvalues;
  TraceBoundReport<Real> report;
  const RealVector<Real> contracted = (Real(1) - bound.a) * beta * e0;
  const RealVector<Real> dilated = (Real(1) + bound.a) * beta * e0;
  const RealVector<Real> perturbed = beta * spectral(klmn(x)).eigenvalues;
  report.upper = std::exp(bound.b * beta) * trace_exp_neg(contracted);
  report.lower = std::exp(-bound.b * beta) * trace_exp_neg(dilated);
  report.middle = trace_exp_neg(perturbed);
  const Real scale = std::max(Real(1), report.upper);
  report.holds = report.upper >= report.middle - slack * scale &&
                 report.middle >= report.lower - slack * scale;
  return report;
}

/// Gaussian Hermitian sample rescaled to a requested relative norm against H.
template <typename Real = double>
HermitianOperator<Real> random_hermitian_with_norm(Xoshiro256pp& rng,
                                                   const HermitianOperator<Real>& h, Real target) {
  const HermitianOperator<Real> g = random_hermitian<Real>(rng, h.dim());
  const Real norm = relative_norm(g, h);
  return (target / norm) * g;
}

}  // namespace qim
