#pragma once

#include <cmath>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "qim/gibbs.hpp"
#include "qim/hermitian.hpp"
#include "qim/model.hpp"
#include "qim/perturbation.hpp"
#include "qim/quadrature.hpp"

namespace qim {

inline constexpr double default_kernel_switch_eps = 1e-7;
inline constexpr int default_quadrature_nodes = 64;

namespace detail {

// phi(d) = (e^d - 1)/d, series near zero where expm1(d)/d would still be fine
// but the series documents the limit.
template <typename Real>
Real expm1_over(Real d) {
  if (std::abs(d) < Real(1e-5))
    return Real(1) + d / 2 + d * d / 6 + d * d * d / 24;
  return std::expm1(d) / d;
}

}  // namespace detail

/// Closed form of the lambda integral int_0^1 p_i^l p_j^{1-l} dl in the
/// eigenbasis: k(e_i, e_j) = (e^{-e_j} - e^{-e_i})/(e_i - e_j), k(e,e) = e^{-e}.
/// Built on the spectrum of H + Psi I so that e^{-e_i} are exactly the state's
/// eigenvalues. Near-degenerate pairs switch to e^{-e_j} phi(e_j - e_i), which
/// does not cancel.
template <typename Real = double>
struct BkmKernel {
  RealVector<Real> eigenvalues;
  RealMatrix<Real> kernel;
  Real switch_eps = Real(default_kernel_switch_eps);
};

template <typename Real>
BkmKernel<Real> make_bkm_kernel(const RealVector<Real>& e,
                                Real switch_eps = Real(default_kernel_switch_eps)) {
  const Eigen::Index n = e.size();
  BkmKernel<Real> out{e, RealMatrix<Real>(n, n), switch_eps};
  for (Eigen::Index i = 0; i < n; ++i) {
    out.kernel(i, i) = std::exp(-e[i]);
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const Real d = e[i] - e[j];
      Real k;
      if (std::abs(d) > switch_eps * std::max(Real(1), std::abs(e[i]))) {
        k = (std::exp(-e[j]) - std::exp(-e[i])) / d;
      } else {
        k = std::exp(-e[j]) * detail::expm1_over(e[j] - e[i]);
      }
      out.kernel(i, j) = k;
      out.kernel(j, i) = k;
    }
  }
  return out;
}

template <typename Real>
BkmKernel<Real> make_bkm_kernel(const GibbsState<Real>& state,
                                Real switch_eps = Real(default_kernel_switch_eps)) {
  const RealVector<Real> normalized =
      state.hamiltonian_spectral().eigenvalues.array() + state.psi();
  return make_bkm_kernel(normalized, switch_eps);
}

namespace detail {

template <typename Real>
bool is_multiple_of_identity(const HermitianOperator<Real>& a, Real tol) {
  const Real avg = a.trace() / Real(a.dim());
  const Real dev = (a.entries() - avg * ComplexMatrix<Real>::Identity(a.dim(), a.dim()))
                       .cwiseAbs()
                       .maxCoeff();
  return dev <= tol * std::max(Real(1), std::abs(avg));
}

template <typename Real>
void require_centered_or_identity(const GibbsState<Real>& state, const TangentVector<Real>& v,
                                  Real tol, const char* who) {
  if (v.centered.dim() != state.dim()) {
    std::ostringstream msg;
    msg << who << ": dimension mismatch";
    throw std::invalid_argument(msg.str());
  }
  if (is_multiple_of_identity(v.centered, Real(1e-12))) return;  // the I-direction is permitted
  const Real mean = regularized_mean(state, v.centered, Real(0.5));
  const Real scale = std::max(Real(1), v.centered.max_abs());
  if (std::abs(mean) > tol * scale) {
    std::ostringstream msg;
    msg << who << ": tangent vector is not centred at this state (residual mean " << mean << ")";
    throw std::invalid_argument(msg.str());
  }
}

}  // namespace detail

/// BKM inner product g(Y, X) = sum_ij k(e_i, e_j) Yhat_ij Xhat_ji in the
/// eigenbasis of the state's Hamiltonian. Real and symmetric in (Y, X).
template <typename Real>
Real bkm(const GibbsState<Real>& state, const TangentVector<Real>& y, const TangentVector<Real>& x,
         Real centering_tol = Real(default_centering_tol)) {
  detail::require_centered_or_identity(state, y, centering_tol, "bkm");
  detail::require_centered_or_identity(state, x, centering_tol, "bkm");
  const auto& u = state.hamiltonian_spectral().eigenvectors;
  const ComplexMatrix<Real> yb = u.adjoint() * y.centered.entries() * u;
  const ComplexMatrix<Real> xb = u.adjoint() * x.centered.entries() * u;
  const BkmKernel<Real> kern = make_bkm_kernel(state);
  // Y_ij X_ji = Y_ij conj(X_ij) for Hermitian X; k symmetric makes the sum real
  return kern.kernel.cwiseProduct(yb.cwiseProduct(xb.conjugate()).real()).sum();
}

/// Independent quadrature route for the same inner product: a Gauss-Legendre
/// discretization of Tr(rho^l Yhat rho^{1-l} Xhat) using the eigensystem of
/// rho itself rather than the kernel.
template <typename Real>
Real bkm_quadrature(const GibbsState<Real>& state, const TangentVector<Real>& y,
                    const TangentVector<Real>& x, int nodes = default_quadrature_nodes,
                    Real centering_tol = Real(default_centering_tol)) {
  detail::require_centered_or_identity(state, y, centering_tol, "bkm_quadrature");
  detail::require_centered_or_identity(state, x, centering_tol, "bkm_quadrature");
  const SpectralDecomposition<Real> rs = spectral(state.rho());
  const RealVector<Real> p = rs.eigenvalues.cwiseMax(Real(0));
  const QuadratureRule<Real> rule = gauss_legendre<Real>(nodes);
  std::vector<Real> terms(rule.nodes.size());
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
    const Real lambda = rule.nodes[k];
    const ComplexMatrix<Real> a =
        rs.eigenvectors * p.array().pow(lambda).matrix().template cast<std::complex<Real>>().asDiagonal() *
        rs.eigenvectors.adjoint();
    const ComplexMatrix<Real> b =
        rs.eigenvectors *
        p.array().pow(Real(1) - lambda).matrix().template cast<std::complex<Real>>().asDiagonal() *
        rs.eigenvectors.adjoint();
    const ComplexMatrix<Real> left = a * y.centered.entries();
    const ComplexMatrix<Real> right = b * x.centered.entries();
    terms[k] = rule.weights[k] * left.transpose().cwiseProduct(right).sum().real();
  }
  return pairwise_sum(terms);
}

template <typename Real = double>
struct GramResult {
  RealMatrix<Real> gram;
  Real min_eigenvalue = 0;
  // engaged when the Gram matrix is numerically rank deficient
  std::optional<RealVector<Real>> null_combination;
};

/// Gram matrix of a centred basis under the BKM metric. Positive definite
/// when the basis is linearly independent modulo I; a deficiency is reported
/// through min_eigenvalue and the null combination, not as an error.
template <typename Real>
GramResult<Real> bkm_gram(const GibbsState<Real>& state,
                          const std::vector<TangentVector<Real>>& basis,
                          Real centering_tol = Real(default_centering_tol)) {
  const Eigen::Index n = static_cast<Eigen::Index>(basis.size());
  GramResult<Real> result;
  result.gram = RealMatrix<Real>(n, n);
  if (n == 0) return result;
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = a; b < n; ++b) {
      const Real v = bkm(state, basis[a], basis[b], centering_tol);
      result.gram(a, b) = v;
      result.gram(b, a) = v;
    }
  }
  Eigen::SelfAdjointEigenSolver<RealMatrix<Real>> solver(result.gram);
  result.min_eigenvalue = solver.eigenvalues().minCoeff();
  const Real scale = std::max(Real(1), result.gram.cwiseAbs().maxCoeff());
  if (result.min_eigenvalue <= Real(1e-12) * scale)
    result.null_combination = solver.eigenvectors().col(0);
  return result;
}

template <typename Real = double>
struct DuhamelReport {
  Real lhs = 0;       // Tr e^{-H0} - Tr e^{-H_X}
  Real rhs = 0;       // quadrature of Tr(e^{-l H0} X e^{-(1-l) H_X})
  Real residual = 0;  // |lhs - rhs|
};

/// Trace-level Duhamel identity check. The integrand is analytic on (0,1) in
/// finite dimension, so Gauss-Legendre converges spectrally in `nodes`.
template <typename Real>
DuhamelReport<Real> duhamel_check(const ModelHamiltonian<Real>& base, const Perturbation<Real>& x,
                                  int nodes = default_quadrature_nodes) {
  if (nodes < 2) throw std::invalid_argument("duhamel_check: need at least two nodes");
  const SpectralDecomposition<Real>& s0 = base.h0_spectral();
  const SpectralDecomposition<Real> sx = spectral(klmn(x));

  DuhamelReport<Real> report;
  report.lhs = trace_exp_neg(s0.eigenvalues) - trace_exp_neg(sx.eigenvalues);

  const QuadratureRule<Real> rule = gauss_legendre<Real>(nodes);
  std::vector<Real> terms(rule.nodes.size());
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
    const Real lambda = rule.nodes[k];
    const ComplexMatrix<Real> a =
        s0.eigenvectors *
        (-lambda * s0.eigenvalues.array()).exp().matrix().template cast<std::complex<Real>>().asDiagonal() *
        s0.eigenvectors.adjoint();
    const ComplexMatrix<Real> b =
        sx.eigenvectors *
        (-(Real(1) - lambda) * sx.eigenvalues.array()).exp().matrix().template cast<std::complex<Real>>().asDiagonal() *
        sx.eigenvectors.adjoint();
    const ComplexMatrix<Real> left = a * x.x.entries();
    terms[k] = rule.weights[k] * left.transpose().cwiseProduct(b).sum().real();
  }
  report.rhs = pairwise_sum(terms);
  report.residual = std::abs(report.lhs - report.rhs);
  return report;
}

/// (+1)-parallel transport between two states. The map is the hyperplane
/// move Y - rho_source.Y -> Y - rho_target.Y; it needs no path data because
/// the connection is flat.
template <typename Real = double>
struct TransportMap {
  GibbsState<Real> source;
  GibbsState<Real> target;
};

template <typename Real>
TangentVector<Real> transport(const TransportMap<Real>& map, const TangentVector<Real>& v,
                              Real centering_tol = Real(default_centering_tol)) {
  detail::require_centered_or_identity(map.source, v, centering_tol, "transport");
  return center(map.target, v.raw);
}

}  // namespace qim
