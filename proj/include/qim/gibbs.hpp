#pragma once

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "qim/hermitian.hpp"

namespace qim {

inline constexpr double default_mean_imag_tol = 1e-12;
inline constexpr double default_centering_tol = 1e-10;
inline constexpr double rho_underflow_floor = 1e-300;

/// Normalized Gibbs state rho = exp(-H)/Z with Z = Tr exp(-H), Psi = log Z.
/// All exponentials are shifted by the minimal eigenvalue of H before
/// exponentiating; the shift cancels in rho and is restored in Psi.
template <typename Real = double>
class GibbsState {
 public:
  const HermitianOperator<Real>& hamiltonian() const { return hamiltonian_; }
  const HermitianOperator<Real>& rho() const { return rho_; }
  Real z() const { return z_; }
  Real psi() const { return psi_; }
  Eigen::Index dim() const { return hamiltonian_.dim(); }

  /// Spectral data of the Hamiltonian; rho shares the eigenbasis.
  const SpectralDecomposition<Real>& hamiltonian_spectral() const { return spec_; }
  /// Eigenvalues of rho, ordered like hamiltonian_spectral() (descending in p).
  const RealVector<Real>& rho_eigenvalues() const { return p_; }

  /// Number of rho eigenvalues below the underflow floor. The mathematical
  /// state is faithful; truncated high-energy levels legitimately underflow.
  int underflow_count() const { return underflow_count_; }

  /// rho^t as a matrix, t > 0.
  ComplexMatrix<Real> rho_power(Real t) const {
    return spec_.eigenvectors *
           p_.array().pow(t).matrix().template cast<std::complex<Real>>().asDiagonal() *
           spec_.eigenvectors.adjoint();
  }

  template <typename R>
  friend GibbsState<R> gibbs_state(const HermitianOperator<R>& h);

 private:
  GibbsState() = default;

  HermitianOperator<Real> hamiltonian_;
  SpectralDecomposition<Real> spec_;
  RealVector<Real> p_;
  HermitianOperator<Real> rho_;
  Real z_ = 0;
  Real psi_ = 0;
  int underflow_count_ = 0;
};

template <typename Real>
GibbsState<Real> gibbs_state(const HermitianOperator<Real>& h) {
  GibbsState<Real> state;
  state.hamiltonian_ = h;
  state.spec_ = spectral(h);
  const RealVector<Real>& e = state.spec_.eigenvalues;
  const Real shift = e.minCoeff();
  const RealVector<Real> w = (-(e.array() - shift)).exp().matrix();
  const Real total = w.sum();
  state.p_ = w / total;
  state.psi_ = std::log(total) - shift;
  state.z_ = std::exp(state.psi_);
  state.rho_ = HermitianOperator<Real>::symmetrized(
      state.spec_.eigenvectors *
      state.p_.template cast<std::complex<Real>>().asDiagonal() *
      state.spec_.eigenvectors.adjoint());
  for (Eigen::Index i = 0; i < state.p_.size(); ++i)
    if (state.p_[i] < Real(rho_underflow_floor)) ++state.underflow_count_;
  return state;
}

/// Regularized mean Tr(rho^lambda X rho^{1-lambda}). The lambda parameter is
/// kept in the API even though cyclicity makes the value independent of it;
/// that independence is a tested statement, not a definition, so the two
/// powers are genuinely multiplied out.
template <typename Real>
Real regularized_mean(const GibbsState<Real>& state, const HermitianOperator<Real>& x,
                      Real lambda, Real imag_tol = Real(default_mean_imag_tol)) {
  if (x.dim() != state.dim())
    throw std::invalid_argument("regularized_mean: dimension mismatch");
  if (!(lambda > Real(0) && lambda < Real(1)))
    throw std::invalid_argument("regularized_mean: lambda must lie in (0,1)");
  const ComplexMatrix<Real> left = state.rho_power(lambda) * x.entries();
  const ComplexMatrix<Real> right = state.rho_power(Real(1) - lambda);
  // Tr(L R) without forming the product
  const std::complex<Real> value = left.transpose().cwiseProduct(right).sum();
  if (std::abs(value.imag()) > imag_tol * std::max(Real(1), std::abs(value.real()))) {
    std::ostringstream msg;
    msg << "regularized_mean: imaginary residue " << value.imag()
        << " exceeds tolerance; non-Hermitian input bug";
    throw std::runtime_error(msg.str());
  }
  return value.real();
}

/// Plain expectation Tr(rho X); equals the regularized mean in exact
/// arithmetic and serves as its cyclicity oracle.
template <typename Real>
Real state_mean(const GibbsState<Real>& state, const HermitianOperator<Real>& x) {
  if (x.dim() != state.dim()) throw std::invalid_argument("state_mean: dimension mismatch");
  return state.rho().entries().transpose().cwiseProduct(x.entries()).sum().real();
}

/// A perturbation together with its centering data at a base state:
/// centered = raw - mean I with mean = rho.raw.
template <typename Real = double>
struct TangentVector {
  HermitianOperator<Real> raw;
  Real mean;
  HermitianOperator<Real> centered;
};

template <typename Real>
TangentVector<Real> center(const GibbsState<Real>& state, const HermitianOperator<Real>& y) {
  const Real mean = regularized_mean(state, y, Real(0.5));
  return {y, mean, y - mean * HermitianOperator<Real>::identity(y.dim())};
}

/// The I-direction: the sanctioned exception to the centering invariant. Its
/// centred representative is I itself, giving bkm(state, Y, I) = rho.Y.
template <typename Real = double>
TangentVector<Real> identity_direction(Eigen::Index dim) {
  return {HermitianOperator<Real>::identity(dim), Real(0), HermitianOperator<Real>::identity(dim)};
}

template <typename Real = double>
struct EntropyResult {
  Real value = 0;
  int underflow_count = 0;  // eigenvalues handled with the 0 log 0 := 0 convention
};

/// von Neumann entropy -Tr rho log rho. The identity S = rho.H + Psi is a
/// tested statement (see the entropy-identity suite), not assumed here.
template <typename Real>
EntropyResult<Real> entropy(const GibbsState<Real>& state) {
  EntropyResult<Real> result;
  const RealVector<Real>& p = state.rho_eigenvalues();
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p[i] < Real(rho_underflow_floor)) {
      ++result.underflow_count;
      continue;
    }
    result.value -= p[i] * std::log(p[i]);
  }
  return result;
}

}  // namespace qim
