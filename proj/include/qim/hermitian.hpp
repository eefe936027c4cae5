#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace qim {

template <typename Real = double>
using ComplexMatrix = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Real = double>
using RealMatrix = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Real = double>
using RealVector = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

template <typename Real = double>
using ComplexVector = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1>;

// Module-level default tolerances, overridable per call.
inline constexpr double default_hermiticity_tol = 1e-12;

/// Dense Hermitian matrix. Construction rejects inputs whose anti-Hermitian
/// part exceeds `deviation_tol` entrywise and stores the exact symmetrization
/// (A + A*)/2, so diagonal entries are purely real.
template <typename Real = double>
class HermitianOperator {
 public:
  using Scalar = std::complex<Real>;
  using Matrix = ComplexMatrix<Real>;

  /// Empty (0x0) placeholder, as Eigen's dynamic matrices default to; every
  /// operator built from data has dim >= 1.
  HermitianOperator() = default;

  template <typename Derived>
  explicit HermitianOperator(const Eigen::MatrixBase<Derived>& m,
                             Real deviation_tol = Real(default_hermiticity_tol)) {
    if (m.rows() != m.cols() || m.rows() < 1) {
      std::ostringstream msg;
      msg << "HermitianOperator: expected a square matrix with dim >= 1, got "
          << m.rows() << "x" << m.cols();
      throw std::invalid_argument(msg.str());
    }
    Matrix a = m.derived().template cast<Scalar>();
    const Real dev = (a - a.adjoint()).cwiseAbs().maxCoeff();
    if (!(dev <= deviation_tol)) {
      std::ostringstream msg;
      msg << "HermitianOperator: input deviates from Hermitian symmetry by " << dev
          << " (tolerance " << deviation_tol << ")";
      throw std::invalid_argument(msg.str());
    }
    entries_ = Real(0.5) * (a + a.adjoint());
  }

  /// Symmetrize without the deviation check. For results of spectral calculus
  /// whose anti-Hermitian part is pure rounding.
  static HermitianOperator symmetrized(Matrix m) {
    HermitianOperator out;
    out.entries_ = Real(0.5) * (m + m.adjoint());
    return out;
  }

  static HermitianOperator zero(Eigen::Index dim) {
    HermitianOperator out;
    out.entries_ = Matrix::Zero(dim, dim);
    return out;
  }

  static HermitianOperator identity(Eigen::Index dim) {
    HermitianOperator out;
    out.entries_ = Matrix::Identity(dim, dim);
    return out;
  }

  static HermitianOperator diagonal(const RealVector<Real>& d) {
    HermitianOperator out;
    out.entries_ = d.template cast<Scalar>().asDiagonal();
    return out;
  }

  Eigen::Index dim() const { return entries_.rows(); }
  const Matrix& entries() const { return entries_; }

  Real max_abs() const { return entries_.cwiseAbs().maxCoeff(); }
  Real frobenius_norm() const { return entries_.norm(); }
  Real trace() const { return entries_.trace().real(); }

  friend HermitianOperator operator+(const HermitianOperator& a, const HermitianOperator& b) {
    return symmetrized(a.entries_ + b.entries_);
  }
  friend HermitianOperator operator-(const HermitianOperator& a, const HermitianOperator& b) {
    return symmetrized(a.entries_ - b.entries_);
  }
  friend HermitianOperator operator-(const HermitianOperator& a) {
    return symmetrized(-a.entries_);
  }
  friend HermitianOperator operator*(Real s, const HermitianOperator& a) {
    return symmetrized(s * a.entries_);
  }
  friend HermitianOperator operator*(const HermitianOperator& a, Real s) { return s * a; }
  friend HermitianOperator operator/(const HermitianOperator& a, Real s) {
    return symmetrized(a.entries_ / s);
  }

 private:
  Matrix entries_;
};

/// Eigenvalues ascending, eigenvectors as unitary columns in matching order.
template <typename Real = double>
struct SpectralDecomposition {
  RealVector<Real> eigenvalues;
  ComplexMatrix<Real> eigenvectors;

  ComplexMatrix<Real> reconstruct() const {
    return eigenvectors *
           eigenvalues.template cast<std::complex<Real>>().asDiagonal() *
           eigenvectors.adjoint();
  }
};

template <typename Real>
SpectralDecomposition<Real> spectral(const HermitianOperator<Real>& a) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix<Real>> solver(a.entries());
  if (solver.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "spectral: eigensolver did not converge; dim=" << a.dim()
        << " frobenius=" << a.frobenius_norm() << " max|entry|=" << a.max_abs();
    throw std::runtime_error(msg.str());
  }
  return {solver.eigenvalues(), solver.eigenvectors()};
}

/// U diag(f(e)) U* via spectral calculus. f must be finite on the spectrum;
/// the offending eigenvalue is reported otherwise.
template <typename Real, typename F>
HermitianOperator<Real> apply_function(const HermitianOperator<Real>& a, F&& f) {
  const SpectralDecomposition<Real> dec = spectral(a);
  RealVector<Real> mapped(dec.eigenvalues.size());
  for (Eigen::Index i = 0; i < dec.eigenvalues.size(); ++i) {
    const Real v = static_cast<Real>(f(dec.eigenvalues[i]));
    if (!std::isfinite(v)) {
      std::ostringstream msg;
      msg << "apply_function: function not finite at eigenvalue " << dec.eigenvalues[i]
          << " (index " << i << ")";
      throw std::domain_error(msg.str());
    }
    mapped[i] = v;
  }
  return HermitianOperator<Real>::symmetrized(
      dec.eigenvectors * mapped.template cast<std::complex<Real>>().asDiagonal() *
      dec.eigenvectors.adjoint());
}

/// Schatten p-norm of a Hermitian matrix, p in [1, inf]. Singular values are
/// the absolute eigenvalues here.
template <typename Real>
Real schatten_norm(const HermitianOperator<Real>& a, Real p) {
  if (!(p >= Real(1))) {
    std::ostringstream msg;
    msg << "schatten_norm: p must satisfy p >= 1 (got " << p << ")";
    throw std::invalid_argument(msg.str());
  }
  const RealVector<Real> s = spectral(a).eigenvalues.cwiseAbs();
  const Real top = s.maxCoeff();
  if (std::isinf(p) || top == Real(0)) return top;
  if (p == Real(1)) return s.sum();
  if (p == Real(2)) return s.norm();
  // scale by the largest singular value so the pow-sum cannot overflow
  return top * std::pow((s / top).array().pow(p).sum(), Real(1) / p);
}

/// Operator (spectral) norm of a general complex matrix.
template <typename Real>
Real operator_norm(const ComplexMatrix<Real>& m) {
  if (m.size() == 0) return Real(0);
  Eigen::JacobiSVD<ComplexMatrix<Real>> svd(m);
  return svd.singularValues()[0];
}

/// log Tr exp(-A) from the eigenvalues of A, shifted so the largest term in
/// the sum is exactly 1.
template <typename Real>
Real log_trace_exp_neg(const RealVector<Real>& eigenvalues) {
  const Real m = eigenvalues.minCoeff();
  return std::log((-(eigenvalues.array() - m)).exp().sum()) - m;
}

template <typename Real>
Real trace_exp_neg(const RealVector<Real>& eigenvalues) {
  Real sum = 0;
  for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) sum += std::exp(-eigenvalues[i]);
  return sum;
}

}  // namespace qim
