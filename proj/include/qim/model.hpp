#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>

#include "qim/hermitian.hpp"

namespace qim {

enum class ModelKind { harmonic_oscillator, dirichlet_box, custom };

inline std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::harmonic_oscillator: return "harmonic_oscillator";
    case ModelKind::dirichlet_box: return "dirichlet_box";
    case ModelKind::custom: return "custom";
  }
  return "custom";
}

template <typename Real = double>
struct ModelParams {
  Real beta0 = 0;
  // dirichlet_box only; the spectrum (k pi / L)^2 is rescaled so the ground
  // level is 1, so L changes nothing after normalization.
  Real box_length = std::numbers::pi_v<Real>;
  // custom only: shift by (1 - min eigenvalue) I when the input dips below I
  bool auto_shift = false;
  std::optional<ComplexMatrix<Real>> entries;
};

/// Positive model Hamiltonian H0 >= I with its inverse-temperature threshold
/// beta0 and the derived partition data Z0 = Tr exp(-H0), Psi0 = log Z0.
template <typename Real = double>
class ModelHamiltonian {
 public:
  ModelHamiltonian(HermitianOperator<Real> h0, Real beta0, Real min_eig_slack = Real(1e-9))
      : h0_(std::move(h0)), beta0_(beta0), spec_(spectral(h0_)) {
    if (!(beta0 >= Real(0) && beta0 < Real(1))) {
      std::ostringstream msg;
      msg << "ModelHamiltonian: beta0 must lie in [0,1), got " << beta0;
      throw std::invalid_argument(msg.str());
    }
    const Real min_eig = spec_.eigenvalues.minCoeff();
    if (min_eig < Real(1) - min_eig_slack) {
      std::ostringstream msg;
      msg << "ModelHamiltonian: requires H0 >= I, but min eigenvalue is " << min_eig;
      throw std::invalid_argument(msg.str());
    }
    psi0_ = log_trace_exp_neg(spec_.eigenvalues);
    z0_ = std::exp(psi0_);
  }

  const HermitianOperator<Real>& h0() const { return h0_; }
  Real beta0() const { return beta0_; }
  Real z0() const { return z0_; }
  Real psi0() const { return psi0_; }
  const SpectralDecomposition<Real>& h0_spectral() const { return spec_; }
  Eigen::Index dim() const { return h0_.dim(); }

  /// Radius of the admission ball at the base point, a0 = 1 - beta0.
  Real admission_radius() const { return Real(1) - beta0_; }

 private:
  HermitianOperator<Real> h0_;
  Real beta0_;
  SpectralDecomposition<Real> spec_;
  Real z0_;
  Real psi0_;
};

template <typename Real = double>
ModelHamiltonian<Real> build_model(ModelKind kind, Eigen::Index dim,
                                   const ModelParams<Real>& params = {}) {
  if (dim < 1) throw std::invalid_argument("build_model: dim must be >= 1");
  switch (kind) {
    case ModelKind::harmonic_oscillator: {
      // levels n + 1/2 shifted by +1/2 so the ground level is 1
      RealVector<Real> d(dim);
      for (Eigen::Index k = 0; k < dim; ++k) d[k] = Real(k + 1);
      return ModelHamiltonian<Real>(HermitianOperator<Real>::diagonal(d), params.beta0);
    }
    case ModelKind::dirichlet_box: {
      if (!(params.box_length > Real(0)))
        throw std::invalid_argument("build_model: box_length must be positive");
      RealVector<Real> d(dim);
      const Real ground = std::pow(std::numbers::pi_v<Real> / params.box_length, 2);
      for (Eigen::Index k = 0; k < dim; ++k) {
        const Real level = std::pow(Real(k + 1) * std::numbers::pi_v<Real> / params.box_length, 2);
        d[k] = level / ground;
      }
      return ModelHamiltonian<Real>(HermitianOperator<Real>::diagonal(d), params.beta0);
    }
    case ModelKind::custom: {
      if (!params.entries)
        throw std::invalid_argument("build_model: custom kind requires entries");
      if (params.entries->rows() != dim || params.entries->cols() != dim)
        throw std::invalid_argument("build_model: custom entries do not match dim");
      HermitianOperator<Real> h(*params.entries);
      const Real min_eig = spectral(h).eigenvalues.minCoeff();
      if (min_eig < Real(1)) {
        if (!params.auto_shift) {
          std::ostringstream msg;
          msg << "build_model: custom input has min eigenvalue " << min_eig
              << " < 1 and auto_shift is off";
          throw std::invalid_argument(msg.str());
        }
        h = h + (Real(1) - min_eig) * HermitianOperator<Real>::identity(dim);
      }
      return ModelHamiltonian<Real>(h, params.beta0);
    }
  }
  throw std::invalid_argument("build_model: unknown kind");
}

}  // namespace qim
