#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <utility>
#include <vector>

#include "qim/gibbs.hpp"
#include "qim/hermitian.hpp"
#include "qim/model.hpp"
#include "qim/perturbation.hpp"

namespace qim {

inline constexpr double default_admission_slack = 0.0;  // the gates are strict
inline constexpr double default_total_match_tol = 1e-12;
inline constexpr double default_state_match_tol = 1e-11;

/// A point of the manifold reached by a finite admission chain X1, ..., Xn
/// over a base model. total caches the exact sum of the steps; the state it
/// denotes is gibbs_state(H0 + total), and the admission trail is
/// re-checkable from the steps alone.
template <typename Real = double>
struct ManifoldPoint {
  ModelHamiltonian<Real> base;
  std::vector<HermitianOperator<Real>> steps;
  HermitianOperator<Real> total;
};

template <typename Real>
ManifoldPoint<Real> manifold_point(const ModelHamiltonian<Real>& base) {
  return {base, {}, HermitianOperator<Real>::zero(base.dim())};
}

/// Chart data at a point: the patch Hamiltonian (renormalized to H >= I by
/// adding shift * I, which changes no state), and the admission radius
/// 1 - beta at that point.
template <typename Real = double>
struct Patch {
  ManifoldPoint<Real> base_point;
  HermitianOperator<Real> h_at_base;
  Real shift = 0;
  Real radius = 1;
};

namespace detail {

template <typename Real>
struct ChainTrail {
  struct Level {
    Real step_norm;
    Real threshold;
    Real shift;  // renormalization applied after admitting this step
    Real beta;
  };
  std::vector<Level> levels;
  std::vector<HermitianOperator<Real>> h_levels;  // patch Hamiltonian after each step
  HermitianOperator<Real> h_patch;  // final patch Hamiltonian, >= I
  Real last_shift = 0;
  Real beta = 0;
  bool admitted = true;
  std::size_t failed_step = 0;
  Real failed_norm = 0;
  Real failed_threshold = 0;
};

/// Replay an admission trail. Each step is measured against the previous
/// patch Hamiltonian (shifts included, as the chart inherits them); beta
/// chains through the Lemma-4 rule beta' = beta / (1 - a). Note beta < 1 is
/// preserved automatically: an admitted a is below 1 - beta.
template <typename Real>
ChainTrail<Real> walk_chain(const ModelHamiltonian<Real>& base,
                            const std::vector<HermitianOperator<Real>>& steps) {
  ChainTrail<Real> trail;
  trail.h_patch = base.h0();
  trail.beta = base.beta0();
  trail.levels.reserve(steps.size());
  for (std::size_t k = 0; k < steps.size(); ++k) {
    if (steps[k].dim() != base.dim())
      throw std::invalid_argument("walk_chain: step dimension does not match the base model");
    const Real norm = relative_norm(steps[k], trail.h_patch);
    const Real threshold = Real(1) - trail.beta;
    if (!(norm < threshold)) {
      trail.admitted = false;
      trail.failed_step = k;
      trail.failed_norm = norm;
      trail.failed_threshold = threshold;
      return trail;
    }
    HermitianOperator<Real> next = trail.h_patch + steps[k];
    const Real min_eig = spectral(next).eigenvalues.minCoeff();
    Real shift = 0;
    if (min_eig < Real(1)) {
      shift = Real(1) - min_eig;
      next = next + shift * HermitianOperator<Real>::identity(base.dim());
    }
    trail.h_patch = std::move(next);
    trail.last_shift = shift;
    trail.beta = trail.beta / (Real(1) - norm);
    trail.levels.push_back({norm, threshold, shift, trail.beta});
    trail.h_levels.push_back(trail.h_patch);
  }
  return trail;
}

template <typename Real>
void require_same_base(const ManifoldPoint<Real>& p, const ManifoldPoint<Real>& q,
                       const char* who) {
  const bool same = p.base.dim() == q.base.dim() && p.base.beta0() == q.base.beta0() &&
                    p.base.h0().entries() == q.base.h0().entries();
  if (!same) {
    std::ostringstream msg;
    msg << who << ": points live over different base models";
    throw std::invalid_argument(msg.str());
  }
}

}  // namespace detail

/// Recompute the chart at a point from its admission trail.
template <typename Real>
Patch<Real> patch_at(const ManifoldPoint<Real>& p) {
  const auto trail = detail::walk_chain(p.base, p.steps);
  if (!trail.admitted) {
    std::ostringstream msg;
    msg << "patch_at: recorded step " << trail.failed_step << " fails re-admission (norm "
        << trail.failed_norm << " >= threshold " << trail.failed_threshold << ")";
    throw std::logic_error(msg.str());
  }
  return {p, trail.h_patch, trail.last_shift, Real(1) - trail.beta};
}

template <typename Real = double>
struct ExtendOutcome {
  bool admitted = false;
  std::optional<ManifoldPoint<Real>> point;
  Real norm = 0;
  Real threshold = 0;
};

/// Try to append a perturbation step. Rejection reports the offending norm
/// and threshold; it signals that Y lies outside the patch, not a bug.
template <typename Real>
ExtendOutcome<Real> extend(const ManifoldPoint<Real>& p, const HermitianOperator<Real>& y) {
  if (y.dim() != p.base.dim())
    throw std::invalid_argument("extend: step dimension does not match the base model");
  const Patch<Real> patch = patch_at(p);
  ExtendOutcome<Real> outcome;
  outcome.norm = relative_norm(y, patch.h_at_base);
  outcome.threshold = patch.radius;
  if (!(outcome.norm < outcome.threshold)) return outcome;
  outcome.admitted = true;
  ManifoldPoint<Real> next = p;
  next.steps.push_back(y);
  next.total = next.total + y;
  outcome.point = std::move(next);
  return outcome;
}

/// Build a point from a full step list, throwing if any gate fails.
template <typename Real>
ManifoldPoint<Real> make_point(const ModelHamiltonian<Real>& base,
                               const std::vector<HermitianOperator<Real>>& steps) {
  ManifoldPoint<Real> p = manifold_point(base);
  for (std::size_t k = 0; k < steps.size(); ++k) {
    ExtendOutcome<Real> out = extend(p, steps[k]);
    if (!out.admitted) {
      std::ostringstream msg;
      msg << "make_point: step " << k << " inadmissible (norm " << out.norm << " >= threshold "
          << out.threshold << ")";
      throw std::invalid_argument(msg.str());
    }
    p = std::move(*out.point);
  }
  return p;
}

template <typename Real = double>
struct PathIndependenceReport {
  bool same_state = false;
  Real rho_distance = 0;    // Frobenius
  Real total_distance = 0;  // max entry deviation of the two totals
};

/// Two chains with the same total reach the same state.
template <typename Real>
PathIndependenceReport<Real> path_independence_check(const ManifoldPoint<Real>& p,
                                                     const ManifoldPoint<Real>& q,
                                                     Real total_tol = Real(default_total_match_tol),
                                                     Real state_tol = Real(default_state_match_tol)) {
  detail::require_same_base(p, q, "path_independence_check");
  PathIndependenceReport<Real> report;
  report.total_distance = (p.total.entries() - q.total.entries()).cwiseAbs().maxCoeff();
  const Real scale = std::max({Real(1), p.total.max_abs(), q.total.max_abs()});
  if (report.total_distance > total_tol * scale) {
    std::ostringstream msg;
    msg << "path_independence_check: totals differ by " << report.total_distance
        << "; the check compares routes to the same form sum";
    throw std::invalid_argument(msg.str());
  }
  const GibbsState<Real> sp = gibbs_state(p.base.h0() + p.total);
  const GibbsState<Real> sq = gibbs_state(q.base.h0() + q.total);
  report.rho_distance = (sp.rho().entries() - sq.rho().entries()).norm();
  report.same_state = report.rho_distance <= state_tol;
  return report;
}

template <typename Real = double>
struct NormEquivalenceReport {
  Real norm_x = 0;        // |Y|_X
  Real norm_0 = 0;        // |Y|_0
  Real lower_const = 0;   // 1/(1 + |X|_0)
  Real upper_const = 0;   // 1/(1 - |X|_0)
  bool holds = false;
};

/// Two-sided norm equivalence across a patch step:
/// |Y|_0 / (1 + |X|_0) <= |Y|_X <= |Y|_0 / (1 - |X|_0).
template <typename Real>
NormEquivalenceReport<Real> norm_equivalence_report(const ModelHamiltonian<Real>& base,
                                                    const Perturbation<Real>& x,
                                                    const HermitianOperator<Real>& y,
                                                    Real slack = Real(1e-10)) {
  const Real a0 = relative_norm(x.x, base.h0());
  if (!(a0 < Real(1))) {
    std::ostringstream msg;
    msg << "norm_equivalence_report: requires |X|_0 < 1, got " << a0;
    throw std::invalid_argument(msg.str());
  }
  NormEquivalenceReport<Real> report;
  report.norm_0 = relative_norm(y, base.h0());
  report.norm_x = relative_norm(y, base.h0() + x.x);
  report.lower_const = Real(1) / (Real(1) + a0);
  report.upper_const = Real(1) / (Real(1) - a0);
  const Real s = slack * std::max({Real(1), report.norm_0, report.norm_x});
  report.holds = report.norm_x <= report.upper_const * report.norm_0 + s &&
                 report.norm_x >= report.lower_const * report.norm_0 - s;
  return report;
}

template <typename Real = double>
struct LuxemburgResult {
  Real value = 0;
  Real bracket_lo = 0;
  Real bracket_hi = 0;
  int iterations = 0;
};

/// Luxemburg seminorm |X|_L = inf{ r > 0 : Tr[(e^{-(H0+X/r)} + e^{-(H0-X/r)})
/// / (2 Z0)] < 2 }, located by bisection. The predicate holds for every large
/// r (the ratio tends to 1) and fails near 0 (one of the symmetrized
/// exponents blows up), so a bracket always exists; monotonicity in between
/// is an empirically tested assumption, see the luxemburg suite.
template <typename Real>
LuxemburgResult<Real> luxemburg(const ModelHamiltonian<Real>& base,
                                const HermitianOperator<Real>& x, Real tol) {
  if (!(tol > Real(0))) throw std::invalid_argument("luxemburg: tol must be positive");
  if (x.dim() != base.dim()) throw std::invalid_argument("luxemburg: dimension mismatch");
  if (x.max_abs() == Real(0)) return {Real(0), Real(0), Real(0), 0};

  const auto ratio = [&](Real r) {
    const HermitianOperator<Real> xr = x / r;
    const RealVector<Real> plus = spectral(base.h0() + xr).eigenvalues;
    const RealVector<Real> minus = spectral(base.h0() - xr).eigenvalues;
    return (trace_exp_neg(plus) + trace_exp_neg(minus)) / (2 * base.z0());
  };
  const auto predicate = [&](Real r) { return ratio(r) < Real(2); };

  std::vector<std::pair<Real, Real>> samples;
  const auto fail = [&](const char* what) {
    std::ostringstream msg;
    msg << "luxemburg: " << what << "; f samples:";
    for (const auto& [r, f] : samples) msg << " f(" << r << ")=" << f;
    throw std::runtime_error(msg.str());
  };

  Real hi = 2 * relative_norm(x, base.h0());
  for (int i = 0; !predicate(hi); ++i) {
    samples.emplace_back(hi, ratio(hi));
    if (i >= 200) fail("no upper bracket after 200 doublings");
    hi *= 2;
  }
  Real lo = hi / 2;
  for (int i = 0; predicate(lo); ++i) {
    if (i >= 200) fail("no lower bracket after 200 halvings");
    hi = lo;
    lo /= 2;
  }

  LuxemburgResult<Real> result;
  for (; hi - lo >= tol; ++result.iterations) {
    if (result.iterations >= 200) {
      samples.emplace_back(lo, ratio(lo));
      samples.emplace_back(hi, ratio(hi));
      fail("bracket did not shrink below tol within 200 bisection iterations");
    }
    const Real mid = (lo + hi) / 2;
    (predicate(mid) ? hi : lo) = mid;
  }
  result.value = (lo + hi) / 2;
  result.bracket_lo = lo;
  result.bracket_hi = hi;
  return result;
}

/// (+1)-mixture of two points: the chain mixed level by level, re-admitted
/// through the ordinary extension rules. Failure would contradict the
/// convexity theorem and is thrown as a falsification event.
template <typename Real>
ManifoldPoint<Real> plus_mix(const ManifoldPoint<Real>& p, const ManifoldPoint<Real>& q,
                             Real lambda) {
  detail::require_same_base(p, q, "plus_mix");
  if (!(lambda >= Real(0) && lambda <= Real(1)))
    throw std::invalid_argument("plus_mix: lambda must lie in [0,1]");
  const std::size_t n = std::max(p.steps.size(), q.steps.size());
  const HermitianOperator<Real> zero = HermitianOperator<Real>::zero(p.base.dim());
  std::vector<HermitianOperator<Real>> mixed;
  mixed.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto& pk = k < p.steps.size() ? p.steps[k] : zero;
    const auto& qk = k < q.steps.size() ? q.steps[k] : zero;
    mixed.push_back(lambda * pk + (Real(1) - lambda) * qk);
  }
  while (!mixed.empty() && mixed.back().max_abs() == Real(0)) mixed.pop_back();

  ManifoldPoint<Real> out = manifold_point(p.base);
  for (std::size_t k = 0; k < mixed.size(); ++k) {
    ExtendOutcome<Real> step = extend(out, mixed[k]);
    if (!step.admitted) {
      std::ostringstream msg;
      msg << "plus_mix: falsification event: mixed step " << k << " inadmissible (norm "
          << step.norm << " >= threshold " << step.threshold << ") at lambda " << lambda;
      throw std::runtime_error(msg.str());
    }
    out = std::move(*step.point);
  }
  return out;
}

template <typename Real = double>
struct ConvexityGate {
  Real lambda = 0;
  int level = 0;
  Real a1 = 0;            // step norm in the first chain, at its own patch
  Real a2 = 0;            // likewise for the second chain
  Real witness = 0;       // max(a1, a2), the proof's bound for the mixed step
  Real mixed_norm = 0;    // actual norm of the mixed step at the mixed patch
  Real radius = 0;        // admission radius of the mixed chain before this level
  bool witness_dominates = false;
  bool admitted = false;
};

template <typename Real = double>
struct ConvexityReport {
  std::vector<ConvexityGate<Real>> gates;
  bool holds = true;
};

/// Executable form of the (+1)-convexity theorem. Chains are padded with zero
/// steps to a common length and mixed level by level; the mixed patch at each
/// level is the lambda-mixture of the two chains' patch Hamiltonians (the
/// proof mixes the forms q = l q1 + l' q2), and every gate is verified with
/// the max{a1,a2} witness. Any failure is reported as a falsification event
/// in the returned gates.
template <typename Real>
ConvexityReport<Real> plus_convexity_check(const ManifoldPoint<Real>& p,
                                           const ManifoldPoint<Real>& q,
                                           const std::vector<Real>& lambdas,
                                           Real slack = Real(1e-10)) {
  detail::require_same_base(p, q, "plus_convexity_check");
  const std::size_t n = std::max(p.steps.size(), q.steps.size());
  const HermitianOperator<Real> zero = HermitianOperator<Real>::zero(p.base.dim());

  auto padded = [&](const ManifoldPoint<Real>& point) {
    std::vector<HermitianOperator<Real>> steps = point.steps;
    steps.resize(n, zero);
    return steps;
  };
  const std::vector<HermitianOperator<Real>> steps1 = padded(p);
  const std::vector<HermitianOperator<Real>> steps2 = padded(q);

  // per-chain patch Hamiltonians at every level, shifts included
  const auto trail1 = detail::walk_chain(p.base, steps1);
  const auto trail2 = detail::walk_chain(q.base, steps2);
  if (!trail1.admitted || !trail2.admitted)
    throw std::invalid_argument("plus_convexity_check: an input chain fails its own trail");
  std::vector<HermitianOperator<Real>> h1{p.base.h0()}, h2{q.base.h0()};
  h1.insert(h1.end(), trail1.h_levels.begin(), trail1.h_levels.end());
  h2.insert(h2.end(), trail2.h_levels.begin(), trail2.h_levels.end());

  ConvexityReport<Real> report;
  for (const Real lambda : lambdas) {
    Real beta_mix = p.base.beta0();
    for (std::size_t k = 0; k < n; ++k) {
      ConvexityGate<Real> gate;
      gate.lambda = lambda;
      gate.level = static_cast<int>(k);
      gate.a1 = trail1.levels[k].step_norm;
      gate.a2 = trail2.levels[k].step_norm;
      gate.witness = std::max(gate.a1, gate.a2);
      const HermitianOperator<Real> h_mix =
          lambda * h1[k] + (Real(1) - lambda) * h2[k];
      const HermitianOperator<Real> mixed_step =
          lambda * steps1[k] + (Real(1) - lambda) * steps2[k];
      gate.mixed_norm = relative_norm(mixed_step, h_mix);
      gate.radius = Real(1) - beta_mix;
      gate.witness_dominates =
          gate.mixed_norm <= gate.witness + slack * std::max(Real(1), gate.witness);
      gate.admitted = gate.witness < gate.radius;
      if (!gate.witness_dominates || !gate.admitted) report.holds = false;
      beta_mix = beta_mix / (Real(1) - gate.witness);
      report.gates.push_back(gate);
    }
  }
  return report;
}

}  // namespace qim
