#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <string_view>

#include "qim/hermitian.hpp"

namespace qim {

struct SplitMix64 {
  std::uint64_t state;

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
};

/// xoshiro256++ with self-contained gaussian sampling, so streams are
/// reproducible across platforms and standard-library versions.
class Xoshiro256pp {
 public:
  explicit Xoshiro256pp(std::uint64_t seed) {
    SplitMix64 sm{seed};
    for (auto& word : s_) word = sm.next();
    have_spare_ = false;
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Uniform in (0,1]; never returns 0, safe under log.
  double uniform01() { return double((next() >> 11) + 1) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  int uniform_int(int lo, int hi) {  // inclusive bounds
    return lo + int(next() % std::uint64_t(hi - lo + 1));
  }

  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  /// Standard complex normal: E|z|^2 = 1.
  std::complex<double> complex_gaussian() {
    return {gaussian() * std::numbers::sqrt2 / 2.0, gaussian() * std::numbers::sqrt2 / 2.0};
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  std::uint64_t s_[4];
  double spare_ = 0;
  bool have_spare_ = false;
};

inline std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : text) {
    h ^= std::uint64_t(static_cast<unsigned char>(c));
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Per-case stream split from (seed, suite, case index); reproducible from a
/// report alone.
inline Xoshiro256pp case_rng(std::uint64_t seed, std::string_view suite, std::uint64_t case_index) {
  SplitMix64 sm{seed ^ fnv1a64(suite)};
  const std::uint64_t base = sm.next();
  return Xoshiro256pp(base + case_index * 0x9e3779b97f4a7c15ULL);
}

/// Entries i.i.d. complex standard normal, symmetrized: (G + G*)/2.
template <typename Real = double>
HermitianOperator<Real> random_hermitian(Xoshiro256pp& rng, Eigen::Index dim) {
  ComplexMatrix<Real> g(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i)
    for (Eigen::Index j = 0; j < dim; ++j) g(i, j) = std::complex<Real>(rng.complex_gaussian());
  return HermitianOperator<Real>::symmetrized(std::move(g));
}

template <typename Real = double>
ComplexVector<Real> random_unit_vector(Xoshiro256pp& rng, Eigen::Index dim) {
  ComplexVector<Real> v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v[i] = std::complex<Real>(rng.complex_gaussian());
  v /= v.norm();
  return v;
}

}  // namespace qim
