#pragma once

// Deterministic model generators for tests and acceptance runs. Swap-invariant
// instances are built from the characterization rather than checked by it:
//  - Gaussian part A = (I + 1 h^T) B (I + h 1^T) + s^2 1 1^T with B pi-invariant,
//    so the centered covariance P'AP' is pi-invariant;
//  - nu = tilt(nu~, -theta) where nu~ pairs x with pi x + c 1 (equal mass),
//    so the theta-tilt projected by P' is pi-invariant;
//  - gamma_i solves the drift condition given gamma_j.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "swapsym/swapsym.hpp"

namespace swapsym::testing {

/// Deterministic parameter stream for instance `k` of experiment `tag`.
class ParamRng {
 public:
  ParamRng(std::uint64_t seed, std::uint64_t tag, std::uint64_t k)
      : s_(seed ^ (tag * 0x9E3779B97F4A7C15ull), k, 0, Purpose::parameters) {}
  double uniform(double lo = 0.0, double hi = 1.0) { return lo + (hi - lo) * s_.uniform(); }
  double normal() { return s_.normal(); }
  double log_uniform(double lo, double hi) { return std::exp(uniform(std::log(lo), std::log(hi))); }
  std::size_t index(std::size_t n) { return std::min<std::size_t>(n - 1, static_cast<std::size_t>(s_.uniform() * n)); }
  bool coin(double p = 0.5) { return s_.uniform() < p; }

 private:
  Stream s_;
};

inline Matrix random_psd(ParamRng& rng, std::size_t n, double scale, double ridge) {
  Matrix g(n, n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) g(r, c) = rng.normal() * scale;
  Matrix a = g * g.transpose() / static_cast<double>(n);
  a += ridge * Matrix::Identity(n, n);
  return 0.5 * (a + a.transpose());
}

/// A satisfying the n >= 3 swap condition a_li - a_lj = (a_ii - a_jj)/2.
inline Matrix swap_compatible_covariance(ParamRng& rng, std::size_t n, std::size_t i, std::size_t j) {
  const Matrix pi = swap_matrix(n, i, j);
  const Matrix c = random_psd(rng, n, 0.25, 0.0);
  Matrix b = 0.5 * (c + pi * c * pi) + 0.005 * Matrix::Identity(n, n);
  if (n == 2) return random_psd(rng, 2, 0.3, 0.005);
  Vector h(n);
  for (std::size_t k = 0; k < n; ++k) h(k) = rng.uniform(-0.4, 0.4);
  const Matrix m = Matrix::Identity(n, n) + Vector::Ones(n) * h.transpose();
  const double s = rng.uniform(0.0, 0.2);
  Matrix a = m * b * m.transpose() + s * s * Matrix::Ones(n, n);
  return 0.5 * (a + a.transpose());
}

/// pi-invariant (modulo shifts along 1 after projection) base measure nu~.
inline LevyMeasure paired_measure(ParamRng& rng, std::size_t n, std::size_t i, std::size_t j, bool mixture,
                                  std::size_t pairs) {
  const Matrix pi = swap_matrix(n, i, j);
  auto random_point = [&] {
    Vector x(n);
    for (std::size_t k = 0; k < n; ++k) x(k) = 0.15 * rng.normal();
    return x;
  };
  if (!mixture) {
    LevyMeasure::Atoms atoms;
    for (std::size_t p = 0; p < pairs; ++p) {
      const double w = rng.uniform(0.1, 1.0);
      Vector x = random_point();
      if (rng.coin(0.25)) {  // self-paired atom on the swap-fixed set
        x(j) = x(i);
        atoms.push_back({x, w});
        continue;
      }
      const double shift = rng.coin(0.5) ? rng.uniform(-0.1, 0.1) : 0.0;
      atoms.push_back({x, w});
      atoms.push_back({Vector(pi * x + shift * Vector::Ones(n)), w});
    }
    return LevyMeasure::atomic(n, std::move(atoms));
  }
  LevyMeasure::Mixture comps;
  for (std::size_t p = 0; p < pairs; ++p) {
    const double w = rng.uniform(0.1, 1.0);
    const Vector m = random_point();
    const Matrix c = random_psd(rng, n, 0.08, 1e-4);
    const double shift = rng.coin(0.5) ? rng.uniform(-0.1, 0.1) : 0.0;
    comps.push_back({w, m, c});
    comps.push_back({w, Vector(pi * m + shift * Vector::Ones(n)), Matrix(pi * c * pi)});
  }
  return LevyMeasure::gaussian_mixture(n, std::move(comps));
}

/// gamma_i solving the drift condition for direction theta (gamma_j and the
/// rest given), plus carrying-cost difference `carry_diff`.
inline Vector solve_drift(const Matrix& a, const LevyMeasure& nu, Vector gamma, std::size_t i, std::size_t j,
                          const Vector& theta, double carry_diff = 0.0) {
  const std::size_t dim = static_cast<std::size_t>(gamma.size());
  const Vector at = a * theta;
  const Vector zero = Vector::Zero(dim);
  const double jump = measure_moment(nu, theta, MomentPoly::linear(j)) -
                      measure_moment(nu, theta, MomentPoly::linear(i)) -
                      measure_moment(nu, zero, MomentPoly::linear(j)) +
                      measure_moment(nu, zero, MomentPoly::linear(i));
  gamma(i) = gamma(j) + at(j) - at(i) + jump + carry_diff;
  return gamma;
}

enum class JumpType { none, atomic, mixture };

inline const char* to_string(JumpType t) {
  return t == JumpType::none ? "gaussian" : t == JumpType::atomic ? "atomic" : "mixture";
}

struct SwapInstance {
  LevyTriplet triplet;
  std::size_t i;
  std::size_t j;
  std::optional<Vector> v;
  bool perturbed;
  std::string perturbation;  // "", "A", "nu", "gamma"
  JumpType jumps;
};

/// Random triplet for the structural/analytic equivalence experiments. Half
/// of the instances are swap-invariant by construction, half are perturbed.
inline SwapInstance random_swap_instance(std::uint64_t seed, std::uint64_t k) {
  ParamRng rng(seed, 1, k);
  const std::size_t n = 2 + rng.index(3);
  const std::size_t i = rng.index(n);
  std::size_t j = rng.index(n - 1);
  if (j >= i) ++j;
  const auto jumps = static_cast<JumpType>(rng.index(3));
  std::optional<Vector> v;
  if (rng.coin(1.0 / 3.0)) {
    Vector w(n);
    for (std::size_t l = 0; l < n; ++l) w(l) = rng.uniform(-0.5, 0.5);
    v = w;
  }
  Vector theta = v ? *v : Vector::Zero(n);
  theta(i) += 0.5;
  theta(j) += 0.5;

  Matrix a = swap_compatible_covariance(rng, n, i, j);
  LevyMeasure nu = LevyMeasure::zero(n);
  if (jumps != JumpType::none)
    nu = tilt_measure(paired_measure(rng, n, i, j, jumps == JumpType::mixture, 1 + rng.index(3)), -theta);
  Vector gamma(n);
  for (std::size_t l = 0; l < n; ++l) gamma(l) = rng.uniform(-0.2, 0.2);
  gamma = solve_drift(a, nu, gamma, i, j, theta);

  const bool perturb = rng.coin(0.5);
  std::string what;
  if (perturb) {
    const double eps = rng.log_uniform(1e-4, 1e-1);
    std::size_t choice = rng.index(3);
    if (choice == 1 && nu.is_zero()) choice = 2;
    if (choice == 0) {
      a(i, i) += eps;  // diagonal bump keeps A PSD
      what = "A";
    } else if (choice == 1) {
      if (nu.is_atomic()) {
        auto atoms = nu.atoms();
        atoms[rng.index(atoms.size())].mass *= 1.0 + eps;
        nu = LevyMeasure::atomic(n, std::move(atoms));
      } else {
        auto comps = nu.components();
        comps[rng.index(comps.size())].intensity *= 1.0 + eps;
        nu = LevyMeasure::gaussian_mixture(n, std::move(comps));
      }
      what = "nu";
    } else {
      gamma(i) += eps;
      what = "gamma";
    }
  }
  return {LevyTriplet(a, nu, gamma), i, j, v, perturb, what, jumps};
}

/// Risk-neutral (martingale) bivariate GBM.
inline LevyTriplet random_gbm2(ParamRng& rng) {
  const double s1 = rng.uniform(0.05, 0.6), s2 = rng.uniform(0.05, 0.6), rho = rng.uniform(-0.9, 0.9);
  Matrix a(2, 2);
  a << s1 * s1, rho * s1 * s2, rho * s1 * s2, s2 * s2;
  const LevyMeasure nu = LevyMeasure::zero(2);
  return LevyTriplet(a, nu, martingale_gamma(a, nu));
}

/// Martingale trivariate GBM with a31 - a32 = (a11 - a22)/2 (swap of assets 1, 2).
inline LevyTriplet random_gbm3_swap(ParamRng& rng) {
  const Matrix a = swap_compatible_covariance(rng, 3, 0, 1);
  const LevyMeasure nu = LevyMeasure::zero(3);
  return LevyTriplet(a, nu, martingale_gamma(a, nu));
}

/// Martingale exchangeable (in assets i, j) model with optional symmetric jumps.
inline LevyTriplet exchangeable_model(ParamRng& rng, std::size_t n, std::size_t i, std::size_t j, bool jumps) {
  const Matrix pi = swap_matrix(n, i, j);
  const Matrix c = random_psd(rng, n, 0.25, 0.01);
  const Matrix a = 0.5 * (c + pi * c * pi);
  LevyMeasure nu = LevyMeasure::zero(n);
  if (jumps) {
    LevyMeasure::Mixture comps;
    Vector m(n);
    for (std::size_t k = 0; k < n; ++k) m(k) = 0.1 * rng.normal();
    const Matrix cc = random_psd(rng, n, 0.08, 1e-3);
    comps.push_back({0.4, m, cc});
    comps.push_back({0.4, Vector(pi * m), Matrix(pi * cc * pi)});
    nu = LevyMeasure::gaussian_mixture(n, std::move(comps));
  }
  return LevyTriplet(a, nu, martingale_gamma(a, nu));
}

/// Bivariate Merton-type model that is quasi-swap-invariant with power
/// `alpha` for carrying rates (r_i, r_j): nu is the tilt by -theta(alpha)
/// of a symmetric mixture, gamma is the martingale drift and r_i is derived
/// from the power equation.
struct QuasiModel {
  LevyTriplet triplet;
  double alpha;
  double r_i;
  double r_j;
};

inline QuasiModel merton_quasi_model(ParamRng& rng, double alpha, double r_j) {
  const std::size_t n = 2;
  const Matrix a = random_psd(rng, n, 0.25, 0.01);
  QuasiSpec spec{0, 1, alpha, 0.0, 0.0, false};
  const Vector theta = zeta_prime_shift(spec, n);
  const LevyMeasure base = paired_measure(rng, n, 0, 1, true, 1);
  const LevyMeasure nu = tilt_measure(base, -theta);
  const Vector gamma = martingale_gamma(a, nu);
  LevyTriplet t(a, nu, gamma);
  // alpha * D = 2 (r_i - r_j) + 2 (int (e^{x_i} - e^{x_j}) dnu + int (x_j - x_i) e^{theta x} dnu)
  const double denom = a(0, 0) + a(1, 1) - 2.0 * a(0, 1);
  const Vector zero = Vector::Zero(n);
  const double jumps = measure_moment(nu, zero, MomentPoly::exp_diff(0, 1)) +
                       measure_moment(nu, theta, MomentPoly::linear(1)) -
                       measure_moment(nu, theta, MomentPoly::linear(0));
  const double r_i = r_j + 0.5 * alpha * denom - jumps;
  return {std::move(t), alpha, r_i, r_j};
}

/// Zero-strike basket weights with u_i > 0 > u_j.
inline std::vector<PayoffSpec> weight_vectors(std::uint64_t seed, std::uint64_t tag, std::size_t n, std::size_t i,
                                              std::size_t j, std::size_t count = 10,
                                              std::optional<std::size_t> quanto = std::nullopt) {
  std::vector<PayoffSpec> out;
  for (std::size_t k = 0; k < count; ++k) {
    ParamRng rng(seed, tag, k);
    Vector u(n);
    for (std::size_t l = 0; l < n; ++l) u(l) = rng.uniform(-0.3, 0.3);
    u(i) = rng.uniform(0.5, 1.5);
    u(j) = -rng.uniform(0.5, 1.5);
    PayoffSpec f = PayoffSpec::zero_strike(u);
    f.quanto = quanto;
    out.push_back(f);
  }
  return out;
}

}  // namespace swapsym::testing
