#pragma once

// Quasi-swap-invariance: swap-invariance up to the power factor
// (eta_i / eta_j)^alpha, which absorbs unequal carrying costs.

#include <cmath>
#include <string>
#include <vector>

#include "swapsym/symmetry.hpp"

namespace swapsym {

struct QuasiSpec {
  std::size_t i = 0;
  std::size_t j = 1;
  double alpha = 0.0;
  double r_i = 0.0;
  double r_j = 0.0;
  bool weighted = false;  // log-weight is the last triplet coordinate
};

/// Esscher direction (1+alpha)/2 e_i + (1-alpha)/2 e_j (+ e_{n+1} if weighted)
/// for a triplet of dimension `dim`. The order of i and j matters.
inline Vector zeta_prime_shift(const QuasiSpec& spec, std::size_t dim) {
  const std::size_t n = spec.weighted ? dim - 1 : dim;
  detail::require_pair(n, spec.i, spec.j);
  if (!std::isfinite(spec.alpha) || !std::isfinite(spec.r_i) || !std::isfinite(spec.r_j))
    throw InputError("quasi parameters must be finite");
  Vector theta = Vector::Zero(dim);
  theta(spec.i) = 0.5 * (1.0 + spec.alpha);
  theta(spec.j) = 0.5 * (1.0 - spec.alpha);
  if (spec.weighted) theta(n) = 1.0;
  return theta;
}

/// Conditions on the triplet of xi (carrying costs excluded) for
/// e^{xi + lambda} to be quasi-swap-invariant with power alpha.
inline SymmetryReport check_quasi_swap_invariant(const LevyTriplet& t, const QuasiSpec& spec,
                                                 double tol = kStructuralTolerance) {
  if (spec.weighted && t.dim() < 3) throw InputError("weighted check needs at least two assets plus a weight");
  const std::size_t n = spec.weighted ? t.dim() - 1 : t.dim();
  const Vector theta = zeta_prime_shift(spec, t.dim());
  SymmetryReport rep;
  rep.kind = SymmetryKind::quasi_swap_invariant;
  detail::add_swap_conditions(rep, t, n, spec.i, spec.j, theta, spec.r_i - spec.r_j, tol);
  rep.details = "alpha=" + std::to_string(spec.alpha);
  return rep;
}

struct AlphaScan {
  double lo = -20.0;
  double hi = 20.0;
  double step = 0.25;
  double tol = 1e-12;
  bool force_scan = false;  // scan even when the closed form (nu = 0) applies
};

/// Left side minus right side of the power equation for martingale-normalized
/// models; its zero is the quasi-invariance power.
inline double alpha_equation(const LevyTriplet& t, std::size_t i, std::size_t j, double r_i,
                             double r_j, bool weighted, double alpha) {
  const QuasiSpec spec{i, j, alpha, r_i, r_j, weighted};
  const Vector theta = zeta_prime_shift(spec, t.dim());
  const Matrix& a = t.a();
  const double denom = a(i, i) + a(j, j) - 2.0 * a(i, j);
  double rhs = 2.0 * (r_i - r_j);
  if (weighted) {
    const std::size_t w = t.dim() - 1;
    rhs += 2.0 * (a(j, w) - a(i, w));
  }
  if (!t.nu().is_zero()) {
    const Vector zero = Vector::Zero(t.dim());
    rhs += 2.0 * (measure_moment(t.nu(), zero, MomentPoly::exp_diff(i, j)) +
                  measure_moment(t.nu(), theta, MomentPoly::linear(j)) -
                  measure_moment(t.nu(), theta, MomentPoly::linear(i)));
  }
  return alpha * denom - rhs;
}

/// Power alpha for which a martingale-normalized exp-Levy model with carrying
/// rates r_i, r_j satisfies the quasi drift condition.
inline double solve_alpha(const LevyTriplet& t, std::size_t i, std::size_t j, double r_i, double r_j,
                          bool weighted = false, const AlphaScan& scan = {}) {
  const std::size_t n = weighted ? t.dim() - 1 : t.dim();
  if (weighted && t.dim() < 3) throw InputError("weighted alpha needs at least two assets plus a weight");
  detail::require_pair(n, i, j);
  const Matrix& a = t.a();
  const double denom = a(i, i) + a(j, j) - 2.0 * a(i, j);
  if (std::abs(denom) <= 1e-14 * std::max(1.0, a.cwiseAbs().maxCoeff()))
    throw SolverError("degenerate denominator: a_ii + a_jj - 2 a_ij = 0");

  if (t.nu().is_zero() && !scan.force_scan) {
    double num = r_i - r_j;
    if (weighted) {
      const std::size_t w = t.dim() - 1;
      num += a(j, w) - a(i, w);
    }
    return 2.0 * num / denom;
  }

  if (!(scan.step > 0.0) || !(scan.hi > scan.lo)) throw InputError("invalid alpha scan range");
  auto g = [&](double alpha) { return alpha_equation(t, i, j, r_i, r_j, weighted, alpha); };

  std::vector<double> roots;
  const auto steps = static_cast<std::size_t>(std::ceil((scan.hi - scan.lo) / scan.step));
  double x0 = scan.lo;
  double g0 = g(x0);
  if (g0 == 0.0) roots.push_back(x0);
  for (std::size_t k = 1; k <= steps; ++k) {
    const double x1 = std::min(scan.hi, scan.lo + static_cast<double>(k) * scan.step);
    const double g1 = g(x1);
    if (g1 == 0.0) {
      roots.push_back(x1);
    } else if (g0 != 0.0 && std::signbit(g0) != std::signbit(g1)) {
      double lo = x0, hi = x1, glo = g0;
      while (hi - lo > scan.tol) {
        const double mid = 0.5 * (lo + hi);
        const double gm = g(mid);
        if (gm == 0.0) {
          lo = hi = mid;
          break;
        }
        if (std::signbit(gm) == std::signbit(glo)) {
          lo = mid;
          glo = gm;
        } else {
          hi = mid;
        }
      }
      roots.push_back(0.5 * (lo + hi));
    }
    x0 = x1;
    g0 = g1;
  }
  if (roots.empty()) throw SolverError("no alpha root in scan range");
  if (roots.size() > 1) throw SolverError("multiple alpha roots in scan range", roots);
  return roots.front();
}

}  // namespace swapsym
