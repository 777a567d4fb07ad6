#pragma once

// Exchangeability, swap-invariance and self-duality of exp-Levy models,
// decided either from the triplet directly or from the characteristic
// function on a sampled grid.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "swapsym/levy.hpp"
#include "swapsym/rng.hpp"

namespace swapsym {

enum class SymmetryKind { exchangeable, swap_invariant, weighted_swap_invariant, self_dual, quasi_swap_invariant };

inline const char* to_string(SymmetryKind k) {
  switch (k) {
    case SymmetryKind::exchangeable: return "exchangeable";
    case SymmetryKind::swap_invariant: return "swap_invariant";
    case SymmetryKind::weighted_swap_invariant: return "weighted_swap_invariant";
    case SymmetryKind::self_dual: return "self_dual";
    case SymmetryKind::quasi_swap_invariant: return "quasi_swap_invariant";
  }
  return "unknown";
}

struct Residual {
  std::string id;
  double value = 0.0;
  double tol = 0.0;
};

struct SymmetryReport {
  SymmetryKind kind = SymmetryKind::exchangeable;
  bool pass = false;
  std::vector<Residual> residuals;
  std::string details;

  void add(std::string id, double value, double tol) {
    residuals.push_back({std::move(id), value, tol});
    pass = std::all_of(residuals.begin(), residuals.end(),
                       [](const Residual& r) { return r.value <= r.tol; });
  }

  const Residual* find(const std::string& id) const {
    for (const auto& r : residuals)
      if (r.id == id) return &r;
    return nullptr;
  }
};

inline constexpr double kStructuralTolerance = 1e-9;
inline constexpr double kCharfnTolerance = 1e-10;

struct GridSpec {
  std::size_t count = 1000;
  double radius = 2.0;
  std::uint64_t seed = 42;
};

namespace detail {

inline void require_pair(std::size_t n, std::size_t i, std::size_t j) {
  if (i >= n || j >= n) throw InputError("asset index out of range");
  if (i == j) throw InputError("asset indices must differ");
}

inline bool lex_less(const Vector& a, const Vector& b) {
  return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
}

inline double rel_gap(double a, double b) {
  return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

struct MatchItem {
  Vector key;       // location or mean
  double weight;    // mass or intensity
  Matrix cov;       // empty for atoms
};

inline std::vector<MatchItem> match_items(const LevyMeasure& nu) {
  std::vector<MatchItem> items;
  const double merge_tol = 1e-12;
  auto same = [&](const MatchItem& a, const Vector& key, const Matrix& cov) {
    const double scale = std::max(1.0, key.cwiseAbs().maxCoeff());
    if ((a.key - key).cwiseAbs().maxCoeff() > merge_tol * scale) return false;
    if (cov.size() == 0) return true;
    return (a.cov - cov).cwiseAbs().maxCoeff() <= merge_tol * std::max(1.0, cov.cwiseAbs().maxCoeff());
  };
  auto insert = [&](const Vector& key, double w, const Matrix& cov) {
    for (auto& it : items)
      if (same(it, key, cov)) {
        it.weight += w;
        return;
      }
    items.push_back({key, w, cov});
  };
  if (nu.is_atomic())
    for (const auto& a : nu.atoms()) insert(a.location, a.mass, Matrix());
  else
    for (const auto& c : nu.components()) insert(c.mean, c.intensity, c.covariance);
  std::sort(items.begin(), items.end(), [](const MatchItem& a, const MatchItem& b) {
    return lex_less(a.key, b.key);
  });
  return items;
}

inline double item_cost(const MatchItem& a, const MatchItem& b) {
  double c = std::max((a.key - b.key).cwiseAbs().maxCoeff(), rel_gap(a.weight, b.weight));
  if (a.cov.size() != 0) c = std::max(c, (a.cov - b.cov).cwiseAbs().maxCoeff());
  return c;
}

inline double greedy_match(const std::vector<MatchItem>& from, const std::vector<MatchItem>& to) {
  std::vector<bool> used(to.size(), false);
  double worst = 0.0;
  for (const auto& f : from) {
    std::size_t best = to.size();
    double best_cost = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < to.size(); ++k) {
      if (used[k]) continue;
      const double c = item_cost(f, to[k]);
      if (c < best_cost) {
        best_cost = c;
        best = k;
      }
    }
    if (best == to.size()) {
      worst = std::max(worst, f.weight);
    } else {
      used[best] = true;
      worst = std::max(worst, best_cost);
    }
  }
  for (std::size_t k = 0; k < to.size(); ++k)
    if (!used[k]) worst = std::max(worst, to[k].weight);
  return worst;
}

}  // namespace detail

/// Greedy matching distance between two finite Levy measures of the same
/// representation; symmetric in its arguments and zero iff the (merged)
/// atom or component multisets agree.
inline double measure_match_distance(const LevyMeasure& a, const LevyMeasure& b) {
  if (a.dim() != b.dim()) throw InputError("measures live in different dimensions");
  if (a.is_zero() && b.is_zero()) return 0.0;
  if (a.is_zero() || b.is_zero()) return std::max(a.total_intensity(), b.total_intensity());
  if (a.is_atomic() != b.is_atomic())
    throw InputError("cannot match atomic against mixture measure");
  const auto ia = detail::match_items(a);
  const auto ib = detail::match_items(b);
  return std::max(detail::greedy_match(ia, ib), detail::greedy_match(ib, ia));
}

/// Distance between nu and its image under the swap of coordinates i, j.
inline double swap_invariance_residual(const LevyMeasure& nu, std::size_t i, std::size_t j) {
  return measure_match_distance(nu, push_forward(nu, swap_matrix(nu.dim(), i, j)));
}

inline SymmetryReport check_exchangeable(const LevyTriplet& t, std::size_t i, std::size_t j,
                                         double tol = kStructuralTolerance) {
  const std::size_t n = t.dim();
  detail::require_pair(n, i, j);
  const Matrix& a = t.a();
  SymmetryReport rep;
  rep.kind = SymmetryKind::exchangeable;
  rep.add("gaussian_diagonal", std::abs(a(i, i) - a(j, j)), tol);
  if (n > 2) {
    double worst = 0.0;
    for (std::size_t l = 0; l < n; ++l)
      if (l != i && l != j) worst = std::max(worst, std::abs(a(l, i) - a(l, j)));
    rep.add("gaussian_offdiagonal", worst, tol);
  }
  rep.add("levy_measure", swap_invariance_residual(t.nu(), i, j), tol);
  rep.add("drift", std::abs(t.gamma()(i) - t.gamma()(j)), tol);
  return rep;
}

namespace detail {

// Shared structure of the weighted, linear-weight and quasi checks: the
// triplet lives on R^D, the swapped assets are coordinates of the first n,
// and theta is the Esscher direction of the measure change.
inline void add_swap_conditions(SymmetryReport& rep, const LevyTriplet& t, std::size_t n,
                                std::size_t i, std::size_t j, const Vector& theta,
                                double carry_diff, double tol) {
  const std::size_t dim = t.dim();
  const Matrix& a = t.a();
  if (n >= 3) {
    double worst = 0.0;
    for (std::size_t l = 0; l < n; ++l)
      if (l != i && l != j)
        worst = std::max(worst, std::abs(a(l, i) - a(l, j) - 0.5 * (a(i, i) - a(j, j))));
    rep.add("gaussian", worst, tol);
  }

  Matrix proj = Matrix::Zero(n, dim);
  proj.leftCols(n) = projection_matrix(n).p_prime;
  const LevyMeasure projected = push_forward(tilt_measure(t.nu(), theta), proj);
  rep.add("levy_measure", swap_invariance_residual(projected, i, j), tol);

  // gamma_i - gamma_j = (A theta)_j - (A theta)_i + int (x_j - x_i)(e^{<theta,x>} - 1) dnu + r_i - r_j
  const Vector at = a * theta;
  const Vector zero = Vector::Zero(dim);
  const double jump = measure_moment(t.nu(), theta, MomentPoly::linear(j)) -
                      measure_moment(t.nu(), theta, MomentPoly::linear(i)) -
                      measure_moment(t.nu(), zero, MomentPoly::linear(j)) +
                      measure_moment(t.nu(), zero, MomentPoly::linear(i));
  const double rhs = at(j) - at(i) + jump + carry_diff;
  const double lhs = t.gamma()(i) - t.gamma()(j);
  rep.add("drift", std::abs(lhs - rhs), tol);
}

}  // namespace detail

/// ij-swap-invariance of e^xi, optionally weighted by e^{<v,xi>}.
inline SymmetryReport check_swap_invariant(const LevyTriplet& t, std::size_t i, std::size_t j,
                                           const std::optional<Vector>& v = std::nullopt,
                                           double tol = kStructuralTolerance) {
  const std::size_t n = t.dim();
  detail::require_pair(n, i, j);
  Vector theta = Vector::Zero(n);
  if (v) {
    detail::require_dim(static_cast<std::size_t>(v->size()), n, "weight vector");
    theta = *v;
  }
  theta(i) += 0.5;
  theta(j) += 0.5;
  SymmetryReport rep;
  rep.kind = v ? SymmetryKind::weighted_swap_invariant : SymmetryKind::swap_invariant;
  detail::add_swap_conditions(rep, t, n, i, j, theta, 0.0, tol);
  if (n == 2) rep.details = "two-asset case: Gaussian condition is void";
  return rep;
}

/// Weighted swap-invariance where the last triplet coordinate is the log-weight.
inline SymmetryReport check_weighted_swap_invariant(const LevyTriplet& t, std::size_t i, std::size_t j,
                                                    double tol = kStructuralTolerance) {
  if (t.dim() < 3) throw InputError("weighted check needs at least two assets plus a weight");
  const std::size_t n = t.dim() - 1;
  detail::require_pair(n, i, j);
  Vector theta = Vector::Zero(n + 1);
  theta(i) = 0.5;
  theta(j) = 0.5;
  theta(n) = 1.0;
  SymmetryReport rep;
  rep.kind = SymmetryKind::weighted_swap_invariant;
  detail::add_swap_conditions(rep, t, n, i, j, theta, 0.0, tol);
  if (n == 2) rep.details = "two-asset case: Gaussian condition is void";
  return rep;
}

/// Uniform-radius sample of `count` points in the ball of R^n, restricted to
/// the zero-sum hyperplane when `hyperplane` is set.
inline std::vector<Vector> sample_grid(std::size_t n, const GridSpec& grid, bool hyperplane) {
  if (grid.count == 0) throw InputError("grid count must be positive");
  if (!(grid.radius > 0.0)) throw InputError("grid radius must be positive");
  std::vector<Vector> pts;
  pts.reserve(grid.count);
  for (std::size_t p = 0; p < grid.count; ++p) {
    Stream s(grid.seed, p, 0, Purpose::grid);
    Vector u(n);
    for (std::size_t k = 0; k < n; ++k) u(k) = s.normal();
    if (hyperplane) u.array() -= u.mean();
    const double norm = u.norm();
    const double r = grid.radius * s.uniform();
    if (norm > 0.0) u *= r / norm;
    pts.push_back(std::move(u));
  }
  return pts;
}

struct CharfnOptions {
  std::size_t hyperplane_dim = 0;  // 0: every coordinate of the triplet
  double carry_diff = 0.0;         // r_i - r_j for carrying-cost adjusted checks
};

/// max over u in H of |phi(u - i shift) - phi(pi_ij u - i shift) e^{i (r_i - r_j)(u_i - u_j)}|.
inline double check_charfn_symmetry(const LevyTriplet& t, std::size_t i, std::size_t j,
                                    const Vector& shift, const GridSpec& grid,
                                    const CharfnOptions& opts = {}) {
  const std::size_t dim = t.dim();
  const std::size_t n = opts.hyperplane_dim == 0 ? dim : opts.hyperplane_dim;
  if (n > dim) throw InputError("hyperplane dimension exceeds triplet dimension");
  detail::require_pair(n, i, j);
  detail::require_dim(static_cast<std::size_t>(shift.size()), dim, "shift");
  double worst = 0.0;
  const Complex im(0.0, 1.0);
  for (const Vector& h : sample_grid(n, grid, true)) {
    Vector u = Vector::Zero(dim);
    u.head(n) = h;
    const Complex lhs = std::exp(char_exponent(t, shifted_argument(u, shift)));
    const Complex rhs = std::exp(char_exponent(t, shifted_argument(swapped(u, i, j), shift)) +
                                 im * opts.carry_diff * (u(i) - u(j)));
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  return worst;
}

/// K_i^T u: coordinate i replaced by -sum(u).
inline Vector self_dual_transpose(const Vector& u, std::size_t i) {
  Vector out = u;
  out(i) = -u.sum();
  return out;
}

/// K_i u = (u_1 - u_i, ..., -u_i, ..., u_n - u_i).
inline Vector self_dual_operator(const Vector& u, std::size_t i) {
  Vector out = u.array() - u(i);
  out(i) = -u(i);
  return out;
}

/// Self-duality of e^xi with respect to numeraire i:
/// max |phi(u - i e_i/2) - phi(K_i^T u - i e_i/2)| over a ball grid.
inline double check_self_dual(const LevyTriplet& t, std::size_t i, const GridSpec& grid) {
  const std::size_t n = t.dim();
  if (i >= n) throw InputError("numeraire index out of range");
  const Vector shift = 0.5 * unit(n, i);
  double worst = 0.0;
  for (const Vector& u : sample_grid(n, grid, false)) {
    const Vector ku = self_dual_transpose(u, i);
    const double drift = (self_dual_transpose(ku, i) - u).cwiseAbs().maxCoeff();
    if (drift > 1e-12 * (1.0 + static_cast<double>(n) * u.cwiseAbs().maxCoeff()))
      throw std::logic_error("K_i is not an involution on the sampled grid");
    const Complex lhs = std::exp(char_exponent(t, shifted_argument(u, shift)));
    const Complex rhs = std::exp(char_exponent(t, shifted_argument(ku, shift)));
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  return worst;
}

struct ReducedModel {
  LevyTriplet reduced;
  std::size_t numeraire_index;
};

/// Triplet of log(eta_l / eta_j), l != j, under the numeraire measure
/// dQ^j/dQ = eta_j / E eta_j (optionally after a prior tilt by e^{<v,xi>},
/// which handles linear weights). Swap-invariance of eta in (i, j) is
/// equivalent to self-duality of the result with respect to the returned index.
inline ReducedModel reduce_to_selfdual(const LevyTriplet& t, std::size_t i, std::size_t j,
                                       const std::optional<Vector>& v = std::nullopt) {
  const std::size_t n = t.dim();
  detail::require_pair(n, i, j);
  Vector theta = unit(n, j);
  if (v) {
    detail::require_dim(static_cast<std::size_t>(v->size()), n, "weight vector");
    theta += *v;
  }
  Matrix m = Matrix::Zero(n - 1, n);
  for (std::size_t l = 0, r = 0; l < n; ++l) {
    if (l == j) continue;
    m(r, l) = 1.0;
    m(r, j) = -1.0;
    ++r;
  }
  return {linear_transform(esscher_transform(t, theta), m), i < j ? i : i - 1};
}

}  // namespace swapsym
