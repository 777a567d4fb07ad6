#pragma once

// Finite-activity Levy triplets and the transforms used by the symmetry
// checks. All triplets use the truncation-free Levy-Khintchine form
//
//   psi(w) = i<gamma,w> - 1/2 w^T A w + int (e^{i<w,x>} - 1 - i<w,x>) nu(dx),
//
// which is valid because every supported jump measure has finite exponential
// moments of all orders.

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "swapsym/errors.hpp"
#include "swapsym/linalg.hpp"

namespace swapsym {

struct Atom {
  Vector location;
  double mass = 0.0;
};

/// Compound-Poisson component with Gaussian jump sizes N(mean, covariance).
struct GaussianJump {
  double intensity = 0.0;
  Vector mean;
  Matrix covariance;
};

/// Either a finite list of atoms or a finite Gaussian mixture. The zero
/// measure is an atomic measure without atoms.
class LevyMeasure {
 public:
  using Atoms = std::vector<Atom>;
  using Mixture = std::vector<GaussianJump>;

  static LevyMeasure zero(std::size_t dim) { return LevyMeasure(dim, Atoms{}); }

  static LevyMeasure atomic(std::size_t dim, Atoms atoms) {
    for (const auto& a : atoms) {
      if (static_cast<std::size_t>(a.location.size()) != dim)
        throw InputError("atom location has wrong dimension");
      if (!a.location.allFinite() || !std::isfinite(a.mass))
        throw InputError("atom has non-finite entries");
      if (!(a.mass > 0.0)) throw InputError("atom mass must be positive");
      if (a.location.cwiseAbs().maxCoeff() == 0.0)
        throw InputError("Levy measure cannot charge the origin");
    }
    return LevyMeasure(dim, std::move(atoms));
  }

  static LevyMeasure gaussian_mixture(std::size_t dim, Mixture comps) {
    for (auto& c : comps) {
      if (static_cast<std::size_t>(c.mean.size()) != dim)
        throw InputError("mixture mean has wrong dimension");
      if (static_cast<std::size_t>(c.covariance.rows()) != dim)
        throw InputError("mixture covariance has wrong dimension");
      if (!std::isfinite(c.intensity) || !(c.intensity > 0.0))
        throw InputError("mixture intensity must be positive");
      if (!c.mean.allFinite()) throw InputError("mixture mean is not finite");
      c.covariance = require_psd(c.covariance, "mixture covariance");
      if (c.mean.cwiseAbs().maxCoeff() == 0.0 && c.covariance.cwiseAbs().maxCoeff() == 0.0)
        throw InputError("Levy measure cannot charge the origin");
    }
    return LevyMeasure(dim, std::move(comps));
  }

  std::size_t dim() const noexcept { return dim_; }
  bool is_atomic() const noexcept { return std::holds_alternative<Atoms>(parts_); }
  bool is_mixture() const noexcept { return std::holds_alternative<Mixture>(parts_); }
  bool is_zero() const noexcept {
    return is_atomic() ? atoms().empty() : components().empty();
  }
  const Atoms& atoms() const { return std::get<Atoms>(parts_); }
  const Mixture& components() const { return std::get<Mixture>(parts_); }

  double total_intensity() const {
    double s = 0.0;
    if (is_atomic())
      for (const auto& a : atoms()) s += a.mass;
    else
      for (const auto& c : components()) s += c.intensity;
    return s;
  }

 private:
  LevyMeasure(std::size_t dim, std::variant<Atoms, Mixture> parts)
      : dim_(dim), parts_(std::move(parts)) {}

  std::size_t dim_;
  std::variant<Atoms, Mixture> parts_;
};

/// Generating triplet (A, nu, gamma) of an infinitely divisible law on R^dim.
class LevyTriplet {
 public:
  LevyTriplet(Matrix a, LevyMeasure nu, Vector gamma)
      : a_(std::move(a)), nu_(std::move(nu)), gamma_(std::move(gamma)) {
    const auto n = static_cast<std::size_t>(gamma_.size());
    if (n == 0) throw InputError("triplet dimension must be positive");
    if (static_cast<std::size_t>(a_.rows()) != n || static_cast<std::size_t>(a_.cols()) != n)
      throw InputError("Gaussian covariance has wrong dimension");
    if (nu_.dim() != n) throw InputError("Levy measure has wrong dimension");
    if (!gamma_.allFinite()) throw InputError("drift is not finite");
    a_ = require_psd(a_, "Gaussian covariance");
  }

  std::size_t dim() const noexcept { return static_cast<std::size_t>(gamma_.size()); }
  const Matrix& a() const noexcept { return a_; }
  const LevyMeasure& nu() const noexcept { return nu_; }
  const Vector& gamma() const noexcept { return gamma_; }

  /// Triplet of the same process observed at time t (xi_t has triplet t*(A, nu, gamma)).
  LevyTriplet scaled(double t) const;

 private:
  Matrix a_;
  LevyMeasure nu_;
  Vector gamma_;
};

namespace detail {

inline double finite_or_throw(double v, const char* what) {
  if (!std::isfinite(v)) throw DomainError(std::string("non-finite ") + what);
  return v;
}

inline void require_dim(std::size_t got, std::size_t want, const char* what) {
  if (got != want)
    throw InputError(std::string(what) + ": expected dimension " + std::to_string(want) +
                     ", got " + std::to_string(got));
}

// int e^{<theta,x>} N(m, C)(dx)
inline double gaussian_mgf(const GaussianJump& c, const Vector& theta) {
  return finite_or_throw(std::exp(theta.dot(c.mean) + 0.5 * theta.dot(c.covariance * theta)),
                         "exponential moment");
}

}  // namespace detail

inline LevyTriplet LevyTriplet::scaled(double t) const {
  if (!(t > 0.0)) throw InputError("time scale must be positive");
  if (nu_.is_atomic()) {
    auto atoms = nu_.atoms();
    for (auto& a : atoms) a.mass *= t;
    return LevyTriplet(t * a_, LevyMeasure::atomic(dim(), std::move(atoms)), t * gamma_);
  }
  auto comps = nu_.components();
  for (auto& c : comps) c.intensity *= t;
  return LevyTriplet(t * a_, LevyMeasure::gaussian_mixture(dim(), std::move(comps)), t * gamma_);
}

/// Integrand selector for measure_moment.
struct MomentPoly {
  enum class Kind { one, linear, quadratic, exp_diff };
  Kind kind = Kind::one;
  std::size_t k = 0;
  std::size_t l = 0;

  static MomentPoly one() { return {Kind::one, 0, 0}; }
  static MomentPoly linear(std::size_t k) { return {Kind::linear, k, 0}; }
  static MomentPoly quadratic(std::size_t k, std::size_t l) { return {Kind::quadratic, k, l}; }
  /// e^{x_k} - e^{x_l}
  static MomentPoly exp_diff(std::size_t k, std::size_t l) { return {Kind::exp_diff, k, l}; }
};

inline MomentPoly parse_moment_poly(const std::string& tag, std::size_t k = 0, std::size_t l = 0) {
  if (tag == "1") return MomentPoly::one();
  if (tag == "x_k") return MomentPoly::linear(k);
  if (tag == "x_k*x_l") return MomentPoly::quadratic(k, l);
  if (tag == "exp_diff") return MomentPoly::exp_diff(k, l);
  throw InputError("unsupported moment integrand '" + tag + "'");
}

/// int poly(x) e^{<theta,x>} nu(dx), exact for both measure representations.
inline double measure_moment(const LevyMeasure& nu, const Vector& theta, const MomentPoly& poly) {
  const std::size_t n = nu.dim();
  detail::require_dim(static_cast<std::size_t>(theta.size()), n, "moment direction");
  if (poly.kind != MomentPoly::Kind::one && (poly.k >= n || poly.l >= n))
    throw InputError("moment index out of range");

  double total = 0.0;
  if (nu.is_atomic()) {
    for (const auto& a : nu.atoms()) {
      const Vector& x = a.location;
      const double w = a.mass * std::exp(theta.dot(x));
      double p = 1.0;
      switch (poly.kind) {
        case MomentPoly::Kind::one: p = 1.0; break;
        case MomentPoly::Kind::linear: p = x(poly.k); break;
        case MomentPoly::Kind::quadratic: p = x(poly.k) * x(poly.l); break;
        case MomentPoly::Kind::exp_diff: p = std::exp(x(poly.k)) - std::exp(x(poly.l)); break;
      }
      total += w * p;
    }
    return detail::finite_or_throw(total, "measure moment");
  }

  for (const auto& c : nu.components()) {
    const double z = detail::gaussian_mgf(c, theta);
    switch (poly.kind) {
      case MomentPoly::Kind::one: total += c.intensity * z; break;
      case MomentPoly::Kind::linear: {
        const Vector tilted = c.mean + c.covariance * theta;
        total += c.intensity * tilted(poly.k) * z;
        break;
      }
      case MomentPoly::Kind::quadratic: {
        const Vector tilted = c.mean + c.covariance * theta;
        total += c.intensity * (c.covariance(poly.k, poly.l) + tilted(poly.k) * tilted(poly.l)) * z;
        break;
      }
      case MomentPoly::Kind::exp_diff: {
        Vector tk = theta, tl = theta;
        tk(poly.k) += 1.0;
        tl(poly.l) += 1.0;
        total += c.intensity * (detail::gaussian_mgf(c, tk) - detail::gaussian_mgf(c, tl));
        break;
      }
    }
  }
  return detail::finite_or_throw(total, "measure moment");
}

/// Vector of first tilted moments: int x e^{<theta,x>} nu(dx).
inline Vector measure_first_moment(const LevyMeasure& nu, const Vector& theta) {
  Vector m(nu.dim());
  for (std::size_t k = 0; k < nu.dim(); ++k) m(k) = measure_moment(nu, theta, MomentPoly::linear(k));
  return m;
}

/// Characteristic exponent psi(w) with phi(w) = E e^{i<w,xi>} = e^{psi(w)}.
/// Complex arguments are supported; Im(w) = -theta evaluates exponential
/// moments E e^{<theta,xi>}.
inline Complex char_exponent(const LevyTriplet& t, const ComplexVector& w) {
  detail::require_dim(static_cast<std::size_t>(w.size()), t.dim(), "char_exponent argument");
  const Complex i(0.0, 1.0);
  Complex psi = i * (t.gamma().cast<Complex>().transpose() * w)(0) - 0.5 * bilinear(w, t.a());

  const LevyMeasure& nu = t.nu();
  if (nu.is_atomic()) {
    for (const auto& a : nu.atoms()) {
      const Complex wx = (w.transpose() * a.location.cast<Complex>())(0);
      psi += a.mass * (std::exp(i * wx) - 1.0 - i * wx);
    }
  } else {
    for (const auto& c : nu.components()) {
      const Complex wm = (w.transpose() * c.mean.cast<Complex>())(0);
      psi += c.intensity * (std::exp(i * wm - 0.5 * bilinear(w, c.covariance)) - 1.0 - i * wm);
    }
  }
  if (!std::isfinite(psi.real()) || !std::isfinite(psi.imag()))
    throw DomainError("characteristic exponent is not finite");
  return psi;
}

inline Complex char_exponent(const LevyTriplet& t, const Vector& u) {
  return char_exponent(t, ComplexVector(u.cast<Complex>()));
}

/// u - i*shift as a complex vector.
inline ComplexVector shifted_argument(const Vector& u, const Vector& shift) {
  ComplexVector w(u.size());
  for (Eigen::Index k = 0; k < u.size(); ++k) w(k) = Complex(u(k), -shift(k));
  return w;
}

/// log E e^{<theta,xi>} = psi(-i theta).
inline double log_mgf(const LevyTriplet& t, const Vector& theta) {
  return char_exponent(t, shifted_argument(Vector::Zero(theta.size()), theta)).real();
}

/// Exponential tilt of a measure: d nu_theta = e^{<theta,x>} d nu.
inline LevyMeasure tilt_measure(const LevyMeasure& nu, const Vector& theta) {
  detail::require_dim(static_cast<std::size_t>(theta.size()), nu.dim(), "tilt direction");
  if (nu.is_atomic()) {
    auto atoms = nu.atoms();
    for (auto& a : atoms)
      a.mass = detail::finite_or_throw(a.mass * std::exp(theta.dot(a.location)), "tilted mass");
    return LevyMeasure::atomic(nu.dim(), std::move(atoms));
  }
  auto comps = nu.components();
  for (auto& c : comps) {
    const double z = detail::gaussian_mgf(c, theta);
    c.mean = c.mean + c.covariance * theta;
    c.intensity = detail::finite_or_throw(c.intensity * z, "tilted intensity");
  }
  return LevyMeasure::gaussian_mixture(nu.dim(), std::move(comps));
}

/// Esscher transform with parameter theta: the triplet of xi under
/// dQ_theta/dQ = e^{<theta,xi>} / E e^{<theta,xi>}.
inline LevyTriplet esscher_transform(const LevyTriplet& t, const Vector& theta) {
  detail::require_dim(static_cast<std::size_t>(theta.size()), t.dim(), "Esscher parameter");
  const Vector zero = Vector::Zero(t.dim());
  const Vector drift_correction =
      measure_first_moment(t.nu(), theta) - measure_first_moment(t.nu(), zero);
  Vector gamma = t.gamma() + t.a() * theta + drift_correction;
  return LevyTriplet(t.a(), tilt_measure(t.nu(), theta), std::move(gamma));
}

namespace detail {

inline constexpr double kOriginTolerance = 1e-12;

inline bool at_origin(const Vector& x, double scale) {
  return x.size() == 0 || x.cwiseAbs().maxCoeff() <= kOriginTolerance * std::max(1.0, scale);
}

}  // namespace detail

/// Image of a measure under x -> M x, with mass landing on the origin removed.
inline LevyMeasure push_forward(const LevyMeasure& nu, const Matrix& m) {
  detail::require_dim(static_cast<std::size_t>(m.cols()), nu.dim(), "linear map columns");
  const auto out = static_cast<std::size_t>(m.rows());
  if (nu.is_atomic()) {
    LevyMeasure::Atoms atoms;
    for (const auto& a : nu.atoms()) {
      Vector y = m * a.location;
      if (detail::at_origin(y, a.location.cwiseAbs().maxCoeff())) continue;
      atoms.push_back({std::move(y), a.mass});
    }
    return LevyMeasure::atomic(out, std::move(atoms));
  }
  LevyMeasure::Mixture comps;
  for (const auto& c : nu.components()) {
    GaussianJump img{c.intensity, m * c.mean, m * c.covariance * m.transpose()};
    img.covariance = 0.5 * (img.covariance + img.covariance.transpose());
    const double scale = std::max(c.mean.cwiseAbs().maxCoeff(), c.covariance.cwiseAbs().maxCoeff());
    if (detail::at_origin(img.mean, scale) &&
        (img.covariance.size() == 0 || img.covariance.cwiseAbs().maxCoeff() <= detail::kOriginTolerance * std::max(1.0, scale)))
      continue;
    comps.push_back(std::move(img));
  }
  return LevyMeasure::gaussian_mixture(out, std::move(comps));
}

/// Triplet of M xi for an m x n matrix M.
inline LevyTriplet linear_transform(const LevyTriplet& t, const Matrix& m) {
  detail::require_dim(static_cast<std::size_t>(m.cols()), t.dim(), "linear map columns");
  if (m.rows() == 0) throw InputError("linear map must have at least one row");
  Matrix a = m * t.a() * m.transpose();
  a = 0.5 * (a + a.transpose());
  return LevyTriplet(std::move(a), push_forward(t.nu(), m), m * t.gamma());
}

struct Projections {
  Matrix p;        // n x (n+1): centre the first n coordinates, drop the last
  Matrix p_prime;  // n x n: P without its last column
};

/// Projections onto the zero-sum hyperplane H of R^n.
inline Projections projection_matrix(std::size_t n) {
  if (n == 0) throw InputError("projection dimension must be positive");
  const double inv = 1.0 / static_cast<double>(n);
  Matrix pp = Matrix::Constant(n, n, -inv);
  pp.diagonal().array() += 1.0;
  Matrix p = Matrix::Zero(n, n + 1);
  p.leftCols(n) = pp;
  return {std::move(p), std::move(pp)};
}

/// Drift that makes every E e^{xi_l} equal one.
inline Vector martingale_gamma(const Matrix& a, const LevyMeasure& nu) {
  const std::size_t n = nu.dim();
  detail::require_dim(static_cast<std::size_t>(a.rows()), n, "Gaussian covariance");
  Vector gamma(n);
  const Vector zero = Vector::Zero(n);
  for (std::size_t l = 0; l < n; ++l) {
    // int (e^{x_l} - 1 - x_l) dnu
    const double jump = measure_moment(nu, unit(n, l), MomentPoly::one()) -
                        measure_moment(nu, zero, MomentPoly::one()) -
                        measure_moment(nu, zero, MomentPoly::linear(l));
    gamma(l) = -0.5 * a(l, l) - jump;
  }
  return gamma;
}

/// Same Gaussian part and jumps, martingale-normalized drift.
inline LevyTriplet with_martingale_drift(const LevyTriplet& t) {
  return LevyTriplet(t.a(), t.nu(), martingale_gamma(t.a(), t.nu()));
}

/// Covariance of xi: A plus the second-moment matrix of nu.
inline Matrix covariance_of_triplet(const LevyTriplet& t) {
  const std::size_t n = t.dim();
  Matrix cov = t.a();
  const Vector zero = Vector::Zero(n);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t l = k; l < n; ++l) {
      const double m2 = measure_moment(t.nu(), zero, MomentPoly::quadratic(k, l));
      cov(k, l) += m2;
      if (l != k) cov(l, k) += m2;
    }
  return cov;
}

}  // namespace swapsym
