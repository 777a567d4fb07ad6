#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <utility>

#include "swapsym/linalg.hpp"

namespace swapsym {

enum class PayoffKind { basket, zero_strike_basket, quanto, power_weighted };

/// (scale * x_i / x_j)^alpha
struct PowerFactor {
  std::size_t i = 0;
  std::size_t j = 1;
  double alpha = 0.0;
  double scale = 1.0;

  double operator()(std::span<const double> x) const {
    return std::pow(scale * x[i] / x[j], alpha);
  }
};

/// (sum_l u_l x_l + u_0)_+, optionally times a quanto asset x_k and/or a power factor.
struct PayoffSpec {
  Vector weights;
  double strike = 0.0;  // u_0; a spread with strike k uses u_0 = -k
  std::optional<std::size_t> quanto;
  std::optional<PowerFactor> power;

  static PayoffSpec basket(Vector u, double u0) { return {std::move(u), u0, std::nullopt, std::nullopt}; }
  static PayoffSpec zero_strike(Vector u) { return basket(std::move(u), 0.0); }
  static PayoffSpec quanto_basket(Vector u, std::size_t k, double u0 = 0.0) {
    return {std::move(u), u0, k, std::nullopt};
  }
  static PayoffSpec power_weighted(Vector u, std::size_t i, std::size_t j, double alpha) {
    return {std::move(u), 0.0, std::nullopt, PowerFactor{i, j, alpha, 1.0}};
  }

  PayoffKind kind() const {
    if (power) return PayoffKind::power_weighted;
    if (quanto) return PayoffKind::quanto;
    return strike == 0.0 ? PayoffKind::zero_strike_basket : PayoffKind::basket;
  }

  void validate(std::size_t dim) const {
    if (static_cast<std::size_t>(weights.size()) > dim) throw InputError("payoff weights exceed asset count");
    if (weights.size() == 0) throw InputError("payoff needs weights");
    if (quanto && *quanto >= dim) throw InputError("quanto index out of range");
    if (power && (power->i >= dim || power->j >= dim)) throw InputError("power factor index out of range");
  }

  /// Payoff on a price vector x; weights apply to the leading coordinates.
  double operator()(std::span<const double> x) const {
    double s = strike;
    for (Eigen::Index l = 0; l < weights.size(); ++l) s += weights(l) * x[static_cast<std::size_t>(l)];
    if (s <= 0.0) return 0.0;
    if (quanto) s *= x[*quanto];
    if (power) s *= (*power)(x);
    return s;
  }

  /// Same payoff with weights i and j exchanged.
  PayoffSpec swapped(std::size_t i, std::size_t j) const {
    PayoffSpec out = *this;
    std::swap(out.weights(static_cast<Eigen::Index>(i)), out.weights(static_cast<Eigen::Index>(j)));
    return out;
  }
};

}  // namespace swapsym
