#pragma once

#include <cmath>
#include <optional>
#include <utility>

#include "swapsym/levy.hpp"

namespace swapsym {

enum class WeightKind { none, last_coordinate, linear };

struct Weight {
  WeightKind kind = WeightKind::none;
  Vector v;  // used by WeightKind::linear

  static Weight none() { return {}; }
  static Weight last_coordinate() { return {WeightKind::last_coordinate, Vector()}; }
  static Weight linear(Vector v) { return {WeightKind::linear, std::move(v)}; }
};

/// Exp-Levy market: S_t = spot o e^{lambda t + xi_t}. Every triplet
/// coordinate is a simulated asset; with a last-coordinate weight the final
/// asset doubles as the quanto weight e^zeta.
struct MarketSpec {
  LevyTriplet triplet;
  Vector spots;
  Vector carrying_costs;  // lambda_l = r - r_l
  double horizon = 1.0;
  double rate = 0.0;  // risk-free rate; discounts forward (time-T) values to t = 0
  Weight weight;

  MarketSpec(LevyTriplet t, Vector s, Vector lambda, double horizon_, double rate_ = 0.0,
             Weight w = Weight::none())
      : triplet(std::move(t)), spots(std::move(s)), carrying_costs(std::move(lambda)),
        horizon(horizon_), rate(rate_), weight(std::move(w)) {
    validate();
  }

  /// Market with unit spots, no carrying costs and horizon T.
  static MarketSpec normalized(LevyTriplet t, double horizon_ = 1.0) {
    const auto d = static_cast<Eigen::Index>(t.dim());
    return MarketSpec(std::move(t), Vector::Ones(d), Vector::Zero(d), horizon_);
  }

  std::size_t dim() const noexcept { return triplet.dim(); }

  /// Number of swappable assets (excludes a last-coordinate weight).
  std::size_t swap_dim() const noexcept {
    return weight.kind == WeightKind::last_coordinate ? dim() - 1 : dim();
  }

  void validate() const {
    const auto d = static_cast<Eigen::Index>(triplet.dim());
    if (spots.size() != d) throw InputError("spots dimension does not match triplet");
    if (carrying_costs.size() != d) throw InputError("carrying costs dimension does not match triplet");
    if (!(spots.array() > 0.0).all() || !spots.allFinite()) throw InputError("spots must be positive");
    if (!carrying_costs.allFinite()) throw InputError("carrying costs must be finite");
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw InputError("horizon must be positive");
    if (!std::isfinite(rate)) throw InputError("rate must be finite");
    if (weight.kind == WeightKind::last_coordinate && d < 2)
      throw InputError("last-coordinate weight needs at least two coordinates");
    if (weight.kind == WeightKind::linear && weight.v.size() != d)
      throw InputError("linear weight has wrong dimension");
  }
};

}  // namespace swapsym
