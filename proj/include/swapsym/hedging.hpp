#pragma once

// Semi-static hedges of two-asset barrier options (knocked out or in when
// c * S_1 <= S_2) and their Monte Carlo backtest. The hedge holds European
// claims and trades at most once more, at the first monitoring time past
// the barrier, where the two legs are (ideally) worth the same.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "swapsym/simulation.hpp"

namespace swapsym {

enum class ContractPayoff { spread, swap, quanto_spread, quanto_swap };
enum class BarrierKind { knock_out, knock_in };

inline const char* to_string(ContractPayoff p) {
  switch (p) {
    case ContractPayoff::spread: return "spread";
    case ContractPayoff::swap: return "swap";
    case ContractPayoff::quanto_spread: return "quanto_spread";
    case ContractPayoff::quanto_swap: return "quanto_swap";
  }
  return "unknown";
}

inline const char* to_string(BarrierKind b) {
  return b == BarrierKind::knock_out ? "knock_out" : "knock_in";
}

/// (a S_1 - b S_2 - k)_+ [times S_q], knocked out or in when c S_1 <= S_2.
/// Assets 1 and 2 are coordinates 0 and 1.
struct BarrierContract {
  ContractPayoff payoff = ContractPayoff::swap;
  BarrierKind barrier = BarrierKind::knock_out;
  double a = 1.0;
  double b = 1.0;
  double k = 0.0;
  double c = 1.0;
  std::size_t quanto_index = 2;

  bool is_quanto() const {
    return payoff == ContractPayoff::quanto_spread || payoff == ContractPayoff::quanto_swap;
  }
  bool is_swap() const { return payoff == ContractPayoff::swap || payoff == ContractPayoff::quanto_swap; }
  double strike() const { return is_swap() ? 0.0 : k; }

  void validate() const {
    if (!(a > 0.0) || !(b > 0.0)) throw InputError("contract weights a, b must be positive");
    if (!(c > 0.0)) throw InputError("barrier scale c must be positive");
    if (!(k >= 0.0)) throw InputError("strike must be non-negative");
    if (is_swap() && k != 0.0) throw InputError("swap contracts have zero strike");
    if (a > b * c * (1.0 + 1e-12))
      throw InputError("hedge requires 0 < a <= b*c so the short leg expires worthless");
    if (is_quanto() && quanto_index < 2) throw InputError("quanto asset must differ from the swapped assets");
  }

  bool breached(std::span<const double> s) const { return c * s[0] <= s[1]; }

  /// Unconditioned European payoff.
  PayoffSpec european() const {
    Vector u(2);
    u << a, -b;
    PayoffSpec f = PayoffSpec::basket(u, -strike());
    if (is_quanto()) f.quanto = quanto_index;
    return f;
  }
};

struct HedgePortfolio {
  PayoffSpec long_leg;
  std::optional<PayoffSpec> short_leg;  // absent for knock-in hedges
  double quasi_alpha = 0.0;
  double barrier_scale = 1.0;
};

/// Static legs for the contract. alpha != 0 attaches (c S_1 / S_2)^alpha to
/// the reflected leg (quasi-swap-invariant markets).
inline HedgePortfolio build_hedge(const BarrierContract& contract, double alpha = 0.0) {
  contract.validate();
  if (!std::isfinite(alpha)) throw InputError("alpha must be finite");
  Vector u(2);
  u << -contract.b * contract.c, contract.a / contract.c;
  PayoffSpec reflected = PayoffSpec::basket(u, -contract.strike());
  if (contract.is_quanto()) reflected.quanto = contract.quanto_index;
  if (alpha != 0.0) reflected.power = PowerFactor{0, 1, alpha, contract.c};

  HedgePortfolio h;
  h.quasi_alpha = alpha;
  h.barrier_scale = contract.c;
  if (contract.barrier == BarrierKind::knock_out) {
    h.long_leg = contract.european();
    h.short_leg = reflected;
  } else {
    h.long_leg = reflected;
  }
  return h;
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

/// Forward value at state s, remaining time h, of (w_p S_p - w_q S_q)_+
/// with w_p, w_q > 0 under a jump-free market (Margrabe).
inline double exchange_option_forward(const MarketSpec& market, std::span<const double> s, double h,
                                      std::size_t p, double w_p, std::size_t q, double w_q) {
  const LevyTriplet& t = market.triplet;
  if (!t.nu().is_zero()) throw InputError("closed-form exchange value needs a jump-free market");
  const Matrix& a = t.a();
  auto fwd = [&](std::size_t l) {
    const auto ll = static_cast<Eigen::Index>(l);
    return s[l] * std::exp((market.carrying_costs(ll) + t.gamma()(ll) + 0.5 * a(ll, ll)) * h);
  };
  const auto pp = static_cast<Eigen::Index>(p), qq = static_cast<Eigen::Index>(q);
  const double f1 = w_p * fwd(p);
  const double f2 = w_q * fwd(q);
  const double var = (a(pp, pp) + a(qq, qq) - 2.0 * a(pp, qq)) * h;
  if (!(var > 0.0)) return std::max(0.0, f1 - f2);
  const double sd = std::sqrt(var);
  const double d1 = (std::log(f1 / f2) + 0.5 * var) / sd;
  return f1 * normal_cdf(d1) - f2 * normal_cdf(d1 - sd);
}

enum class Valuation { automatic, closed_form_margrabe, nested_mc };

struct BacktestOptions {
  Valuation valuation = Valuation::automatic;
  std::size_t m_inner = 20000;
  double inner_budget = 4e9;  // max outer paths * inner draws
  double alpha = 0.0;
  unsigned threads = 1;
};

struct BacktestReport {
  std::size_t n_paths = 0;
  std::size_t n_steps = 0;
  std::uint64_t seed = 0;
  std::vector<double> pnl;
  std::vector<double> contract_payoff;  // X (knock-out) or Y (knock-in) per path
  std::vector<long> tau_step;  // -1 if the barrier was never breached
  std::vector<std::uint8_t> jump_crossed;
  std::vector<double> liquidation_residuals;
  McEstimate pnl_estimate;
  McEstimate abs_pnl_estimate;
  McEstimate contract_price;  // forward value of the barrier claim at t = 0
  McEstimate hedge_cost;      // forward value of the static legs at t = 0
  double knockout_fraction = 0.0;
  double jump_cross_fraction = 0.0;
  std::size_t decomposition_violations = 0;
  std::size_t short_leg_violations = 0;
  double discount_factor = 1.0;  // e^{-rT}: time-T values to t = 0 prices
  std::string valuation;
};

namespace detail {

inline bool closed_form_applicable(const MarketSpec& market, const BarrierContract& contract,
                                   const HedgePortfolio& hedge) {
  return market.triplet.nu().is_zero() && contract.payoff == ContractPayoff::swap &&
         hedge.quasi_alpha == 0.0;
}

inline std::uint64_t inner_seed(std::uint64_t seed) { return seed ^ 0x9E3779B97F4A7C15ull; }

// Forward values of two payoffs from state s over h by fresh exact draws,
// on common random numbers. Returns {mean f, mean g, stderr of f - g}.
struct PairValue {
  double first = 0.0;
  double second = 0.0;
  double diff_std_error = 0.0;
};

inline PairValue value_pair_mc(const MarketSpec& market, const IncrementSampler& sampler,
                               std::span<const double> s, double h, const PayoffSpec& f,
                               const PayoffSpec& g, std::size_t m, std::uint64_t seed,
                               std::uint64_t stream) {
  const std::size_t d = sampler.dim();
  std::vector<double> xi(d), scratch(d), x(d);
  std::vector<double> diffs(m);
  double sf = 0.0, sg = 0.0;
  for (std::size_t r = 0; r < m; ++r) {
    std::fill(xi.begin(), xi.end(), 0.0);
    if (h > 0.0) sampler.add_increment(xi, h, seed, stream, r, scratch);
    for (std::size_t l = 0; l < d; ++l)
      x[l] = s[l] * std::exp(market.carrying_costs(static_cast<Eigen::Index>(l)) * h + xi[l]);
    const double vf = f(x), vg = g(x);
    sf += vf;
    sg += vg;
    diffs[r] = vf - vg;
  }
  const double md = static_cast<double>(m);
  return {sf / md, sg / md, summarize(diffs).std_error};
}

}  // namespace detail

inline BacktestReport backtest(const BarrierContract& contract, const MarketSpec& market, std::size_t n_paths,
                               std::size_t n_steps, std::uint64_t seed, const BacktestOptions& opts = {}) {
  contract.validate();
  market.validate();
  if (n_paths == 0 || n_steps == 0) throw InputError("n_paths and n_steps must be positive");
  if (market.dim() < 2) throw InputError("barrier contracts need two assets");
  if (contract.is_quanto() && contract.quanto_index >= market.dim())
    throw InputError("quanto asset not present in market");
  {
    const double s0[2] = {market.spots(0), market.spots(1)};
    if (contract.breached(s0)) throw InputError("barrier already breached at inception (need c*S01 > S02)");
  }

  const HedgePortfolio hedge = build_hedge(contract, opts.alpha);
  const bool closed_ok = detail::closed_form_applicable(market, contract, hedge);
  bool use_closed = false;
  switch (opts.valuation) {
    case Valuation::automatic: use_closed = closed_ok; break;
    case Valuation::closed_form_margrabe:
      if (!closed_ok) throw InputError("closed-form valuation requires a jump-free swap contract without power factor");
      use_closed = true;
      break;
    case Valuation::nested_mc: use_closed = false; break;
  }
  if (!use_closed) {
    if (opts.m_inner == 0) throw InputError("m_inner must be positive");
    if (static_cast<double>(n_paths) * static_cast<double>(opts.m_inner) > opts.inner_budget)
      throw InputError("nested Monte Carlo budget exceeded");
  }

  const PayoffSpec european = contract.european();
  const PayoffSpec& long_leg = hedge.long_leg;
  const PayoffSpec reflected = hedge.short_leg ? *hedge.short_leg : hedge.long_leg;
  const double notional =
      contract.a * market.spots(0) * (contract.is_quanto() ? market.spots(static_cast<Eigen::Index>(contract.quanto_index)) : 1.0);

  PathGenerator gen(market, n_steps, seed);
  const std::size_t d = market.dim();
  const double horizon = market.horizon;

  BacktestReport rep;
  rep.n_paths = n_paths;
  rep.n_steps = n_steps;
  rep.seed = seed;
  rep.discount_factor = std::exp(-market.rate * horizon);
  rep.valuation = use_closed ? "closed_form_margrabe" : "nested_mc";
  rep.pnl.assign(n_paths, 0.0);
  rep.tau_step.assign(n_paths, -1);
  rep.jump_crossed.assign(n_paths, 0);
  std::vector<double> residual(n_paths, -1.0), cost(n_paths);
  rep.contract_payoff.assign(n_paths, 0.0);
  std::vector<double>& payoff_x = rep.contract_payoff;
  std::vector<std::uint8_t> decomp_bad(n_paths, 0), short_bad(n_paths, 0);

  parallel_for(n_paths, opts.threads, [&](std::size_t begin, std::size_t end) {
    std::vector<double> path((n_steps + 1) * d);
    std::vector<std::uint8_t> flags(n_steps);
    for (std::size_t p = begin; p < end; ++p) {
      gen.generate(p, path, flags);
      std::size_t tau = 0;
      for (std::size_t s = 1; s <= n_steps; ++s)
        if (contract.breached({path.data() + s * d, d})) {
          tau = s;
          break;
        }
      const std::span<const double> terminal(path.data() + n_steps * d, d);
      const double f_t = european(terminal);
      const bool knocked = tau != 0;
      const double x_ko = knocked ? 0.0 : f_t;
      const double y_ki = knocked ? f_t : 0.0;
      if (x_ko + y_ki != f_t) decomp_bad[p] = 1;
      const double contract_payoff = contract.barrier == BarrierKind::knock_out ? x_ko : y_ki;
      payoff_x[p] = contract_payoff;
      cost[p] = hedge.short_leg ? long_leg(terminal) - (*hedge.short_leg)(terminal) : long_leg(terminal);

      double pnl = 0.0;
      if (knocked) {
        rep.tau_step[p] = static_cast<long>(tau);
        const std::span<const double> state(path.data() + tau * d, d);
        rep.jump_crossed[p] = flags[tau - 1] && contract.c * state[0] < state[1] ? 1 : 0;
        const double h = tau == n_steps ? 0.0 : std::max(0.0, horizon - gen.dt() * static_cast<double>(tau));
        // Forward values at tau: the liquidation proceeds already carried to T.
        double v_orig = 0.0, v_refl = 0.0;
        if (use_closed) {
          v_orig = exchange_option_forward(market, state, h, 0, contract.a, 1, contract.b);
          v_refl = exchange_option_forward(market, state, h, 1, contract.a / contract.c, 0,
                                           contract.b * contract.c);
        } else {
          const auto pv = detail::value_pair_mc(market, gen.sampler(), state, h, european, reflected,
                                                opts.m_inner, detail::inner_seed(seed), p);
          v_orig = pv.first;
          v_refl = pv.second;
        }
        // Values are forward (time-T) values, so liquidation proceeds need no
        // further carrying.
        if (contract.barrier == BarrierKind::knock_out) {
          pnl = v_orig - v_refl - contract_payoff;
        } else {
          // sell the reflected leg, buy the original claim and hold it to expiry
          pnl = v_refl - v_orig + f_t - contract_payoff;
        }
        residual[p] = std::abs(v_orig - v_refl) / notional;
      } else {
        const double refl_t = reflected(terminal);
        if (contract.barrier == BarrierKind::knock_out) {
          if (refl_t != 0.0) short_bad[p] = 1;
          pnl = long_leg(terminal) - refl_t - contract_payoff;
        } else {
          pnl = refl_t - contract_payoff;
        }
      }
      rep.pnl[p] = pnl;
    }
  });

  std::vector<double> abs_pnl(n_paths);
  std::size_t knocked = 0, crossed = 0;
  for (std::size_t p = 0; p < n_paths; ++p) {
    abs_pnl[p] = std::abs(rep.pnl[p]);
    if (rep.tau_step[p] >= 0) {
      ++knocked;
      rep.liquidation_residuals.push_back(residual[p]);
    }
    crossed += rep.jump_crossed[p];
    rep.decomposition_violations += decomp_bad[p];
    rep.short_leg_violations += short_bad[p];
  }
  rep.pnl_estimate = summarize(rep.pnl);
  rep.abs_pnl_estimate = summarize(abs_pnl);
  rep.contract_price = summarize(payoff_x);
  rep.hedge_cost = summarize(cost);
  rep.knockout_fraction = static_cast<double>(knocked) / static_cast<double>(n_paths);
  rep.jump_cross_fraction = static_cast<double>(crossed) / static_cast<double>(n_paths);
  return rep;
}

struct BarrierIdentity {
  double long_value = 0.0;
  double short_value = 0.0;
  double relative_difference = 0.0;
  double relative_std_error = 0.0;

  bool within(double n_std) const { return relative_difference <= n_std * relative_std_error; }
};

/// Prices both legs of a knock-out hedge by fresh Monte Carlo from a state
/// on the barrier (c S_1 = S_2) over the remaining horizon.
inline BarrierIdentity barrier_value_identity(const MarketSpec& market, std::span<const double> state,
                                              double remaining, const HedgePortfolio& hedge,
                                              std::size_t n_paths, std::uint64_t seed) {
  market.validate();
  if (!hedge.short_leg) throw InputError("barrier identity needs a two-leg (knock-out) hedge");
  if (state.size() != market.dim()) throw InputError("state dimension does not match market");
  if (!(remaining >= 0.0)) throw InputError("remaining horizon must be non-negative");
  const double on = hedge.barrier_scale * state[0];
  if (std::abs(on - state[1]) > 1e-12 * std::max(on, state[1]))
    throw InputError("state is not on the barrier");
  IncrementSampler sampler(market.triplet);
  const auto pv = detail::value_pair_mc(market, sampler, state, remaining, hedge.long_leg, *hedge.short_leg,
                                        n_paths, seed, 0);
  BarrierIdentity out;
  out.long_value = pv.first;
  out.short_value = pv.second;
  const double scale = std::max({pv.first, pv.second, 1e-300});
  out.relative_difference = std::abs(pv.first - pv.second) / scale;
  out.relative_std_error = pv.diff_std_error / scale;
  return out;
}

struct ConvergenceRow {
  std::size_t n_steps = 0;
  McEstimate abs_pnl;
  McEstimate pnl;
  McEstimate contract_price;
  double knockout_fraction = 0.0;
  double jump_cross_fraction = 0.0;
};

inline std::vector<ConvergenceRow> convergence_study(const BarrierContract& contract, const MarketSpec& market,
                                                     const std::vector<std::size_t>& steps_list,
                                                     std::size_t n_paths, std::uint64_t seed,
                                                     const BacktestOptions& opts = {}) {
  if (steps_list.empty()) throw InputError("steps list is empty");
  for (std::size_t k = 1; k < steps_list.size(); ++k)
    if (steps_list[k] <= steps_list[k - 1]) throw InputError("steps list must be increasing");
  std::vector<ConvergenceRow> rows;
  for (std::size_t steps : steps_list) {
    const BacktestReport r = backtest(contract, market, n_paths, steps, seed, opts);
    rows.push_back({steps, r.abs_pnl_estimate, r.pnl_estimate, r.contract_price, r.knockout_fraction, r.jump_cross_fraction});
  }
  return rows;
}

}  // namespace swapsym
