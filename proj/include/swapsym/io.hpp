#pragma once

// JSON and CSV serialization. Asset indices in files and on the command line
// are 1-based; the library is 0-based. Doubles are written in nlohmann's
// shortest round-trip form, so every value reads back bit-exactly.

#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "swapsym/hedging.hpp"
#include "swapsym/quasi.hpp"
#include "swapsym/symmetry.hpp"

namespace swapsym::io {

using nlohmann::json;

namespace detail {

inline const json& require(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw InputError(std::string("missing field '") + key + "'");
  return j.at(key);
}

inline double number(const json& j, const char* what) {
  if (!j.is_number()) throw InputError(std::string(what) + " must be a number");
  return j.get<double>();
}

inline Vector vector_from(const json& j, const char* what) {
  if (!j.is_array()) throw InputError(std::string(what) + " must be an array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t k = 0; k < j.size(); ++k) v(static_cast<Eigen::Index>(k)) = number(j[k], what);
  return v;
}

/// Square matrix from a row-major flat array (or an array of rows).
inline Matrix matrix_from(const json& j, std::size_t n, const char* what) {
  if (!j.is_array()) throw InputError(std::string(what) + " must be an array");
  Matrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  if (j.size() == n && n > 0 && j[0].is_array()) {
    for (std::size_t r = 0; r < n; ++r) {
      if (!j[r].is_array() || j[r].size() != n) throw InputError(std::string(what) + " has wrong shape");
      for (std::size_t c = 0; c < n; ++c)
        m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = number(j[r][c], what);
    }
    return m;
  }
  if (j.size() != n * n) throw InputError(std::string(what) + " must have dim*dim entries");
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = number(j[r * n + c], what);
  return m;
}

inline json to_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) out.push_back(v(k));
  return out;
}

inline json to_json_flat(const Matrix& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) out.push_back(m(r, c));
  return out;
}

inline std::size_t asset_index(const json& j, std::size_t n, const char* what) {
  if (!j.is_number_integer()) throw InputError(std::string(what) + " must be an integer");
  const auto k = j.get<long long>();
  if (k < 1 || static_cast<std::size_t>(k) > n) throw InputError(std::string(what) + " out of range (1-based)");
  return static_cast<std::size_t>(k - 1);
}

}  // namespace detail

// ---------------------------------------------------------------- triplets

inline json to_json(const LevyMeasure& nu) {
  json out;
  if (nu.is_atomic()) {
    out["type"] = "atomic";
    out["atoms"] = json::array();
    for (const auto& a : nu.atoms())
      out["atoms"].push_back({{"location", detail::to_json(a.location)}, {"mass", a.mass}});
  } else {
    out["type"] = "gaussian_mixture";
    out["components"] = json::array();
    for (const auto& c : nu.components())
      out["components"].push_back({{"intensity", c.intensity},
                                   {"mean", detail::to_json(c.mean)},
                                   {"covariance", detail::to_json_flat(c.covariance)}});
  }
  return out;
}

inline LevyMeasure measure_from_json(const json& j, std::size_t n) {
  if (j.is_null()) return LevyMeasure::zero(n);
  const std::string type = detail::require(j, "type").get<std::string>();
  if (type == "zero") return LevyMeasure::zero(n);
  if (type == "atomic") {
    LevyMeasure::Atoms atoms;
    for (const auto& a : detail::require(j, "atoms")) {
      atoms.push_back({detail::vector_from(detail::require(a, "location"), "atom location"),
                       detail::number(detail::require(a, "mass"), "atom mass")});
    }
    return LevyMeasure::atomic(n, std::move(atoms));
  }
  if (type == "gaussian_mixture") {
    LevyMeasure::Mixture comps;
    for (const auto& c : detail::require(j, "components")) {
      comps.push_back({detail::number(detail::require(c, "intensity"), "component intensity"),
                       detail::vector_from(detail::require(c, "mean"), "component mean"),
                       detail::matrix_from(detail::require(c, "covariance"), n, "component covariance")});
    }
    return LevyMeasure::gaussian_mixture(n, std::move(comps));
  }
  throw InputError("unknown Levy measure type '" + type + "'");
}

inline json to_json(const LevyTriplet& t) {
  return {{"dim", t.dim()},
          {"A", detail::to_json_flat(t.a())},
          {"gamma", detail::to_json(t.gamma())},
          {"nu", to_json(t.nu())}};
}

inline LevyTriplet triplet_from_json(const json& j) {
  try {
    const json& dj = detail::require(j, "dim");
    if (!dj.is_number_integer() || dj.get<long long>() < 1) throw InputError("dim must be a positive integer");
    const auto n = static_cast<std::size_t>(dj.get<long long>());
    Vector gamma = detail::vector_from(detail::require(j, "gamma"), "gamma");
    if (static_cast<std::size_t>(gamma.size()) != n) throw InputError("gamma has wrong dimension");
    Matrix a = detail::matrix_from(detail::require(j, "A"), n, "A");
    LevyMeasure nu = measure_from_json(j.contains("nu") ? j.at("nu") : json(), n);
    return LevyTriplet(std::move(a), std::move(nu), std::move(gamma));
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed triplet: ") + e.what());
  }
}

// ---------------------------------------------------------------- markets

inline json to_json(const MarketSpec& m) {
  json w;
  switch (m.weight.kind) {
    case WeightKind::none: w = "none"; break;
    case WeightKind::last_coordinate: w = "last_coordinate"; break;
    case WeightKind::linear: w = {{"linear", detail::to_json(m.weight.v)}}; break;
  }
  return {{"spots", detail::to_json(m.spots)},
          {"carrying_costs", detail::to_json(m.carrying_costs)},
          {"horizon", m.horizon},
          {"rate", m.rate},
          {"weight", w}};
}

/// Market section; every field is optional (unit spots, zero carry, T = 1).
inline MarketSpec market_from_json(const json& j, const LevyTriplet& t) {
  const auto d = static_cast<Eigen::Index>(t.dim());
  Vector spots = Vector::Ones(d), carry = Vector::Zero(d);
  double horizon = 1.0, rate = 0.0;
  Weight weight;
  if (!j.is_null()) {
    if (!j.is_object()) throw InputError("market must be an object");
    if (j.contains("spots")) spots = detail::vector_from(j.at("spots"), "spots");
    if (j.contains("carrying_costs")) carry = detail::vector_from(j.at("carrying_costs"), "carrying_costs");
    if (j.contains("horizon")) horizon = detail::number(j.at("horizon"), "horizon");
    if (j.contains("rate")) rate = detail::number(j.at("rate"), "rate");
    if (j.contains("weight")) {
      const json& w = j.at("weight");
      if (w.is_string() && w.get<std::string>() == "none") {
        weight = Weight::none();
      } else if (w.is_string() && w.get<std::string>() == "last_coordinate") {
        weight = Weight::last_coordinate();
      } else if (w.is_object() && w.contains("linear")) {
        weight = Weight::linear(detail::vector_from(w.at("linear"), "linear weight"));
      } else {
        throw InputError("weight must be \"none\", \"last_coordinate\" or {\"linear\": [...]}");
      }
    }
  }
  return MarketSpec(t, std::move(spots), std::move(carry), horizon, rate, std::move(weight));
}

// ---------------------------------------------------------------- payoffs

inline json to_json(const PayoffSpec& f) {
  json out = {{"weights", detail::to_json(f.weights)}, {"strike", f.strike}};
  if (f.quanto) out["quanto"] = *f.quanto + 1;
  if (f.power)
    out["power"] = {{"i", f.power->i + 1}, {"j", f.power->j + 1}, {"alpha", f.power->alpha}, {"scale", f.power->scale}};
  return out;
}

/// {"weights": [...], "strike": u0, "quanto": k, "power": {"i", "j", "alpha", "scale"}}
inline PayoffSpec payoff_from_json(const json& j, std::size_t dim) {
  PayoffSpec f = PayoffSpec::basket(detail::vector_from(detail::require(j, "weights"), "payoff weights"),
                                    j.contains("strike") ? detail::number(j.at("strike"), "strike") : 0.0);
  if (j.contains("quanto")) f.quanto = detail::asset_index(j.at("quanto"), dim, "quanto");
  if (j.contains("power")) {
    const json& p = j.at("power");
    f.power = PowerFactor{detail::asset_index(detail::require(p, "i"), dim, "power.i"),
                          detail::asset_index(detail::require(p, "j"), dim, "power.j"),
                          detail::number(detail::require(p, "alpha"), "power.alpha"),
                          p.contains("scale") ? detail::number(p.at("scale"), "power.scale") : 1.0};
  }
  f.validate(dim);
  return f;
}

// ---------------------------------------------------------------- contracts

inline json to_json(const BarrierContract& c) {
  json out = {{"payoff", to_string(c.payoff)}, {"barrier", to_string(c.barrier)},
              {"a", c.a}, {"b", c.b}, {"k", c.k}, {"c", c.c}};
  if (c.is_quanto()) out["quanto_asset"] = c.quanto_index + 1;
  return out;
}

inline BarrierContract contract_from_json(const json& j) {
  BarrierContract c;
  const std::string payoff = j.value("payoff", std::string("swap"));
  if (payoff == "spread") c.payoff = ContractPayoff::spread;
  else if (payoff == "swap") c.payoff = ContractPayoff::swap;
  else if (payoff == "quanto_spread") c.payoff = ContractPayoff::quanto_spread;
  else if (payoff == "quanto_swap") c.payoff = ContractPayoff::quanto_swap;
  else throw InputError("unknown contract payoff '" + payoff + "'");
  const std::string barrier = j.value("barrier", std::string("knock_out"));
  if (barrier == "knock_out") c.barrier = BarrierKind::knock_out;
  else if (barrier == "knock_in") c.barrier = BarrierKind::knock_in;
  else throw InputError("unknown barrier kind '" + barrier + "'");
  if (j.contains("a")) c.a = detail::number(j.at("a"), "a");
  if (j.contains("b")) c.b = detail::number(j.at("b"), "b");
  if (j.contains("k")) c.k = detail::number(j.at("k"), "k");
  if (j.contains("c")) c.c = detail::number(j.at("c"), "c");
  if (j.contains("quanto_asset")) {
    const json& q = j.at("quanto_asset");
    if (!q.is_number_integer() || q.get<long long>() < 1) throw InputError("quanto_asset must be a 1-based index");
    c.quanto_index = static_cast<std::size_t>(q.get<long long>() - 1);
  }
  c.validate();
  return c;
}

// ---------------------------------------------------------------- reports

inline json to_json(const SymmetryReport& r) {
  json res = json::array();
  for (const auto& x : r.residuals) res.push_back({{"id", x.id}, {"value", x.value}, {"tol", x.tol}});
  return {{"kind", to_string(r.kind)}, {"pass", r.pass}, {"residuals", res}, {"details", r.details}};
}

inline json to_json(const McEstimate& e) {
  return {{"mean", e.mean}, {"std_error", e.std_error}, {"n", e.n}};
}

inline json to_json(const SymmetryZ& z) {
  return {{"mean_original", z.mean_original}, {"mean_swapped", z.mean_swapped},
          {"difference", z.difference},       {"std_error", z.std_error},
          {"z", z.z},                         {"var_original", z.var_original},
          {"var_swapped", z.var_swapped},     {"var_difference", z.var_difference}};
}

inline json to_json(const SymmetryMcReport& r) {
  json tests = json::array();
  for (const auto& z : r.tests) tests.push_back(to_json(z));
  return {{"n_paths", r.n_paths}, {"seed", r.seed}, {"max_abs_z", r.max_abs_z()}, {"tests", tests}};
}

inline json to_json(const BacktestReport& r) {
  json resid = json::object();
  if (!r.liquidation_residuals.empty()) {
    const auto [lo, hi] = std::minmax_element(r.liquidation_residuals.begin(), r.liquidation_residuals.end());
    resid = {{"count", r.liquidation_residuals.size()}, {"min", *lo}, {"max", *hi},
             {"mean", summarize(r.liquidation_residuals).mean}};
  }
  return {{"n_paths", r.n_paths},
          {"n_steps", r.n_steps},
          {"seed", r.seed},
          {"valuation", r.valuation},
          {"pnl", to_json(r.pnl_estimate)},
          {"abs_pnl", to_json(r.abs_pnl_estimate)},
          {"contract_price", to_json(r.contract_price)},
          {"hedge_cost", to_json(r.hedge_cost)},
          {"discount_factor", r.discount_factor},
          {"knockout_fraction", r.knockout_fraction},
          {"jump_cross_fraction", r.jump_cross_fraction},
          {"decomposition_violations", r.decomposition_violations},
          {"short_leg_violations", r.short_leg_violations},
          {"liquidation_residuals", resid}};
}

inline json to_json(const ConvergenceRow& row) {
  return {{"n_steps", row.n_steps}, {"abs_pnl", to_json(row.abs_pnl)}, {"pnl", to_json(row.pnl)},
          {"contract_price", to_json(row.contract_price)},
          {"knockout_fraction", row.knockout_fraction}, {"jump_cross_fraction", row.jump_cross_fraction}};
}

// ---------------------------------------------------------------- CSV

inline void write_csv_number(std::ostream& os, double x) {
  os << std::setprecision(17) << x;
}

/// path, time, asset (1-based), value
inline void write_paths_csv(std::ostream& os, const PathSet& ps) {
  os << "path,time,asset,value\n";
  for (std::size_t p = 0; p < ps.n_paths; ++p)
    for (std::size_t s = 0; s <= ps.n_steps; ++s)
      for (std::size_t a = 0; a < ps.n_assets; ++a) {
        os << p << ',';
        write_csv_number(os, ps.times[s]);
        os << ',' << a + 1 << ',';
        write_csv_number(os, ps.value(p, s, a));
        os << '\n';
      }
}

/// path_id, tau_step (-1 if never knocked), pnl, jump_crossed
inline void write_pnl_csv(std::ostream& os, const BacktestReport& r) {
  os << "path_id,tau_step,pnl,jump_crossed\n";
  for (std::size_t p = 0; p < r.n_paths; ++p) {
    os << p << ',' << r.tau_step[p] << ',';
    write_csv_number(os, r.pnl[p]);
    os << ',' << static_cast<int>(r.jump_crossed[p]) << '\n';
  }
}

// ---------------------------------------------------------------- files

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError("malformed JSON in '" + path + "': " + e.what());
  }
}

/// Stable text form of a report: sorted keys (nlohmann objects are ordered
/// maps), two-space indentation, trailing newline.
inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << text;
  if (!out) throw InputError("failed writing '" + path + "'");
}

}  // namespace swapsym::io
