// swapsym command-line interface.
//
// Exit codes: 0 pass, 1 semantic failure (check failed, solver failed,
// statistical test rejected), 2 usage or input error.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "swapsym/swapsym.hpp"

namespace {

using swapsym::io::json;

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitInput = 2;

constexpr double kPriceZThreshold = 3.0;     // |MC - closed form| <= 3 stderr
constexpr double kSymmetryZThreshold = 4.0;  // paired symmetry z-tests
constexpr double kMonotoneStderr = 2.0;      // convergence monotonicity slack

struct Options {
  std::string config;
  std::string contract;
  std::string kind = "swap";
  std::size_t i = 1;
  std::size_t j = 2;
  double ri = 0.0;
  double rj = 0.0;
  std::optional<double> alpha;
  std::optional<double> tol;
  std::size_t paths = 0;
  std::size_t steps = 0;
  std::uint64_t seed = 42;
  std::string out;
  std::string csv;
  unsigned threads = 1;
  bool charfn = false;
};

struct Inputs {
  json config;  // merged config document
  std::optional<swapsym::LevyTriplet> triplet;
  std::optional<swapsym::MarketSpec> market;
};

Inputs load_inputs(const Options& o, bool need_model) {
  Inputs in;
  in.config = json::object();
  if (!o.config.empty()) in.config = swapsym::io::read_json_file(o.config);
  if (!in.config.is_object()) throw swapsym::InputError("config must be a JSON object");
  if (!o.contract.empty()) {
    json c = swapsym::io::read_json_file(o.contract);
    if (!c.is_object()) throw swapsym::InputError("contract file must be a JSON object");
    if (c.contains("contract")) {
      // full document: contract plus (optionally) model and market
      for (auto it = c.begin(); it != c.end(); ++it)
        if (!in.config.contains(it.key())) in.config[it.key()] = it.value();
      in.config["contract"] = c["contract"];
    } else {
      in.config["contract"] = c;
    }
  }
  const json* tj = nullptr;
  if (in.config.contains("triplet")) tj = &in.config["triplet"];
  else if (in.config.contains("dim")) tj = &in.config;
  if (tj) {
    in.triplet = swapsym::io::triplet_from_json(*tj);
    in.market = swapsym::io::market_from_json(in.config.contains("market") ? in.config["market"] : json(), *in.triplet);
  } else if (need_model) {
    throw swapsym::InputError("no model: pass --config with a triplet (or a contract file that embeds one)");
  }
  return in;
}

std::size_t zero_based(std::size_t k, std::size_t n, const char* flag) {
  if (k < 1 || k > n) throw swapsym::InputError(std::string(flag) + " must be in 1.." + std::to_string(n));
  return k - 1;
}

json params_json(const Options& o) {
  json p = {{"i", o.i}, {"j", o.j}, {"ri", o.ri}, {"rj", o.rj}, {"seed", o.seed}};
  if (o.alpha) p["alpha"] = *o.alpha;
  if (o.tol) p["tol"] = *o.tol;
  if (o.paths) p["paths"] = o.paths;
  if (o.steps) p["steps"] = o.steps;
  return p;
}

json report_base(const std::string& command, const Options& o, const Inputs& in) {
  json resolved = {{"params", params_json(o)}};
  if (in.triplet) resolved["triplet"] = swapsym::io::to_json(*in.triplet);
  if (in.market) resolved["market"] = swapsym::io::to_json(*in.market);
  for (const char* key : {"payoffs", "contract", "hedge", "convergence"})
    if (in.config.contains(key)) resolved[key] = in.config[key];
  return {{"command", command}, {"seed", o.seed}, {"config", resolved}};
}

void emit(const Options& o, const json& report) {
  const std::string text = swapsym::io::dump(report);
  if (o.out.empty()) std::cout << text;
  else swapsym::io::write_text_file(o.out, text);
}

std::vector<swapsym::PayoffSpec> payoffs_from(const Inputs& in, std::size_t dim) {
  std::vector<swapsym::PayoffSpec> out;
  if (!in.config.contains("payoffs")) return out;
  const json& arr = in.config["payoffs"];
  if (!arr.is_array()) throw swapsym::InputError("payoffs must be an array");
  for (const auto& p : arr) out.push_back(swapsym::io::payoff_from_json(p, dim));
  return out;
}

/// Ten zero-strike weight vectors u with u_i > 0 > u_j (and small weights
/// elsewhere), derived from the seed.
std::vector<swapsym::PayoffSpec> default_payoffs(std::size_t n, std::size_t i, std::size_t j, std::uint64_t seed) {
  std::vector<swapsym::PayoffSpec> out;
  for (std::size_t k = 0; k < 10; ++k) {
    swapsym::Stream s(seed, k, 0, swapsym::Purpose::parameters);
    swapsym::Vector u(static_cast<Eigen::Index>(n));
    for (std::size_t l = 0; l < n; ++l) u(static_cast<Eigen::Index>(l)) = 0.5 * (s.uniform() - 0.5);
    u(static_cast<Eigen::Index>(i)) = 0.5 + s.uniform();
    u(static_cast<Eigen::Index>(j)) = -(0.5 + s.uniform());
    out.push_back(swapsym::PayoffSpec::zero_strike(u));
  }
  return out;
}

// ------------------------------------------------------------------ check

int cmd_check(const Options& o) {
  Inputs in = load_inputs(o, true);
  const swapsym::LevyTriplet& t = *in.triplet;
  const swapsym::MarketSpec& m = *in.market;
  const bool weighted_market = m.weight.kind == swapsym::WeightKind::last_coordinate;
  const std::size_t n = (o.kind == "weighted" || (o.kind == "quasi" && weighted_market)) ? t.dim() - 1 : t.dim();
  const std::size_t i = zero_based(o.i, n, "--i");
  const std::size_t j = o.kind == "self_dual" ? i : zero_based(o.j, n, "--j");
  swapsym::SymmetryReport rep;
  json extra = json::object();
  if (o.kind == "exchangeable") {
    rep = swapsym::check_exchangeable(t, i, j, o.tol.value_or(swapsym::kStructuralTolerance));
  } else if (o.kind == "swap") {
    std::optional<swapsym::Vector> v;
    if (m.weight.kind == swapsym::WeightKind::linear) v = m.weight.v;
    rep = swapsym::check_swap_invariant(t, i, j, v, o.tol.value_or(swapsym::kStructuralTolerance));
    if (o.charfn) {
      swapsym::Vector shift = swapsym::Vector::Zero(static_cast<Eigen::Index>(t.dim()));
      if (v) shift = *v;
      shift(static_cast<Eigen::Index>(i)) += 0.5;
      shift(static_cast<Eigen::Index>(j)) += 0.5;
      rep.add("charfn", swapsym::check_charfn_symmetry(t, i, j, shift, {1000, 2.0, o.seed}),
              swapsym::kCharfnTolerance);
    }
  } else if (o.kind == "weighted") {
    rep = swapsym::check_weighted_swap_invariant(t, i, j, o.tol.value_or(swapsym::kStructuralTolerance));
  } else if (o.kind == "quasi") {
    const double alpha = o.alpha ? *o.alpha : swapsym::solve_alpha(t, i, j, o.ri, o.rj, weighted_market);
    rep = swapsym::check_quasi_swap_invariant(t, {i, j, alpha, o.ri, o.rj, weighted_market},
                                              o.tol.value_or(swapsym::kStructuralTolerance));
    extra["alpha"] = alpha;
  } else if (o.kind == "self_dual") {
    rep.kind = swapsym::SymmetryKind::self_dual;
    rep.add("charfn", swapsym::check_self_dual(t, i, {1000, 2.0, o.seed}),
            o.tol.value_or(swapsym::kCharfnTolerance));
  } else {
    throw swapsym::InputError("unknown --kind '" + o.kind + "'");
  }
  json report = report_base("check", o, in);
  report["config"]["params"]["kind"] = o.kind;
  report["result"] = swapsym::io::to_json(rep);
  if (!extra.empty()) report["result"]["extra"] = extra;
  emit(o, report);
  std::cerr << "check " << o.kind << ": " << (rep.pass ? "PASS" : "FAIL") << "\n";
  for (const auto& r : rep.residuals)
    if (r.value > r.tol) std::cerr << "  residual " << r.id << " = " << r.value << " > " << r.tol << "\n";
  return rep.pass ? kExitPass : kExitFail;
}

// ------------------------------------------------------------------ alpha

int cmd_alpha(const Options& o) {
  Inputs in = load_inputs(o, true);
  const swapsym::LevyTriplet& t = *in.triplet;
  const bool weighted = in.market->weight.kind == swapsym::WeightKind::last_coordinate;
  const std::size_t n = weighted ? t.dim() - 1 : t.dim();
  const std::size_t i = zero_based(o.i, n, "--i");
  const std::size_t j = zero_based(o.j, n, "--j");
  const double alpha = swapsym::solve_alpha(t, i, j, o.ri, o.rj, weighted);
  const auto check = swapsym::check_quasi_swap_invariant(t, {i, j, alpha, o.ri, o.rj, weighted},
                                                         o.tol.value_or(swapsym::kStructuralTolerance));
  std::cout << std::setprecision(17) << alpha << "\n";
  json report = report_base("alpha", o, in);
  report["result"] = {{"alpha", alpha}, {"quasi_check", swapsym::io::to_json(check)}};
  if (!o.out.empty()) emit(o, report);
  return kExitPass;
}

// ------------------------------------------------------------------ price

int cmd_price(const Options& o) {
  Inputs in = load_inputs(o, true);
  const swapsym::MarketSpec& m = *in.market;
  const std::size_t d = m.dim();
  auto payoffs = payoffs_from(in, d);
  if (payoffs.empty()) throw swapsym::InputError("price needs a non-empty 'payoffs' array in the config");
  const std::size_t n_paths = o.paths ? o.paths : 100000;
  const std::size_t n_steps = o.steps ? o.steps : 1;

  std::vector<std::vector<double>> values(payoffs.size(), std::vector<double>(n_paths));
  swapsym::PathGenerator gen(m, n_steps, o.seed);
  const bool dump_paths = !o.csv.empty();
  if (dump_paths && static_cast<double>(n_paths) * static_cast<double>(n_steps + 1) * static_cast<double>(d) > 1e7)
    throw swapsym::InputError("path CSV limited to 1e7 values; reduce --paths or --steps");
  swapsym::PathSet ps;
  if (dump_paths) ps = swapsym::simulate_paths(m, n_paths, n_steps, o.seed, o.threads);
  swapsym::parallel_for(n_paths, o.threads, [&](std::size_t b, std::size_t e) {
    std::vector<double> path((n_steps + 1) * d);
    for (std::size_t p = b; p < e; ++p) {
      gen.generate(p, path, {});
      const std::span<const double> x(path.data() + n_steps * d, d);
      for (std::size_t k = 0; k < payoffs.size(); ++k) values[k][p] = payoffs[k](x);
    }
  });

  bool pass = true;
  json results = json::array();
  for (std::size_t k = 0; k < payoffs.size(); ++k) {
    const auto est = swapsym::summarize(values[k]);
    json r = {{"payoff", swapsym::io::to_json(payoffs[k])}, {"estimate", swapsym::io::to_json(est)},
              {"discounted_price", m.rate == 0.0 ? est.mean : std::exp(-m.rate * m.horizon) * est.mean}};
    const auto& f = payoffs[k];
    // Margrabe oracle: zero-strike (u_1 S_1 + u_2 S_2)_+ with u_1 > 0 > u_2 in a Gaussian market.
    const bool two_weights = f.weights.size() == 2 ||
                             (f.weights.size() > 2 && f.weights.tail(f.weights.size() - 2).cwiseAbs().maxCoeff() == 0.0);
    if (m.triplet.nu().is_zero() && d >= 2 && f.strike == 0.0 && !f.quanto && !f.power && two_weights &&
        f.weights(0) > 0.0 && f.weights(1) < 0.0) {
      std::vector<double> state(d);
      for (std::size_t l = 0; l < d; ++l) state[l] = m.spots(static_cast<Eigen::Index>(l));
      const double exact = swapsym::exchange_option_forward(m, state, m.horizon, 0, f.weights(0), 1, -f.weights(1));
      const double z = est.std_error > 0.0 ? (est.mean - exact) / est.std_error : 0.0;
      r["closed_form"] = {{"margrabe", exact}, {"z", z}, {"threshold", kPriceZThreshold}};
      if (!(std::abs(z) <= kPriceZThreshold)) pass = false;
    }
    results.push_back(r);
  }
  json report = report_base("price", o, in);
  report["config"]["params"]["paths"] = n_paths;
  report["config"]["params"]["steps"] = n_steps;
  report["result"] = {{"pass", pass}, {"prices", results}};
  emit(o, report);
  if (dump_paths) {
    std::ofstream csv(o.csv, std::ios::binary);
    if (!csv) throw swapsym::InputError("cannot write '" + o.csv + "'");
    swapsym::io::write_paths_csv(csv, ps);
  }
  return pass ? kExitPass : kExitFail;
}

// ------------------------------------------------------------ symmetry-mc

int cmd_symmetry_mc(const Options& o) {
  Inputs in = load_inputs(o, true);
  const swapsym::MarketSpec& m = *in.market;
  const std::size_t d = m.dim();
  const std::size_t i = zero_based(o.i, m.swap_dim(), "--i");
  const std::size_t j = zero_based(o.j, m.swap_dim(), "--j");
  auto payoffs = payoffs_from(in, d);
  const bool defaulted = payoffs.empty();
  if (defaulted) payoffs = default_payoffs(m.swap_dim(), i, j, o.seed);
  const std::size_t n_paths = o.paths ? o.paths : 1000000;
  swapsym::SymmetryMcOptions opts;
  opts.alpha = o.alpha;
  const auto rep = swapsym::mc_symmetry_test(m, i, j, payoffs, n_paths, o.seed, opts, o.threads);
  const bool pass = rep.max_abs_z() < kSymmetryZThreshold;
  json report = report_base("symmetry-mc", o, in);
  report["config"]["params"]["paths"] = n_paths;
  if (defaulted) {
    json arr = json::array();
    for (const auto& f : payoffs) arr.push_back(swapsym::io::to_json(f));
    report["config"]["payoffs"] = arr;
  }
  report["result"] = swapsym::io::to_json(rep);
  report["result"]["threshold"] = kSymmetryZThreshold;
  report["result"]["pass"] = pass;
  emit(o, report);
  std::cerr << "symmetry-mc: max |z| = " << rep.max_abs_z() << (pass ? " PASS" : " FAIL") << "\n";
  return pass ? kExitPass : kExitFail;
}

// ------------------------------------------------------------------ hedge

swapsym::BacktestOptions backtest_options(const Options& o, const Inputs& in) {
  swapsym::BacktestOptions bo;
  bo.threads = o.threads;
  bo.alpha = o.alpha.value_or(0.0);
  if (in.config.contains("hedge")) {
    const json& h = in.config["hedge"];
    const std::string v = h.value("valuation", std::string("automatic"));
    if (v == "automatic") bo.valuation = swapsym::Valuation::automatic;
    else if (v == "closed_form_margrabe") bo.valuation = swapsym::Valuation::closed_form_margrabe;
    else if (v == "nested_mc") bo.valuation = swapsym::Valuation::nested_mc;
    else throw swapsym::InputError("unknown valuation '" + v + "'");
    if (h.contains("m_inner")) bo.m_inner = h.at("m_inner").get<std::size_t>();
    if (h.contains("alpha") && !o.alpha) bo.alpha = h.at("alpha").get<double>();
  }
  return bo;
}

swapsym::BarrierContract contract_of(const Inputs& in) {
  if (!in.config.contains("contract")) throw swapsym::InputError("no contract: pass --contract or a 'contract' section");
  return swapsym::io::contract_from_json(in.config["contract"]);
}

int cmd_hedge(const Options& o) {
  Inputs in = load_inputs(o, true);
  const auto contract = contract_of(in);
  const auto bo = backtest_options(o, in);
  const std::size_t n_paths = o.paths ? o.paths : 10000;
  const std::size_t n_steps = o.steps ? o.steps : 500;
  const double threshold = in.config.contains("hedge") ? in.config["hedge"].value("pnl_threshold", 0.01) : 0.01;
  const auto rep = swapsym::backtest(contract, *in.market, n_paths, n_steps, o.seed, bo);

  bool pass = rep.decomposition_violations == 0 && rep.short_leg_violations == 0;
  json criterion;
  if (contract.barrier == swapsym::BarrierKind::knock_out) {
    const double bound = threshold * rep.contract_price.mean;
    pass = pass && rep.abs_pnl_estimate.mean < bound;
    criterion = {{"rule", "mean |PnL| < pnl_threshold * contract price"}, {"bound", bound}};
  } else {
    const double bound = -3.0 * rep.pnl_estimate.std_error;
    pass = pass && rep.pnl_estimate.mean >= bound;
    criterion = {{"rule", "mean PnL >= -3 stderr"}, {"bound", bound}};
  }
  json report = report_base("hedge", o, in);
  report["config"]["params"]["paths"] = n_paths;
  report["config"]["params"]["steps"] = n_steps;
  report["config"]["resolved_contract"] = swapsym::io::to_json(contract);
  report["result"] = swapsym::io::to_json(rep);
  report["result"]["criterion"] = criterion;
  report["result"]["pass"] = pass;
  emit(o, report);
  if (!o.csv.empty()) {
    std::ofstream csv(o.csv, std::ios::binary);
    if (!csv) throw swapsym::InputError("cannot write '" + o.csv + "'");
    swapsym::io::write_pnl_csv(csv, rep);
  }
  std::cerr << "hedge: mean PnL " << rep.pnl_estimate.mean << " (se " << rep.pnl_estimate.std_error
            << "), mean |PnL| " << rep.abs_pnl_estimate.mean << ", price " << rep.contract_price.mean
            << (pass ? " PASS" : " FAIL") << "\n";
  return pass ? kExitPass : kExitFail;
}

int cmd_convergence(const Options& o) {
  Inputs in = load_inputs(o, true);
  const auto contract = contract_of(in);
  const auto bo = backtest_options(o, in);
  std::vector<std::size_t> steps{250, 500, 1000, 2000};
  if (in.config.contains("convergence") && in.config["convergence"].contains("steps"))
    steps = in.config["convergence"]["steps"].get<std::vector<std::size_t>>();
  const std::size_t n_paths = o.paths ? o.paths : 10000;
  const auto rows = swapsym::convergence_study(contract, *in.market, steps, n_paths, o.seed, bo);
  bool monotone = true;
  json arr = json::array();
  for (std::size_t k = 0; k < rows.size(); ++k) {
    arr.push_back(swapsym::io::to_json(rows[k]));
    if (k > 0) {
      const auto& a = rows[k - 1].abs_pnl;
      const auto& b = rows[k].abs_pnl;
      const double slack = kMonotoneStderr * std::hypot(a.std_error, b.std_error);
      if (b.mean > a.mean + slack) monotone = false;
    }
  }
  json report = report_base("convergence", o, in);
  report["config"]["params"]["paths"] = n_paths;
  report["config"]["params"]["steps_list"] = steps;
  report["result"] = {{"rows", arr}, {"monotone_within_2_stderr", monotone}, {"pass", monotone}};
  emit(o, report);
  return monotone ? kExitPass : kExitFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"swapsym: symmetry checks, quasi-invariance power, Monte Carlo tests and barrier hedges for exp-Levy models"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sc, bool model_required) {
    auto* c = sc->add_option("--config", o.config, "model/config JSON file");
    if (model_required) c->check(CLI::ExistingFile);
    sc->add_option("--seed", o.seed, "random seed (default 42)");
    sc->add_option("--out", o.out, "write the JSON report here instead of stdout");
    sc->add_option("--threads", o.threads, "maximum worker threads")->check(CLI::Range(1u, 1024u));
  };
  auto pair = [&](CLI::App* sc) {
    sc->add_option("--i", o.i, "first asset (1-based)");
    sc->add_option("--j", o.j, "second asset (1-based)");
  };

  auto* check = app.add_subcommand("check", "structural symmetry check of a triplet");
  common(check, true);
  pair(check);
  check->add_option("--kind", o.kind, "exchangeable | swap | weighted | quasi | self_dual")
      ->check(CLI::IsMember({"exchangeable", "swap", "weighted", "quasi", "self_dual"}));
  check->add_option("--ri", o.ri, "carrying rate of asset i (quasi)");
  check->add_option("--rj", o.rj, "carrying rate of asset j (quasi)");
  check->add_option("--alpha", o.alpha, "quasi power (solved if omitted)");
  check->add_option("--tol", o.tol, "residual tolerance");
  check->add_flag("--charfn", o.charfn, "also run the characteristic-function grid check (swap)");

  auto* alpha = app.add_subcommand("alpha", "solve for the quasi-invariance power");
  common(alpha, true);
  pair(alpha);
  alpha->add_option("--ri", o.ri, "carrying rate of asset i");
  alpha->add_option("--rj", o.rj, "carrying rate of asset j");
  alpha->add_option("--tol", o.tol, "tolerance of the accompanying quasi check");

  auto* price = app.add_subcommand("price", "Monte Carlo prices of the config payoffs");
  common(price, true);
  price->add_option("--paths", o.paths, "number of paths (default 1e5)");
  price->add_option("--steps", o.steps, "time steps (default 1)");
  price->add_option("--csv", o.csv, "dump paths as CSV (path,time,asset,value)");

  auto* sym = app.add_subcommand("symmetry-mc", "paired Monte Carlo symmetry z-tests");
  common(sym, true);
  pair(sym);
  sym->add_option("--alpha", o.alpha, "quasi power on the swapped side");
  sym->add_option("--paths", o.paths, "number of draws (default 1e6)");

  auto* hedge = app.add_subcommand("hedge", "backtest the semi-static barrier hedge");
  common(hedge, false);
  hedge->add_option("--contract", o.contract, "contract JSON (may embed the model)")->check(CLI::ExistingFile);
  hedge->add_option("--alpha", o.alpha, "quasi power of the reflected leg");
  hedge->add_option("--paths", o.paths, "outer paths (default 1e4)");
  hedge->add_option("--steps", o.steps, "monitoring steps (default 500)");
  hedge->add_option("--csv", o.csv, "per-path PnL CSV");

  auto* conv = app.add_subcommand("convergence", "hedge error against monitoring frequency");
  common(conv, false);
  conv->add_option("--contract", o.contract, "contract JSON (may embed the model)")->check(CLI::ExistingFile);
  conv->add_option("--alpha", o.alpha, "quasi power of the reflected leg");
  conv->add_option("--paths", o.paths, "outer paths (default 1e4)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitInput;
  }

  try {
    if (check->parsed()) return cmd_check(o);
    if (alpha->parsed()) return cmd_alpha(o);
    if (price->parsed()) return cmd_price(o);
    if (sym->parsed()) return cmd_symmetry_mc(o);
    if (hedge->parsed()) return cmd_hedge(o);
    if (conv->parsed()) return cmd_convergence(o);
  } catch (const swapsym::InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const json::exception& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const swapsym::SolverError& e) {
    std::cerr << "solver failure: " << e.what();
    for (double c : e.candidates()) std::cerr << " " << c;
    std::cerr << "\n";
    return kExitFail;
  } catch (const swapsym::DomainError& e) {
    std::cerr << "domain failure: " << e.what() << "\n";
    return kExitFail;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFail;
  }
  return kExitInput;
}
