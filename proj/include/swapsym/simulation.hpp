#pragma once

// Exact-transition Monte Carlo for exp-Levy markets with a Brownian part and
// finite-activity jumps. Increments over a step of length dt are drawn from
// the exact law N(gamma dt, A dt) plus a compound-Poisson sum, so the number
// of steps only matters for path-dependent monitoring.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <thread>
#include <variant>
#include <vector>

#include "swapsym/market.hpp"
#include "swapsym/payoff.hpp"
#include "swapsym/rng.hpp"

namespace swapsym {

/// Runs body(begin, end) over [0, n) split into contiguous chunks.
inline void parallel_for(std::size_t n, unsigned threads,
                         const std::function<void(std::size_t, std::size_t)>& body) {
  if (threads <= 1 || n < 2) {
    body(0, n);
    return;
  }
  const std::size_t workers = std::min<std::size_t>(threads, n);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t b = n * w / workers, e = n * (w + 1) / workers;
    pool.emplace_back([&body, b, e] { body(b, e); });
  }
  for (auto& t : pool) t.join();
}

/// Unit-time sampling data of a triplet; increments for any dt are drawn from it.
class IncrementSampler {
 public:
  explicit IncrementSampler(const LevyTriplet& t)
      : dim_(t.dim()), gamma_(t.gamma()), root_a_(psd_sqrt(t.a())) {
    // truncation-free form: gamma is the compensated drift, so the pathwise
    // drift between jumps is gamma - int x dnu
    const LevyMeasure& nu = t.nu();
    intensity_ = nu.total_intensity();
    double acc = 0.0;
    if (nu.is_atomic()) {
      for (const auto& a : nu.atoms()) {
        acc += a.mass;
        gamma_ -= a.mass * a.location;
        cumulative_.push_back(acc);
        jump_mean_.push_back(a.location);
        jump_root_.push_back(Matrix::Zero(dim_, dim_));
      }
    } else {
      for (const auto& c : nu.components()) {
        acc += c.intensity;
        gamma_ -= c.intensity * c.mean;
        cumulative_.push_back(acc);
        jump_mean_.push_back(c.mean);
        jump_root_.push_back(psd_sqrt(c.covariance));
      }
    }
    has_diffusion_ = root_a_.size() > 0 && root_a_.cwiseAbs().maxCoeff() > 0.0;
  }

  std::size_t dim() const noexcept { return dim_; }

  /// Adds an exact increment of xi over dt to `xi`; returns whether a jump occurred.
  bool add_increment(std::span<double> xi, double dt, std::uint64_t seed, std::uint64_t path,
                     std::uint64_t step, std::span<double> scratch) const {
    for (std::size_t k = 0; k < dim_; ++k) xi[k] += gamma_(static_cast<Eigen::Index>(k)) * dt;
    if (has_diffusion_) {
      Stream s(seed, path, step, Purpose::diffusion);
      const double sd = std::sqrt(dt);
      for (std::size_t k = 0; k < dim_; ++k) scratch[k] = s.normal() * sd;
      add_product(root_a_, scratch, xi);
    }
    if (intensity_ <= 0.0) return false;
    Stream count_stream(seed, path, step, Purpose::jump_count);
    const std::uint64_t count = count_stream.poisson(intensity_ * dt);
    if (count == 0) return false;
    Stream s(seed, path, step, Purpose::jump_size);
    for (std::uint64_t c = 0; c < count; ++c) {
      const double pick = s.uniform() * intensity_;
      auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), pick);
      const auto comp = static_cast<std::size_t>(
          std::min<std::ptrdiff_t>(it - cumulative_.begin(), static_cast<std::ptrdiff_t>(cumulative_.size()) - 1));
      const Vector& m = jump_mean_[comp];
      for (std::size_t k = 0; k < dim_; ++k) xi[k] += m(static_cast<Eigen::Index>(k));
      const Matrix& root = jump_root_[comp];
      if (root.cwiseAbs().maxCoeff() > 0.0) {
        for (std::size_t k = 0; k < dim_; ++k) scratch[k] = s.normal();
        add_product(root, scratch, xi);
      }
    }
    return true;
  }

 private:
  void add_product(const Matrix& m, std::span<const double> z, std::span<double> out) const {
    for (std::size_t r = 0; r < dim_; ++r) {
      double acc = 0.0;
      for (std::size_t c = 0; c < dim_; ++c)
        acc += m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) * z[c];
      out[r] += acc;
    }
  }

  std::size_t dim_;
  Vector gamma_;
  Matrix root_a_;
  bool has_diffusion_ = false;
  double intensity_ = 0.0;
  std::vector<double> cumulative_;
  std::vector<Vector> jump_mean_;
  std::vector<Matrix> jump_root_;
};

/// Asset prices on a uniform time grid.
struct PathSet {
  std::size_t n_paths = 0;
  std::size_t n_steps = 0;
  std::size_t n_assets = 0;
  std::vector<double> times;
  std::vector<double> values;      // [path][step 0..n_steps][asset]
  std::vector<std::uint8_t> jump_flags;  // [path][step 1..n_steps], index step-1
  std::uint64_t seed = 0;

  std::span<const double> at(std::size_t path, std::size_t step) const {
    return {values.data() + (path * (n_steps + 1) + step) * n_assets, n_assets};
  }
  double value(std::size_t path, std::size_t step, std::size_t asset) const { return at(path, step)[asset]; }
  bool jumped(std::size_t path, std::size_t step) const {
    return jump_flags[path * n_steps + (step - 1)] != 0;
  }
};

/// Generates one path into `out` ([step][asset], n_steps+1 rows). Returns
/// per-step jump flags through `flags` when non-empty.
class PathGenerator {
 public:
  PathGenerator(const MarketSpec& market, std::size_t n_steps, std::uint64_t seed)
      : market_(market), sampler_(market.triplet), n_steps_(n_steps), seed_(seed),
        dt_(market.horizon / static_cast<double>(n_steps)) {
    if (n_steps == 0) throw InputError("n_steps must be positive");
  }

  std::size_t dim() const noexcept { return sampler_.dim(); }
  double dt() const noexcept { return dt_; }
  std::size_t n_steps() const noexcept { return n_steps_; }
  const IncrementSampler& sampler() const noexcept { return sampler_; }

  void generate(std::uint64_t path, std::span<double> out, std::span<std::uint8_t> flags) const {
    const std::size_t d = dim();
    std::vector<double> xi(d, 0.0), scratch(d, 0.0);
    for (std::size_t k = 0; k < d; ++k) out[k] = market_.spots(static_cast<Eigen::Index>(k));
    for (std::size_t s = 1; s <= n_steps_; ++s) {
      const bool jumped = sampler_.add_increment(xi, dt_, seed_, path, s, scratch);
      if (!flags.empty()) flags[s - 1] = jumped ? 1 : 0;
      const double t = s == n_steps_ ? market_.horizon : dt_ * static_cast<double>(s);
      for (std::size_t k = 0; k < d; ++k) {
        const auto kk = static_cast<Eigen::Index>(k);
        out[s * d + k] = market_.spots(kk) * std::exp(market_.carrying_costs(kk) * t + xi[k]);
      }
    }
  }

 private:
  const MarketSpec& market_;
  IncrementSampler sampler_;
  std::size_t n_steps_;
  std::uint64_t seed_;
  double dt_;
};

inline PathSet simulate_paths(const MarketSpec& market, std::size_t n_paths, std::size_t n_steps,
                              std::uint64_t seed, unsigned threads = 1) {
  if (n_paths == 0 || n_steps == 0) throw InputError("n_paths and n_steps must be positive");
  market.validate();
  PathGenerator gen(market, n_steps, seed);
  PathSet ps;
  ps.n_paths = n_paths;
  ps.n_steps = n_steps;
  ps.n_assets = market.dim();
  ps.seed = seed;
  ps.times.resize(n_steps + 1);
  for (std::size_t s = 0; s <= n_steps; ++s)
    ps.times[s] = s == n_steps ? market.horizon : gen.dt() * static_cast<double>(s);
  const std::size_t row = (n_steps + 1) * ps.n_assets;
  ps.values.resize(n_paths * row);
  ps.jump_flags.resize(n_paths * n_steps);
  parallel_for(n_paths, threads, [&](std::size_t b, std::size_t e) {
    for (std::size_t p = b; p < e; ++p)
      gen.generate(p, {ps.values.data() + p * row, row}, {ps.jump_flags.data() + p * n_steps, n_steps});
  });
  return ps;
}

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t n = 0;
};

inline McEstimate summarize(std::span<const double> xs) {
  McEstimate est;
  est.n = xs.size();
  if (xs.empty()) return est;
  double sum = 0.0;
  for (double x : xs) sum += x;
  est.mean = sum / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - est.mean) * (x - est.mean);
    est.std_error = std::sqrt(ss / static_cast<double>(xs.size() - 1) / static_cast<double>(xs.size()));
  }
  return est;
}

inline McEstimate estimate_payoff(const PathSet& paths, const PayoffSpec& payoff, std::size_t at_step) {
  if (at_step > paths.n_steps) throw InputError("step index out of range");
  payoff.validate(paths.n_assets);
  std::vector<double> v(paths.n_paths);
  for (std::size_t p = 0; p < paths.n_paths; ++p) v[p] = payoff(paths.at(p, at_step));
  return summarize(v);
}

/// Terminal draws of the normalized price vector eta = S_T / S_0, row-major.
struct TerminalDraws {
  std::size_t n = 0;
  std::size_t dim = 0;
  std::vector<double> eta;
  std::vector<double> horizons;  // per-draw horizon (random under a time change)

  std::span<const double> row(std::size_t p) const { return {eta.data() + p * dim, dim}; }
};

/// Draws e^{lambda T + xi_T} exactly in one step.
inline TerminalDraws draw_terminal(const MarketSpec& market, std::size_t n_paths, std::uint64_t seed,
                                   unsigned threads = 1) {
  if (n_paths == 0) throw InputError("n_paths must be positive");
  market.validate();
  IncrementSampler sampler(market.triplet);
  TerminalDraws out;
  out.n = n_paths;
  out.dim = market.dim();
  out.eta.resize(n_paths * out.dim);
  out.horizons.assign(n_paths, market.horizon);
  parallel_for(n_paths, threads, [&](std::size_t b, std::size_t e) {
    std::vector<double> xi(out.dim), scratch(out.dim);
    for (std::size_t p = b; p < e; ++p) {
      std::fill(xi.begin(), xi.end(), 0.0);
      sampler.add_increment(xi, market.horizon, seed, p, 1, scratch);
      for (std::size_t k = 0; k < out.dim; ++k)
        out.eta[p * out.dim + k] =
            std::exp(market.carrying_costs(static_cast<Eigen::Index>(k)) * market.horizon + xi[k]);
    }
  });
  return out;
}

/// Independent random clock for terminal-time randomization.
struct RandomTime {
  struct Constant { double t; };
  struct TwoPoint { double t1; double t2; double p1; };
  struct Exponential { double mean; };
  std::variant<Constant, TwoPoint, Exponential> law;

  double sample(Stream& s) const {
    double t = std::visit(
        [&](const auto& l) -> double {
          using L = std::decay_t<decltype(l)>;
          if constexpr (std::is_same_v<L, Constant>) return l.t;
          else if constexpr (std::is_same_v<L, TwoPoint>) return s.uniform() < l.p1 ? l.t1 : l.t2;
          else return s.exponential(l.mean);
        },
        law);
    if (!(t > 0.0) || !std::isfinite(t)) throw InputError("random time must be positive");
    return t;
  }
};

/// eta(tau) = e^{lambda tau + xi_tau} with tau drawn independently of xi.
inline TerminalDraws time_change(const MarketSpec& market, const RandomTime& tau, std::size_t n_paths,
                                 std::uint64_t seed, unsigned threads = 1) {
  if (n_paths == 0) throw InputError("n_paths must be positive");
  market.validate();
  IncrementSampler sampler(market.triplet);
  TerminalDraws out;
  out.n = n_paths;
  out.dim = market.dim();
  out.eta.resize(n_paths * out.dim);
  out.horizons.resize(n_paths);
  parallel_for(n_paths, threads, [&](std::size_t b, std::size_t e) {
    std::vector<double> xi(out.dim), scratch(out.dim);
    for (std::size_t p = b; p < e; ++p) {
      Stream clock(seed, p, 0, Purpose::random_time);
      const double t = tau.sample(clock);
      out.horizons[p] = t;
      std::fill(xi.begin(), xi.end(), 0.0);
      sampler.add_increment(xi, t, seed, p, 1, scratch);
      for (std::size_t k = 0; k < out.dim; ++k)
        out.eta[p * out.dim + k] = std::exp(market.carrying_costs(static_cast<Eigen::Index>(k)) * t + xi[k]);
    }
  });
  return out;
}

struct SymmetryZ {
  double mean_original = 0.0;
  double mean_swapped = 0.0;
  double difference = 0.0;
  double std_error = 0.0;
  double z = 0.0;
  double var_original = 0.0;
  double var_swapped = 0.0;
  double var_difference = 0.0;
};

struct SymmetryMcReport {
  std::vector<SymmetryZ> tests;
  std::size_t n_paths = 0;
  std::uint64_t seed = 0;

  double max_abs_z() const {
    double m = 0.0;
    for (const auto& t : tests) m = std::max(m, std::abs(t.z));
    return m;
  }
};

struct SymmetryMcOptions {
  std::optional<double> alpha;  // quasi power on the swapped side: (eta_i/eta_j)^alpha
};

/// Paired comparison of E f_u(eta) against E f_{pi u}(eta) [(eta_i/eta_j)^alpha]
/// on common draws.
inline SymmetryMcReport symmetry_z_scores(const TerminalDraws& draws, std::size_t i, std::size_t j,
                                          const std::vector<PayoffSpec>& payoffs,
                                          const SymmetryMcOptions& opts = {}) {
  if (i >= draws.dim || j >= draws.dim || i == j) throw InputError("invalid swap indices");
  SymmetryMcReport rep;
  rep.n_paths = draws.n;
  const double n = static_cast<double>(draws.n);
  for (const auto& f : payoffs) {
    f.validate(draws.dim);
    if (static_cast<std::size_t>(f.weights.size()) <= std::max(i, j))
      throw InputError("payoff weights do not cover swapped indices");
    const PayoffSpec g = f.swapped(i, j);
    std::vector<double> a(draws.n), b(draws.n), d(draws.n);
    for (std::size_t p = 0; p < draws.n; ++p) {
      const auto x = draws.row(p);
      a[p] = f(x);
      b[p] = g(x);
      if (opts.alpha) b[p] *= std::pow(x[i] / x[j], *opts.alpha);
      d[p] = a[p] - b[p];
    }
    const McEstimate ea = summarize(a), eb = summarize(b), ed = summarize(d);
    SymmetryZ z;
    z.mean_original = ea.mean;
    z.mean_swapped = eb.mean;
    z.difference = ed.mean;
    z.std_error = ed.std_error;
    z.z = ed.std_error > 0.0 ? ed.mean / ed.std_error : (ed.mean == 0.0 ? 0.0 : std::copysign(INFINITY, ed.mean));
    z.var_original = ea.std_error * ea.std_error * n;
    z.var_swapped = eb.std_error * eb.std_error * n;
    z.var_difference = ed.std_error * ed.std_error * n;
    rep.tests.push_back(z);
  }
  return rep;
}

inline SymmetryMcReport mc_symmetry_test(const MarketSpec& market, std::size_t i, std::size_t j,
                                         const std::vector<PayoffSpec>& payoffs, std::size_t n_paths,
                                         std::uint64_t seed, const SymmetryMcOptions& opts = {},
                                         unsigned threads = 1) {
  auto rep = symmetry_z_scores(draw_terminal(market, n_paths, seed, threads), i, j, payoffs, opts);
  rep.seed = seed;
  return rep;
}

/// Density of the numeraire measure Q^j on each path: eta_{T,j} / sample mean.
inline std::vector<double> numeraire_reweight(const PathSet& paths, std::size_t j) {
  if (j >= paths.n_assets) throw InputError("numeraire index out of range");
  std::vector<double> w(paths.n_paths);
  double sum = 0.0;
  for (std::size_t p = 0; p < paths.n_paths; ++p) {
    w[p] = paths.value(p, paths.n_steps, j) / paths.value(p, 0, j);
    sum += w[p];
  }
  const double mean = sum / static_cast<double>(paths.n_paths);
  for (double& x : w) x /= mean;
  return w;
}

}  // namespace swapsym
