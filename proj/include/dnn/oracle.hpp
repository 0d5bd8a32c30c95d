#ifndef DNN_ORACLE_HPP
#define DNN_ORACLE_HPP

// Exact-enumeration checks for small fields: the grid posterior of beta at a
// fixed sigma, a grid-restricted exchange sampler to compare against it, and
// the importance-sampling identity for ratios of normalizing constants.

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "dnn/data_io.hpp"
#include "dnn/inference.hpp"
#include "dnn/mrf.hpp"
#include "dnn/rng.hpp"
#include "dnn/weights.hpp"

namespace dnn {

/// `points` evenly spaced values from lo to hi inclusive.
inline std::vector<double> linear_grid(double lo, double hi, int points) {
  if (points < 2) throw std::invalid_argument("grid needs at least 2 points");
  std::vector<double> g(static_cast<std::size_t>(points));
  for (int k = 0; k < points; ++k) g[static_cast<std::size_t>(k)] = lo + (hi - lo) * k / (points - 1);
  return g;
}

inline std::vector<double> normalize_log_weights(std::span<const double> logw) {
  double top = -std::numeric_limits<double>::infinity();
  for (double v : logw) top = std::max(top, v);
  std::vector<double> p(logw.size());
  double sum = 0.0;
  for (std::size_t k = 0; k < logw.size(); ++k) {
    p[k] = std::exp(logw[k] - top);
    sum += p[k];
  }
  for (double& v : p) v /= sum;
  return p;
}

/// Exact posterior of beta over `grid` under a flat prior on the grid:
/// p_k proportional to q(y | beta_k) / z(beta_k).
inline std::vector<double> exact_grid_posterior(const LabelConfig& y, const WeightMatrix& w,
                                                std::span<const double> grid) {
  const double agree = agreement_sum(y.labels, w);
  std::vector<double> logp(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    logp[k] = grid[k] * agree - enumerate_log_z(w, grid[k], y.num_classes);
  }
  return normalize_log_weights(logp);
}

/// Pseudo-posterior over `grid` with a flat prior, for comparison.
inline std::vector<double> pseudo_grid_posterior(const LabelConfig& y, const WeightMatrix& w,
                                                 std::span<const double> grid) {
  std::vector<double> logp(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) logp[k] = log_pseudolikelihood(y, w, grid[k]);
  return normalize_log_weights(logp);
}

struct GridChainResult {
  std::vector<double> frequencies;  // visit frequency of each grid point
  double acceptance_rate = 0.0;
};

/// Exchange sampler for beta restricted to `grid` at fixed weights, with a
/// flat prior and a uniform (hence symmetric) proposal over the grid. Each
/// auxiliary draw is `aux_sweeps` Gibbs sweeps started from y.
inline GridChainResult run_exchange_grid(const LabelConfig& y, const WeightMatrix& w,
                                         std::span<const double> grid, long steps, int aux_sweeps,
                                         std::uint64_t seed) {
  if (steps < 1) throw std::invalid_argument("steps must be positive");
  Rng chain_rng = Rng::stream(seed, "chain");
  Rng aux_rng = Rng::stream(seed, "aux");
  const double agree_y = agreement_sum(y.labels, w);
  const auto last = static_cast<int>(grid.size()) - 1;

  std::vector<long> visits(grid.size(), 0);
  long accepted = 0;
  int cur = 0;
  for (long s = 0; s < steps; ++s) {
    const int prop = chain_rng.uniform_int(0, last);
    if (prop == cur) {
      // The exchange ratio is exactly one whatever y' is.
      ++accepted;
    } else {
      const double b_cur = grid[static_cast<std::size_t>(cur)];
      const double b_prop = grid[static_cast<std::size_t>(prop)];
      const LabelConfig aux = sample_field(w, b_prop, aux_sweeps, y, aux_rng);
      const double agree_aux = agreement_sum(aux.labels, w);
      const double log_ratio =
          exchange_log_ratio(b_cur, b_prop, agree_y, agree_y, agree_aux, agree_aux, 0.0, 0.0);
      if (accept(log_ratio, chain_rng)) {
        cur = prop;
        ++accepted;
      }
    }
    ++visits[static_cast<std::size_t>(cur)];
  }
  GridChainResult out;
  out.frequencies.resize(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    out.frequencies[k] = static_cast<double>(visits[k]) / static_cast<double>(steps);
  }
  out.acceptance_rate = static_cast<double>(accepted) / static_cast<double>(steps);
  return out;
}

inline double total_variation(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw std::invalid_argument("distributions differ in support size");
  double s = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) s += std::abs(p[k] - q[k]);
  return 0.5 * s;
}

struct ImportanceEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  double exact = 0.0;  // z(beta) / z(beta_prime) by enumeration
};

/// Monte Carlo estimate of z(beta)/z(beta_prime) as the mean of
/// q(y'|beta)/q(y'|beta_prime) over y' ~ pi(.|beta_prime). Each draw is an
/// independent Gibbs run of `sweeps` sweeps from a uniformly random labelling.
inline ImportanceEstimate importance_ratio_check(const WeightMatrix& w, int num_classes,
                                                 double beta, double beta_prime, long draws,
                                                 int sweeps, std::uint64_t seed) {
  if (draws < 2) throw std::invalid_argument("need at least 2 draws");
  Rng rng = Rng::stream(seed, "aux");
  const std::size_t n = w.size();
  double sum = 0.0;
  double sum_sq = 0.0;
  for (long d = 0; d < draws; ++d) {
    LabelConfig init{std::vector<int>(n), num_classes};
    for (int& v : init.labels) v = rng.uniform_int(0, num_classes - 1);
    const LabelConfig draw = sample_field(w, beta_prime, sweeps, std::move(init), rng);
    const double r = std::exp((beta - beta_prime) * agreement_sum(draw.labels, w));
    sum += r;
    sum_sq += r * r;
  }
  const double nd = static_cast<double>(draws);
  const double mean = sum / nd;
  const double var = (sum_sq - nd * mean * mean) / (nd - 1.0);
  ImportanceEstimate out;
  out.mean = mean;
  out.std_error = std::sqrt(std::max(var, 0.0) / nd);
  out.exact =
      std::exp(enumerate_log_z(w, beta, num_classes) - enumerate_log_z(w, beta_prime, num_classes));
  return out;
}

/// Small synthetic problem: n points in the plane, class g centred at
/// (g, g) with unit-scale noise, labels assigned round-robin.
inline Dataset make_synthetic(std::size_t n, int num_classes, std::uint64_t seed) {
  if (n < 2 || num_classes < 2) throw std::invalid_argument("synthetic data needs n >= 2, G >= 2");
  Rng rng = Rng::stream(seed, "synthetic");
  Dataset d;
  d.num_classes = num_classes;
  d.features = Matrix<double>(n, 2);
  d.feature_names = {"x1", "x2"};
  for (int g = 0; g < num_classes; ++g) d.class_names.push_back("c" + std::to_string(g + 1));
  for (std::size_t i = 0; i < n; ++i) {
    const int g = static_cast<int>(i % static_cast<std::size_t>(num_classes));
    d.labels.push_back(g);
    d.features(i, 0) = g + rng.normal(0.0, 0.6);
    d.features(i, 1) = g + rng.normal(0.0, 0.6);
  }
  return d;
}

struct OracleConfig {
  std::size_t n = 6;
  int num_classes = 2;
  WeightModel model{};
  std::optional<double> sigma;  // default: median pairwise distance
  double grid_lo = 0.0;
  double grid_hi = 4.0;
  int grid_points = 41;
  long steps = 200'000;
  int aux_sweeps = 500;
  std::uint64_t seed = 1;
  double tolerance = 0.02;
  // Importance-sampling identity check
  double is_beta = 1.5;
  double is_beta_prime = 1.0;
  long is_draws = 100'000;
  int is_sweeps = 50;
};

struct OracleReport {
  double sigma = 0.0;
  std::vector<double> grid;
  std::vector<double> exact;
  std::vector<double> exchange;
  std::vector<double> pseudo;
  double tv_exchange = 0.0;
  double tv_pseudo = 0.0;
  double acceptance_rate = 0.0;
  ImportanceEstimate importance;
  bool exchange_passed = false;
  bool importance_passed = false;

  bool passed() const noexcept { return exchange_passed && importance_passed; }
};

/// Compares the exchange sampler and the importance-sampling identity against
/// exact enumeration on a synthetic field. Throws std::length_error when the
/// instance exceeds the enumeration cap.
inline OracleReport verify_oracle(const OracleConfig& cfg) {
  if (config_count(cfg.n, cfg.num_classes, kEnumerationCap) > kEnumerationCap) {
    throw std::length_error("instance too large to enumerate: " +
                            std::to_string(cfg.num_classes) + "^" + std::to_string(cfg.n) +
                            " labellings exceed the cap of " + std::to_string(kEnumerationCap));
  }
  const Dataset data = make_synthetic(cfg.n, cfg.num_classes, cfg.seed);
  const DistanceMatrix dist = pairwise_distances(data);
  OracleReport r;
  r.sigma = cfg.sigma.value_or(median_off_diagonal(dist));
  const WeightMatrix w = compute_weights(cfg.model, dist, r.sigma);
  const LabelConfig y{data.labels, data.num_classes};

  r.grid = linear_grid(cfg.grid_lo, cfg.grid_hi, cfg.grid_points);
  r.exact = exact_grid_posterior(y, w, r.grid);
  r.pseudo = pseudo_grid_posterior(y, w, r.grid);
  const GridChainResult chain = run_exchange_grid(y, w, r.grid, cfg.steps, cfg.aux_sweeps, cfg.seed);
  r.exchange = chain.frequencies;
  r.acceptance_rate = chain.acceptance_rate;
  r.tv_exchange = total_variation(r.exchange, r.exact);
  r.tv_pseudo = total_variation(r.pseudo, r.exact);
  r.exchange_passed = r.tv_exchange < cfg.tolerance;

  r.importance = importance_ratio_check(w, cfg.num_classes, cfg.is_beta, cfg.is_beta_prime,
                                        cfg.is_draws, cfg.is_sweeps, cfg.seed);
  r.importance_passed =
      std::abs(r.importance.mean - r.importance.exact) < 3.0 * r.importance.std_error;
  return r;
}

}  // namespace dnn

#endif  // DNN_ORACLE_HPP
