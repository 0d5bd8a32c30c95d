#ifndef DNN_INFERENCE_HPP
#define DNN_INFERENCE_HPP

#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "dnn/data_io.hpp"
#include "dnn/mrf.hpp"
#include "dnn/rng.hpp"
#include "dnn/weights.hpp"

namespace dnn {

/// Priors on the field parameters: beta ~ N(0, beta_sd^2) (or uniform on
/// `beta_box` when set) and sigma ~ U(0, sigma_upper).
struct Priors {
  double beta_sd = 50.0;
  double sigma_upper = 100.0;
  std::optional<std::array<double, 2>> beta_box;

  /// log pi(beta) up to an additive constant; -inf outside a box prior.
  double log_beta_density(double beta) const noexcept {
    if (beta_box) {
      return beta >= (*beta_box)[0] && beta <= (*beta_box)[1]
                 ? 0.0
                 : -std::numeric_limits<double>::infinity();
    }
    return -0.5 * (beta * beta) / (beta_sd * beta_sd);
  }

  bool sigma_in_support(double sigma) const noexcept { return sigma > 0.0 && sigma < sigma_upper; }

  void validate() const {
    if (!(beta_sd > 0.0)) throw std::invalid_argument("beta prior sd must be positive");
    if (!(sigma_upper > 0.0)) throw std::invalid_argument("sigma prior upper bound must be positive");
    if (beta_box && !((*beta_box)[0] < (*beta_box)[1])) {
      throw std::invalid_argument("beta prior box must have lower < upper");
    }
  }
};

/// Standard deviations of the Gaussian random-walk proposal.
struct ProposalConfig {
  double beta_step = 0.5;
  double sigma_step = 0.1;

  void validate() const {
    if (!(beta_step > 0.0) || !(sigma_step > 0.0)) {
      throw std::invalid_argument("proposal steps must be positive");
    }
  }
};

struct ChainConfig {
  int n_iterations = 20'000;
  int n_burnin = 10'000;
  int aux_sweeps = 1'000;
  std::uint64_t seed = 1;
  std::optional<MrfParams> init;       // default: beta 0, sigma = median distance
  std::optional<double> max_seconds;   // stop early and mark the trace truncated

  void validate() const {
    if (!(n_iterations > n_burnin && n_burnin >= 0)) {
      throw std::invalid_argument("need n_iterations > n_burnin >= 0");
    }
    if (aux_sweeps < 1) throw std::invalid_argument("aux_sweeps must be at least 1");
  }
};

struct TraceRow {
  int iter = 0;
  double beta = 0.0;
  double sigma = 0.0;
  bool accepted = false;
  double log_q = 0.0;  // log q(y | beta, sigma) at the state after this iteration
  bool burnin = false;
};

struct PosteriorTrace {
  std::vector<MrfParams> samples;  // post burn-in
  double acceptance_rate = 0.0;    // over post burn-in iterations
  std::vector<TraceRow> full_trace;
  bool truncated = false;
};

/// The training field the posterior conditions on. Holds references; the
/// labels and distances must outlive it.
struct TrainingField {
  const LabelConfig& y;
  const DistanceMatrix& distances;
  WeightModel model;
};

/// Chain state with the weights and agreement sum for the current sigma cached.
struct ChainState {
  MrfParams params;
  WeightMatrix weights;
  double agreement = 0.0;  // agreement_sum(y, weights)
  double log_pl = 0.0;     // log pseudolikelihood; maintained by the pseudolikelihood chain only

  double log_q() const noexcept { return params.beta * agreement; }
};

struct StepResult {
  bool accepted = false;
  double log_ratio = 0.0;
};

/// Default starting point: beta 0 and sigma at the median pairwise distance
/// (pulled inside the prior support if needed).
inline MrfParams default_init(const DistanceMatrix& distances, const Priors& priors) {
  double sigma = median_off_diagonal(distances);
  if (!priors.sigma_in_support(sigma)) sigma = 0.5 * priors.sigma_upper;
  return {0.0, sigma};
}

/// Default proposal: beta step 0.5, sigma step a tenth of the median distance.
inline ProposalConfig default_proposal(const DistanceMatrix& distances) {
  const double med = median_off_diagonal(distances);
  return {0.5, med > 0.0 ? 0.1 * med : 0.1};
}

inline ChainState make_state(const TrainingField& field, MrfParams params) {
  ChainState s{params, compute_weights(field.model, field.distances, params.sigma), 0.0, 0.0};
  s.agreement = agreement_sum(field.y.labels, s.weights);
  return s;
}

/// Log acceptance ratio of the exchange move from `current` to `proposed`,
/// with y' drawn at the proposed parameters:
///   log q(y|prop) - log q(y|cur) + log q(y'|cur) - log q(y'|prop)
///   + log pi(beta_prop) - log pi(beta_cur).
/// `agree_y_*` / `agree_aux_*` are agreement sums of y and y' under the
/// current and proposed weights. Terms are grouped as differences so that
/// swapping current and proposed negates the result exactly.
inline double exchange_log_ratio(double beta_cur, double beta_prop, double agree_y_cur,
                                 double agree_y_prop, double agree_aux_cur, double agree_aux_prop,
                                 double log_prior_cur, double log_prior_prop) noexcept {
  const double observed = beta_prop * agree_y_prop - beta_cur * agree_y_cur;
  const double auxiliary = beta_cur * agree_aux_cur - beta_prop * agree_aux_prop;
  const double prior = log_prior_prop - log_prior_cur;
  return (observed + auxiliary) + prior;
}

inline bool accept(double log_ratio, Rng& rng) {
  if (log_ratio >= 0.0) return true;
  return std::log(rng.uniform()) < log_ratio;
}

inline bool proposal_valid(const TrainingField& field, const Priors& priors, MrfParams p) {
  return std::isfinite(p.beta) && priors.sigma_in_support(p.sigma) &&
         sigma_in_domain(field.model, p.sigma) &&
         std::isfinite(priors.log_beta_density(p.beta));
}

/// Exchange move to a given proposal: draws y' at `proposed` by a Gibbs run
/// started from the observed labels, then accepts or rejects. On acceptance
/// `state` moves to `proposed`.
inline StepResult exchange_move(ChainState& state, MrfParams proposed, const TrainingField& field,
                                const Priors& priors, int aux_sweeps, Rng& chain_rng,
                                Rng& aux_rng) {
  if (!proposal_valid(field, priors, proposed)) return {false, -std::numeric_limits<double>::infinity()};

  const bool same_sigma = proposed.sigma == state.params.sigma;
  WeightMatrix prop_weights =
      same_sigma ? state.weights : compute_weights(field.model, field.distances, proposed.sigma);
  const LabelConfig aux = sample_field(prop_weights, proposed.beta, aux_sweeps, field.y, aux_rng);

  const double agree_y_prop = same_sigma ? state.agreement : agreement_sum(field.y.labels, prop_weights);
  const double agree_aux_cur = agreement_sum(aux.labels, state.weights);
  const double agree_aux_prop =
      same_sigma ? agree_aux_cur : agreement_sum(aux.labels, prop_weights);

  const double log_ratio = exchange_log_ratio(
      state.params.beta, proposed.beta, state.agreement, agree_y_prop, agree_aux_cur,
      agree_aux_prop, priors.log_beta_density(state.params.beta),
      priors.log_beta_density(proposed.beta));

  if (!accept(log_ratio, chain_rng)) return {false, log_ratio};
  state.params = proposed;
  state.weights = std::move(prop_weights);
  state.agreement = agree_y_prop;
  return {true, log_ratio};
}

inline MrfParams propose(MrfParams current, const ProposalConfig& proposal, Rng& rng) {
  const double beta = rng.normal(current.beta, proposal.beta_step);
  const double sigma = rng.normal(current.sigma, proposal.sigma_step);
  return {beta, sigma};
}

/// One iteration of the exchange algorithm: symmetric random-walk proposal,
/// auxiliary draw, exchange move. Proposals outside the prior support are
/// rejected without an auxiliary draw.
inline StepResult exchange_step(ChainState& state, const TrainingField& field,
                                const Priors& priors, const ProposalConfig& proposal,
                                int aux_sweeps, Rng& chain_rng, Rng& aux_rng) {
  const MrfParams proposed = propose(state.params, proposal, chain_rng);
  return exchange_move(state, proposed, field, priors, aux_sweeps, chain_rng, aux_rng);
}

/// Besag log pseudolikelihood: sum over sites of log P(y_i | y_-i).
inline double log_pseudolikelihood(const LabelConfig& y, const WeightMatrix& w, double beta) {
  if (y.size() != w.size()) throw std::invalid_argument("label/weight size mismatch");
  std::vector<double> logits(static_cast<std::size_t>(y.num_classes));
  double total = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    detail::site_logits(i, y.labels, w, beta, logits);
    const double top = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double v : logits) sum += std::exp(v - top);
    total += logits[static_cast<std::size_t>(y.labels[i])] - top - std::log(sum);
  }
  return total;
}

/// Metropolis-Hastings step targeting the pseudo-posterior. `state.log_pl`
/// must hold the pseudolikelihood at the current parameters.
inline StepResult pseudo_mh_step(ChainState& state, const TrainingField& field,
                                 const Priors& priors, const ProposalConfig& proposal,
                                 Rng& chain_rng) {
  const MrfParams proposed = propose(state.params, proposal, chain_rng);
  if (!proposal_valid(field, priors, proposed)) return {false, -std::numeric_limits<double>::infinity()};

  WeightMatrix prop_weights = proposed.sigma == state.params.sigma
                                  ? state.weights
                                  : compute_weights(field.model, field.distances, proposed.sigma);
  const double prop_pl = log_pseudolikelihood(field.y, prop_weights, proposed.beta);
  const double log_ratio = (prop_pl - state.log_pl) + (priors.log_beta_density(proposed.beta) -
                                                       priors.log_beta_density(state.params.beta));
  if (!accept(log_ratio, chain_rng)) return {false, log_ratio};
  state.params = proposed;
  state.agreement = agreement_sum(field.y.labels, prop_weights);
  state.weights = std::move(prop_weights);
  state.log_pl = prop_pl;
  return {true, log_ratio};
}

namespace detail {

template <typename Step>
PosteriorTrace run_chain(ChainState state, const ChainConfig& chain, Step&& step) {
  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  PosteriorTrace trace;
  trace.full_trace.reserve(static_cast<std::size_t>(chain.n_iterations));
  trace.samples.reserve(static_cast<std::size_t>(chain.n_iterations - chain.n_burnin));
  long accepted_after_burnin = 0;

  for (int it = 0; it < chain.n_iterations; ++it) {
    if (chain.max_seconds &&
        std::chrono::duration<double>(clock::now() - start).count() > *chain.max_seconds) {
      trace.truncated = true;
      break;
    }
    const StepResult r = step(state);
    const bool burnin = it < chain.n_burnin;
    trace.full_trace.push_back(
        {it, state.params.beta, state.params.sigma, r.accepted, state.log_q(), burnin});
    if (!burnin) {
      trace.samples.push_back(state.params);
      if (r.accepted) ++accepted_after_burnin;
    }
  }
  if (!trace.samples.empty()) {
    trace.acceptance_rate =
        static_cast<double>(accepted_after_burnin) / static_cast<double>(trace.samples.size());
  }
  return trace;
}

}  // namespace detail

/// Exchange-algorithm posterior sampler for (beta, sigma). Proposals and
/// accept/reject draws use the "chain" stream of `chain.seed`, auxiliary
/// Gibbs runs use the "aux" stream.
inline PosteriorTrace run_exchange(const TrainingField& field, const Priors& priors,
                                   const ProposalConfig& proposal, const ChainConfig& chain) {
  priors.validate();
  proposal.validate();
  chain.validate();
  Rng chain_rng = Rng::stream(chain.seed, "chain");
  Rng aux_rng = Rng::stream(chain.seed, "aux");
  ChainState state = make_state(field, chain.init.value_or(default_init(field.distances, priors)));
  return detail::run_chain(std::move(state), chain, [&](ChainState& s) {
    return exchange_step(s, field, priors, proposal, chain.aux_sweeps, chain_rng, aux_rng);
  });
}

/// Pseudolikelihood Metropolis-Hastings sampler; same priors, proposal and
/// trace layout as run_exchange, no auxiliary draws.
inline PosteriorTrace run_pseudo_mh(const TrainingField& field, const Priors& priors,
                                    const ProposalConfig& proposal, const ChainConfig& chain) {
  priors.validate();
  proposal.validate();
  chain.validate();
  Rng chain_rng = Rng::stream(chain.seed, "chain");
  ChainState state = make_state(field, chain.init.value_or(default_init(field.distances, priors)));
  state.log_pl = log_pseudolikelihood(field.y, state.weights, state.params.beta);
  return detail::run_chain(std::move(state), chain, [&](ChainState& s) {
    return pseudo_mh_step(s, field, priors, proposal, chain_rng);
  });
}

}  // namespace dnn

#endif  // DNN_INFERENCE_HPP
