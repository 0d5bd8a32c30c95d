#ifndef DNN_MRF_HPP
#define DNN_MRF_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dnn/rng.hpp"
#include "dnn/weights.hpp"

namespace dnn {

/// Field parameters: association strength and kernel bandwidth.
struct MrfParams {
  double beta = 0.0;
  double sigma = 1.0;

  friend bool operator==(const MrfParams&, const MrfParams&) = default;
};

/// A labelling of the field's sites with 0-based classes.
struct LabelConfig {
  std::vector<int> labels;
  int num_classes = 2;

  std::size_t size() const noexcept { return labels.size(); }
  friend bool operator==(const LabelConfig&, const LabelConfig&) = default;
};

/// Sum over ordered pairs (i, j), i != j, of w(i, j) * [y_i == y_j].
inline double agreement_sum(std::span<const int> y, const WeightMatrix& w) {
  const std::size_t n = y.size();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = w.w.row(i);
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i && y[j] == y[i]) s += row[j];
    }
    total += s;
  }
  return total;
}

/// log q(y | beta, sigma): beta times the ordered-pair agreement sum.
inline double log_potential(const LabelConfig& y, const WeightMatrix& w, double beta) {
  if (y.size() != w.size()) throw std::invalid_argument("label/weight size mismatch");
  return beta * agreement_sum(y.labels, w);
}

namespace detail {

// Unnormalized log-probabilities of each class at site i, up to a constant:
// beta * sum_j coupling(i, j) [y_j == g].
inline void site_logits(std::size_t i, std::span<const int> y, const WeightMatrix& w, double beta,
                        std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  const auto row = w.coupling.row(i);
  for (std::size_t j = 0; j < y.size(); ++j) out[static_cast<std::size_t>(y[j])] += row[j];
  for (double& v : out) v *= beta;
}

// In-place softmax.
inline void softmax(std::span<double> v) {
  const double top = *std::max_element(v.begin(), v.end());
  double sum = 0.0;
  for (double& x : v) {
    x = std::exp(x - top);
    sum += x;
  }
  for (double& x : v) x /= sum;
}

// Conditional class probabilities at site i into `out` (G entries). Shared by
// full_conditional and the Gibbs sweep.
inline void conditional_into(std::size_t i, std::span<const int> y, const WeightMatrix& w,
                             double beta, std::span<double> out) {
  if (out.size() == 2) {
    // P(y_i = 1) = 1 / (1 + exp(beta * (s0 - s1))), s_g the coupling mass on class g.
    const auto row = w.coupling.row(i);
    double total = 0.0;
    double s1 = 0.0;
    for (std::size_t j = 0; j < y.size(); ++j) {
      total += row[j];
      s1 += y[j] ? row[j] : 0.0;
    }
    const double p1 = 1.0 / (1.0 + std::exp(beta * (total - 2.0 * s1)));
    out[0] = 1.0 - p1;
    out[1] = p1;
    return;
  }
  site_logits(i, y, w, beta, out);
  softmax(out);
}

// Inverse-CDF draw from a probability vector.
inline int sample_categorical(std::span<const double> p, double u) {
  std::size_t g = 0;
  for (; g + 1 < p.size(); ++g) {
    u -= p[g];
    if (u < 0.0) break;
  }
  return static_cast<int>(g);
}

inline void gibbs_sweep_into(std::span<int> y, const WeightMatrix& w, double beta, Rng& rng,
                             std::span<double> scratch) {
  for (std::size_t i = 0; i < y.size(); ++i) {
    conditional_into(i, y, w, beta, scratch);
    y[i] = sample_categorical(scratch, rng.uniform());
  }
}

}  // namespace detail

/// Conditional law of y_i given the other labels under the joint field:
/// P(y_i = g) proportional to exp(beta * sum_{j != i} (w(i,j) + w(j,i)) [y_j == g]).
/// Does not depend on the current y_i.
inline std::vector<double> full_conditional(std::size_t i, const LabelConfig& y,
                                            const WeightMatrix& w, double beta) {
  if (y.size() != w.size()) throw std::invalid_argument("label/weight size mismatch");
  if (i >= y.size()) throw std::out_of_range("site index out of range");
  std::vector<double> p(static_cast<std::size_t>(y.num_classes));
  detail::conditional_into(i, y.labels, w, beta, p);
  return p;
}

/// One systematic-scan Gibbs sweep over sites 0..n-1, in place. Each site is
/// redrawn from full_conditional given the current values of the others.
inline void gibbs_sweep(LabelConfig& y, const WeightMatrix& w, double beta, Rng& rng) {
  if (y.size() != w.size()) throw std::invalid_argument("label/weight size mismatch");
  std::vector<double> scratch(static_cast<std::size_t>(y.num_classes));
  detail::gibbs_sweep_into(y.labels, w, beta, rng, scratch);
}

/// Runs `n_sweeps` Gibbs sweeps from `init` and returns the final labelling.
inline LabelConfig sample_field(const WeightMatrix& w, double beta, int n_sweeps, LabelConfig init,
                                Rng& rng) {
  if (n_sweeps < 1) throw std::invalid_argument("n_sweeps must be at least 1");
  if (init.size() != w.size()) throw std::invalid_argument("label/weight size mismatch");
  std::vector<double> scratch(static_cast<std::size_t>(init.num_classes));
  for (int s = 0; s < n_sweeps; ++s) detail::gibbs_sweep_into(init.labels, w, beta, rng, scratch);
  return init;
}

inline constexpr std::uint64_t kEnumerationCap = 2'000'000;

/// Number of labellings G^n, or cap + 1 once it exceeds `cap`.
inline std::uint64_t config_count(std::size_t n, int num_classes, std::uint64_t cap) {
  std::uint64_t count = 1;
  for (std::size_t i = 0; i < n; ++i) {
    count *= static_cast<std::uint64_t>(num_classes);
    if (count > cap) return cap + 1;
  }
  return count;
}

/// Calls `fn(labels)` for every labelling of n sites with G classes, in
/// lexicographic order (site 0 fastest). Throws when G^n exceeds `cap`.
template <typename Fn>
void for_each_config(std::size_t n, int num_classes, Fn&& fn,
                     std::uint64_t cap = kEnumerationCap) {
  if (config_count(n, num_classes, cap) > cap) {
    throw std::length_error("instance too large to enumerate: " + std::to_string(num_classes) +
                            "^" + std::to_string(n) + " labellings exceed the cap of " +
                            std::to_string(cap));
  }
  std::vector<int> y(n, 0);
  while (true) {
    fn(std::span<const int>(y));
    std::size_t pos = 0;
    while (pos < n && ++y[pos] == num_classes) y[pos++] = 0;
    if (pos == n) return;
  }
}

/// Exact log normalizing constant log z(beta, sigma) by summing q over all
/// G^n labellings with a streaming log-sum-exp.
inline double enumerate_log_z(const WeightMatrix& w, double beta, int num_classes,
                              std::uint64_t cap = kEnumerationCap) {
  double top = -std::numeric_limits<double>::infinity();
  double scaled = 0.0;  // sum of exp(term - top)
  for_each_config(
      w.size(), num_classes,
      [&](std::span<const int> y) {
        const double term = beta * agreement_sum(y, w);
        if (term <= top) {
          scaled += std::exp(term - top);
        } else {
          scaled = scaled * std::exp(top - term) + 1.0;
          top = term;
        }
      },
      cap);
  return top + std::log(scaled);
}

}  // namespace dnn

#endif  // DNN_MRF_HPP
