#pragma once

#include <stdexcept>
#include <vector>

#include "fpt/backward.hpp"
#include "fpt/forward.hpp"
#include "fpt/matrix.hpp"
#include "fpt/rng.hpp"
#include "fpt/surrogate.hpp"

namespace fpt {

enum class triangular_mask { none, lower_triangular };

// Neuron whose decay mixing and firing thresholds are trainable. The reset
// term keeps the fixed scalar v_th as its coefficient; b only shifts the
// firing nonlinearity. Under the lower-triangular mask the strictly upper
// entries of a are pinned to exact zero, which is what keeps timestep t blind
// to inputs arriving after t.
struct learnable_neuron_params {
  matrix a;
  std::vector<double> b;
  triangular_mask mask = triangular_mask::lower_triangular;
  double v_th = 1.0;
};

inline matrix apply_mask(matrix a, triangular_mask mask) {
  if (mask == triangular_mask::lower_triangular) {
    for (int i = 0; i < a.rows; ++i) {
      for (int j = i + 1; j < a.cols; ++j) a(i, j) = 0.0;
    }
  }
  return a;
}

namespace detail {

inline void validate_learnable(const learnable_neuron_params& p, std::size_t t_len) {
  if (p.a.rows != p.a.cols || p.a.rows != static_cast<int>(t_len) || p.b.size() != t_len) {
    throw std::invalid_argument("parameter shapes do not match the horizon");
  }
  if (p.mask == triangular_mask::lower_triangular) {
    for (int i = 0; i < p.a.rows; ++i) {
      for (int j = i + 1; j < p.a.cols; ++j) {
        if (p.a(i, j) != 0.0) {
          throw std::invalid_argument("masked entry of the decay matrix is nonzero");
        }
      }
    }
  }
}

}  // namespace detail

// Fixed-point forward over u = -v_th (A - I) S_alpha(u - b) + A c; firing is
// judged against the per-step thresholds b. With A set to the decay matrix
// and b to v_th everywhere this takes exactly the same arithmetic path as
// fpt_forward, bit for bit.
inline forward_trace fpt_generalized_forward(const std::vector<double>& c,
                                             const learnable_neuron_params& p,
                                             const fixed_point_config& cfg) {
  detail::validate_forward_inputs(c, cfg);
  detail::validate_learnable(p, c.size());
  const std::vector<double> ac = matvec(p.a, c);
  return detail::fixed_point_solve(p.a, ac, p.b, p.v_th, cfg, /*allow_early_stop=*/false);
}

// Companion reverse pass; adds dL/dA and dL/dB to the result, with masked
// entries of dL/dA forced to exact zero so frozen parameters never move.
inline backward_result fpt_generalized_backward(const forward_trace& trace,
                                                const std::vector<double>& c,
                                                const std::vector<double>& upstream,
                                                const learnable_neuron_params& p,
                                                const fixed_point_config& cfg) {
  detail::validate_learnable(p, c.size());
  backward_result out =
      detail::reverse_sweep(p.a, p.b, p.v_th, trace, upstream, cfg.surrogate, &c);
  if (p.mask == triangular_mask::lower_triangular && out.grad_a) {
    *out.grad_a = apply_mask(std::move(*out.grad_a), p.mask);
  }
  return out;
}

// One-shot parallel neuron without any reset pathway: s = H(A c - b).
inline std::vector<double> psn_forward(const std::vector<double>& c, const matrix& a,
                                       const std::vector<double>& b) {
  const std::vector<double> ac = matvec(a, c);
  std::vector<double> s(c.size());
  for (std::size_t t = 0; t < s.size(); ++t) s[t] = heaviside(ac[t] - b[t]);
  return s;
}

// Two-step parallel unit: the first soft pass estimates the reset correction,
// the hard firing happens on the corrected potential,
// s = H(A c - v_th (A - I) S_alpha(A c - v_th) - v_th).
inline std::vector<double> psu_forward(const std::vector<double>& c, const matrix& a,
                                       double v_th, double alpha) {
  const std::vector<double> ac = matvec(a, c);
  std::vector<double> soft(c.size()), scratch(c.size()), u(c.size());
  for (std::size_t t = 0; t < c.size(); ++t) {
    soft[t] = sigmoid_surrogate(ac[t] - v_th, alpha);
  }
  refine_iterate(a, ac, soft, v_th, scratch, u);
  std::vector<double> s(c.size());
  for (std::size_t t = 0; t < s.size(); ++t) s[t] = heaviside(u[t] - v_th);
  return s;
}

// Warm start near the classic exponential-decay prior: masked entries stay
// zero, everything else gets the decay value plus small uniform noise.
inline learnable_neuron_params init_learnable(int t_len, double lambda_prior, double v_th,
                                              triangular_mask mask, std::uint64_t seed,
                                              double noise = 0.01) {
  learnable_neuron_params p;
  p.v_th = v_th;
  p.mask = mask;
  p.b.assign(static_cast<std::size_t>(t_len), v_th);
  p.a = build_decay_matrix(t_len, lambda_prior);
  counter_rng rng(derive_seed(seed, 0x1ea51ab1eull));
  for (int i = 0; i < t_len; ++i) {
    const int j_hi = mask == triangular_mask::lower_triangular ? i : t_len - 1;
    for (int j = 0; j <= j_hi; ++j) {
      p.a(i, j) += rng.next_uniform(-noise, noise);
    }
  }
  return p;
}

}  // namespace fpt
