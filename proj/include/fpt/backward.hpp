#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

#include "fpt/forward.hpp"
#include "fpt/lif.hpp"
#include "fpt/matrix.hpp"
#include "fpt/surrogate.hpp"

namespace fpt {

struct backward_result {
  std::vector<double> grad_c;
  std::optional<matrix> grad_a;             // populated only for learnable neurons
  std::optional<std::vector<double>> grad_b;
};

namespace detail {

// Reverse sweep over the stored iterates of u = -v_th (A - I) S(u - b) + A c,
// differentiating the relaxed loss sum_t upstream[t] * S_{ab(K)}(u_K[t] - b[t])
// with every firing smoothed at the backward sharpness. Sharpness values are
// re-derived from the membrane iterates, so the sweep is the exact gradient of
// that relaxed map no matter which forward sharpness produced the trace.
// Passing c switches on accumulation of the parameter gradients dL/dA, dL/dB.
inline backward_result reverse_sweep(const matrix& a, const std::vector<double>& threshold,
                                     double v_th, const forward_trace& trace,
                                     const std::vector<double>& upstream,
                                     const surrogate_config& sc,
                                     const std::vector<double>* c) {
  const int k_used = trace.iterations_used;
  if (k_used < 1 || static_cast<int>(trace.u_iterates.size()) != k_used) {
    throw std::invalid_argument("trace does not carry every intermediate iterate");
  }
  const std::size_t t_len = trace.u_iterates.front().size();
  if (upstream.size() != t_len) {
    throw std::invalid_argument("upstream length does not match the trace");
  }

  backward_result out;
  out.grad_c.assign(t_len, 0.0);
  if (c) {
    out.grad_a = matrix(static_cast<int>(t_len), static_cast<int>(t_len));
    out.grad_b = std::vector<double>(t_len, 0.0);
  }

  // g = dL/du at the current iterate; seeded at the output by the smoothed
  // firing derivative.
  std::vector<double> g(t_len);
  {
    const std::vector<double>& u_last = trace.u_iterates[static_cast<std::size_t>(k_used - 1)];
    const double ab = sc.alpha_b(k_used);
    for (std::size_t t = 0; t < t_len; ++t) {
      g[t] = upstream[t] * surrogate_gradient(u_last[t] - threshold[t], ab);
    }
  }

  for (int k = k_used; k >= 1; --k) {
    const std::vector<double> w = matvec_transposed(a, g);
    for (std::size_t t = 0; t < t_len; ++t) out.grad_c[t] += w[t];

    if (c) {
      // u_(k) = A (c - v_th * soft_{k-1}) + v_th * soft_{k-1}; the first
      // iterate has no reset term, so its A-gradient factor is c itself.
      matrix& ga = *out.grad_a;
      if (k == 1) {
        for (std::size_t i = 0; i < t_len; ++i) {
          for (std::size_t j = 0; j < t_len; ++j) {
            ga(static_cast<int>(i), static_cast<int>(j)) += g[i] * (*c)[j];
          }
        }
      } else {
        const std::vector<double>& u_prev = trace.u_iterates[static_cast<std::size_t>(k - 2)];
        const double ab_prev = sc.alpha_b(k - 1);
        for (std::size_t i = 0; i < t_len; ++i) {
          for (std::size_t j = 0; j < t_len; ++j) {
            const double soft = sigmoid_surrogate(u_prev[j] - threshold[j], ab_prev);
            ga(static_cast<int>(i), static_cast<int>(j)) += g[i] * ((*c)[j] - v_th * soft);
          }
        }
      }
      for (std::size_t t = 0; t < t_len; ++t) (*out.grad_b)[t] -= g[t];
    }

    if (k == 1) break;
    const std::vector<double>& u_prev = trace.u_iterates[static_cast<std::size_t>(k - 2)];
    const double ab_prev = sc.alpha_b(k - 1);
    for (std::size_t t = 0; t < t_len; ++t) {
      g[t] = -v_th * (w[t] - g[t]) * surrogate_gradient(u_prev[t] - threshold[t], ab_prev);
    }
  }
  return out;
}

}  // namespace detail

// Gradient of the relaxed fixed-point forward with respect to the input
// current. The trace must keep all iterates; when early stop shortened the
// run, the sweep covers exactly the iterations that happened.
inline backward_result fpt_backward(const forward_trace& trace,
                                    const std::vector<double>& upstream,
                                    const lif_params& p, const fixed_point_config& cfg) {
  if (trace.u_iterates.empty()) {
    throw std::invalid_argument("trace does not carry every intermediate iterate");
  }
  const std::size_t t_len = trace.u_iterates.front().size();
  const matrix lam = build_decay_matrix(static_cast<int>(t_len), p.lambda);
  const std::vector<double> threshold(t_len, p.v_th);
  return detail::reverse_sweep(lam, threshold, p.v_th, trace, upstream, cfg.surrogate, nullptr);
}

// The forward map whose exact derivative fpt_backward computes: the same
// iteration with every firing taken at the backward sharpness. Useful as the
// target function for finite-difference checks.
inline fixed_point_config backward_smoothed_config(const fixed_point_config& cfg) {
  fixed_point_config out = cfg;
  out.surrogate.alpha_forward.clear();
  for (int k = 1; k <= cfg.k_max; ++k) {
    out.surrogate.alpha_forward.push_back(cfg.surrogate.alpha_b(k));
  }
  out.surrogate.alpha_backward_ratio = 1.0;
  out.mode = firing_mode::deterministic;
  out.early_stop_epsilon.reset();
  return out;
}

inline double smoothed_fpt_loss(const std::vector<double>& c, const lif_params& p,
                                const fixed_point_config& cfg,
                                const std::vector<double>& upstream) {
  const forward_trace tr = fpt_forward(c, p, backward_smoothed_config(cfg));
  const std::vector<double>& soft = tr.s_iterates.back();
  double loss = 0.0;
  for (std::size_t t = 0; t < soft.size(); ++t) loss += upstream[t] * soft[t];
  return loss;
}

// Central differences of smoothed_fpt_loss, one coordinate at a time.
inline std::vector<double> finite_difference_gradient(const std::vector<double>& c,
                                                      const lif_params& p,
                                                      const fixed_point_config& cfg,
                                                      const std::vector<double>& upstream,
                                                      double h) {
  if (!(h > 0.0)) throw std::invalid_argument("finite-difference step must be positive");
  std::vector<double> probe = c;
  std::vector<double> grad(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    probe[i] = c[i] + h;
    const double plus = smoothed_fpt_loss(probe, p, cfg, upstream);
    probe[i] = c[i] - h;
    const double minus = smoothed_fpt_loss(probe, p, cfg, upstream);
    probe[i] = c[i];
    grad[i] = (plus - minus) / (2.0 * h);
  }
  return grad;
}

// max |a - b| scaled by the larger magnitude of the two vectors; the floor
// keeps a pair of near-zero gradients from reading as a huge relative error.
inline double max_relative_error(const std::vector<double>& a, const std::vector<double>& b) {
  double diff = 0.0, scale = 1e-12;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff = std::max(diff, std::abs(a[i] - b[i]));
    scale = std::max({scale, std::abs(a[i]), std::abs(b[i])});
  }
  return diff / scale;
}

}  // namespace fpt
