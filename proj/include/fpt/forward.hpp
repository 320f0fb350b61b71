#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "fpt/lif.hpp"
#include "fpt/matrix.hpp"
#include "fpt/rng.hpp"
#include "fpt/surrogate.hpp"

namespace fpt {

enum class firing_mode { deterministic, bernoulli };

struct fixed_point_config {
  int k_max = 3;                            // iteration budget K
  surrogate_config surrogate;               // sharpness schedules
  firing_mode mode = firing_mode::deterministic;
  std::optional<double> early_stop_epsilon; // 2-norm stop tolerance, if any
  std::uint64_t rng_seed = 0;               // drives Bernoulli firing only
};

// Everything the solver produced, oldest iterate first. u_iterates[k] and
// s_iterates[k] describe iteration k+1; residuals[k] is the 2-norm step from
// iterate k+1 to k+2. s_iterates holds the soft spikes that actually fed the
// next refinement, so replaying one step from them must reproduce the next
// membrane iterate bitwise.
struct forward_trace {
  std::vector<std::vector<double>> u_iterates;
  std::vector<std::vector<double>> s_iterates;
  std::vector<double> u_star;
  std::vector<double> s_star;
  std::vector<double> residuals;
  int iterations_used = 0;
};

inline double iteration_residual(const std::vector<double>& u_curr,
                                 const std::vector<double>& u_prev) {
  double acc = 0.0;
  for (std::size_t i = 0; i < u_curr.size(); ++i) {
    const double d = u_curr[i] - u_prev[i];
    acc += d * d;
  }
  return std::sqrt(acc);
}

inline std::vector<double> make_constant_schedule(double alpha, int k_max) {
  return std::vector<double>(static_cast<std::size_t>(k_max), alpha);
}

// Extends a short sharpness schedule by repeating its last entry until it
// covers the iteration budget, which is what a raised k_max means in practice.
inline fixed_point_config padded_config(fixed_point_config cfg) {
  auto& sched = cfg.surrogate.alpha_forward;
  if (sched.empty()) sched.push_back(12.0);
  while (static_cast<int>(sched.size()) < cfg.k_max) sched.push_back(sched.back());
  return cfg;
}

// One refinement step, shared verbatim by every solver entry point in the
// library: u[i] = -v_th * ((A s)[i] - s[i]) + ac[i]. Callers that promise
// bitwise agreement with each other get it by all funneling through here.
inline void refine_iterate(const matrix& a, const std::vector<double>& ac,
                           const std::vector<double>& soft_s, double v_th,
                           std::vector<double>& scratch, std::vector<double>& u_out) {
  matvec_into(a, soft_s.data(), scratch.data());
  for (std::size_t i = 0; i < ac.size(); ++i) {
    u_out[i] = -v_th * (scratch[i] - soft_s[i]) + ac[i];
  }
}

inline std::vector<double> fire(const std::vector<double>& u_star, double v_th,
                                firing_mode mode, double alpha_f_final,
                                std::uint64_t rng_seed) {
  std::vector<double> s(u_star.size());
  if (mode == firing_mode::deterministic) {
    for (std::size_t t = 0; t < s.size(); ++t) s[t] = heaviside(u_star[t] - v_th);
  } else {
    // One counter-indexed draw per timestep; reproducible independent of
    // scheduling because the stream is a pure function of (seed, t).
    for (std::size_t t = 0; t < s.size(); ++t) {
      const double p = sigmoid_surrogate(u_star[t] - v_th, alpha_f_final);
      s[t] = uniform01(rng_seed, t) < p ? 1.0 : 0.0;
    }
  }
  return s;
}

namespace detail {

inline void validate_forward_inputs(const std::vector<double>& c,
                                    const fixed_point_config& cfg) {
  if (c.empty()) throw std::invalid_argument("input current must cover at least one timestep");
  if (cfg.k_max < 1) throw std::invalid_argument("iteration budget must be at least 1");
  if (static_cast<int>(cfg.surrogate.alpha_forward.size()) < cfg.k_max) {
    throw std::invalid_argument("sharpness schedule shorter than the iteration budget");
  }
  if (cfg.early_stop_epsilon && !(*cfg.early_stop_epsilon > 0.0)) {
    throw std::invalid_argument("early-stop tolerance must be positive");
  }
  for (double x : c) {
    if (!std::isfinite(x)) throw std::invalid_argument("input current contains a non-finite value");
  }
}

// Core fixed-point loop over u = -v_th (A - I) S_alpha(u - b) + ac. The LIF
// entry points call it with A = decay matrix and b = v_th everywhere; the
// learnable layers pass their own A and per-step thresholds. `ac` is computed
// once by the caller and reused across all iterations.
inline forward_trace fixed_point_solve(const matrix& a, const std::vector<double>& ac,
                                       const std::vector<double>& threshold, double v_th,
                                       const fixed_point_config& cfg, bool allow_early_stop) {
  const std::size_t t_len = ac.size();
  forward_trace tr;
  tr.u_iterates.reserve(static_cast<std::size_t>(cfg.k_max));
  tr.s_iterates.reserve(static_cast<std::size_t>(cfg.k_max));

  std::vector<double> u = ac;
  std::vector<double> soft(t_len), scratch(t_len), u_next(t_len);
  tr.u_iterates.push_back(u);
  tr.iterations_used = 1;

  auto soften = [&](const std::vector<double>& ui, int k) {
    const double alpha = cfg.surrogate.alpha_f(k);
    for (std::size_t t = 0; t < t_len; ++t) {
      soft[t] = sigmoid_surrogate(ui[t] - threshold[t], alpha);
    }
    tr.s_iterates.push_back(soft);
  };
  soften(u, 1);

  for (int k = 2; k <= cfg.k_max; ++k) {
    refine_iterate(a, ac, soft, v_th, scratch, u_next);
    tr.residuals.push_back(iteration_residual(u_next, u));
    u.swap(u_next);
    tr.u_iterates.push_back(u);
    tr.iterations_used = k;
    if (allow_early_stop && cfg.early_stop_epsilon &&
        tr.residuals.back() < *cfg.early_stop_epsilon) {
      soften(u, k);
      break;
    }
    soften(u, k);
  }

  tr.u_star = u;
  const double alpha_final = cfg.surrogate.alpha_f(tr.iterations_used);
  tr.s_star.resize(t_len);
  if (cfg.mode == firing_mode::deterministic) {
    for (std::size_t t = 0; t < t_len; ++t) {
      tr.s_star[t] = heaviside(tr.u_star[t] - threshold[t]);
    }
  } else {
    for (std::size_t t = 0; t < t_len; ++t) {
      const double p = sigmoid_surrogate(tr.u_star[t] - threshold[t], alpha_final);
      tr.s_star[t] = uniform01(cfg.rng_seed, t) < p ? 1.0 : 0.0;
    }
  }
  return tr;
}

}  // namespace detail

// Parallel forward pass: refines u = -v_th (Lambda - I) S_alpha(u - v_th) + Lambda c
// for exactly k_max iterations. The decay matvec Lambda c is evaluated once up
// front; each refinement costs one dense matvec over the soft spikes.
inline forward_trace fpt_forward(const std::vector<double>& c, const lif_params& p,
                                 const fixed_point_config& cfg) {
  detail::validate_forward_inputs(c, cfg);
  const matrix lam = build_decay_matrix(static_cast<int>(c.size()), p.lambda);
  const std::vector<double> lc = matvec(lam, fold_initial_state(c, p));
  const std::vector<double> b(c.size(), p.v_th);
  return detail::fixed_point_solve(lam, lc, b, p.v_th, cfg, /*allow_early_stop=*/false);
}

// Same loop, but stops as soon as one refinement moves the iterate by less
// than early_stop_epsilon in 2-norm. The earliest possible exit is after the
// second iterate, where the first residual exists.
inline forward_trace fpt_forward_early_stop(const std::vector<double>& c, const lif_params& p,
                                            const fixed_point_config& cfg) {
  if (!cfg.early_stop_epsilon) {
    throw std::invalid_argument("early-stop entry point requires a stop tolerance");
  }
  detail::validate_forward_inputs(c, cfg);
  const matrix lam = build_decay_matrix(static_cast<int>(c.size()), p.lambda);
  const std::vector<double> lc = matvec(lam, fold_initial_state(c, p));
  const std::vector<double> b(c.size(), p.v_th);
  return detail::fixed_point_solve(lam, lc, b, p.v_th, cfg, /*allow_early_stop=*/true);
}

// Production path: per-iteration sharpness ramps up, never down. A constant
// schedule makes this identical to fpt_forward.
inline forward_trace fpt_forward_adaptive(const std::vector<double>& c, const lif_params& p,
                                          const fixed_point_config& cfg) {
  detail::validate_forward_inputs(c, cfg);
  for (int k = 1; k < cfg.k_max; ++k) {
    if (cfg.surrogate.alpha_f(k + 1) < cfg.surrogate.alpha_f(k)) {
      throw std::invalid_argument("adaptive sharpness schedule must be non-decreasing");
    }
  }
  return fpt_forward(c, p, cfg);
}

}  // namespace fpt
