#pragma once

#include <cstddef>
#include <vector>

#include "fpt/matrix.hpp"
#include "fpt/surrogate.hpp"

namespace fpt {

struct lif_params {
  double lambda = 0.25;  // membrane decay per step, in (0,1)
  double v_th = 1.0;     // firing threshold
  double u0 = 0.0;       // initial membrane potential
};

struct lif_trace {
  std::vector<double> u;  // membrane potential per timestep
  std::vector<double> s;  // emitted spikes per timestep, each 0 or 1
};

// Reference step-by-step simulation with hard reset-by-subtraction:
//   u[t] = lambda * (u[t-1] - v_th * s[t-1]) + c[t],   s[t] = H(u[t] - v_th)
// with u[-1] = u0 and s[-1] = 0. Everything else in the library is checked
// against this loop.
inline lif_trace sequential_lif(const std::vector<double>& c, const lif_params& p) {
  const std::size_t t_len = c.size();
  lif_trace out;
  out.u.resize(t_len);
  out.s.resize(t_len);
  double u_prev = p.u0;
  double s_prev = 0.0;
  for (std::size_t t = 0; t < t_len; ++t) {
    const double u = p.lambda * (u_prev - p.v_th * s_prev) + c[t];
    const double s = heaviside(u - p.v_th);
    out.u[t] = u;
    out.s[t] = s;
    u_prev = u;
    s_prev = s;
  }
  return out;
}

// Same recurrence with the Heaviside replaced by its sigmoid relaxation at
// sharpness alpha. This is the differentiable trajectory that
// sequential_bptt_gradient differentiates, kept public so finite-difference
// checks can evaluate the exact same loss surface.
inline lif_trace sequential_lif_smooth(const std::vector<double>& c, const lif_params& p,
                                       double alpha) {
  const std::size_t t_len = c.size();
  lif_trace out;
  out.u.resize(t_len);
  out.s.resize(t_len);
  double u_prev = p.u0;
  double s_prev = 0.0;
  for (std::size_t t = 0; t < t_len; ++t) {
    const double u = p.lambda * (u_prev - p.v_th * s_prev) + c[t];
    const double s = sigmoid_surrogate(u - p.v_th, alpha);
    out.u[t] = u;
    out.s[t] = s;
    u_prev = u;
    s_prev = s;
  }
  return out;
}

// Lower-triangular decay matrix: entry (i, j) = lambda^(i-j) for j <= i.
// Multiplying by it turns the per-step recurrence into one dense pass.
inline matrix build_decay_matrix(int t_len, double lambda) {
  matrix m(t_len, t_len);
  for (int i = 0; i < t_len; ++i) {
    double w = 1.0;
    for (int j = i; j >= 0; --j) {
      m(i, j) = w;
      w *= lambda;
    }
  }
  return m;
}

// A nonzero initial membrane potential enters the matrix form only through
// the first input: c[0] absorbs lambda * u0. The default u0 = 0 leaves c
// untouched, bit for bit.
inline std::vector<double> fold_initial_state(std::vector<double> c, const lif_params& p) {
  if (!c.empty() && p.u0 != 0.0) c[0] += p.lambda * p.u0;
  return c;
}

// Reverse-time gradient of the smoothed trajectory: given upstream = dL/ds
// per timestep, returns dL/dc. Internally re-runs sequential_lif_smooth at
// alpha_b so the result is the exact derivative of that relaxed loss.
inline std::vector<double> sequential_bptt_gradient(const std::vector<double>& c,
                                                    const lif_params& p,
                                                    const std::vector<double>& upstream,
                                                    double alpha_b) {
  const lif_trace smooth = sequential_lif_smooth(c, p, alpha_b);
  const std::size_t t_len = c.size();
  std::vector<double> grad_c(t_len, 0.0);
  double gu_next = 0.0;  // dL/du[t+1]
  for (std::size_t t = t_len; t-- > 0;) {
    // u[t+1] sees s[t] through the reset term and u[t] through the decay.
    const double gs = upstream[t] - p.lambda * p.v_th * gu_next;
    const double gu = gs * surrogate_gradient(smooth.u[t] - p.v_th, alpha_b) + p.lambda * gu_next;
    grad_c[t] = gu;
    gu_next = gu;
  }
  return grad_c;
}

}  // namespace fpt
