#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace fpt {

// Sharpness schedules for the smoothed firing function. alpha_forward is
// indexed per iteration (1-based k); when the schedule is shorter than the
// iteration count the last entry is broadcast. Backward sharpness is tied to
// the forward schedule by a fixed ratio so a single knob controls both.
struct surrogate_config {
  std::vector<double> alpha_forward{3.0, 12.0, 12.0};
  double alpha_backward_ratio = 1.0 / 3.0;

  double alpha_f(int k) const {
    if (alpha_forward.empty()) return 12.0;
    const std::size_t i = static_cast<std::size_t>(k - 1);
    return i < alpha_forward.size() ? alpha_forward[i] : alpha_forward.back();
  }
  double alpha_b(int k) const { return alpha_f(k) * alpha_backward_ratio; }
};

// sigmoid(alpha * x), evaluated on the side that cannot overflow.
inline double sigmoid_surrogate(double x, double alpha) {
  const double z = alpha * x;
  if (z >= 0.0) {
    return 1.0 / (1.0 + std::exp(-z));
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// d/dx sigmoid(alpha * x) = alpha * s * (1 - s). Computed from exp(-|alpha x|)
// so the value is exactly symmetric in x and never overflows; at x = 0 this
// yields alpha / 4 with no rounding.
inline double surrogate_gradient(double x, double alpha) {
  const double e = std::exp(-std::abs(alpha * x));
  const double denom = (1.0 + e) * (1.0 + e);
  return alpha * (e / denom);
}

// Heaviside step with the convention H(0) = 1, matching the reset rule: a
// membrane potential exactly at threshold fires.
inline double heaviside(double x) { return x >= 0.0 ? 1.0 : 0.0; }

}  // namespace fpt
