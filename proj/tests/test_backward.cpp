#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "fpt/backward.hpp"
#include "fpt/forward.hpp"
#include "fpt/lif.hpp"
#include "fpt/matrix.hpp"
#include "fpt/rng.hpp"

using Catch::Approx;

namespace {

std::vector<double> gaussian_vector(std::size_t n, std::uint64_t seed) {
  fpt::counter_rng rng(seed);
  std::vector<double> v(n);
  for (double& x : v) x = rng.next_normal();
  return v;
}

fpt::fixed_point_config constant_cfg(double alpha, int k) {
  fpt::fixed_point_config cfg;
  cfg.k_max = k;
  cfg.surrogate.alpha_forward = fpt::make_constant_schedule(alpha, k);
  return cfg;
}

// Trace taken at the backward sharpness, so the reverse sweep is the exact
// derivative of the function the finite differences probe.
fpt::forward_trace smoothed_trace(const std::vector<double>& c, const fpt::lif_params& p,
                                  const fpt::fixed_point_config& cfg) {
  return fpt::fpt_forward(c, p, fpt::backward_smoothed_config(cfg));
}

}  // namespace

TEST_CASE("zero upstream annihilates the gradient") {
  const fpt::lif_params p;
  const fpt::fixed_point_config cfg = constant_cfg(12.0, 3);
  const std::vector<double> c = gaussian_vector(10, 1);
  const fpt::backward_result r =
      fpt::fpt_backward(smoothed_trace(c, p, cfg), std::vector<double>(10, 0.0), p, cfg);
  for (double g : r.grad_c) REQUIRE(g == 0.0);
  REQUIRE_FALSE(r.grad_a.has_value());
  REQUIRE_FALSE(r.grad_b.has_value());
}

TEST_CASE("single-iteration gradient is the transposed decay of the seeded upstream") {
  const fpt::lif_params p;
  const fpt::fixed_point_config cfg = constant_cfg(12.0, 1);
  const std::vector<double> c = gaussian_vector(12, 2);
  const std::vector<double> upstream = gaussian_vector(12, 3);

  const fpt::matrix lam = fpt::build_decay_matrix(12, p.lambda);
  const std::vector<double> lc = fpt::matvec(lam, c);
  std::vector<double> seeded(12);
  for (std::size_t t = 0; t < 12; ++t) {
    seeded[t] = upstream[t] * fpt::surrogate_gradient(lc[t] - p.v_th, cfg.surrogate.alpha_b(1));
  }
  const std::vector<double> want = fpt::matvec_transposed(lam, seeded);

  const fpt::backward_result r = fpt::fpt_backward(smoothed_trace(c, p, cfg), upstream, p, cfg);
  REQUIRE(r.grad_c == want);
}

TEST_CASE("central differences recover a known gradient") {
  // Self-test of the differencing scheme on f(c) = ||c||^2 / 2.
  const std::vector<double> c = gaussian_vector(9, 4);
  const double h = 1e-5;
  std::vector<double> probe = c;
  for (std::size_t i = 0; i < c.size(); ++i) {
    auto half_sq = [](const std::vector<double>& v) {
      double s = 0.0;
      for (double x : v) s += x * x;
      return 0.5 * s;
    };
    probe[i] = c[i] + h;
    const double plus = half_sq(probe);
    probe[i] = c[i] - h;
    const double minus = half_sq(probe);
    probe[i] = c[i];
    REQUIRE((plus - minus) / (2.0 * h) == Approx(c[i]).margin(1e-8));
  }
}

TEST_CASE("reverse sweep matches finite differences on the production shape") {
  const fpt::lif_params p;
  const fpt::fixed_point_config cfg;  // alpha_f ramp 3,12,12; alpha_b a third of that
  const std::vector<double> c = gaussian_vector(8, 5);
  const std::vector<double> upstream = gaussian_vector(8, 6);
  const fpt::backward_result r = fpt::fpt_backward(smoothed_trace(c, p, cfg), upstream, p, cfg);
  const std::vector<double> fd = fpt::finite_difference_gradient(c, p, cfg, upstream, 1e-5);
  REQUIRE(fpt::max_relative_error(r.grad_c, fd) < 1e-4);
}

TEST_CASE("reverse sweep matches finite differences across the whole grid") {
  const fpt::lif_params p;
  for (int t_len : {1, 4, 8, 32}) {
    for (int k : {1, 2, 3}) {
      for (double alpha : {4.0, 12.0}) {
        const fpt::fixed_point_config cfg = constant_cfg(alpha, k);
        const std::uint64_t salt = static_cast<std::uint64_t>(t_len * 100 + k * 10) +
                                   static_cast<std::uint64_t>(alpha);
        const std::vector<double> c =
            gaussian_vector(static_cast<std::size_t>(t_len), fpt::derive_seed(70, salt));
        const std::vector<double> upstream =
            gaussian_vector(static_cast<std::size_t>(t_len), fpt::derive_seed(71, salt));
        const fpt::backward_result r =
            fpt::fpt_backward(smoothed_trace(c, p, cfg), upstream, p, cfg);
        const std::vector<double> fd = fpt::finite_difference_gradient(c, p, cfg, upstream, 1e-5);
        INFO("t=" << t_len << " k=" << k << " alpha=" << alpha);
        REQUIRE(fpt::max_relative_error(r.grad_c, fd) < 1e-4);
      }
    }
  }
}

TEST_CASE("twenty random instances agree with the differencing oracle") {
  const fpt::lif_params p;
  const fpt::fixed_point_config cfg;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const std::vector<double> c = gaussian_vector(8, fpt::derive_seed(700, seed));
    const std::vector<double> upstream = gaussian_vector(8, fpt::derive_seed(701, seed));
    const fpt::backward_result r = fpt::fpt_backward(smoothed_trace(c, p, cfg), upstream, p, cfg);
    const std::vector<double> fd = fpt::finite_difference_gradient(c, p, cfg, upstream, 1e-5);
    REQUIRE(fpt::max_relative_error(r.grad_c, fd) < 1e-4);
  }
}

TEST_CASE("difference error is U-shaped in the step size") {
  const fpt::lif_params p;
  const fpt::fixed_point_config cfg;
  const std::vector<double> c = gaussian_vector(8, 91);
  const std::vector<double> upstream = gaussian_vector(8, 92);
  const std::vector<double> exact =
      fpt::fpt_backward(smoothed_trace(c, p, cfg), upstream, p, cfg).grad_c;

  std::vector<double> err;
  for (double h : {1e-4, 1e-5, 1e-6}) {
    err.push_back(fpt::max_relative_error(
        exact, fpt::finite_difference_gradient(c, p, cfg, upstream, h)));
  }
  REQUIRE(err[1] <= err[0]);  // truncation shrinks with h
  REQUIRE(err[1] <= err[2]);  // round-off grows once h is too small
}

TEST_CASE("gradient is linear in the upstream signal") {
  const fpt::lif_params p;
  const fpt::fixed_point_config cfg;
  const std::vector<double> c = gaussian_vector(16, 41);
  const fpt::forward_trace tr = smoothed_trace(c, p, cfg);
  const std::vector<double> g1 = gaussian_vector(16, 42);
  const std::vector<double> g2 = gaussian_vector(16, 43);
  const double a = 1.75, b = -0.3;

  std::vector<double> mixed(16);
  for (std::size_t t = 0; t < 16; ++t) mixed[t] = a * g1[t] + b * g2[t];

  const std::vector<double> ga = fpt::fpt_backward(tr, g1, p, cfg).grad_c;
  const std::vector<double> gb = fpt::fpt_backward(tr, g2, p, cfg).grad_c;
  const std::vector<double> gm = fpt::fpt_backward(tr, mixed, p, cfg).grad_c;
  for (std::size_t t = 0; t < 16; ++t) {
    const double want = a * ga[t] + b * gb[t];
    REQUIRE(gm[t] == Approx(want).epsilon(1e-12).margin(1e-15));
  }
}

TEST_CASE("an early-stopped trace is differentiated over the iterations that ran") {
  const fpt::lif_params p;
  fpt::fixed_point_config cfg = constant_cfg(12.0, 6);
  cfg.early_stop_epsilon = 1e9;  // force a stop at the first comparison
  const std::vector<double> c = gaussian_vector(16, 51);
  const std::vector<double> upstream = gaussian_vector(16, 52);
  const fpt::forward_trace stopped = fpt::fpt_forward_early_stop(c, p, cfg);
  REQUIRE(stopped.iterations_used == 2);

  const fpt::fixed_point_config two = constant_cfg(12.0, 2);
  const fpt::forward_trace plain = fpt::fpt_forward(c, p, two);
  REQUIRE(fpt::fpt_backward(stopped, upstream, p, cfg).grad_c ==
          fpt::fpt_backward(plain, upstream, p, two).grad_c);
}

TEST_CASE("traces without their intermediate iterates are rejected") {
  const fpt::lif_params p;
  const fpt::fixed_point_config cfg = constant_cfg(12.0, 3);
  const std::vector<double> c = gaussian_vector(8, 61);
  fpt::forward_trace tr = fpt::fpt_forward(c, p, cfg);
  tr.u_iterates.pop_back();  // claim three iterations but carry only two
  REQUIRE_THROWS_AS(fpt::fpt_backward(tr, gaussian_vector(8, 62), p, cfg), std::invalid_argument);

  fpt::forward_trace empty;
  REQUIRE_THROWS_AS(fpt::fpt_backward(empty, {}, p, cfg), std::invalid_argument);
}
