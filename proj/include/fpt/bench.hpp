#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "fpt/forward.hpp"
#include "fpt/lif.hpp"
#include "fpt/matrix.hpp"
#include "fpt/parallel.hpp"
#include "fpt/rng.hpp"
#include "fpt/surrogate.hpp"

namespace fpt {

enum class bench_engine { sequential, fpt_dense, fpt_parallel };

inline std::string engine_name(bench_engine e) {
  switch (e) {
    case bench_engine::sequential: return "sequential";
    case bench_engine::fpt_dense: return "fpt_dense";
    case bench_engine::fpt_parallel: return "fpt_parallel";
  }
  return "?";
}

struct bench_record {
  bench_engine engine = bench_engine::sequential;
  int t = 0;
  int batch = 0;
  double wall_seconds = 0.0;              // median over the timed repetitions
  double speedup_vs_sequential = 1.0;     // sequential median / this median
};

// y = (decay matrix) x in O(T) via the running recurrence y[i] = lambda*y[i-1] + x[i].
inline void decay_scan(const double* x, double* y, std::size_t t_len, double lambda) {
  double acc = 0.0;
  for (std::size_t i = 0; i < t_len; ++i) {
    acc = lambda * acc + x[i];
    y[i] = acc;
  }
}

// Final membrane iterate of the fixed-point solve computed entirely with
// decay scans; same math as the dense path up to summation order.
inline std::vector<double> fpt_forward_scan_u(const std::vector<double>& c, const lif_params& p,
                                              const surrogate_config& sc, int k_max) {
  const std::size_t t_len = c.size();
  std::vector<double> lc(t_len), u(t_len), soft(t_len), z(t_len), w(t_len);
  decay_scan(c.data(), lc.data(), t_len, p.lambda);
  u = lc;
  for (int k = 2; k <= k_max; ++k) {
    const double alpha = sc.alpha_f(k - 1);
    for (std::size_t i = 0; i < t_len; ++i) {
      soft[i] = sigmoid_surrogate(u[i] - p.v_th, alpha);
      z[i] = c[i] - p.v_th * soft[i];
    }
    decay_scan(z.data(), w.data(), t_len, p.lambda);
    // u = decay(c - v_th s) + v_th s  ==  -v_th (decay - I) s + decay c
    for (std::size_t i = 0; i < t_len; ++i) u[i] = w[i] + p.v_th * soft[i];
  }
  return u;
}

namespace detail {

// Keeps the optimizer from discarding timed work.
inline volatile double bench_sink = 0.0;

inline double spike_sum_sequential(const std::vector<std::vector<double>>& units,
                                   const lif_params& p) {
  double total = 0.0;
  for (const std::vector<double>& c : units) {
    double u_prev = p.u0;
    double s_prev = 0.0;
    for (double ct : c) {
      const double u = p.lambda * (u_prev - p.v_th * s_prev) + ct;
      const double s = u >= p.v_th ? 1.0 : 0.0;
      total += s;
      u_prev = u;
      s_prev = s;
    }
  }
  return total;
}

struct dense_workspace {
  std::vector<double> lc, u, soft, scratch, u_next;
  explicit dense_workspace(std::size_t t_len)
      : lc(t_len), u(t_len), soft(t_len), scratch(t_len), u_next(t_len) {}
};

inline double spike_sum_dense(const std::vector<std::vector<double>>& units, const lif_params& p,
                              const matrix& lam, const surrogate_config& sc, int k_max,
                              dense_workspace& ws) {
  const std::size_t t_len = ws.u.size();
  double total = 0.0;
  for (const std::vector<double>& c : units) {
    matvec_into(lam, c.data(), ws.lc.data());
    ws.u = ws.lc;
    for (int k = 2; k <= k_max; ++k) {
      const double alpha = sc.alpha_f(k - 1);
      for (std::size_t i = 0; i < t_len; ++i) {
        ws.soft[i] = sigmoid_surrogate(ws.u[i] - p.v_th, alpha);
      }
      matvec_into(lam, ws.soft.data(), ws.scratch.data());
      for (std::size_t i = 0; i < t_len; ++i) {
        ws.u_next[i] = -p.v_th * (ws.scratch[i] - ws.soft[i]) + ws.lc[i];
      }
      ws.u.swap(ws.u_next);
    }
    for (std::size_t i = 0; i < t_len; ++i) total += ws.u[i] >= p.v_th ? 1.0 : 0.0;
  }
  return total;
}

inline double spike_sum_scan(const std::vector<std::vector<double>>& units, const lif_params& p,
                             const surrogate_config& sc, int k_max, int threads) {
  std::vector<double> per_unit(units.size(), 0.0);
  parallel_for(units.size(), threads, [&](std::size_t ui) {
    thread_local std::vector<double> lc, u, soft, z, w;
    const std::vector<double>& c = units[ui];
    const std::size_t t_len = c.size();
    lc.resize(t_len);
    u.resize(t_len);
    soft.resize(t_len);
    z.resize(t_len);
    w.resize(t_len);
    decay_scan(c.data(), lc.data(), t_len, p.lambda);
    u = lc;
    for (int k = 2; k <= k_max; ++k) {
      const double alpha = sc.alpha_f(k - 1);
      for (std::size_t i = 0; i < t_len; ++i) {
        soft[i] = sigmoid_surrogate(u[i] - p.v_th, alpha);
        z[i] = c[i] - p.v_th * soft[i];
      }
      decay_scan(z.data(), w.data(), t_len, p.lambda);
      for (std::size_t i = 0; i < t_len; ++i) u[i] = w[i] + p.v_th * soft[i];
    }
    double s = 0.0;
    for (std::size_t i = 0; i < t_len; ++i) s += u[i] >= p.v_th ? 1.0 : 0.0;
    per_unit[ui] = s;
  });
  double total = 0.0;
  for (double s : per_unit) total += s;
  return total;
}

template <typename Fn>
inline double median_seconds(Fn&& run, int reps) {
  run();  // warm-up, excluded
  std::vector<double> times;
  times.reserve(static_cast<std::size_t>(reps));
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    bench_sink = run();
    const auto t1 = std::chrono::steady_clock::now();
    times.push_back(std::chrono::duration<double>(t1 - t0).count());
  }
  std::sort(times.begin(), times.end());
  return times[times.size() / 2];
}

}  // namespace detail

// Times the step-by-step reference against the dense and scan-form fixed-point
// engines on identical Gaussian workloads of batch*neurons independent units.
// Decay-matrix construction happens outside the timed region; it is shared
// setup, not per-call work.
inline std::vector<bench_record> run_benchmark(const std::vector<int>& t_values, int batch,
                                               int neurons, int reps, int threads,
                                               std::uint64_t seed = 42, const lif_params& p = {},
                                               const surrogate_config& sc = {}, int k_max = 3) {
  if (reps < 5) throw std::invalid_argument("need at least five repetitions for a stable median");
  if (batch < 1 || neurons < 1) throw std::invalid_argument("workload must be non-empty");
  const int workers = resolve_thread_count(threads);
  std::vector<bench_record> records;
  for (int t_len : t_values) {
    if (t_len < 1) throw std::invalid_argument("horizon must be at least one step");
    const std::size_t n_units = static_cast<std::size_t>(batch) * static_cast<std::size_t>(neurons);
    std::vector<std::vector<double>> units(n_units);
    for (std::size_t ui = 0; ui < n_units; ++ui) {
      counter_rng rng(derive_seed(seed, static_cast<std::uint64_t>(t_len) * 0x10001u + ui));
      units[ui].resize(static_cast<std::size_t>(t_len));
      for (double& x : units[ui]) x = rng.next_normal();
    }
    const matrix lam = build_decay_matrix(t_len, p.lambda);
    detail::dense_workspace ws(static_cast<std::size_t>(t_len));

    const double seq = detail::median_seconds(
        [&] { return detail::spike_sum_sequential(units, p); }, reps);
    const double dense = detail::median_seconds(
        [&] { return detail::spike_sum_dense(units, p, lam, sc, k_max, ws); }, reps);
    const double scan = detail::median_seconds(
        [&] { return detail::spike_sum_scan(units, p, sc, k_max, workers); }, reps);

    records.push_back({bench_engine::sequential, t_len, batch, seq, 1.0});
    records.push_back({bench_engine::fpt_dense, t_len, batch, dense, seq / dense});
    records.push_back({bench_engine::fpt_parallel, t_len, batch, scan, seq / scan});
  }
  return records;
}

}  // namespace fpt
