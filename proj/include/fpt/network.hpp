#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "fpt/backward.hpp"
#include "fpt/data.hpp"
#include "fpt/forward.hpp"
#include "fpt/learnable.hpp"
#include "fpt/lif.hpp"
#include "fpt/matrix.hpp"
#include "fpt/rng.hpp"

namespace fpt {

enum class neuron_engine { sequential_lif, fpt, psn, psu, fpt_learnable };
enum class readout_mode { spike_count_sum, mean_membrane };

inline std::string engine_label(neuron_engine e) {
  switch (e) {
    case neuron_engine::sequential_lif: return "sequential";
    case neuron_engine::fpt: return "fpt";
    case neuron_engine::psn: return "psn";
    case neuron_engine::psu: return "psu";
    case neuron_engine::fpt_learnable: return "fpt_learnable";
  }
  return "?";
}

inline neuron_engine parse_engine(const std::string& name) {
  for (neuron_engine e : {neuron_engine::sequential_lif, neuron_engine::fpt, neuron_engine::psn,
                          neuron_engine::psu, neuron_engine::fpt_learnable}) {
    if (engine_label(e) == name) return e;
  }
  throw std::invalid_argument("unknown neuron engine: " + name);
}

struct network_spec {
  std::vector<int> layer_sizes;  // input width, hidden widths..., class count
  neuron_engine engine = neuron_engine::fpt;
  lif_params lif;
  fixed_point_config fpt_cfg;
  readout_mode readout = readout_mode::spike_count_sum;
};

inline void validate_spec(const network_spec& spec) {
  if (spec.layer_sizes.size() < 2) {
    throw std::invalid_argument("network needs an input and an output width");
  }
  for (int s : spec.layer_sizes) {
    if (s < 1) throw std::invalid_argument("layer widths must be at least 1");
  }
}

// Dense no-bias layers alternating with spiking layers. Dense weights are
// horizon-independent; the learnable neuron engines additionally carry one
// (A, b) pair per spiking layer, fixed to the horizon they were built for.
struct mlp_model {
  network_spec spec;
  std::vector<matrix> weights;
  std::vector<learnable_neuron_params> neuron_layers;
  int t = 0;
  std::uint64_t init_seed = 0;
};

inline bool engine_is_learnable(neuron_engine e) {
  return e == neuron_engine::psn || e == neuron_engine::psu || e == neuron_engine::fpt_learnable;
}

inline mlp_model init_model(const network_spec& spec, std::uint64_t seed, int t) {
  validate_spec(spec);
  mlp_model m;
  m.spec = spec;
  m.spec.fpt_cfg = padded_config(m.spec.fpt_cfg);
  m.t = t;
  m.init_seed = seed;
  for (std::size_t l = 0; l + 1 < spec.layer_sizes.size(); ++l) {
    const int in = spec.layer_sizes[l];
    const int out = spec.layer_sizes[l + 1];
    matrix w(out, in);
    counter_rng rng(derive_seed(seed, 0xd0000000ull + l));
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    for (double& x : w.a) x = rng.next_uniform(-bound, bound);
    m.weights.push_back(std::move(w));
    if (engine_is_learnable(spec.engine)) {
      m.neuron_layers.push_back(init_learnable(t, 0.5, spec.lif.v_th,
                                               triangular_mask::lower_triangular,
                                               derive_seed(seed, 0xa0000000ull + l)));
    }
  }
  return m;
}

// Per-iteration budget each engine actually runs with.
inline fixed_point_config engine_config(const mlp_model& m, neuron_engine e) {
  fixed_point_config cfg = m.spec.fpt_cfg;
  if (e == neuron_engine::psn) cfg.k_max = 1;
  if (e == neuron_engine::psu) cfg.k_max = 2;
  return padded_config(cfg);
}

struct unit_activation {
  std::vector<double> pre;       // current driven into the neuron
  std::vector<double> spikes;    // what it emitted
  std::vector<double> membrane;  // final membrane sequence
  forward_trace trace;           // kept when the backward pass needs iterates
};

struct layer_activation {
  std::vector<double> input;  // activation entering the dense map, [t * in]
  std::vector<unit_activation> units;
};

struct sample_pass {
  std::vector<layer_activation> layers;
  std::vector<double> logits;
};

namespace detail {

inline forward_trace solve_neuron(const matrix& lam, const std::vector<double>& c,
                                  const lif_params& p, const fixed_point_config& cfg) {
  const std::vector<double> lc = matvec(lam, c);
  const std::vector<double> threshold(c.size(), p.v_th);
  return fixed_point_solve(lam, lc, threshold, p.v_th, cfg, /*allow_early_stop=*/false);
}

}  // namespace detail

inline sample_pass forward_sample(const mlp_model& m, const std::vector<double>& x, int t,
                                  neuron_engine engine, const matrix& lam) {
  const fixed_point_config cfg = engine_config(m, engine);
  if (engine_is_learnable(engine) && m.neuron_layers.empty()) {
    throw std::invalid_argument("model carries no learnable neuron parameters");
  }
  if (engine_is_learnable(engine) && t != m.t) {
    throw std::invalid_argument("learnable neuron parameters are fixed to their horizon");
  }
  sample_pass pass;
  std::vector<double> act = x;
  for (std::size_t l = 0; l < m.weights.size(); ++l) {
    const matrix& w = m.weights[l];
    const int in = w.cols;
    const int out = w.rows;
    layer_activation la;
    la.input = act;
    la.units.resize(static_cast<std::size_t>(out));

    // Dense drive, then one independent temporal solve per output neuron.
    std::vector<std::vector<double>> pre(static_cast<std::size_t>(out),
                                         std::vector<double>(static_cast<std::size_t>(t)));
    for (int step = 0; step < t; ++step) {
      const double* row_in = &act[static_cast<std::size_t>(step) * in];
      for (int o = 0; o < out; ++o) {
        const double* wrow = &w.a[static_cast<std::size_t>(o) * in];
        double acc = 0.0;
        for (int i = 0; i < in; ++i) acc += wrow[i] * row_in[i];
        pre[static_cast<std::size_t>(o)][static_cast<std::size_t>(step)] = acc;
      }
    }

    std::vector<double> next(static_cast<std::size_t>(t) * static_cast<std::size_t>(out));
    for (int o = 0; o < out; ++o) {
      unit_activation& unit = la.units[static_cast<std::size_t>(o)];
      unit.pre = std::move(pre[static_cast<std::size_t>(o)]);
      switch (engine) {
        case neuron_engine::sequential_lif: {
          lif_trace tr = sequential_lif(unit.pre, m.spec.lif);
          unit.spikes = std::move(tr.s);
          unit.membrane = std::move(tr.u);
          break;
        }
        case neuron_engine::fpt: {
          unit.trace = detail::solve_neuron(lam, unit.pre, m.spec.lif, cfg);
          unit.spikes = unit.trace.s_star;
          unit.membrane = unit.trace.u_star;
          break;
        }
        default: {
          unit.trace = fpt_generalized_forward(unit.pre, m.neuron_layers[l], cfg);
          unit.spikes = unit.trace.s_star;
          unit.membrane = unit.trace.u_star;
          break;
        }
      }
      for (int step = 0; step < t; ++step) {
        next[static_cast<std::size_t>(step) * out + o] =
            unit.spikes[static_cast<std::size_t>(step)];
      }
    }
    act = std::move(next);
    pass.layers.push_back(std::move(la));
  }

  const int classes = m.spec.layer_sizes.back();
  pass.logits.assign(static_cast<std::size_t>(classes), 0.0);
  const std::vector<unit_activation>& out_units = pass.layers.back().units;
  for (int j = 0; j < classes; ++j) {
    const unit_activation& unit = out_units[static_cast<std::size_t>(j)];
    double acc = 0.0;
    if (m.spec.readout == readout_mode::spike_count_sum) {
      for (double s : unit.spikes) acc += s;
    } else {
      for (double u : unit.membrane) acc += u;
      acc /= t;
    }
    pass.logits[static_cast<std::size_t>(j)] = acc;
  }
  return pass;
}

inline double softmax_cross_entropy(const std::vector<double>& logits, int label,
                                    std::vector<double>& grad_out) {
  double peak = logits[0];
  for (double z : logits) peak = std::max(peak, z);
  double norm = 0.0;
  grad_out.resize(logits.size());
  for (std::size_t j = 0; j < logits.size(); ++j) {
    grad_out[j] = std::exp(logits[j] - peak);
    norm += grad_out[j];
  }
  for (double& g : grad_out) g /= norm;
  const double loss = -std::log(grad_out[static_cast<std::size_t>(label)]);
  for (std::size_t j = 0; j < logits.size(); ++j) {
    grad_out[j] -= j == static_cast<std::size_t>(label) ? 1.0 : 0.0;
  }
  return loss;
}

struct gradient_accumulator {
  std::vector<matrix> weights;
  std::vector<matrix> neuron_a;
  std::vector<std::vector<double>> neuron_b;
  int samples = 0;

  explicit gradient_accumulator(const mlp_model& m) {
    for (const matrix& w : m.weights) weights.emplace_back(w.rows, w.cols);
    for (const learnable_neuron_params& p : m.neuron_layers) {
      neuron_a.emplace_back(p.a.rows, p.a.cols);
      neuron_b.emplace_back(p.b.size(), 0.0);
    }
  }
};

// Reverse pass for one sample; returns the cross-entropy loss at the readout.
// Only the spike-count readout is trainable; the mean-membrane readout is an
// inference-time option.
inline double backward_sample(const mlp_model& m, const sample_pass& pass, int label, int t,
                              gradient_accumulator& acc) {
  if (m.spec.readout != readout_mode::spike_count_sum) {
    throw std::invalid_argument("training requires the spike-count readout");
  }
  const fixed_point_config cfg = engine_config(m, m.spec.engine);
  const double alpha_b_seq = cfg.surrogate.alpha_b(cfg.k_max);

  std::vector<double> logit_grad;
  const double loss = softmax_cross_entropy(pass.logits, label, logit_grad);

  // upstream = dL/d(spikes) of the current layer, laid out [t * width].
  const int classes = m.spec.layer_sizes.back();
  std::vector<double> upstream(static_cast<std::size_t>(t) * classes);
  for (int step = 0; step < t; ++step) {
    for (int j = 0; j < classes; ++j) {
      upstream[static_cast<std::size_t>(step) * classes + j] =
          logit_grad[static_cast<std::size_t>(j)];
    }
  }

  for (std::size_t l = m.weights.size(); l-- > 0;) {
    const matrix& w = m.weights[l];
    const int in = w.cols;
    const int out = w.rows;
    const layer_activation& la = pass.layers[l];

    std::vector<double> unit_upstream(static_cast<std::size_t>(t));
    std::vector<double> grad_pre(static_cast<std::size_t>(t) * out);
    for (int o = 0; o < out; ++o) {
      const unit_activation& unit = la.units[static_cast<std::size_t>(o)];
      for (int step = 0; step < t; ++step) {
        unit_upstream[static_cast<std::size_t>(step)] =
            upstream[static_cast<std::size_t>(step) * out + o];
      }
      std::vector<double> grad_c;
      switch (m.spec.engine) {
        case neuron_engine::sequential_lif:
          grad_c = sequential_bptt_gradient(unit.pre, m.spec.lif, unit_upstream, alpha_b_seq);
          break;
        case neuron_engine::fpt:
          grad_c = fpt_backward(unit.trace, unit_upstream, m.spec.lif, cfg).grad_c;
          break;
        default: {
          backward_result r = fpt_generalized_backward(unit.trace, unit.pre, unit_upstream,
                                                       m.neuron_layers[l], cfg);
          grad_c = std::move(r.grad_c);
          matrix& ga = acc.neuron_a[l];
          for (std::size_t i = 0; i < ga.a.size(); ++i) ga.a[i] += r.grad_a->a[i];
          // The two-step unit keeps its thresholds pinned at v_th.
          if (m.spec.engine != neuron_engine::psu) {
            for (std::size_t i = 0; i < acc.neuron_b[l].size(); ++i) {
              acc.neuron_b[l][i] += (*r.grad_b)[i];
            }
          }
          break;
        }
      }
      for (int step = 0; step < t; ++step) {
        grad_pre[static_cast<std::size_t>(step) * out + o] =
            grad_c[static_cast<std::size_t>(step)];
      }
    }

    matrix& gw = acc.weights[l];
    std::vector<double> upstream_prev(static_cast<std::size_t>(t) * in, 0.0);
    for (int step = 0; step < t; ++step) {
      const double* gp = &grad_pre[static_cast<std::size_t>(step) * out];
      const double* xin = &la.input[static_cast<std::size_t>(step) * in];
      double* up = &upstream_prev[static_cast<std::size_t>(step) * in];
      for (int o = 0; o < out; ++o) {
        const double g = gp[o];
        const double* wrow = &w.a[static_cast<std::size_t>(o) * in];
        double* grow = &gw.a[static_cast<std::size_t>(o) * in];
        for (int i = 0; i < in; ++i) {
          grow[i] += g * xin[i];
          up[i] += wrow[i] * g;
        }
      }
    }
    upstream = std::move(upstream_prev);
  }
  ++acc.samples;
  return loss;
}

inline void apply_sgd(mlp_model& m, const gradient_accumulator& acc, double lr) {
  if (acc.samples == 0) return;
  const double scale = lr / acc.samples;
  for (std::size_t l = 0; l < m.weights.size(); ++l) {
    for (std::size_t i = 0; i < m.weights[l].a.size(); ++i) {
      m.weights[l].a[i] -= scale * acc.weights[l].a[i];
    }
  }
  for (std::size_t l = 0; l < m.neuron_layers.size(); ++l) {
    learnable_neuron_params& p = m.neuron_layers[l];
    for (std::size_t i = 0; i < p.a.a.size(); ++i) p.a.a[i] -= scale * acc.neuron_a[l].a[i];
    for (std::size_t i = 0; i < p.b.size(); ++i) p.b[i] -= scale * acc.neuron_b[l][i];
    p.a = apply_mask(std::move(p.a), p.mask);
  }
}

// The spike-count readout sums dL/ds over every timestep, so gradient scale
// grows with the horizon; learning rates much above ~0.1 saturate the output
// units (spikes clip to all-ones, the surrogate slope dies, training stalls
// at a permanent logit tie). The default stays well inside the stable region.
struct train_hyper {
  double lr = 0.05;
  int epochs = 150;
  int batch = 8;
  std::uint64_t seed = 1;
};

struct train_report {
  std::vector<double> epoch_loss;
  double final_accuracy = 0.0;
  double wall_clock_per_batch = 0.0;
  double firing_rate = 0.0;
  std::uint64_t seed = 0;
};

inline void validate_model_data(const mlp_model& m, const dataset& data) {
  if (m.spec.layer_sizes.front() != data.d) {
    throw std::invalid_argument("input width does not match the dataset");
  }
  if (m.spec.layer_sizes.back() != data.classes) {
    throw std::invalid_argument("output width does not match the class count");
  }
  if (data.inputs.empty()) throw std::invalid_argument("dataset is empty");
}

inline double evaluate(const mlp_model& m, const dataset& data) {
  validate_model_data(m, data);
  const matrix lam = build_decay_matrix(data.t, m.spec.lif.lambda);
  int correct = 0;
  for (std::size_t i = 0; i < data.inputs.size(); ++i) {
    const sample_pass pass = forward_sample(m, data.inputs[i], data.t, m.spec.engine, lam);
    int best = 0;
    for (std::size_t j = 1; j < pass.logits.size(); ++j) {
      if (pass.logits[j] > pass.logits[static_cast<std::size_t>(best)]) {
        best = static_cast<int>(j);
      }
    }
    if (best == data.labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.inputs.size());
}

// Mean spike density across every spiking layer, neuron, and timestep.
inline double firing_rate(const mlp_model& m, const dataset& data) {
  const matrix lam = build_decay_matrix(data.t, m.spec.lif.lambda);
  double fired = 0.0, total = 0.0;
  for (const std::vector<double>& x : data.inputs) {
    const sample_pass pass = forward_sample(m, x, data.t, m.spec.engine, lam);
    for (const layer_activation& la : pass.layers) {
      for (const unit_activation& unit : la.units) {
        for (double s : unit.spikes) fired += s;
        total += static_cast<double>(unit.spikes.size());
      }
    }
  }
  return total == 0.0 ? 0.0 : fired / total;
}

inline train_report train(mlp_model& m, const dataset& data, const train_hyper& hyper) {
  validate_model_data(m, data);
  if (hyper.epochs < 0 || hyper.batch < 1) throw std::invalid_argument("bad training schedule");
  const matrix lam = build_decay_matrix(data.t, m.spec.lif.lambda);
  const std::size_t n = data.inputs.size();

  train_report report;
  report.seed = hyper.seed;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  int batch_steps = 0;
  const auto start = std::chrono::steady_clock::now();
  for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
    counter_rng shuffle_rng(derive_seed(hyper.seed, 0xe0000000ull + static_cast<std::uint64_t>(epoch)));
    for (std::size_t i = n; i > 1; --i) {
      const std::size_t j =
          static_cast<std::size_t>(shuffle_rng.next_uniform() * static_cast<double>(i));
      std::swap(order[i - 1], order[j < i ? j : i - 1]);
    }

    double epoch_loss = 0.0;
    std::size_t cursor = 0;
    while (cursor < n) {
      gradient_accumulator acc(m);
      const std::size_t stop = std::min(n, cursor + static_cast<std::size_t>(hyper.batch));
      for (; cursor < stop; ++cursor) {
        const std::size_t idx = order[cursor];
        const sample_pass pass =
            forward_sample(m, data.inputs[idx], data.t, m.spec.engine, lam);
        epoch_loss += backward_sample(m, pass, data.labels[idx], data.t, acc);
      }
      apply_sgd(m, acc, hyper.lr);
      ++batch_steps;
    }
    epoch_loss /= static_cast<double>(n);
    if (!std::isfinite(epoch_loss)) {
      throw std::runtime_error("training diverged: loss is no longer finite");
    }
    report.epoch_loss.push_back(epoch_loss);
  }
  const auto stop_time = std::chrono::steady_clock::now();
  report.wall_clock_per_batch =
      batch_steps == 0
          ? 0.0
          : std::chrono::duration<double>(stop_time - start).count() / batch_steps;
  report.final_accuracy = evaluate(m, data);
  report.firing_rate = firing_rate(m, data);
  return report;
}

struct similarity_report {
  double mean_similarity = 1.0;
  int excluded = 0;  // samples whose readout vanished under either engine
};

// Cosine similarity of the readout vectors produced by two engines sharing
// one set of weights.
inline similarity_report output_cosine_similarity(const mlp_model& m, neuron_engine engine_a,
                                                  neuron_engine engine_b, const dataset& data) {
  validate_model_data(m, data);
  const matrix lam = build_decay_matrix(data.t, m.spec.lif.lambda);
  similarity_report rep;
  double sum = 0.0;
  int counted = 0;
  for (const std::vector<double>& x : data.inputs) {
    const std::vector<double> za = forward_sample(m, x, data.t, engine_a, lam).logits;
    const std::vector<double> zb = forward_sample(m, x, data.t, engine_b, lam).logits;
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t j = 0; j < za.size(); ++j) {
      dot += za[j] * zb[j];
      na += za[j] * za[j];
      nb += zb[j] * zb[j];
    }
    if (na == 0.0 || nb == 0.0) {
      ++rep.excluded;
      continue;
    }
    sum += dot / std::sqrt(na * nb);
    ++counted;
  }
  rep.mean_similarity = counted == 0 ? 0.0 : sum / counted;
  return rep;
}

}  // namespace fpt
