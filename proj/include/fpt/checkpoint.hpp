#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "fpt/learnable.hpp"
#include "fpt/network.hpp"

namespace fpt {

// Model container: 8 magic bytes, a little-endian u64 header length, a JSON
// header describing shapes and configuration, then every parameter as raw
// little-endian 64-bit floats in header order. Reader and writer both assume
// a little-endian host.
inline constexpr char checkpoint_magic[8] = {'F', 'P', 'T', 'M', 'O', 'D', 'E', 'L'};

inline std::string readout_label(readout_mode r) {
  return r == readout_mode::spike_count_sum ? "spike_count_sum" : "mean_membrane";
}

inline readout_mode parse_readout(const std::string& name) {
  if (name == "spike_count_sum") return readout_mode::spike_count_sum;
  if (name == "mean_membrane") return readout_mode::mean_membrane;
  throw std::invalid_argument("unknown readout: " + name);
}

inline void save_model(const mlp_model& m, const std::string& path) {
  nlohmann::json header;
  header["version"] = 1;
  header["spec"]["layer_sizes"] = m.spec.layer_sizes;
  header["spec"]["engine"] = engine_label(m.spec.engine);
  header["spec"]["readout"] = readout_label(m.spec.readout);
  header["spec"]["lif"] = {{"lambda", m.spec.lif.lambda},
                           {"v_th", m.spec.lif.v_th},
                           {"u0", m.spec.lif.u0}};
  header["spec"]["fpt"] = {
      {"k_max", m.spec.fpt_cfg.k_max},
      {"alpha_forward", m.spec.fpt_cfg.surrogate.alpha_forward},
      {"alpha_backward_ratio", m.spec.fpt_cfg.surrogate.alpha_backward_ratio},
      {"bernoulli", m.spec.fpt_cfg.mode == firing_mode::bernoulli},
      {"rng_seed", m.spec.fpt_cfg.rng_seed}};
  header["t"] = m.t;
  header["init_seed"] = m.init_seed;
  nlohmann::json shapes = nlohmann::json::array();
  for (const matrix& w : m.weights) shapes.push_back({w.rows, w.cols});
  header["weights"] = shapes;
  header["neuron_layers"] = m.neuron_layers.size();

  const std::string head = header.dump();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out.write(checkpoint_magic, sizeof(checkpoint_magic));
  const std::uint64_t head_len = head.size();
  out.write(reinterpret_cast<const char*>(&head_len), sizeof(head_len));
  out.write(head.data(), static_cast<std::streamsize>(head.size()));
  auto write_doubles = [&out](const std::vector<double>& v) {
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(double)));
  };
  for (const matrix& w : m.weights) write_doubles(w.a);
  for (const learnable_neuron_params& p : m.neuron_layers) {
    write_doubles(p.a.a);
    write_doubles(p.b);
  }
  if (!out) throw std::runtime_error("failed writing " + path);
}

inline mlp_model load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  char magic[8];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, checkpoint_magic, 8) != 0) {
    throw std::runtime_error("not a model checkpoint: " + path);
  }
  std::uint64_t head_len = 0;
  if (!in.read(reinterpret_cast<char*>(&head_len), sizeof(head_len))) {
    throw std::runtime_error("truncated checkpoint header in " + path);
  }
  std::string head(head_len, '\0');
  if (!in.read(head.data(), static_cast<std::streamsize>(head_len))) {
    throw std::runtime_error("truncated checkpoint header in " + path);
  }
  nlohmann::json header = nlohmann::json::parse(head);

  mlp_model m;
  m.spec.layer_sizes = header.at("spec").at("layer_sizes").get<std::vector<int>>();
  m.spec.engine = parse_engine(header.at("spec").at("engine").get<std::string>());
  m.spec.readout = parse_readout(header.at("spec").at("readout").get<std::string>());
  const auto& lif = header.at("spec").at("lif");
  m.spec.lif.lambda = lif.at("lambda").get<double>();
  m.spec.lif.v_th = lif.at("v_th").get<double>();
  m.spec.lif.u0 = lif.at("u0").get<double>();
  const auto& fp = header.at("spec").at("fpt");
  m.spec.fpt_cfg.k_max = fp.at("k_max").get<int>();
  m.spec.fpt_cfg.surrogate.alpha_forward = fp.at("alpha_forward").get<std::vector<double>>();
  m.spec.fpt_cfg.surrogate.alpha_backward_ratio = fp.at("alpha_backward_ratio").get<double>();
  m.spec.fpt_cfg.mode =
      fp.at("bernoulli").get<bool>() ? firing_mode::bernoulli : firing_mode::deterministic;
  m.spec.fpt_cfg.rng_seed = fp.at("rng_seed").get<std::uint64_t>();
  m.t = header.at("t").get<int>();
  m.init_seed = header.at("init_seed").get<std::uint64_t>();

  auto read_doubles = [&in, &path](std::vector<double>& v) {
    if (!in.read(reinterpret_cast<char*>(v.data()),
                 static_cast<std::streamsize>(v.size() * sizeof(double)))) {
      throw std::runtime_error("truncated checkpoint payload in " + path);
    }
  };
  for (const auto& shape : header.at("weights")) {
    matrix w(shape.at(0).get<int>(), shape.at(1).get<int>());
    read_doubles(w.a);
    m.weights.push_back(std::move(w));
  }
  const std::size_t n_neuron = header.at("neuron_layers").get<std::size_t>();
  for (std::size_t l = 0; l < n_neuron; ++l) {
    learnable_neuron_params p;
    p.v_th = m.spec.lif.v_th;
    p.a = matrix(m.t, m.t);
    p.b.assign(static_cast<std::size_t>(m.t), 0.0);
    read_doubles(p.a.a);
    read_doubles(p.b);
    m.neuron_layers.push_back(std::move(p));
  }
  return m;
}

}  // namespace fpt
