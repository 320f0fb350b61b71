// Command-line front end. Subcommands map one-to-one onto library entry
// points; every output is CSV or JSON so downstream tooling never has to
// scrape human-oriented text. Exit codes: 0 success, 1 invalid input or a
// failed check, 2 internal error.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fpt/backward.hpp"
#include "fpt/bench.hpp"
#include "fpt/checkpoint.hpp"
#include "fpt/convergence.hpp"
#include "fpt/data.hpp"
#include "fpt/forward.hpp"
#include "fpt/learnable.hpp"
#include "fpt/lif.hpp"
#include "fpt/network.hpp"
#include "fpt/parallel.hpp"
#include "fpt/rng.hpp"

namespace {

using nlohmann::json;

// "1..6" expands to consecutive integers, "2,4,8" splits on commas, a single
// number stands alone.
std::vector<double> parse_values(const std::string& text) {
  const auto to_double = [](const std::string& s) {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument("malformed number: " + s);
    return v;
  };
  const std::size_t dots = text.find("..");
  if (dots != std::string::npos) {
    const double lo = to_double(text.substr(0, dots));
    const double hi = to_double(text.substr(dots + 2));
    if (lo != std::floor(lo) || hi != std::floor(hi) || hi < lo) {
      throw std::invalid_argument("ranges must be ascending integers: " + text);
    }
    std::vector<double> vals;
    for (double v = lo; v <= hi; v += 1.0) vals.push_back(v);
    return vals;
  }
  std::vector<double> vals;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) vals.push_back(to_double(item));
  }
  if (vals.empty()) throw std::invalid_argument("empty value list: " + text);
  return vals;
}

void write_text(const std::string& path, const std::string& content) {
  if (path.empty()) {
    std::cout << content;
    return;
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << content;
}

json load_config_section(const std::string& config_path, const std::string& section) {
  if (config_path.empty()) return json::object();
  std::ifstream in(config_path);
  if (!in) throw std::invalid_argument("cannot open config file " + config_path);
  json full;
  try {
    in >> full;
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config file is not valid JSON: ") + e.what());
  }
  return full.contains(section) ? full[section] : json::object();
}

// Flag > config file > default: a config value only lands where the command
// line stayed silent.
template <typename T>
void fill_unset(const CLI::App* sub, const std::string& flag, const json& section,
                const std::string& key, T& slot) {
  if (sub->count(flag) == 0 && section.contains(key)) slot = section[key].get<T>();
}

std::vector<double> gaussian_vector(std::size_t n, std::uint64_t seed) {
  fpt::counter_rng rng(seed);
  std::vector<double> v(n);
  for (double& x : v) x = rng.next_normal();
  return v;
}

fpt::fixed_point_config solver_config(int k, double alpha, bool bernoulli, std::uint64_t seed) {
  fpt::fixed_point_config cfg;
  cfg.k_max = k;
  if (alpha > 0.0) {
    cfg.surrogate.alpha_forward = fpt::make_constant_schedule(alpha, k);
  }
  cfg.mode = bernoulli ? fpt::firing_mode::bernoulli : fpt::firing_mode::deterministic;
  cfg.rng_seed = seed;
  return fpt::padded_config(cfg);
}

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

struct simulate_opts {
  int t = 32;
  int k = 3;
  double alpha = 0.0;  // 0 keeps the default ramped schedule
  double lambda = 0.25;
  double vth = 1.0;
  std::uint64_t seed = 1;
  std::string engine = "fpt";
  bool bernoulli = false;
  std::string out;
};

int run_simulate(const simulate_opts& o) {
  const fpt::lif_params p{o.lambda, o.vth, 0.0};
  const std::vector<double> c = gaussian_vector(static_cast<std::size_t>(o.t), o.seed);

  std::vector<double> u, s;
  if (o.engine == "sequential") {
    fpt::lif_trace tr = fpt::sequential_lif(c, p);
    u = std::move(tr.u);
    s = std::move(tr.s);
  } else if (o.engine == "fpt") {
    const fpt::forward_trace tr = fpt::fpt_forward(c, p, solver_config(o.k, o.alpha, o.bernoulli, o.seed));
    u = tr.u_star;
    s = tr.s_star;
  } else {
    throw std::invalid_argument("simulate supports engines 'sequential' and 'fpt'");
  }

  std::ostringstream csv;
  csv << "step,input,membrane,spike\n";
  for (int t = 0; t < o.t; ++t) {
    csv << t << ',' << format_double(c[static_cast<std::size_t>(t)]) << ','
        << format_double(u[static_cast<std::size_t>(t)]) << ','
        << s[static_cast<std::size_t>(t)] << '\n';
  }
  write_text(o.out, csv.str());
  return 0;
}

struct converge_opts {
  std::string axis = "iterations";
  std::string k = "3";
  std::string alpha = "12";
  std::string t = "32";
  int trials = 5;
  std::uint64_t seed = 7;
  double lambda = 0.25;
  double vth = 1.0;
  std::string out;
};

int run_converge(const converge_opts& o) {
  fpt::sweep_request req;
  if (o.axis == "iterations") {
    req.axis = fpt::sweep_axis::iterations;
    req.values = parse_values(o.k);
  } else if (o.axis == "alpha") {
    req.axis = fpt::sweep_axis::alpha;
    req.values = parse_values(o.alpha);
  } else if (o.axis == "timesteps") {
    req.axis = fpt::sweep_axis::timesteps;
    req.values = parse_values(o.t);
  } else {
    throw std::invalid_argument("axis must be one of iterations, alpha, timesteps");
  }
  req.k_fixed = static_cast<int>(parse_values(o.k).front());
  req.alpha_fixed = parse_values(o.alpha).front();
  const int t_fixed = static_cast<int>(parse_values(o.t).front());

  const fpt::lif_params p{o.lambda, o.vth, 0.0};
  const fpt::error_curves curves = fpt::convergence_sweep(o.seed, p, t_fixed, req, o.trials);

  std::ostringstream csv;
  csv << "axis,x,mean_abs_u_err,spike_err_rate,std\n";
  for (const fpt::curve_point& pt : curves.points) {
    csv << fpt::axis_name(curves.axis) << ',' << format_double(pt.x) << ','
        << format_double(pt.mean_abs_u_err) << ',' << format_double(pt.spike_err_rate) << ','
        << format_double(pt.std_dev) << '\n';
  }
  write_text(o.out, csv.str());
  return 0;
}

struct gradcheck_opts {
  int t = 8;
  int k = 3;
  double alpha = 0.0;
  double lambda = 0.25;
  double vth = 1.0;
  double step = 1e-5;
  std::uint64_t seed = 3;
  std::string out;
};

int run_gradcheck(const gradcheck_opts& o) {
  const fpt::lif_params p{o.lambda, o.vth, 0.0};
  const fpt::fixed_point_config cfg = solver_config(o.k, o.alpha, false, o.seed);
  const std::vector<double> c =
      gaussian_vector(static_cast<std::size_t>(o.t), fpt::derive_seed(o.seed, 0));
  const std::vector<double> upstream =
      gaussian_vector(static_cast<std::size_t>(o.t), fpt::derive_seed(o.seed, 1));

  const fpt::forward_trace trace = fpt::fpt_forward(c, p, fpt::backward_smoothed_config(cfg));
  const std::vector<double> grad = fpt::fpt_backward(trace, upstream, p, cfg).grad_c;
  const std::vector<double> fd = fpt::finite_difference_gradient(c, p, cfg, upstream, o.step);
  const double err = fpt::max_relative_error(grad, fd);

  json rep;
  rep["t"] = o.t;
  rep["k"] = o.k;
  rep["seed"] = o.seed;
  rep["max_relative_error"] = err;
  rep["tolerance"] = 1e-4;
  rep["pass"] = err < 1e-4;
  if (!o.out.empty()) write_text(o.out, rep.dump(2) + "\n");
  std::cout << "max relative error: " << err << "\n";
  return err < 1e-4 ? 0 : 1;
}

struct analyze_opts {
  double lambda = 0.25;
  double vth = 1.0;
  double alpha = 12.0;
  int t = 64;
  std::string out;
};

int run_analyze(const analyze_opts& o) {
  const fpt::lif_params p{o.lambda, o.vth, 0.0};
  const fpt::contraction_summary rep = fpt::contraction_report(p, o.alpha, o.t);
  json j;
  j["lambda"] = o.lambda;
  j["v_th"] = o.vth;
  j["alpha"] = o.alpha;
  j["t"] = o.t;
  j["lipschitz_alpha"] = rep.lipschitz_alpha;
  j["infnorm_lambda_minus_i"] = rep.infnorm_lambda_minus_i;
  j["contraction_constant"] = rep.contraction_constant;
  j["satisfied"] = rep.satisfied;
  write_text(o.out, j.dump(2) + "\n");
  return 0;
}

struct bench_opts {
  std::string t = "8,64,512";
  int batch = 4;
  int neurons = 128;
  int reps = 5;
  int threads = 0;  // 0 defers to FPT_THREADS, then the hardware
  std::uint64_t seed = 42;
  std::string out;
};

int run_bench(const bench_opts& o) {
  std::vector<int> t_values;
  for (double v : parse_values(o.t)) t_values.push_back(static_cast<int>(v));
  const std::vector<fpt::bench_record> records =
      fpt::run_benchmark(t_values, o.batch, o.neurons, o.reps, o.threads, o.seed);

  std::ostringstream csv;
  csv << "engine,t,batch,wall_seconds,speedup\n";
  for (const fpt::bench_record& r : records) {
    csv << fpt::engine_name(r.engine) << ',' << r.t << ',' << r.batch << ','
        << format_double(r.wall_seconds) << ',' << format_double(r.speedup_vs_sequential) << '\n';
  }
  write_text(o.out, csv.str());
  return 0;
}

fpt::dataset make_dataset(const std::string& images, const std::string& labels, int classes,
                          int n_per_class, int t, int d, std::uint64_t data_seed) {
  if (!images.empty() || !labels.empty()) {
    if (images.empty() || labels.empty()) {
      throw std::invalid_argument("--images and --labels must be given together");
    }
    return fpt::load_idx(images, labels, t);
  }
  return fpt::generate_synthetic(classes, n_per_class, t, d, data_seed);
}

struct train_opts {
  int classes = 2;
  int n_per_class = 40;
  int t = 16;
  int d = 32;
  int hidden = 64;
  std::string engine = "fpt";
  int epochs = fpt::train_hyper{}.epochs;
  double lr = fpt::train_hyper{}.lr;
  int batch = 8;
  std::uint64_t seed = 1;
  std::uint64_t data_seed = 1234;
  double lambda = 0.25;
  double vth = 1.0;
  int k = 3;
  std::string images, labels;
  std::string save;
  std::string out;
};

int run_train(const train_opts& o) {
  const fpt::dataset data =
      make_dataset(o.images, o.labels, o.classes, o.n_per_class, o.t, o.d, o.data_seed);

  fpt::network_spec spec;
  spec.layer_sizes = {data.d, o.hidden, data.classes};
  spec.engine = fpt::parse_engine(o.engine);
  spec.lif = fpt::lif_params{o.lambda, o.vth, 0.0};
  spec.fpt_cfg.k_max = o.k;
  fpt::mlp_model model = fpt::init_model(spec, o.seed, data.t);

  fpt::train_hyper hyper;
  hyper.lr = o.lr;
  hyper.epochs = o.epochs;
  hyper.batch = o.batch;
  hyper.seed = o.seed;
  const fpt::train_report rep = fpt::train(model, data, hyper);

  if (!o.save.empty()) fpt::save_model(model, o.save);

  json j;
  j["engine"] = o.engine;
  j["epochs"] = o.epochs;
  j["samples"] = data.inputs.size();
  j["t"] = data.t;
  j["seed"] = rep.seed;
  j["final_accuracy"] = rep.final_accuracy;
  j["firing_rate"] = rep.firing_rate;
  j["wall_clock_per_batch"] = rep.wall_clock_per_batch;
  j["epoch_loss"] = rep.epoch_loss;
  write_text(o.out, j.dump(2) + "\n");
  return 0;
}

struct similarity_opts {
  std::string engine_a;  // empty = checkpoint engine when loading, else sequential
  std::string engine_b = "fpt";
  int classes = 2;
  int n_per_class = 40;
  int t = 8;
  int t_eval = 0;  // 0 means evaluate at the training horizon
  int d = 32;
  int hidden = 64;
  int epochs = fpt::train_hyper{}.epochs;
  double lr = fpt::train_hyper{}.lr;
  int batch = 8;
  std::uint64_t seed = 1;
  std::uint64_t data_seed = 1234;
  std::string load;
  std::string out;
};

int run_similarity(const similarity_opts& o) {
  fpt::mlp_model model;
  std::string engine_a = o.engine_a;
  if (!o.load.empty()) {
    model = fpt::load_model(o.load);
    if (engine_a.empty()) engine_a = fpt::engine_label(model.spec.engine);
  } else {
    if (engine_a.empty()) engine_a = "sequential";
    const fpt::dataset data =
        fpt::generate_synthetic(o.classes, o.n_per_class, o.t, o.d, o.data_seed);
    fpt::network_spec spec;
    spec.layer_sizes = {data.d, o.hidden, data.classes};
    spec.engine = fpt::parse_engine(engine_a);
    fpt::mlp_model fresh = fpt::init_model(spec, o.seed, data.t);
    fpt::train_hyper hyper;
    hyper.lr = o.lr;
    hyper.epochs = o.epochs;
    hyper.batch = o.batch;
    hyper.seed = o.seed;
    fpt::train(fresh, data, hyper);
    model = std::move(fresh);
  }

  const int t_eval = o.t_eval > 0 ? o.t_eval : o.t;
  const fpt::dataset eval_data =
      fpt::generate_synthetic(o.classes, o.n_per_class, t_eval, o.d, o.data_seed);
  const fpt::similarity_report rep = fpt::output_cosine_similarity(
      model, fpt::parse_engine(engine_a), fpt::parse_engine(o.engine_b), eval_data);

  json j;
  j["engine_a"] = engine_a;
  j["engine_b"] = o.engine_b;
  j["t_eval"] = t_eval;
  j["samples"] = eval_data.inputs.size();
  j["mean_similarity"] = rep.mean_similarity;
  j["excluded"] = rep.excluded;
  write_text(o.out, j.dump(2) + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LIF spiking-neuron engine: fixed-point parallel solver, analysis, and training"};
  app.require_subcommand(1);
  // Unmatched options inside a subcommand climb to the parent, so --config
  // may sit on either side of the subcommand name.
  app.fallthrough();
  std::string config_path;
  app.add_option("--config", config_path, "JSON config file; flags override its values");

  simulate_opts sim;
  CLI::App* sim_cmd = app.add_subcommand("simulate", "Simulate one neuron and emit its trace");
  sim_cmd->add_option("--t", sim.t, "timesteps");
  sim_cmd->add_option("--k", sim.k, "fixed-point iterations");
  sim_cmd->add_option("--alpha", sim.alpha, "constant sharpness (0 = default ramp)");
  sim_cmd->add_option("--lambda", sim.lambda, "decay factor");
  sim_cmd->add_option("--vth", sim.vth, "firing threshold");
  sim_cmd->add_option("--seed", sim.seed, "input seed");
  sim_cmd->add_option("--engine", sim.engine, "sequential or fpt");
  sim_cmd->add_flag("--bernoulli", sim.bernoulli, "sample spikes instead of thresholding");
  sim_cmd->add_option("--out", sim.out, "CSV path (stdout when omitted)");

  converge_opts cvg;
  CLI::App* cvg_cmd = app.add_subcommand("converge", "Error curves against the sequential oracle");
  cvg_cmd->add_option("--axis", cvg.axis, "iterations, alpha, or timesteps");
  cvg_cmd->add_option("--k", cvg.k, "iteration budget, range or list");
  cvg_cmd->add_option("--alpha", cvg.alpha, "sharpness, range or list");
  cvg_cmd->add_option("--t", cvg.t, "timesteps, range or list");
  cvg_cmd->add_option("--trials", cvg.trials, "random trials per point");
  cvg_cmd->add_option("--seed", cvg.seed, "trial generator seed");
  cvg_cmd->add_option("--lambda", cvg.lambda, "decay factor");
  cvg_cmd->add_option("--vth", cvg.vth, "firing threshold");
  cvg_cmd->add_option("--out", cvg.out, "CSV path (stdout when omitted)");

  gradcheck_opts gchk;
  CLI::App* gchk_cmd =
      app.add_subcommand("gradcheck", "Reverse sweep against central finite differences");
  gchk_cmd->add_option("--t", gchk.t, "timesteps");
  gchk_cmd->add_option("--k", gchk.k, "fixed-point iterations");
  gchk_cmd->add_option("--alpha", gchk.alpha, "constant sharpness (0 = default ramp)");
  gchk_cmd->add_option("--lambda", gchk.lambda, "decay factor");
  gchk_cmd->add_option("--vth", gchk.vth, "firing threshold");
  gchk_cmd->add_option("--step", gchk.step, "finite-difference step");
  gchk_cmd->add_option("--seed", gchk.seed, "input seed");
  gchk_cmd->add_option("--out", gchk.out, "JSON report path");

  analyze_opts ana;
  CLI::App* ana_cmd = app.add_subcommand("analyze", "Contraction condition report");
  ana_cmd->add_option("--lambda", ana.lambda, "decay factor");
  ana_cmd->add_option("--vth", ana.vth, "firing threshold");
  ana_cmd->add_option("--alpha", ana.alpha, "sharpness");
  ana_cmd->add_option("--t", ana.t, "timesteps");
  ana_cmd->add_option("--out", ana.out, "JSON path (stdout when omitted)");

  bench_opts ben;
  CLI::App* ben_cmd = app.add_subcommand("bench", "Wall-clock comparison of the engines");
  ben_cmd->add_option("--t", ben.t, "horizons, range or list");
  ben_cmd->add_option("--batch", ben.batch, "batch size");
  ben_cmd->add_option("--neurons", ben.neurons, "neurons per batch entry");
  ben_cmd->add_option("--reps", ben.reps, "timed repetitions (median reported)");
  ben_cmd->add_option("--threads", ben.threads, "worker threads (0 = FPT_THREADS or hardware)");
  ben_cmd->add_option("--seed", ben.seed, "workload seed");
  ben_cmd->add_option("--out", ben.out, "CSV path (stdout when omitted)");

  train_opts trn;
  CLI::App* trn_cmd = app.add_subcommand("train", "Train a spiking MLP and report metrics");
  trn_cmd->add_option("--classes", trn.classes, "synthetic class count");
  trn_cmd->add_option("--n-per-class", trn.n_per_class, "samples per class");
  trn_cmd->add_option("--t", trn.t, "timesteps");
  trn_cmd->add_option("--d", trn.d, "input width");
  trn_cmd->add_option("--hidden", trn.hidden, "hidden width");
  trn_cmd->add_option("--engine", trn.engine,
                      "sequential, fpt, psn, psu, or fpt_learnable");
  trn_cmd->add_option("--epochs", trn.epochs, "training epochs");
  trn_cmd->add_option("--lr", trn.lr, "learning rate");
  trn_cmd->add_option("--batch", trn.batch, "minibatch size");
  trn_cmd->add_option("--seed", trn.seed, "training seed");
  trn_cmd->add_option("--data-seed", trn.data_seed, "dataset seed");
  trn_cmd->add_option("--lambda", trn.lambda, "decay factor");
  trn_cmd->add_option("--vth", trn.vth, "firing threshold");
  trn_cmd->add_option("--k", trn.k, "fixed-point iterations");
  trn_cmd->add_option("--images", trn.images, "IDX image file (replaces synthetic data)");
  trn_cmd->add_option("--labels", trn.labels, "IDX label file");
  trn_cmd->add_option("--save", trn.save, "checkpoint path to write");
  trn_cmd->add_option("--out", trn.out, "JSON report path (stdout when omitted)");

  similarity_opts simi;
  CLI::App* simi_cmd =
      app.add_subcommand("similarity", "Readout agreement between two neuron engines");
  simi_cmd->add_option("--engine-a", simi.engine_a,
                       "engine the model is trained with (default: checkpoint engine, "
                       "else sequential)");
  simi_cmd->add_option("--engine-b", simi.engine_b, "engine to compare against");
  simi_cmd->add_option("--classes", simi.classes, "synthetic class count");
  simi_cmd->add_option("--n-per-class", simi.n_per_class, "samples per class");
  simi_cmd->add_option("--t", simi.t, "training timesteps");
  simi_cmd->add_option("--t-eval", simi.t_eval, "evaluation timesteps (0 = same as --t)");
  simi_cmd->add_option("--d", simi.d, "input width");
  simi_cmd->add_option("--hidden", simi.hidden, "hidden width");
  simi_cmd->add_option("--epochs", simi.epochs, "training epochs");
  simi_cmd->add_option("--lr", simi.lr, "learning rate");
  simi_cmd->add_option("--batch", simi.batch, "minibatch size");
  simi_cmd->add_option("--seed", simi.seed, "training seed");
  simi_cmd->add_option("--data-seed", simi.data_seed, "dataset seed");
  simi_cmd->add_option("--load", simi.load, "use this checkpoint instead of training");
  simi_cmd->add_option("--out", simi.out, "JSON report path (stdout when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (sim_cmd->parsed()) {
      const json section = load_config_section(config_path, "simulate");
      fill_unset(sim_cmd, "--t", section, "t", sim.t);
      fill_unset(sim_cmd, "--k", section, "k", sim.k);
      fill_unset(sim_cmd, "--alpha", section, "alpha", sim.alpha);
      fill_unset(sim_cmd, "--lambda", section, "lambda", sim.lambda);
      fill_unset(sim_cmd, "--vth", section, "vth", sim.vth);
      fill_unset(sim_cmd, "--seed", section, "seed", sim.seed);
      fill_unset(sim_cmd, "--engine", section, "engine", sim.engine);
      fill_unset(sim_cmd, "--out", section, "out", sim.out);
      return run_simulate(sim);
    }
    if (cvg_cmd->parsed()) {
      const json section = load_config_section(config_path, "converge");
      fill_unset(cvg_cmd, "--axis", section, "axis", cvg.axis);
      fill_unset(cvg_cmd, "--k", section, "k", cvg.k);
      fill_unset(cvg_cmd, "--alpha", section, "alpha", cvg.alpha);
      fill_unset(cvg_cmd, "--t", section, "t", cvg.t);
      fill_unset(cvg_cmd, "--trials", section, "trials", cvg.trials);
      fill_unset(cvg_cmd, "--seed", section, "seed", cvg.seed);
      fill_unset(cvg_cmd, "--lambda", section, "lambda", cvg.lambda);
      fill_unset(cvg_cmd, "--vth", section, "vth", cvg.vth);
      fill_unset(cvg_cmd, "--out", section, "out", cvg.out);
      return run_converge(cvg);
    }
    if (gchk_cmd->parsed()) {
      const json section = load_config_section(config_path, "gradcheck");
      fill_unset(gchk_cmd, "--t", section, "t", gchk.t);
      fill_unset(gchk_cmd, "--k", section, "k", gchk.k);
      fill_unset(gchk_cmd, "--alpha", section, "alpha", gchk.alpha);
      fill_unset(gchk_cmd, "--lambda", section, "lambda", gchk.lambda);
      fill_unset(gchk_cmd, "--vth", section, "vth", gchk.vth);
      fill_unset(gchk_cmd, "--step", section, "step", gchk.step);
      fill_unset(gchk_cmd, "--seed", section, "seed", gchk.seed);
      fill_unset(gchk_cmd, "--out", section, "out", gchk.out);
      return run_gradcheck(gchk);
    }
    if (ana_cmd->parsed()) {
      const json section = load_config_section(config_path, "analyze");
      fill_unset(ana_cmd, "--lambda", section, "lambda", ana.lambda);
      fill_unset(ana_cmd, "--vth", section, "vth", ana.vth);
      fill_unset(ana_cmd, "--alpha", section, "alpha", ana.alpha);
      fill_unset(ana_cmd, "--t", section, "t", ana.t);
      fill_unset(ana_cmd, "--out", section, "out", ana.out);
      return run_analyze(ana);
    }
    if (ben_cmd->parsed()) {
      const json section = load_config_section(config_path, "bench");
      fill_unset(ben_cmd, "--t", section, "t", ben.t);
      fill_unset(ben_cmd, "--batch", section, "batch", ben.batch);
      fill_unset(ben_cmd, "--neurons", section, "neurons", ben.neurons);
      fill_unset(ben_cmd, "--reps", section, "reps", ben.reps);
      fill_unset(ben_cmd, "--threads", section, "threads", ben.threads);
      fill_unset(ben_cmd, "--seed", section, "seed", ben.seed);
      fill_unset(ben_cmd, "--out", section, "out", ben.out);
      return run_bench(ben);
    }
    if (trn_cmd->parsed()) {
      const json section = load_config_section(config_path, "train");
      fill_unset(trn_cmd, "--classes", section, "classes", trn.classes);
      fill_unset(trn_cmd, "--n-per-class", section, "n_per_class", trn.n_per_class);
      fill_unset(trn_cmd, "--t", section, "t", trn.t);
      fill_unset(trn_cmd, "--d", section, "d", trn.d);
      fill_unset(trn_cmd, "--hidden", section, "hidden", trn.hidden);
      fill_unset(trn_cmd, "--engine", section, "engine", trn.engine);
      fill_unset(trn_cmd, "--epochs", section, "epochs", trn.epochs);
      fill_unset(trn_cmd, "--lr", section, "lr", trn.lr);
      fill_unset(trn_cmd, "--batch", section, "batch", trn.batch);
      fill_unset(trn_cmd, "--seed", section, "seed", trn.seed);
      fill_unset(trn_cmd, "--data-seed", section, "data_seed", trn.data_seed);
      fill_unset(trn_cmd, "--lambda", section, "lambda", trn.lambda);
      fill_unset(trn_cmd, "--vth", section, "vth", trn.vth);
      fill_unset(trn_cmd, "--k", section, "k", trn.k);
      fill_unset(trn_cmd, "--images", section, "images", trn.images);
      fill_unset(trn_cmd, "--labels", section, "labels", trn.labels);
      fill_unset(trn_cmd, "--save", section, "save", trn.save);
      fill_unset(trn_cmd, "--out", section, "out", trn.out);
      return run_train(trn);
    }
    if (simi_cmd->parsed()) {
      const json section = load_config_section(config_path, "similarity");
      fill_unset(simi_cmd, "--engine-a", section, "engine_a", simi.engine_a);
      fill_unset(simi_cmd, "--engine-b", section, "engine_b", simi.engine_b);
      fill_unset(simi_cmd, "--classes", section, "classes", simi.classes);
      fill_unset(simi_cmd, "--n-per-class", section, "n_per_class", simi.n_per_class);
      fill_unset(simi_cmd, "--t", section, "t", simi.t);
      fill_unset(simi_cmd, "--t-eval", section, "t_eval", simi.t_eval);
      fill_unset(simi_cmd, "--d", section, "d", simi.d);
      fill_unset(simi_cmd, "--hidden", section, "hidden", simi.hidden);
      fill_unset(simi_cmd, "--epochs", section, "epochs", simi.epochs);
      fill_unset(simi_cmd, "--lr", section, "lr", simi.lr);
      fill_unset(simi_cmd, "--batch", section, "batch", simi.batch);
      fill_unset(simi_cmd, "--seed", section, "seed", simi.seed);
      fill_unset(simi_cmd, "--data-seed", section, "data_seed", simi.data_seed);
      fill_unset(simi_cmd, "--load", section, "load", simi.load);
      fill_unset(simi_cmd, "--out", section, "out", simi.out);
      return run_similarity(simi);
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
