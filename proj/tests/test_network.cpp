#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "fpt/checkpoint.hpp"
#include "fpt/data.hpp"
#include "fpt/forward.hpp"
#include "fpt/network.hpp"

using Catch::Approx;

namespace {

fpt::network_spec small_spec(int d, int hidden, int classes, fpt::neuron_engine engine) {
  fpt::network_spec spec;
  spec.layer_sizes = hidden > 0 ? std::vector<int>{d, hidden, classes}
                                : std::vector<int>{d, classes};
  spec.engine = engine;
  return spec;
}

fpt::dataset two_class_task() { return fpt::generate_synthetic(2, 10, 8, 16, 321); }

}  // namespace

TEST_CASE("engine names round-trip") {
  for (fpt::neuron_engine e :
       {fpt::neuron_engine::sequential_lif, fpt::neuron_engine::fpt, fpt::neuron_engine::psn,
        fpt::neuron_engine::psu, fpt::neuron_engine::fpt_learnable}) {
    REQUIRE(fpt::parse_engine(fpt::engine_label(e)) == e);
  }
  REQUIRE_THROWS_AS(fpt::parse_engine("boltzmann"), std::invalid_argument);
  REQUIRE_THROWS_AS(fpt::parse_readout("argmax"), std::invalid_argument);
}

TEST_CASE("a single wired unit matches the standalone solver") {
  const int t = 6;
  fpt::network_spec spec = small_spec(1, 0, 1, fpt::neuron_engine::fpt);
  fpt::mlp_model m = fpt::init_model(spec, 5, t);
  const double w = m.weights[0].a[0];

  const std::vector<double> x = {0.9, 1.4, -0.2, 2.0, 0.1, 1.1};
  std::vector<double> pre(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) pre[i] = w * x[i];

  const fpt::matrix lam = fpt::build_decay_matrix(t, spec.lif.lambda);
  const fpt::sample_pass pass = fpt::forward_sample(m, x, t, fpt::neuron_engine::fpt, lam);
  const fpt::forward_trace want = fpt::fpt_forward(pre, spec.lif, m.spec.fpt_cfg);

  REQUIRE(pass.layers.size() == 1);
  REQUIRE(pass.layers[0].units[0].spikes == want.s_star);
  REQUIRE(pass.layers[0].units[0].membrane == want.u_star);
  double count = 0.0;
  for (double s : want.s_star) count += s;
  REQUIRE(pass.logits[0] == count);
}

TEST_CASE("a zero learning rate never moves the weights") {
  const fpt::dataset data = two_class_task();
  fpt::mlp_model m = fpt::init_model(small_spec(16, 24, 2, fpt::neuron_engine::fpt), 9, data.t);
  const std::vector<fpt::matrix> before = m.weights;

  fpt::train_hyper hyper;
  hyper.lr = 0.0;
  hyper.epochs = 2;
  fpt::train(m, data, hyper);
  for (std::size_t l = 0; l < before.size(); ++l) {
    REQUIRE(m.weights[l].a == before[l].a);
  }
}

TEST_CASE("loss falls over the first five epochs under either engine") {
  const fpt::dataset data = two_class_task();
  for (fpt::neuron_engine e : {fpt::neuron_engine::sequential_lif, fpt::neuron_engine::fpt}) {
    fpt::mlp_model m = fpt::init_model(small_spec(16, 24, 2, e), 9, data.t);
    fpt::train_hyper hyper;
    hyper.epochs = 5;
    hyper.lr = 0.5;
    hyper.batch = 4;
    const fpt::train_report rep = fpt::train(m, data, hyper);
    REQUIRE(rep.epoch_loss.size() == 5);
    INFO("engine " << fpt::engine_label(e));
    REQUIRE(rep.epoch_loss[4] < rep.epoch_loss[0]);
    REQUIRE(rep.firing_rate >= 0.0);
    REQUIRE(rep.firing_rate <= 1.0);
  }
}

TEST_CASE("evaluation is a pure function of model and data") {
  const fpt::dataset data = two_class_task();
  fpt::mlp_model m = fpt::init_model(small_spec(16, 24, 2, fpt::neuron_engine::fpt), 10, data.t);
  const double a = fpt::evaluate(m, data);
  const double b = fpt::evaluate(m, data);
  REQUIRE(a == b);
}

TEST_CASE("untrained networks sit at chance level") {
  const fpt::dataset data = fpt::generate_synthetic(10, 20, 8, 16, 654);
  double mean = 0.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const fpt::mlp_model m =
        fpt::init_model(small_spec(16, 0, 10, fpt::neuron_engine::fpt), 100 + seed, data.t);
    mean += fpt::evaluate(m, data);
  }
  mean /= 5.0;
  REQUIRE(mean >= 0.05);
  REQUIRE(mean <= 0.15);
}

TEST_CASE("a tiny network memorizes four samples") {
  const fpt::dataset data = fpt::generate_synthetic(4, 1, 8, 16, 900, 0.05);
  fpt::mlp_model m = fpt::init_model(small_spec(16, 32, 4, fpt::neuron_engine::fpt), 3, data.t);
  fpt::train_hyper hyper;
  hyper.epochs = 150;
  hyper.lr = 0.3;
  hyper.batch = 4;
  const fpt::train_report rep = fpt::train(m, data, hyper);
  REQUIRE(rep.final_accuracy == 1.0);
}

TEST_CASE("training is deterministic under a fixed seed") {
  const fpt::dataset data = two_class_task();
  fpt::train_hyper hyper;
  hyper.epochs = 10;

  fpt::mlp_model a = fpt::init_model(small_spec(16, 24, 2, fpt::neuron_engine::fpt), 21, data.t);
  const fpt::train_report ra = fpt::train(a, data, hyper);
  fpt::mlp_model b = fpt::init_model(small_spec(16, 24, 2, fpt::neuron_engine::fpt), 21, data.t);
  const fpt::train_report rb = fpt::train(b, data, hyper);

  REQUIRE(ra.epoch_loss == rb.epoch_loss);
  REQUIRE(ra.final_accuracy == rb.final_accuracy);
  REQUIRE(ra.firing_rate == rb.firing_rate);
  for (std::size_t l = 0; l < a.weights.size(); ++l) {
    REQUIRE(a.weights[l].a == b.weights[l].a);
  }
}

TEST_CASE("an engine swap barely changes the spike trains") {
  const fpt::dataset data = two_class_task();
  fpt::mlp_model m =
      fpt::init_model(small_spec(16, 24, 2, fpt::neuron_engine::sequential_lif), 31, data.t);
  fpt::train_hyper hyper;
  hyper.epochs = 20;
  fpt::train(m, data, hyper);

  const fpt::matrix lam = fpt::build_decay_matrix(data.t, m.spec.lif.lambda);
  double mismatched = 0.0, total = 0.0;
  for (const std::vector<double>& x : data.inputs) {
    const fpt::sample_pass seq =
        fpt::forward_sample(m, x, data.t, fpt::neuron_engine::sequential_lif, lam);
    const fpt::sample_pass par = fpt::forward_sample(m, x, data.t, fpt::neuron_engine::fpt, lam);
    for (std::size_t l = 0; l < seq.layers.size(); ++l) {
      for (std::size_t u = 0; u < seq.layers[l].units.size(); ++u) {
        const std::vector<double>& ss = seq.layers[l].units[u].spikes;
        const std::vector<double>& sp = par.layers[l].units[u].spikes;
        for (std::size_t step = 0; step < ss.size(); ++step) {
          if (ss[step] != sp[step]) mismatched += 1.0;
          total += 1.0;
        }
      }
    }
  }
  REQUIRE(mismatched / total < 0.05);
}

TEST_CASE("an engine compared with itself is perfectly similar") {
  const fpt::dataset data = two_class_task();
  fpt::mlp_model m = fpt::init_model(small_spec(16, 24, 2, fpt::neuron_engine::fpt), 41, data.t);
  fpt::train_hyper hyper;
  // Hot step size so the output layer starts firing inside the short budget;
  // quiescent outputs would be excluded from the similarity mean.
  hyper.lr = 0.5;
  hyper.epochs = 5;
  fpt::train(m, data, hyper);

  const fpt::similarity_report rep =
      fpt::output_cosine_similarity(m, fpt::neuron_engine::fpt, fpt::neuron_engine::fpt, data);
  REQUIRE(rep.mean_similarity == 1.0);
  REQUIRE(rep.excluded < static_cast<int>(data.inputs.size()));
}

TEST_CASE("learnable engines keep their structural constraints while training") {
  const fpt::dataset data = two_class_task();

  fpt::mlp_model learn =
      fpt::init_model(small_spec(16, 24, 2, fpt::neuron_engine::fpt_learnable), 51, data.t);
  fpt::train_hyper hyper;
  // Hot step size so the loss moves off its quiet-start plateau within five epochs.
  hyper.lr = 0.5;
  hyper.epochs = 5;
  const fpt::train_report rep = fpt::train(learn, data, hyper);
  REQUIRE(rep.epoch_loss.back() < rep.epoch_loss.front());
  for (const fpt::learnable_neuron_params& p : learn.neuron_layers) {
    for (int i = 0; i < p.a.rows; ++i) {
      for (int j = i + 1; j < p.a.cols; ++j) REQUIRE(p.a(i, j) == 0.0);
    }
  }

  fpt::mlp_model psu = fpt::init_model(small_spec(16, 24, 2, fpt::neuron_engine::psu), 52, data.t);
  fpt::train_hyper short_hyper;
  short_hyper.epochs = 3;
  fpt::train(psu, data, short_hyper);
  for (const fpt::learnable_neuron_params& p : psu.neuron_layers) {
    REQUIRE(p.b == std::vector<double>(p.b.size(), p.v_th));
  }
}

TEST_CASE("the membrane readout is inference-only") {
  const fpt::dataset data = two_class_task();
  fpt::network_spec spec = small_spec(16, 24, 2, fpt::neuron_engine::fpt);
  spec.readout = fpt::readout_mode::mean_membrane;
  fpt::mlp_model m = fpt::init_model(spec, 61, data.t);

  const double acc = fpt::evaluate(m, data);
  REQUIRE(acc >= 0.0);
  REQUIRE(acc <= 1.0);
  fpt::train_hyper hyper;
  hyper.epochs = 1;
  REQUIRE_THROWS_AS(fpt::train(m, data, hyper), std::invalid_argument);
}

TEST_CASE("models and datasets must agree on their shape") {
  const fpt::dataset data = two_class_task();
  fpt::mlp_model wrong_in =
      fpt::init_model(small_spec(8, 24, 2, fpt::neuron_engine::fpt), 71, data.t);
  REQUIRE_THROWS_AS(fpt::evaluate(wrong_in, data), std::invalid_argument);

  fpt::mlp_model wrong_out =
      fpt::init_model(small_spec(16, 24, 3, fpt::neuron_engine::fpt), 72, data.t);
  REQUIRE_THROWS_AS(fpt::evaluate(wrong_out, data), std::invalid_argument);

  fpt::dataset empty = data;
  empty.inputs.clear();
  empty.labels.clear();
  fpt::mlp_model ok = fpt::init_model(small_spec(16, 24, 2, fpt::neuron_engine::fpt), 73, data.t);
  REQUIRE_THROWS_AS(fpt::evaluate(ok, empty), std::invalid_argument);

  REQUIRE_THROWS_AS(fpt::init_model(fpt::network_spec{}, 1, 4), std::invalid_argument);
}

TEST_CASE("checkpoints restore a model bit for bit") {
  const std::filesystem::path dir = std::filesystem::temp_directory_path() / "fpt_ckpt_test";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "model.fpt").string();

  const fpt::dataset data = two_class_task();
  fpt::mlp_model m =
      fpt::init_model(small_spec(16, 24, 2, fpt::neuron_engine::fpt_learnable), 81, data.t);
  fpt::train_hyper hyper;
  hyper.epochs = 3;
  fpt::train(m, data, hyper);

  fpt::save_model(m, path);
  const fpt::mlp_model back = fpt::load_model(path);

  REQUIRE(back.spec.layer_sizes == m.spec.layer_sizes);
  REQUIRE(back.spec.engine == m.spec.engine);
  REQUIRE(back.spec.readout == m.spec.readout);
  REQUIRE(back.spec.lif.lambda == m.spec.lif.lambda);
  REQUIRE(back.spec.fpt_cfg.k_max == m.spec.fpt_cfg.k_max);
  REQUIRE(back.spec.fpt_cfg.surrogate.alpha_forward == m.spec.fpt_cfg.surrogate.alpha_forward);
  REQUIRE(back.t == m.t);
  REQUIRE(back.init_seed == m.init_seed);
  REQUIRE(back.weights.size() == m.weights.size());
  for (std::size_t l = 0; l < m.weights.size(); ++l) {
    REQUIRE(back.weights[l].a == m.weights[l].a);
  }
  REQUIRE(back.neuron_layers.size() == m.neuron_layers.size());
  for (std::size_t l = 0; l < m.neuron_layers.size(); ++l) {
    REQUIRE(back.neuron_layers[l].a.a == m.neuron_layers[l].a.a);
    REQUIRE(back.neuron_layers[l].b == m.neuron_layers[l].b);
  }
  REQUIRE(fpt::evaluate(back, data) == fpt::evaluate(m, data));

  std::error_code ec;
  std::filesystem::remove_all(dir, ec);
}

TEST_CASE("corrupt checkpoints are rejected") {
  const std::filesystem::path dir = std::filesystem::temp_directory_path() / "fpt_ckpt_bad";
  std::filesystem::create_directories(dir);

  const std::string not_magic = (dir / "junk.fpt").string();
  {
    std::ofstream out(not_magic, std::ios::binary);
    out << "NOTMODEL----------------";
  }
  REQUIRE_THROWS_AS(fpt::load_model(not_magic), std::runtime_error);

  const fpt::dataset data = two_class_task();
  fpt::mlp_model m = fpt::init_model(small_spec(16, 24, 2, fpt::neuron_engine::fpt), 91, data.t);
  const std::string good = (dir / "good.fpt").string();
  fpt::save_model(m, good);
  std::error_code ec;
  const std::uintmax_t full = std::filesystem::file_size(good, ec);
  std::filesystem::resize_file(good, full - 16, ec);
  REQUIRE_THROWS_AS(fpt::load_model(good), std::runtime_error);

  REQUIRE_THROWS_AS(fpt::load_model((dir / "absent.fpt").string()), std::runtime_error);
  std::filesystem::remove_all(dir, ec);
}
