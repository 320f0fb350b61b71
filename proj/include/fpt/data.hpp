#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fpt/rng.hpp"

namespace fpt {

// Sample i lives in inputs[i], flattened time-major: entry t*d + j is input
// dimension j at timestep t.
struct dataset {
  int t = 0;
  int d = 0;
  int classes = 0;
  std::vector<std::vector<double>> inputs;
  std::vector<int> labels;
  std::string source;
  std::uint64_t seed = 0;
};

// Rate-coded toy task: every class gets a fixed random template in [0,1]^d and
// samples are the template plus per-timestep Gaussian noise. Fully determined
// by the seed.
inline dataset generate_synthetic(int classes, int n_per_class, int t, int d,
                                  std::uint64_t seed, double noise_std = 0.1) {
  if (classes < 1 || n_per_class < 1 || t < 1 || d < 1) {
    throw std::invalid_argument("all synthetic dataset counts must be at least 1");
  }
  dataset ds;
  ds.t = t;
  ds.d = d;
  ds.classes = classes;
  ds.source = "synthetic";
  ds.seed = seed;

  std::vector<std::vector<double>> templates(static_cast<std::size_t>(classes));
  for (int k = 0; k < classes; ++k) {
    counter_rng rng(derive_seed(seed, 0x7e000000ull + static_cast<std::uint64_t>(k)));
    templates[static_cast<std::size_t>(k)].resize(static_cast<std::size_t>(d));
    for (double& x : templates[static_cast<std::size_t>(k)]) x = rng.next_uniform();
  }

  std::uint64_t sample_index = 0;
  for (int k = 0; k < classes; ++k) {
    for (int n = 0; n < n_per_class; ++n, ++sample_index) {
      counter_rng rng(derive_seed(seed, 0x5a000000ull + sample_index));
      std::vector<double> x(static_cast<std::size_t>(t) * static_cast<std::size_t>(d));
      for (int step = 0; step < t; ++step) {
        for (int j = 0; j < d; ++j) {
          x[static_cast<std::size_t>(step) * d + j] =
              templates[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)] +
              noise_std * rng.next_normal();
        }
      }
      ds.inputs.push_back(std::move(x));
      ds.labels.push_back(k);
    }
  }
  return ds;
}

struct idx_magic_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct idx_truncated_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct idx_count_mismatch_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::uint32_t read_be32(std::istream& in, const std::string& path) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) {
    throw idx_truncated_error("unexpected end of file in " + path);
  }
  return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) | (std::uint32_t{b[2]} << 8) |
         std::uint32_t{b[3]};
}

}  // namespace detail

// Reads the classic big-endian image/label pair: magic 0x00000803 with
// (count, rows, cols) for images, 0x00000801 with (count) for labels. Pixels
// land in [0,1] and are repeated as a constant current for t timesteps.
inline dataset load_idx(const std::string& images_path, const std::string& labels_path, int t) {
  if (t < 1) throw std::invalid_argument("horizon must be at least one step");
  std::ifstream img(images_path, std::ios::binary);
  if (!img) throw std::runtime_error("cannot open " + images_path);
  std::ifstream lab(labels_path, std::ios::binary);
  if (!lab) throw std::runtime_error("cannot open " + labels_path);

  const std::uint32_t img_magic = detail::read_be32(img, images_path);
  if (img_magic != 0x00000803u) {
    throw idx_magic_error("bad image magic in " + images_path);
  }
  const std::uint32_t n_images = detail::read_be32(img, images_path);
  const std::uint32_t rows = detail::read_be32(img, images_path);
  const std::uint32_t cols = detail::read_be32(img, images_path);

  const std::uint32_t lab_magic = detail::read_be32(lab, labels_path);
  if (lab_magic != 0x00000801u) {
    throw idx_magic_error("bad label magic in " + labels_path);
  }
  const std::uint32_t n_labels = detail::read_be32(lab, labels_path);
  if (n_images != n_labels) {
    throw idx_count_mismatch_error("image/label counts disagree: " + std::to_string(n_images) +
                                   " vs " + std::to_string(n_labels));
  }

  const std::size_t d = static_cast<std::size_t>(rows) * cols;
  dataset ds;
  ds.t = t;
  ds.d = static_cast<int>(d);
  ds.source = images_path;
  std::vector<unsigned char> pixels(d);
  for (std::uint32_t i = 0; i < n_images; ++i) {
    if (!img.read(reinterpret_cast<char*>(pixels.data()), static_cast<std::streamsize>(d))) {
      throw idx_truncated_error("image payload truncated in " + images_path);
    }
    std::vector<double> x(static_cast<std::size_t>(t) * d);
    for (std::size_t j = 0; j < d; ++j) {
      const double v = pixels[j] / 255.0;
      for (int step = 0; step < t; ++step) x[static_cast<std::size_t>(step) * d + j] = v;
    }
    ds.inputs.push_back(std::move(x));
  }
  for (std::uint32_t i = 0; i < n_labels; ++i) {
    unsigned char b = 0;
    if (!lab.read(reinterpret_cast<char*>(&b), 1)) {
      throw idx_truncated_error("label payload truncated in " + labels_path);
    }
    ds.labels.push_back(static_cast<int>(b));
  }
  int max_label = 0;
  for (int l : ds.labels) max_label = std::max(max_label, l);
  ds.classes = max_label + 1;
  return ds;
}

}  // namespace fpt
