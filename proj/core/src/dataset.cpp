// Copyright 2026 the licq authors
// SPDX-License-Identifier: Apache-2.0
#include "licq/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "licq/image.hpp"

namespace fs = std::filesystem;

namespace licq {

std::vector<std::string> list_image_files(const std::string& dir) {
  if (!fs::is_directory(dir)) throw std::invalid_argument("not a directory: " + dir);
  std::vector<std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    const std::string ext = e.path().extension().string();
    if (ext == ".png" || ext == ".ppm") out.push_back(e.path().string());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Tensor> load_images(const std::vector<std::string>& paths, int* skipped) {
  std::vector<Tensor> out;
  out.reserve(paths.size());
  int bad = 0;
  for (const auto& p : paths) {
    try {
      out.push_back(load_image(p));
    } catch (const std::exception& e) {
      std::fprintf(stderr, "warning: skipping unreadable image %s (%s)\n", p.c_str(), e.what());
      ++bad;
    }
  }
  if (skipped) *skipped = bad;
  return out;
}

std::vector<Tensor> load_image_dataset(const std::string& dir, int crop_size, DatasetSplit split,
                                       uint64_t seed, int* skipped) {
  const auto files = list_image_files(dir);
  if (files.empty()) throw std::invalid_argument("no images in directory: " + dir);
  auto images = load_images(files, skipped);
  if (images.empty()) throw std::invalid_argument("no decodable images in directory: " + dir);

  Rng rng(seed);
  std::vector<Tensor> out;
  out.reserve(images.size());
  for (const auto& img : images) {
    const int64_t h = img.dim(1), w = img.dim(2);
    if (h < crop_size || w < crop_size)
      throw std::invalid_argument("image smaller than crop size in " + dir);
    int64_t oy, ox;
    if (split == DatasetSplit::kTrain) {
      oy = h == crop_size ? 0 : rng.uniform_int(h - crop_size + 1);
      ox = w == crop_size ? 0 : rng.uniform_int(w - crop_size + 1);
    } else {
      oy = (h - crop_size) / 2;
      ox = (w - crop_size) / 2;
    }
    Tensor crop({3, crop_size, crop_size});
    for (int64_t c = 0; c < 3; ++c)
      for (int64_t y = 0; y < crop_size; ++y)
        for (int64_t x = 0; x < crop_size; ++x)
          crop.data()[(c * crop_size + y) * crop_size + x] =
              img.data()[(c * h + oy + y) * w + ox + x];
    out.push_back(std::move(crop));
  }
  return out;
}

uint64_t fnv1a_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read: " + path);
  uint64_t h = 1469598103934665603ull;
  char buf[4096];
  while (f.read(buf, sizeof(buf)) || f.gcount() > 0) {
    for (std::streamsize i = 0; i < f.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 1099511628211ull;
    }
    if (!f) break;
  }
  return h;
}

CalibSet select_calibration(const std::string& dir, int count, uint64_t seed) {
  if (count < 1) throw std::invalid_argument("select_calibration: count must be >= 1");
  auto files = list_image_files(dir);
  if (static_cast<int>(files.size()) < count)
    throw std::invalid_argument("select_calibration: directory has fewer images than requested");
  Rng rng(seed);
  deterministic_shuffle(files, rng);
  files.resize(static_cast<size_t>(count));
  std::sort(files.begin(), files.end());

  CalibSet c;
  c.paths = files;
  c.seed = seed;
  c.count = count;
  uint64_t h = 1469598103934665603ull;
  for (const auto& p : files) {
    const uint64_t fh = fnv1a_file(p);
    for (int i = 0; i < 8; ++i) {
      h ^= (fh >> (8 * i)) & 0xff;
      h *= 1099511628211ull;
    }
  }
  c.content_hash = h;
  return c;
}

Tensor calibration_batch(const CalibSet& calib, int crop_size) {
  if (calib.paths.empty()) throw std::invalid_argument("calibration_batch: empty set");
  Tensor batch({static_cast<int64_t>(calib.paths.size()), 3, crop_size, crop_size});
  for (size_t i = 0; i < calib.paths.size(); ++i) {
    Tensor img = load_image(calib.paths[i]);
    if (img.dim(1) < crop_size || img.dim(2) < crop_size)
      throw std::invalid_argument("calibration image smaller than crop: " + calib.paths[i]);
    Tensor c = center_crop(img, crop_size, crop_size);
    std::copy(c.data(), c.data() + c.size(),
              batch.data() + static_cast<int64_t>(i) * 3 * crop_size * crop_size);
  }
  return batch;
}

namespace {

// One synthetic image: layered smooth structure so that learned transforms
// have non-trivial statistics to model.
Tensor toy_image(int64_t h, int64_t w, Rng& rng) {
  Tensor img({3, h, w});
  // background gradient
  double gx = rng.uniform(-1.0, 1.0), gy = rng.uniform(-1.0, 1.0);
  double base[3], tip[3];
  for (int c = 0; c < 3; ++c) {
    base[c] = rng.uniform(0.1, 0.9);
    tip[c] = rng.uniform(0.1, 0.9);
  }
  for (int64_t c = 0; c < 3; ++c)
    for (int64_t y = 0; y < h; ++y)
      for (int64_t x = 0; x < w; ++x) {
        double t = 0.5 + 0.5 * (gx * (2.0 * x / w - 1.0) + gy * (2.0 * y / h - 1.0)) / 2.0;
        img.data()[(c * h + y) * w + x] = base[c] * (1.0 - t) + tip[c] * t;
      }
  // soft ellipses
  const int blobs = 3 + static_cast<int>(rng.uniform_int(4));
  for (int bidx = 0; bidx < blobs; ++bidx) {
    double cx = rng.uniform(0.1, 0.9) * w, cy = rng.uniform(0.1, 0.9) * h;
    double rx = rng.uniform(0.08, 0.3) * w, ry = rng.uniform(0.08, 0.3) * h;
    double col[3] = {rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0)};
    double alpha = rng.uniform(0.4, 0.9);
    for (int64_t y = 0; y < h; ++y)
      for (int64_t x = 0; x < w; ++x) {
        double dx = (x - cx) / rx, dy = (y - cy) / ry;
        double d2 = dx * dx + dy * dy;
        if (d2 > 4.0) continue;
        double m = alpha * std::exp(-2.0 * d2);
        for (int64_t c = 0; c < 3; ++c) {
          double& v = img.data()[(c * h + y) * w + x];
          v = v * (1.0 - m) + col[c] * m;
        }
      }
  }
  // oriented sinusoidal texture
  double fx = rng.uniform(0.02, 0.2), fy = rng.uniform(0.02, 0.2);
  double amp = rng.uniform(0.02, 0.08), phase = rng.uniform(0.0, 2.0 * M_PI);
  for (int64_t c = 0; c < 3; ++c)
    for (int64_t y = 0; y < h; ++y)
      for (int64_t x = 0; x < w; ++x) {
        double& v = img.data()[(c * h + y) * w + x];
        v += amp * std::sin(2.0 * M_PI * (fx * x + fy * y) + phase);
      }
  // light sensor-style noise
  for (int64_t i = 0; i < img.size(); ++i) {
    double& v = img[i];
    v += 0.01 * rng.normal();
    v = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
  }
  return img;
}

}  // namespace

std::vector<std::string> generate_toy_dataset(const std::string& dir, int count, uint64_t seed,
                                              int min_size, int max_size) {
  if (count < 1) throw std::invalid_argument("generate_toy_dataset: count must be >= 1");
  if (min_size < 16 || max_size < min_size)
    throw std::invalid_argument("generate_toy_dataset: bad size range");
  fs::create_directories(dir);
  Rng rng(seed);
  std::vector<std::string> paths;
  paths.reserve(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i) {
    const int64_t h = min_size + rng.uniform_int(max_size - min_size + 1);
    const int64_t w = min_size + rng.uniform_int(max_size - min_size + 1);
    Tensor img = toy_image(h, w, rng);
    char name[32];
    std::snprintf(name, sizeof(name), "toy_%04d.png", i);
    const std::string path = (fs::path(dir) / name).string();
    save_image_png(path, img);
    paths.push_back(path);
  }
  return paths;
}

}  // namespace licq
