// Copyright 2026 the licq authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "licq/random.hpp"
#include "licq/tensor.hpp"

namespace licq {

enum class DatasetSplit { kTrain, kEval };

// Image files (.png/.ppm) of a directory, sorted lexicographically by name.
std::vector<std::string> list_image_files(const std::string& dir);

// Decodes every listed image; undecodable files are skipped with a warning
// on stderr and counted into *skipped when given.
std::vector<Tensor> load_images(const std::vector<std::string>& paths, int* skipped = nullptr);

// Ingestion per the training protocol: decodes the directory and returns one
// crop_size crop per image -- randomly placed for the train split (seeded),
// centered for eval. Order is the sorted file order.
std::vector<Tensor> load_image_dataset(const std::string& dir, int crop_size, DatasetSplit split,
                                       uint64_t seed = 0, int* skipped = nullptr);

// Deterministic calibration subset: a pure function of the sorted listing,
// the seed and the count. The content hash covers the selected files' bytes.
struct CalibSet {
  std::vector<std::string> paths;
  uint64_t seed = 0;
  int count = 0;
  uint64_t content_hash = 0;
};

CalibSet select_calibration(const std::string& dir, int count = 16, uint64_t seed = 0);

// Loads a calibration set as one batch of center crops.
Tensor calibration_batch(const CalibSet& calib, int crop_size);

// Writes `count` synthetic photographic-style PNGs (smooth gradients, soft
// blobs, oriented texture, light noise) into dir. Sizes are drawn from
// [min_size, max_size] and the whole set is a pure function of the seed.
std::vector<std::string> generate_toy_dataset(const std::string& dir, int count, uint64_t seed,
                                              int min_size = 96, int max_size = 160);

uint64_t fnv1a_file(const std::string& path);

}  // namespace licq
