// Copyright 2026 the licq authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "licq/tensor.hpp"

namespace licq {

// Decodes an 8-bit PNG or PPM (P6) image to a (3,H,W) tensor in [0,1].
// Grayscale inputs are replicated to three channels. Throws on failure.
Tensor load_image(const std::string& path);

// Writes a (3,H,W) tensor in [0,1] as an 8-bit RGB PNG / PPM.
void save_image_png(const std::string& path, const Tensor& image);
void save_image_ppm(const std::string& path, const Tensor& image);

// Pads a (3,H,W) image on the right/bottom to the next multiple of
// `multiple`, mirroring rows/columns (clamping when the image is smaller
// than the pad itself).
Tensor pad_to_multiple_reflect(const Tensor& image, int multiple);

// Center crop of a (3,H,W) image.
Tensor center_crop(const Tensor& image, int64_t h, int64_t w);

}  // namespace licq
