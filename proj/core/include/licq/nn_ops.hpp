// Copyright 2026 the licq authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "licq/autodiff.hpp"

namespace licq {

// 2-d convolution. x: (N, C_in, H, W); w: (C_out, C_in, k, k); b: (C_out).
// Output spatial size is floor((H + 2*pad - k)/stride) + 1; with pad = k/2
// this is ceil(H/stride) for the odd kernels used here.
Var conv2d(const Var& x, const Var& w, const Var& b, int stride, int pad);

// Transposed 2-d convolution with the same (C_out, C_in, k, k) weight layout.
// Output spatial size is (H-1)*stride - 2*pad + k + out_pad.
Var conv_transpose2d(const Var& x, const Var& w, const Var& b, int stride, int pad, int out_pad);

int conv2d_out_size(int in, int k, int stride, int pad);
int conv_transpose2d_out_size(int in, int k, int stride, int pad, int out_pad);

}  // namespace licq
