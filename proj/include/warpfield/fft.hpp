#pragma once

#include <vector>

#include "warpfield/util.hpp"

namespace warpfield::fft {

bool is_pow2(int n);

// In-place radix-2 transform of a power-of-two-length array:
//   a[m] <- Σ_j a[j] exp(sign · 2πi jm / n),  no normalization.
void transform(std::vector<Complex>& a, int sign);

// Transform along every axis of a row-major array with power-of-two extents.
void transform_nd(std::vector<Complex>& a, const std::vector<int>& extents, int sign);

}  // namespace warpfield::fft
