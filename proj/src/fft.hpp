#pragma once

#include <span>

#include "lacuna/trigpoly.hpp"

namespace lacuna::detail {

// In place, unnormalized. backward: out[k] = sum_b in[b] e^{+2 pi i b k / G},
// i.e. grid samples of sum_b in[b] e^{i b x}. forward uses e^{-...}.
void dft_backward(std::span<cplx> data);
void dft_forward(std::span<cplx> data);

}  // namespace lacuna::detail
