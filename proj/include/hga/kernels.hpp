#pragma once

#include <cstdint>
#include <span>

#include "hga/tensor.hpp"

namespace hga::kernels {

// C = A·B (or accumulate into C). Shapes: A m×k, B k×n.
void matmul(const Tensor& a, const Tensor& b, Tensor& c, bool accumulate = false);
// C = A·Bᵀ. A m×k, B n×k.
void matmul_nt(const Tensor& a, const Tensor& b, Tensor& c, bool accumulate = false);
// C = Aᵀ·B. A k×m, B k×n.
void matmul_tn(const Tensor& a, const Tensor& b, Tensor& c, bool accumulate = false);

// Rotates consecutive column pairs (2t, 2t+1) of every row i by
// angle positions[i] * base^(-2t/cols). inverse rotates by the negated angle.
void rotate_pairs(Tensor& x, std::span<const int> positions, double base, bool inverse = false);

// log(1 + sum_c exp(sign * x_c)) over cells with selected[c] != 0, with the
// implicit zero element included in the max shift.
double log1p_sum_exp(std::span<const double> x, std::span<const std::uint8_t> selected, double sign);

}  // namespace hga::kernels
