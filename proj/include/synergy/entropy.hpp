#pragma once

#include <initializer_list>
#include <map>
#include <span>
#include <vector>

#include "synergy/mbits.hpp"
#include "synergy/tensor.hpp"

namespace synergy {

// Probabilistic entropy and transmission over sparse categorical counts.
//
// Probabilities are maximum-likelihood cell/total ratios, logarithms are
// base 2, and every result is reported in millibits. The convention
// 0 * log 0 = 0 holds structurally: zero cells are never stored, so they
// never reach a log. Summations always run over cells sorted by index,
// which makes results bit-identical across runs and thread counts.

// H = -sum_i (c_i/N) log2(c_i/N), in mbits. Zero entries are skipped;
// throws AllZero when no entry is positive.
Mbits entropy(std::span<const Count> counts);
Mbits entropy(std::initializer_list<Count> counts);

// Marginal counts over the kept axes, summed over the dropped ones.
// Keys are full cell indices with dropped coordinates collapsed to 0;
// the grand total is preserved. Throws EmptySubset for an empty keep set.
std::map<CellIndex, Count> marginalize(const ContingencyTensor& tensor,
                                       std::span<const AxisId> keep);
std::map<CellIndex, Count> marginalize(const ContingencyTensor& tensor,
                                       std::initializer_list<AxisId> keep);

// Entropy of a marginal produced by marginalize().
Mbits entropy_of(const std::map<CellIndex, Count>& marginal, Count total);

// Bivariate transmission T_ab = H_a + H_b - H_ab over the pair's marginal.
// Non-negative up to numerical noise; zero when the pair factorizes.
Mbits transmission2(const ContingencyTensor& tensor, AxisId first, AxisId second);

// Signed three-way transmission
//   T = H_x + H_y + H_z - H_xy - H_xz - H_yz + H_xyz.
// Negative values indicate synergy (net reduction of uncertainty),
// positive values added uncertainty.
Mbits transmission3(const ContingencyTensor& tensor);

} // namespace synergy
