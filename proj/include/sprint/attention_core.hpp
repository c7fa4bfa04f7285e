#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sprint/bitvec.hpp"

namespace sprint {

// Bit-exact fixed-point reference arithmetic for the attention pipeline.
// Everything here is a pure function; rounding is round-half-up throughout.

struct ScoreVector {
  std::vector<int32_t> values;
  std::size_t size() const { return values.size(); }
};

// Probabilities in units of 2^-8; 256 encodes exactly 1.0 (one ULP = 1/256).
struct ProbVector {
  std::vector<uint16_t> codes;
  bool empty_row = false;
};

struct SparseScores {
  std::vector<uint32_t> indices;  // ascending unpruned indices
  std::vector<int32_t> values;
};

constexpr int kSoftmaxInputBits = 12;   // signed, [-2048, 2047]
constexpr int kSoftmaxNegC = -2048;     // forced value for pruned entries
constexpr int kSoftmaxFracBits = 4;     // LUT exponent argument is x / 16
constexpr int kProbOne = 256;

// values[j] = sum_i q[i] * K[j][i], exact int32 accumulation.
ScoreVector exact_scores(std::span<const int8_t> q, std::span<const int8_t> k_matrix,
                         std::size_t seq_len, std::size_t embed);

// Snap to the nearest of 2^b uniformly spaced levels over [lo, hi], clamped.
// Integer arithmetic only; monotone by construction.
ScoreVector quantize_scores(const ScoreVector& scores, int b, int32_t lo, int32_t hi);
int32_t quantize_value(int32_t x, int b, int32_t lo, int32_t hi);

// bit j = 1  iff  scores[j] < th (strict; ties are kept).
PruneVector threshold_prune(const ScoreVector& scores, int32_t th);

// Map raw scores into the 12-bit softmax domain: round-half-up shift then clamp.
ScoreVector to_softmax_input(const ScoreVector& scores, int shift);

// Two-LUT fixed-point softmax: pruned entries forced to -2048, 12-bit delta
// from the row max split into two 6-bit halves indexing 64-entry exp tables
// whose outputs are multiplied, then a divider normalizes to 8-bit codes.
ProbVector softmax_lut(const ScoreVector& scores12, const PruneVector& prune);

// out[i] = round(sum_{j unpruned} probs[j] * V[j][i] / 256), clamped to int16.
std::vector<int16_t> weighted_sum_v(const ProbVector& probs, std::span<const int8_t> v_matrix,
                                    std::size_t seq_len, std::size_t embed,
                                    const PruneVector& prune);

// Exact scores restricted to unpruned indices; bit-identical to the dense path.
SparseScores recompute_unpruned(std::span<const int8_t> q, std::span<const int8_t> k_matrix,
                                std::size_t seq_len, std::size_t embed,
                                const PruneVector& prune);

// Reference pipeline for one query given a prune vector: recompute, softmax,
// weighted value sum. The simulator must match this output bit-exactly.
std::vector<int16_t> reference_attention_row(std::span<const int8_t> q,
                                             std::span<const int8_t> k_matrix,
                                             std::span<const int8_t> v_matrix,
                                             std::size_t seq_len, std::size_t embed,
                                             const PruneVector& prune, int softmax_shift);

}  // namespace sprint
