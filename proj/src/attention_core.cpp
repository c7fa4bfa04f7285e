#include "sprint/attention_core.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace sprint {

namespace {

// round-half-up division for non-negative denominators
int64_t div_rhu(int64_t num, int64_t den) {
  if (num >= 0) return (2 * num + den) / (2 * den);
  return -((-2 * num + den - 1) / (2 * den));
}

// 64-entry exp tables in 2^16 scale, split 12-bit argument, 4 fractional bits.
//   lut_lo[i] = round(2^16 * exp(-i / 16)),     i = low 6 bits
//   lut_hi[i] = round(2^16 * exp(-i * 64/16)),  i = high 6 bits
struct ExpTables {
  std::array<uint32_t, 64> lo{}, hi{};
  ExpTables() {
    for (int i = 0; i < 64; ++i) {
      lo[i] = static_cast<uint32_t>(std::llround(65536.0 * std::exp(-i / 16.0)));
      hi[i] = static_cast<uint32_t>(std::llround(65536.0 * std::exp(-i * 4.0)));
    }
  }
};
const ExpTables& tables() {
  static const ExpTables t;
  return t;
}

}  // namespace

ScoreVector exact_scores(std::span<const int8_t> q, std::span<const int8_t> k_matrix,
                         std::size_t seq_len, std::size_t embed) {
  if (q.size() != embed || k_matrix.size() != seq_len * embed)
    throw std::invalid_argument("exact_scores: dimension mismatch");
  ScoreVector s;
  s.values.resize(seq_len);
  for (std::size_t j = 0; j < seq_len; ++j) {
    const int8_t* row = k_matrix.data() + j * embed;
    int32_t acc = 0;
    for (std::size_t i = 0; i < embed; ++i) acc += int32_t(q[i]) * row[i];
    s.values[j] = acc;
  }
  return s;
}

int32_t quantize_value(int32_t x, int b, int32_t lo, int32_t hi) {
  const int64_t span = int64_t(hi) - lo;
  const int64_t levels = (int64_t(1) << b) - 1;  // level indices 0..levels
  int64_t xc = std::clamp<int64_t>(x, lo, hi);
  int64_t idx = div_rhu((xc - lo) * levels, span);
  return static_cast<int32_t>(lo + div_rhu(idx * span, levels));
}

ScoreVector quantize_scores(const ScoreVector& scores, int b, int32_t lo, int32_t hi) {
  if (b < 1 || b > 16) throw std::invalid_argument("quantize_scores: b must be in [1,16]");
  if (lo >= hi) throw std::invalid_argument("quantize_scores: need lo < hi");
  ScoreVector out;
  out.values.reserve(scores.values.size());
  for (int32_t x : scores.values) out.values.push_back(quantize_value(x, b, lo, hi));
  return out;
}

PruneVector threshold_prune(const ScoreVector& scores, int32_t th) {
  PruneVector p(scores.size());
  for (std::size_t j = 0; j < scores.size(); ++j)
    if (scores.values[j] < th) p.set(j);
  return p;
}

ScoreVector to_softmax_input(const ScoreVector& scores, int shift) {
  ScoreVector out;
  out.values.reserve(scores.size());
  const int32_t lo = -(1 << (kSoftmaxInputBits - 1));
  const int32_t hi = (1 << (kSoftmaxInputBits - 1)) - 1;
  for (int32_t x : scores.values) {
    int64_t v = shift > 0 ? div_rhu(x, int64_t(1) << shift) : x;
    out.values.push_back(static_cast<int32_t>(std::clamp<int64_t>(v, lo, hi)));
  }
  return out;
}

ProbVector softmax_lut(const ScoreVector& scores12, const PruneVector& prune) {
  const std::size_t s = scores12.size();
  if (prune.size() != s) throw std::invalid_argument("softmax_lut: length mismatch");
  ProbVector out;
  out.codes.assign(s, 0);
  if (prune.count() == s) {
    out.empty_row = true;
    return out;
  }

  // Pruned entries are forced to -c; c is large enough that their exponent
  // underflows to zero at LUT precision, so they drop out of the sum entirely.
  std::vector<int32_t> x(s);
  int32_t m = kSoftmaxNegC;
  for (std::size_t j = 0; j < s; ++j) {
    int32_t v = prune.test(j) ? kSoftmaxNegC : scores12.values[j];
    if (v < -2048 || v > 2047)
      throw std::invalid_argument("softmax_lut: input outside 12-bit domain");
    x[j] = v;
    if (!prune.test(j)) m = std::max(m, v);
  }

  const ExpTables& t = tables();
  std::vector<uint32_t> e(s, 0);
  uint64_t denom = 0;
  for (std::size_t j = 0; j < s; ++j) {
    if (prune.test(j)) continue;
    uint32_t delta = static_cast<uint32_t>(m - x[j]);  // 0..4095
    uint64_t prod = uint64_t(t.hi[delta >> 6]) * t.lo[delta & 63];
    e[j] = static_cast<uint32_t>(prod >> 16);
    denom += e[j];
  }
  for (std::size_t j = 0; j < s; ++j)
    out.codes[j] = static_cast<uint16_t>(div_rhu(int64_t(e[j]) * kProbOne, int64_t(denom)));
  return out;
}

std::vector<int16_t> weighted_sum_v(const ProbVector& probs, std::span<const int8_t> v_matrix,
                                    std::size_t seq_len, std::size_t embed,
                                    const PruneVector& prune) {
  if (probs.codes.size() != seq_len || prune.size() != seq_len ||
      v_matrix.size() != seq_len * embed)
    throw std::invalid_argument("weighted_sum_v: dimension mismatch");
  std::vector<int64_t> acc(embed, 0);
  for (std::size_t j = 0; j < seq_len; ++j) {
    if (prune.test(j) || probs.codes[j] == 0) continue;
    const int8_t* row = v_matrix.data() + j * embed;
    int64_t p = probs.codes[j];
    for (std::size_t i = 0; i < embed; ++i) acc[i] += p * row[i];
  }
  std::vector<int16_t> out(embed);
  for (std::size_t i = 0; i < embed; ++i)
    out[i] = static_cast<int16_t>(std::clamp<int64_t>(div_rhu(acc[i], kProbOne), -32768, 32767));
  return out;
}

SparseScores recompute_unpruned(std::span<const int8_t> q, std::span<const int8_t> k_matrix,
                                std::size_t seq_len, std::size_t embed,
                                const PruneVector& prune) {
  if (q.size() != embed || k_matrix.size() != seq_len * embed || prune.size() != seq_len)
    throw std::invalid_argument("recompute_unpruned: dimension mismatch");
  SparseScores out;
  for (std::size_t j = 0; j < seq_len; ++j) {
    if (prune.test(j)) continue;
    const int8_t* row = k_matrix.data() + j * embed;
    int32_t acc = 0;
    for (std::size_t i = 0; i < embed; ++i) acc += int32_t(q[i]) * row[i];
    out.indices.push_back(static_cast<uint32_t>(j));
    out.values.push_back(acc);
  }
  return out;
}

std::vector<int16_t> reference_attention_row(std::span<const int8_t> q,
                                             std::span<const int8_t> k_matrix,
                                             std::span<const int8_t> v_matrix,
                                             std::size_t seq_len, std::size_t embed,
                                             const PruneVector& prune, int softmax_shift) {
  SparseScores sp = recompute_unpruned(q, k_matrix, seq_len, embed, prune);
  ScoreVector dense;
  dense.values.assign(seq_len, 0);  // pruned slots are overwritten inside softmax_lut
  for (std::size_t i = 0; i < sp.indices.size(); ++i) dense.values[sp.indices[i]] = sp.values[i];
  ProbVector probs = softmax_lut(to_softmax_input(dense, softmax_shift), prune);
  return weighted_sum_v(probs, v_matrix, seq_len, embed, prune);
}

}  // namespace sprint
