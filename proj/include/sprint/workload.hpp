#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sprint/bitvec.hpp"

namespace sprint {

// One attention head's fixed-point trace. Matrices are row-major s x d int8.
// Rows at index >= valid_len are zero-filled padding, kept in the trace so a
// baseline run still pays for moving them.
struct AttentionTrace {
  uint32_t seq_len = 0;
  uint32_t embed = 0;
  uint32_t valid_len = 0;
  int32_t threshold = 0;
  std::vector<int8_t> q, k, v;

  std::span<const int8_t> q_row(uint32_t i) const { return {q.data() + std::size_t(i) * embed, embed}; }
  std::span<const int8_t> k_row(uint32_t i) const { return {k.data() + std::size_t(i) * embed, embed}; }
  std::span<const int8_t> v_row(uint32_t i) const { return {v.data() + std::size_t(i) * embed, embed}; }

  void validate() const;
  bool operator==(const AttentionTrace&) const = default;
};

struct SyntheticSpec {
  uint32_t seq_len = 384;
  uint32_t embed = 64;
  uint32_t valid_len = 384;
  double target_prune_rate = 0.75;
  double locality_strength = 0.8;
  uint64_t rng_seed = 1;
};

class TraceIoError : public std::runtime_error {
 public:
  enum class Kind { io, bad_magic, bad_version, bad_dimensions, truncated };
  TraceIoError(Kind kind, uint64_t offset, const std::string& what)
      : std::runtime_error(what), kind(kind), offset(offset) {}
  Kind kind;
  uint64_t offset;  // byte offset at which the problem was detected
};

// File format (little-endian, no padding):
//   "SPRT" | u16 version=1 | u32 s | u32 d | u32 valid_len | i32 threshold
//   | Q | K | V, each s*d row-major int8.
AttentionTrace load_trace(const std::string& path);
void save_trace(const AttentionTrace& trace, const std::string& path);

std::vector<uint8_t> serialize_trace(const AttentionTrace& trace);
AttentionTrace parse_trace(std::span<const uint8_t> bytes);

AttentionTrace generate_synthetic(const SyntheticSpec& spec);

// Sequence of correlated prune vectors from a two-state Markov chain with
// per-query perturbation. Shared by the synthetic generator's design and by
// the corelet balance analysis.
std::vector<PruneVector> markov_prune_sequence(uint32_t seq_len, uint32_t n_queries,
                                               double prune_rate, double locality,
                                               uint64_t seed);

}  // namespace sprint
