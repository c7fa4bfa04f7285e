#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sprint/attention_core.hpp"
#include "sprint/bitvec.hpp"
#include "sprint/metrics.hpp"

namespace sprint {

struct CrossbarSpec {
  int trans_rows = 64;   // transposable array, 4-b MLC
  int trans_cols = 128;
  int std_rows = 256;    // standard bitcell array
  int std_cols = 128;
  int bits_per_cell = 4;
};

struct ReramLayout {
  int msb_bits = 4;             // MSBs per key element held in transposable arrays
  int channels = 4;
  int banks_per_channel = 4;
  int arrays_per_bank = 0;      // 0 = derive capacity from the stored sequence
  CrossbarSpec xbar;
};

struct NoiseModel {
  enum class Mode { quantize_only, quantize_plus_gaussian };
  Mode mode = Mode::quantize_only;
  int b_equiv = 5;      // uniform quantization of the analog output
  double sigma = 0.0;   // additive term, accumulator scale
  uint64_t seed = 0;
};

struct Placement {
  uint16_t channel = 0;
  uint16_t bank = 0;
  uint32_t column = 0;  // first transposable column (keys wider than rows span several)
};

struct InmemScores {
  ScoreVector scores;   // degraded MSB x MSB dot products, one per key
  int32_t range_lo = 0; // calibration range used for output quantization
  int32_t range_hi = 0;
};

// Threshold rescaled to the MSB truncation scale, rounded toward -inf so the
// in-memory comparison errs toward keeping tokens.
int32_t msb_threshold(int32_t th, int msb_bits = 4);

inline int8_t msb_nibble(int8_t x) { return static_cast<int8_t>(x >> 4); }
inline int8_t lsb_nibble(int8_t x) { return static_cast<int8_t>(x & 0x0f); }

// Keys stored across ReRAM: MSB nibbles one-key-per-column in transposable
// tiles, LSB nibbles (and Q/V, handled by the caller) in standard arrays.
// Immutable after construction; all accessors are read-only.
class ReramStore {
 public:
  ReramStore(std::span<const int8_t> k_matrix, std::size_t seq_len, std::size_t embed,
             const ReramLayout& layout, EnergyLedger* ledger);

  std::size_t seq_len() const { return seq_len_; }
  std::size_t embed() const { return embed_; }
  const ReramLayout& layout() const { return layout_; }
  Placement placement(uint32_t token) const;

  // Analog vector-matrix product over MSB nibbles, then output degradation per
  // the noise model. Charges one in-memory tile activation per 64x128 tile.
  InmemScores inmem_score(std::span<const int8_t> q_msb, const NoiseModel& noise) const;

  // bit j = 1 iff scores[j] < th; one comparator + 1-bit ADC sample per column.
  PruneVector analog_compare(const InmemScores& scores, int32_t th) const;

  // MSB nibbles of one stored key via a transposed (column-wise) read.
  std::vector<int8_t> transposed_read(uint32_t token) const;

  int64_t tile_activations_per_query() const { return tile_activations_; }
  int64_t channel_read_bits(int channel) const { return channel_read_bits_[channel]; }

 private:
  std::size_t seq_len_, embed_;
  ReramLayout layout_;
  EnergyLedger* ledger_;
  std::vector<int8_t> msb_;  // s x d MSB nibbles, row-major
  std::vector<Placement> placements_;
  int64_t tile_activations_ = 0;
  mutable std::vector<int64_t> channel_read_bits_;
};

}  // namespace sprint
