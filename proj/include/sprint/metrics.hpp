#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sprint/bitvec.hpp"

namespace sprint {

// All energy bookkeeping is in integer femtojoules so that totals are exact
// and reports compare byte-identical across runs and platforms.
struct EnergyConstants {
  int64_t qk_dot_fj = 192560;          // 8-bit 64-tap dot product
  int64_t buffer_access_fj = 256000;   // 4 banks x 128-bit port
  int64_t softmax_fj = 89800;          // 2 LUT accesses + multiply + division
  int64_t analog_cmp_128col_fj = 5340;
  int64_t inmem_tile_fj = 833600;      // one 64x128 tile activation
  int64_t reram_read_fj_per_bit = 3100;
  int64_t reram_write_fj_per_bit = 24400;
  int64_t comparator_fj = 41;          // single analog comparator, informational
  int64_t bank_to_bank_fj_per_bit = 0; // intra-ReRAM Q broadcast, negligible

  // Checks the per-bit constants against the 512-bit aggregates.
  void validate() const;
};

enum class EnergyCat : int {
  reram_read = 0,
  reram_write,
  inmem_mac,
  analog_compare,
  adc_1bit,
  onchip_buffer_rw,
  qk_pu,
  softmax,
  v_pu,
  bank_to_bank,
  kCount
};

const char* energy_cat_name(EnergyCat c);

struct EnergyLedger {
  EnergyConstants k;
  std::array<int64_t, static_cast<int>(EnergyCat::kCount)> fj{};
  std::array<int64_t, static_cast<int>(EnergyCat::kCount)> events{};

  explicit EnergyLedger(const EnergyConstants& consts = EnergyConstants{}) : k(consts) {
    k.validate();
  }

  void charge(EnergyCat c, int64_t energy_fj, int64_t n_events = 1) {
    fj[static_cast<int>(c)] += energy_fj;
    events[static_cast<int>(c)] += n_events;
  }

  void charge_reram_read(int64_t bits) {
    charge(EnergyCat::reram_read, bits * k.reram_read_fj_per_bit);
  }
  void charge_reram_write(int64_t bits) {
    charge(EnergyCat::reram_write, bits * k.reram_write_fj_per_bit);
  }
  void charge_inmem_tiles(int64_t n) {
    charge(EnergyCat::inmem_mac, n * k.inmem_tile_fj, n);
  }
  // One comparator per column; energy accounted per 128-column block.
  void charge_compare_columns(int64_t cols) {
    int64_t blocks = (cols + 127) / 128;
    charge(EnergyCat::analog_compare, blocks * k.analog_cmp_128col_fj, cols);
  }
  void charge_adc_samples(int64_t n) { charge(EnergyCat::adc_1bit, 0, n); }
  void charge_buffer_access(int64_t n) {
    charge(EnergyCat::onchip_buffer_rw, n * k.buffer_access_fj, n);
  }
  void charge_qk_dots(int64_t n) { charge(EnergyCat::qk_pu, n * k.qk_dot_fj, n); }
  void charge_softmax(int64_t n) { charge(EnergyCat::softmax, n * k.softmax_fj, n); }
  void charge_v_dots(int64_t n) { charge(EnergyCat::v_pu, n * k.qk_dot_fj, n); }
  void charge_bank_to_bank(int64_t bits) {
    charge(EnergyCat::bank_to_bank, bits * k.bank_to_bank_fj_per_bit);
  }

  int64_t total_fj() const {
    int64_t t = 0;
    for (int64_t v : fj) t += v;
    return t;
  }
};

// Expected number of overlapping unpruned indices between two independent
// uniform M-subsets of S (hypergeometric mean), via exact binomials.
double expected_overlap(int S, int M);

// Same quantity as an exact fraction {numerator, denominator} of 64-bit-safe
// reduced big integers rendered to strings is overkill; tests use the double
// path against a rational oracle, so we expose numerator/denominator digits.
struct ExactFraction {
  std::string num;
  std::string den;
};
ExactFraction expected_overlap_exact(int S, int M);

struct OverlapStats {
  double mean_common = 0.0;  // mean |unpruned(t) ∩ unpruned(t+1)|
  double fraction = 0.0;     // mean_common / mean |unpruned|
};
OverlapStats empirical_overlap(std::span<const PruneVector> prune_vectors);

struct PerfReport {
  std::string trace_name;
  std::string preset;
  std::string mode;
  uint64_t seq_len = 0;
  uint64_t valid_len = 0;
  uint64_t cycles_total = 0;
  std::array<int64_t, static_cast<int>(EnergyCat::kCount)> energy_fj{};
  std::array<int64_t, static_cast<int>(EnergyCat::kCount)> energy_events{};
  int64_t energy_total_fj = 0;
  uint64_t bytes_fetched = 0;          // K/V/Q payload moved off ReRAM
  uint64_t bytes_overhead = 0;         // CopyQ broadcast + ReadP prune bits
  uint64_t key_fetches = 0;            // whole key-vector fetch events
  uint64_t score_computations = 0;     // on-chip exact q.k dot products
  double imbalance_ratio = 0.0;
  double empirical_overlap_mean = 0.0;
  double empirical_overlap_fraction = 0.0;
  double expected_overlap_mean = 0.0;
  double gops_per_s = 0.0;
  double gops_per_j = 0.0;
  int32_t quant_range_lo = 0;          // per-head calibration range used in-memory
  int32_t quant_range_hi = 0;
  std::string noise_note;              // quantize-only vs gaussian, for the record

  std::string to_json() const;  // deterministic field order
};

struct CompareResult {
  double speedup = 0.0;
  double energy_reduction = 0.0;
  double data_movement_reduction = 0.0;
  bool undefined = false;  // some denominator was zero
};
CompareResult compare(const PerfReport& sprint_rep, const PerfReport& baseline_rep);

}  // namespace sprint
