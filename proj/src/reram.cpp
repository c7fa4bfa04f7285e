#include "sprint/reram.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sprint/rng.hpp"

namespace sprint {

int32_t msb_threshold(int32_t th, int msb_bits) {
  const int shift = 2 * (8 - msb_bits);  // both operands truncated
  if (shift == 0) return th;
  // floor division: truncation must err toward not pruning
  int32_t q = th >> shift;
  return q;
}

ReramStore::ReramStore(std::span<const int8_t> k_matrix, std::size_t seq_len, std::size_t embed,
                       const ReramLayout& layout, EnergyLedger* ledger)
    : seq_len_(seq_len), embed_(embed), layout_(layout), ledger_(ledger),
      channel_read_bits_(layout.channels, 0) {
  if (k_matrix.size() != seq_len * embed)
    throw std::invalid_argument("store_keys: dimension mismatch");
  if (layout.channels < 1) throw std::invalid_argument("store_keys: need >= 1 channel");

  const int cols_per_key = static_cast<int>((embed + layout.xbar.trans_rows - 1) / layout.xbar.trans_rows);
  const std::size_t tokens_per_bank_max =
      (seq_len + std::size_t(layout.channels) * layout.banks_per_channel - 1) /
      (std::size_t(layout.channels) * layout.banks_per_channel);
  if (layout.arrays_per_bank > 0) {
    std::size_t cols_avail = std::size_t(layout.arrays_per_bank) * layout.xbar.trans_cols;
    if (tokens_per_bank_max * cols_per_key > cols_avail)
      throw std::invalid_argument("store_keys: transposable array capacity exceeded");
  }

  msb_.resize(seq_len * embed);
  placements_.resize(seq_len);
  for (std::size_t j = 0; j < seq_len; ++j) {
    for (std::size_t i = 0; i < embed; ++i) msb_[j * embed + i] = msb_nibble(k_matrix[j * embed + i]);
    Placement p;
    p.channel = static_cast<uint16_t>(j % layout.channels);
    std::size_t within = j / layout.channels;
    p.bank = static_cast<uint16_t>(within % layout.banks_per_channel);
    p.column = static_cast<uint32_t>((within / layout.banks_per_channel) * cols_per_key);
    placements_[j] = p;
  }

  // Tile activations needed to score every stored key once: columns are spread
  // over channels x banks, each 64x128 tile fires as a unit.
  int64_t acts = 0;
  const int n_banks = layout.channels * layout.banks_per_channel;
  for (int b = 0; b < n_banks; ++b) {
    std::size_t tokens_here = seq_len / n_banks + (std::size_t(b) < seq_len % n_banks ? 1 : 0);
    if (tokens_here == 0) continue;
    int64_t cols = int64_t(tokens_here) * cols_per_key;
    acts += (cols + layout.xbar.trans_cols - 1) / layout.xbar.trans_cols;
  }
  tile_activations_ = acts;

  if (ledger_) ledger_->charge_reram_write(int64_t(seq_len) * embed * 8);
}

Placement ReramStore::placement(uint32_t token) const {
  if (token >= seq_len_) throw std::out_of_range("placement: unknown token");
  return placements_[token];
}

InmemScores ReramStore::inmem_score(std::span<const int8_t> q_msb, const NoiseModel& noise) const {
  if (q_msb.size() != embed_) throw std::invalid_argument("inmem_score: dimension mismatch");
  InmemScores out;
  out.scores.values.resize(seq_len_);
  for (std::size_t j = 0; j < seq_len_; ++j) {
    const int8_t* row = msb_.data() + j * embed_;
    int32_t acc = 0;
    for (std::size_t i = 0; i < embed_; ++i) acc += int32_t(q_msb[i]) * row[i];
    out.scores.values[j] = acc;
  }

  auto [mn, mx] = std::minmax_element(out.scores.values.begin(), out.scores.values.end());
  out.range_lo = *mn;
  out.range_hi = *mx;
  if (noise.b_equiv < 16 && out.range_lo < out.range_hi)
    out.scores = quantize_scores(out.scores, noise.b_equiv, out.range_lo, out.range_hi);
  if (noise.mode == NoiseModel::Mode::quantize_plus_gaussian && noise.sigma > 0.0) {
    Rng rng(noise.seed);
    for (auto& v : out.scores.values)
      v += static_cast<int32_t>(std::llround(noise.sigma * rng.gaussian()));
  }

  if (ledger_) {
    ledger_->charge_inmem_tiles(tile_activations_);
    ledger_->charge_bank_to_bank(int64_t(embed_) * layout_.msb_bits * layout_.channels *
                                 layout_.banks_per_channel);
  }
  return out;
}

PruneVector ReramStore::analog_compare(const InmemScores& scores, int32_t th) const {
  PruneVector p(scores.scores.size());
  for (std::size_t j = 0; j < scores.scores.size(); ++j)
    if (scores.scores.values[j] < th) p.set(j);
  if (ledger_) {
    ledger_->charge_compare_columns(static_cast<int64_t>(scores.scores.size()));
    ledger_->charge_adc_samples(static_cast<int64_t>(scores.scores.size()));
  }
  return p;
}

std::vector<int8_t> ReramStore::transposed_read(uint32_t token) const {
  if (token >= seq_len_) throw std::out_of_range("transposed_read: unknown token");
  std::vector<int8_t> out(msb_.begin() + std::size_t(token) * embed_,
                          msb_.begin() + std::size_t(token + 1) * embed_);
  int64_t bits = int64_t(embed_) * layout_.msb_bits;
  channel_read_bits_[placements_[token].channel] += bits;
  if (ledger_) ledger_->charge_reram_read(bits);
  return out;
}

}  // namespace sprint
