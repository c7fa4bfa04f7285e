#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <span>
#include <unordered_map>
#include <vector>

#include "sprint/attention_core.hpp"
#include "sprint/bitvec.hpp"
#include "sprint/workload.hpp"

namespace sprint {

struct CoreletConfig {
  int n_corelets = 1;
  int kv_buffer_bytes = 16384;  // K and V halves together
  int q_buffer_bytes = 64;
  int index_buffer_bytes = 512;
  int mac_width = 64;
  int n_dividers = 2;
  int divider_latency = 4;

  int capacity_vectors(std::size_t embed) const {
    return static_cast<int>(kv_buffer_bytes / 2 / embed);
  }
};

// token j -> corelet j mod n (token interleaving)
inline int token_corelet(uint32_t token, int n) { return static_cast<int>(token % n); }

// mean over queries of max/min unpruned tokens per corelet; 1.0 = balanced.
// A corelet with zero assigned tokens contributes min = 1; those events are
// returned so callers can report them.
struct ImbalanceResult {
  double ratio = 1.0;
  uint64_t empty_corelet_events = 0;
};
ImbalanceResult imbalance_ratio(std::span<const PruneVector> prune_vectors, int n_corelets,
                                const std::function<int(uint32_t)>& mapping);
ImbalanceResult imbalance_ratio_interleaved(std::span<const PruneVector> prune_vectors,
                                            int n_corelets);
ImbalanceResult imbalance_ratio_sequential(std::span<const PruneVector> prune_vectors,
                                           int n_corelets);

// Effective work after 2D padded-sequence reduction.
struct MaskedExtent {
  uint32_t n_queries;  // queries actually processed
  uint32_t n_keys;     // keys eligible for fetch/score
};
MaskedExtent apply_2d_mask(const AttentionTrace& trace, bool mask_enabled);

// K/V residency (identical sets by construction). FIFO order with
// locality-first eviction on overflow; misses are bypassed, never corrupted.
class BufferState {
 public:
  BufferState(int capacity_vectors) : capacity_(capacity_vectors) {}

  bool resident(uint32_t token) const { return flags_.count(token) != 0; }
  std::size_t size() const { return flags_.size(); }
  int capacity() const { return capacity_; }

  // Insert a fetched token, evicting if full: first tokens pruned under
  // `curr_prune`, oldest first, then oldest overall. Returns eviction count.
  int insert(uint32_t token, const PruneVector& curr_prune);

  uint64_t total_evictions() const { return evictions_; }

 private:
  int capacity_;
  std::deque<uint32_t> order_;
  std::unordered_map<uint32_t, char> flags_;
  uint64_t evictions_ = 0;
};

struct QueryTiming {
  uint64_t qk_cycles = 0;       // max over corelets, stalls included
  uint64_t qk_busy_cycles = 0;  // sum over corelets of pure compute
  uint64_t stall_cycles = 0;
  uint64_t softmax_cycles = 0;
  uint64_t vpu_cycles = 0;
  uint64_t latency = 0;
};

struct QueryResult {
  QueryTiming timing;
  std::vector<int16_t> attention_row;
  bool empty_row = false;
};

// One query through the CORELETs: QK-PU consumes one resident unpruned key
// per cycle per corelet (ceil(d/64) passes each), bypassing not-yet-arrived
// keys via the rotating pointer; softmax starts once all scores are in; V-PU
// consumes one value vector per cycle per corelet. Values always come from
// the bit-exact reference path.
QueryResult process_query(const AttentionTrace& trace, uint32_t query_index,
                          const PruneVector& prune,
                          const std::unordered_map<uint32_t, uint64_t>& arrivals,
                          const CoreletConfig& cfg, int softmax_shift);

QueryTiming process_query_timing(const PruneVector& prune, uint32_t valid_len,
                                 const std::unordered_map<uint32_t, uint64_t>& arrivals,
                                 const CoreletConfig& cfg, std::size_t embed);

}  // namespace sprint
