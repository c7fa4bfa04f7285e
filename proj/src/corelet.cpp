#include "sprint/corelet.hpp"

#include <algorithm>
#include <stdexcept>

namespace sprint {

ImbalanceResult imbalance_ratio(std::span<const PruneVector> prune_vectors, int n_corelets,
                                const std::function<int(uint32_t)>& mapping) {
  if (n_corelets < 2) throw std::invalid_argument("imbalance_ratio: need >= 2 corelets");
  ImbalanceResult res;
  if (prune_vectors.empty()) return res;
  double sum = 0.0;
  for (const auto& p : prune_vectors) {
    std::vector<int64_t> counts(n_corelets, 0);
    for (std::size_t j = 0; j < p.size(); ++j)
      if (!p.test(j)) counts[mapping(static_cast<uint32_t>(j))]++;
    int64_t mx = *std::max_element(counts.begin(), counts.end());
    int64_t mn = *std::min_element(counts.begin(), counts.end());
    if (mn == 0) {
      mn = 1;
      res.empty_corelet_events++;
    }
    sum += static_cast<double>(mx) / static_cast<double>(mn);
  }
  res.ratio = sum / static_cast<double>(prune_vectors.size());
  return res;
}

ImbalanceResult imbalance_ratio_interleaved(std::span<const PruneVector> prune_vectors,
                                            int n_corelets) {
  return imbalance_ratio(prune_vectors, n_corelets,
                         [n_corelets](uint32_t j) { return token_corelet(j, n_corelets); });
}

ImbalanceResult imbalance_ratio_sequential(std::span<const PruneVector> prune_vectors,
                                           int n_corelets) {
  if (prune_vectors.empty()) return {};
  std::size_t s = prune_vectors.front().size();
  std::size_t block = (s + n_corelets - 1) / n_corelets;
  return imbalance_ratio(prune_vectors, n_corelets, [block, n_corelets](uint32_t j) {
    return std::min<int>(static_cast<int>(j / block), n_corelets - 1);
  });
}

MaskedExtent apply_2d_mask(const AttentionTrace& trace, bool mask_enabled) {
  if (!mask_enabled) return {trace.seq_len, trace.seq_len};
  return {trace.valid_len, trace.valid_len};
}

int BufferState::insert(uint32_t token, const PruneVector& curr_prune) {
  if (flags_.count(token)) return 0;
  int evicted = 0;
  while (static_cast<int>(flags_.size()) >= capacity_ && !order_.empty()) {
    // prefer the oldest token not needed by the current query
    std::size_t victim_pos = 0;
    bool found = false;
    for (std::size_t i = 0; i < order_.size(); ++i) {
      uint32_t t = order_[i];
      if (t >= curr_prune.size() || curr_prune.test(t)) {  // pruned now -> evictable
        victim_pos = i;
        found = true;
        break;
      }
    }
    if (!found) victim_pos = 0;  // everything needed: overflow, oldest goes anyway
    uint32_t victim = order_[victim_pos];
    order_.erase(order_.begin() + static_cast<std::ptrdiff_t>(victim_pos));
    flags_.erase(victim);
    evicted++;
    evictions_++;
  }
  order_.push_back(token);
  flags_[token] = 1;
  return evicted;
}

QueryTiming process_query_timing(const PruneVector& prune, uint32_t valid_len,
                                 const std::unordered_map<uint32_t, uint64_t>& arrivals,
                                 const CoreletConfig& cfg, std::size_t embed) {
  QueryTiming t;
  const int n = cfg.n_corelets;
  const uint64_t passes = (embed + cfg.mac_width - 1) / cfg.mac_width;

  uint64_t qk_max = 0, vpu_max = 0;
  uint64_t unpruned_total = 0;
  for (int c = 0; c < n; ++c) {
    std::vector<uint32_t> toks;
    for (uint32_t j = c; j < valid_len; j += static_cast<uint32_t>(n))
      if (!prune.test(j)) toks.push_back(j);
    unpruned_total += toks.size();
    if (toks.empty()) continue;

    // rotating-pointer bypass: at each step take the next pending key whose
    // data has arrived; if none has, stall until the earliest arrival
    uint64_t now = 0, busy = 0, stalled = 0;
    std::vector<char> done(toks.size(), 0);
    std::size_t remaining = toks.size(), ptr = 0;
    auto arrival = [&](uint32_t tok) -> uint64_t {
      auto it = arrivals.find(tok);
      return it == arrivals.end() ? 0 : it->second;
    };
    while (remaining > 0) {
      bool progressed = false;
      for (std::size_t step = 0; step < toks.size(); ++step) {
        std::size_t i = (ptr + step) % toks.size();
        if (!done[i] && arrival(toks[i]) <= now) {
          done[i] = 1;
          remaining--;
          now += passes;
          busy += passes;
          ptr = (i + 1) % toks.size();
          progressed = true;
          break;
        }
      }
      if (!progressed) {
        uint64_t next = UINT64_MAX;
        for (std::size_t i = 0; i < toks.size(); ++i)
          if (!done[i]) next = std::min(next, arrival(toks[i]));
        stalled += next - now;
        now = next;
      }
    }
    qk_max = std::max(qk_max, now);
    t.qk_busy_cycles += busy;
    t.stall_cycles += stalled;
    vpu_max = std::max<uint64_t>(vpu_max, toks.size() * passes);
  }

  t.qk_cycles = qk_max;
  t.vpu_cycles = vpu_max;
  if (unpruned_total > 0)
    t.softmax_cycles = static_cast<uint64_t>(cfg.divider_latency) +
                       (unpruned_total + cfg.n_dividers - 1) / cfg.n_dividers;
  t.latency = t.qk_cycles + t.softmax_cycles + t.vpu_cycles;
  return t;
}

QueryResult process_query(const AttentionTrace& trace, uint32_t query_index,
                          const PruneVector& prune,
                          const std::unordered_map<uint32_t, uint64_t>& arrivals,
                          const CoreletConfig& cfg, int softmax_shift) {
  QueryResult r;
  r.timing = process_query_timing(prune, trace.valid_len, arrivals, cfg, trace.embed);
  r.attention_row = reference_attention_row(trace.q_row(query_index), trace.k,
                                            trace.v, trace.seq_len, trace.embed, prune,
                                            softmax_shift);
  r.empty_row = prune.all();
  return r;
}

}  // namespace sprint
