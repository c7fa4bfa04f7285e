#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sprint/bitvec.hpp"

namespace sprint {

struct TimingConfig {
  int tCL = 11;
  int tRCD = 11;
  int tRP = 11;
  int tAxTh = 8;   // CopyQ -> ReadP gap covering in-memory thresholding, < 8 cycles measured
  int tFAW = 16;   // power-budget timings keep nominal values; thresholding adds nothing
  int tRRD = 4;
  int clock_mhz = 1000;
  int channel_width_bits = 64;
  int channels_per_corelet = 16;

  void validate() const;
};

enum class CmdKind { CopyQ, ReadP, Read, Write, Activate, Precharge };

struct MemoryCommand {
  CmdKind kind = CmdKind::Read;
  uint16_t channel = 0;
  uint16_t bank = 0;
  uint32_t row = 0;
  uint32_t col = 0;
  uint32_t burst_len = 1;
  bool start_flag = false;  // CopyQ only: kicks off in-memory thresholding
};

struct SldVectors {
  BitVec mem_req;   // P^{t-1} AND NOT P^t : fetch from memory
  BitVec locality;  // NOT P^{t-1} AND NOT P^t : already on chip, reuse
};

// Eqs. over adjacent pruning vectors; mem_req and locality are disjoint and
// together cover exactly the unpruned set of the current query.
SldVectors sld_compute(const PruneVector& prev, const PruneVector& curr);

// First query has no predecessor: fetch everything unpruned.
SldVectors first_query_bootstrap(const PruneVector& curr);

// MRG addressing: token j goes to channel j mod channels; per channel the
// address is base[c] + up-counter stepping by the channel count.
struct ChannelRequests {
  std::vector<std::vector<uint32_t>> tokens;     // per channel, ascending
  std::vector<std::vector<uint64_t>> addresses;  // base + counter per channel
};
ChannelRequests generate_requests(const BitVec& mem_req, int channels,
                                  std::span<const uint64_t> base = {});

// KIG: same generator microarchitecture aimed at on-chip buffer lookups.
std::vector<uint32_t> generate_key_indices(const BitVec& locality);

struct ScheduleResult {
  std::vector<uint64_t> completion;     // per input command, cycles
  std::vector<std::string> violations;  // protocol violations, reported not reordered
};

// Deterministic per-channel command scheduler. CopyQ needs no tRP/tRCD but
// holds the bus for tCL; ReadP reads the latched pruning vector no earlier
// than its CopyQ completion + tAxTh; Read/Write get open-row reuse.
ScheduleResult schedule(std::span<const MemoryCommand> commands, const TimingConfig& timing);

}  // namespace sprint
