#include "sprint/memctrl.hpp"

#include <map>
#include <stdexcept>

namespace sprint {

void TimingConfig::validate() const {
  if (tAxTh > 8 || tAxTh < 0) throw std::invalid_argument("tAxTh must be in [0,8]");
  for (int t : {tCL, tRCD, tRP, tFAW, tRRD})
    if (t < 0) throw std::invalid_argument("timing constants must be >= 0");
  if (channel_width_bits <= 0 || channels_per_corelet <= 0)
    throw std::invalid_argument("channel configuration must be positive");
}

SldVectors sld_compute(const PruneVector& prev, const PruneVector& curr) {
  if (prev.size() != curr.size()) throw std::invalid_argument("sld_compute: length mismatch");
  SldVectors v;
  v.mem_req = prev.and_not(curr);        // pruned before, wanted now
  v.locality = (~prev).and_not(curr);    // wanted before and now
  return v;
}

SldVectors first_query_bootstrap(const PruneVector& curr) {
  SldVectors v;
  v.mem_req = ~curr;
  v.locality = BitVec(curr.size());
  return v;
}

ChannelRequests generate_requests(const BitVec& mem_req, int channels,
                                  std::span<const uint64_t> base) {
  if (channels < 1) throw std::invalid_argument("generate_requests: need >= 1 channel");
  ChannelRequests r;
  r.tokens.resize(channels);
  r.addresses.resize(channels);
  mem_req.for_each_set([&](std::size_t j) {
    int c = static_cast<int>(j % channels);
    uint64_t b = base.empty() ? 0 : base[c];
    r.tokens[c].push_back(static_cast<uint32_t>(j));
    // shared up counter steps by the channel count; per-channel offset j/channels
    r.addresses[c].push_back(b + j / channels);
  });
  return r;
}

std::vector<uint32_t> generate_key_indices(const BitVec& locality) {
  return locality.set_bits();
}

ScheduleResult schedule(std::span<const MemoryCommand> commands, const TimingConfig& timing) {
  timing.validate();
  ScheduleResult res;
  res.completion.assign(commands.size(), 0);

  struct ChannelState {
    uint64_t cursor = 0;
    std::map<uint16_t, int64_t> open_row;  // bank -> row, -1 closed
    bool threshold_pending = false;
    uint64_t copyq_completion = 0;
  };
  std::map<uint16_t, ChannelState> chans;

  for (std::size_t i = 0; i < commands.size(); ++i) {
    const MemoryCommand& c = commands[i];
    ChannelState& ch = chans[c.channel];
    uint64_t burst = c.burst_len > 0 ? c.burst_len : 1;
    uint64_t done = 0;

    if (ch.threshold_pending && c.kind != CmdKind::ReadP)
      res.violations.push_back("command " + std::to_string(i) +
                               " issued amid in-memory thresholding on channel " +
                               std::to_string(c.channel));

    switch (c.kind) {
      case CmdKind::CopyQ:
        // isolated in-memory buffer: no tRP / tRCD, bus held for tCL + burst
        done = ch.cursor + timing.tCL + burst - 1;
        if (c.start_flag) {
          ch.threshold_pending = true;
          ch.copyq_completion = done;
        }
        break;
      case CmdKind::ReadP: {
        if (!ch.threshold_pending)
          res.violations.push_back("ReadP at " + std::to_string(i) +
                                   " without preceding CopyQ on channel " +
                                   std::to_string(c.channel));
        // pruning vector is latched in the bank row buffer once thresholding
        // finishes, so the access is a row-buffer hit
        uint64_t ready = ch.threshold_pending ? ch.copyq_completion + timing.tAxTh : ch.cursor;
        uint64_t issue = std::max(ch.cursor, ready);
        done = issue + timing.tCL + burst - 1;
        ch.threshold_pending = false;
        break;
      }
      case CmdKind::Read:
      case CmdKind::Write: {
        auto it = ch.open_row.find(c.bank);
        bool hit = it != ch.open_row.end() && it->second == static_cast<int64_t>(c.row);
        uint64_t lat = timing.tCL + burst - 1;
        if (!hit) {
          bool was_open = it != ch.open_row.end() && it->second >= 0;
          lat += (was_open ? timing.tRP : 0) + timing.tRCD;
          ch.open_row[c.bank] = c.row;
        }
        done = ch.cursor + lat;
        break;
      }
      case CmdKind::Activate:
        done = ch.cursor + timing.tRCD;
        ch.open_row[c.bank] = c.row;
        break;
      case CmdKind::Precharge:
        done = ch.cursor + timing.tRP;
        ch.open_row[c.bank] = -1;
        break;
    }
    if (done <= ch.cursor) done = ch.cursor + 1;  // completions strictly increase
    ch.cursor = done;
    res.completion[i] = done;
  }
  return res;
}

}  // namespace sprint
