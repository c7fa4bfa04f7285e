#include "sprint/engine.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace sprint {

std::string mode_name(Mode m) {
  switch (m) {
    case Mode::sprint: return "sprint";
    case Mode::baseline: return "baseline";
    case Mode::pruning_only: return "pruning_only";
    case Mode::mask_only: return "mask_only";
  }
  return "?";
}

Mode mode_from_name(const std::string& s) {
  if (s == "sprint") return Mode::sprint;
  if (s == "baseline") return Mode::baseline;
  if (s == "pruning_only" || s == "pruning-only") return Mode::pruning_only;
  if (s == "mask_only" || s == "mask-only") return Mode::mask_only;
  throw std::invalid_argument("unknown mode: " + s);
}

SimConfig SimConfig::preset_config(char p, Mode mode) {
  SimConfig c;
  c.preset = p;
  c.mode = mode;
  switch (p) {
    case 'S':
      c.corelet = {.n_corelets = 1, .kv_buffer_bytes = 16384, .q_buffer_bytes = 64,
                   .index_buffer_bytes = 512};
      break;
    case 'M':
      c.corelet = {.n_corelets = 2, .kv_buffer_bytes = 32768, .q_buffer_bytes = 128,
                   .index_buffer_bytes = 1024};
      break;
    case 'L':
      c.corelet = {.n_corelets = 4, .kv_buffer_bytes = 65536, .q_buffer_bytes = 256,
                   .index_buffer_bytes = 2048};
      break;
    case 'C':
      break;
    default:
      throw std::invalid_argument("preset must be one of S, M, L, C");
  }
  return c;
}

namespace {

using nlohmann::ordered_json;

ordered_json config_to_json(const SimConfig& c) {
  ordered_json j;
  j["preset"] = std::string(1, c.preset);
  j["mode"] = mode_name(c.mode);
  j["corelet"] = {{"n_corelets", c.corelet.n_corelets},
                  {"kv_buffer_bytes", c.corelet.kv_buffer_bytes},
                  {"q_buffer_bytes", c.corelet.q_buffer_bytes},
                  {"index_buffer_bytes", c.corelet.index_buffer_bytes},
                  {"mac_width", c.corelet.mac_width},
                  {"n_dividers", c.corelet.n_dividers},
                  {"divider_latency", c.corelet.divider_latency}};
  j["timing"] = {{"tCL", c.timing.tCL}, {"tRCD", c.timing.tRCD}, {"tRP", c.timing.tRP},
                 {"tAxTh", c.timing.tAxTh}, {"tFAW", c.timing.tFAW}, {"tRRD", c.timing.tRRD},
                 {"clock_mhz", c.timing.clock_mhz},
                 {"channel_width_bits", c.timing.channel_width_bits},
                 {"channels_per_corelet", c.timing.channels_per_corelet}};
  j["energy"] = {{"qk_dot_fj", c.energy.qk_dot_fj},
                 {"buffer_access_fj", c.energy.buffer_access_fj},
                 {"softmax_fj", c.energy.softmax_fj},
                 {"analog_cmp_128col_fj", c.energy.analog_cmp_128col_fj},
                 {"inmem_tile_fj", c.energy.inmem_tile_fj},
                 {"reram_read_fj_per_bit", c.energy.reram_read_fj_per_bit},
                 {"reram_write_fj_per_bit", c.energy.reram_write_fj_per_bit},
                 {"comparator_fj", c.energy.comparator_fj},
                 {"bank_to_bank_fj_per_bit", c.energy.bank_to_bank_fj_per_bit}};
  j["noise"] = {{"mode", c.noise.mode == NoiseModel::Mode::quantize_only
                             ? "quantize_only"
                             : "quantize_plus_gaussian"},
                {"b_equiv", c.noise.b_equiv},
                {"sigma", c.noise.sigma},
                {"seed", c.noise.seed}};
  j["layout"] = {{"msb_bits", c.layout.msb_bits},
                 {"channels", c.layout.channels},
                 {"banks_per_channel", c.layout.banks_per_channel},
                 {"arrays_per_bank", c.layout.arrays_per_bank}};
  j["softmax_shift"] = c.softmax_shift;
  j["overlap_thresholding"] = c.overlap_thresholding;
  return j;
}

template <typename T>
void maybe(const ordered_json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void apply_json(SimConfig& c, const ordered_json& j) {
  static const std::vector<std::string> known = {
      "preset", "mode", "corelet", "timing", "energy", "noise", "layout",
      "softmax_shift", "overlap_thresholding"};
  for (auto it = j.begin(); it != j.end(); ++it)
    if (std::find(known.begin(), known.end(), it.key()) == known.end())
      throw std::invalid_argument("unknown config key: " + it.key());
  if (j.contains("preset")) {
    std::string p = j.at("preset").get<std::string>();
    if (p.size() != 1) throw std::invalid_argument("preset must be a single letter");
    SimConfig fresh = SimConfig::preset_config(p[0], c.mode);
    c.preset = fresh.preset;
    c.corelet = fresh.corelet;
  }
  if (j.contains("mode")) c.mode = mode_from_name(j.at("mode").get<std::string>());
  if (j.contains("corelet")) {
    const auto& s = j.at("corelet");
    maybe(s, "n_corelets", c.corelet.n_corelets);
    maybe(s, "kv_buffer_bytes", c.corelet.kv_buffer_bytes);
    maybe(s, "q_buffer_bytes", c.corelet.q_buffer_bytes);
    maybe(s, "index_buffer_bytes", c.corelet.index_buffer_bytes);
    maybe(s, "mac_width", c.corelet.mac_width);
    maybe(s, "n_dividers", c.corelet.n_dividers);
    maybe(s, "divider_latency", c.corelet.divider_latency);
  }
  if (j.contains("timing")) {
    const auto& s = j.at("timing");
    maybe(s, "tCL", c.timing.tCL);
    maybe(s, "tRCD", c.timing.tRCD);
    maybe(s, "tRP", c.timing.tRP);
    maybe(s, "tAxTh", c.timing.tAxTh);
    maybe(s, "tFAW", c.timing.tFAW);
    maybe(s, "tRRD", c.timing.tRRD);
    maybe(s, "clock_mhz", c.timing.clock_mhz);
    maybe(s, "channel_width_bits", c.timing.channel_width_bits);
    maybe(s, "channels_per_corelet", c.timing.channels_per_corelet);
  }
  if (j.contains("energy")) {
    const auto& s = j.at("energy");
    maybe(s, "qk_dot_fj", c.energy.qk_dot_fj);
    maybe(s, "buffer_access_fj", c.energy.buffer_access_fj);
    maybe(s, "softmax_fj", c.energy.softmax_fj);
    maybe(s, "analog_cmp_128col_fj", c.energy.analog_cmp_128col_fj);
    maybe(s, "inmem_tile_fj", c.energy.inmem_tile_fj);
    maybe(s, "reram_read_fj_per_bit", c.energy.reram_read_fj_per_bit);
    maybe(s, "reram_write_fj_per_bit", c.energy.reram_write_fj_per_bit);
    maybe(s, "comparator_fj", c.energy.comparator_fj);
    maybe(s, "bank_to_bank_fj_per_bit", c.energy.bank_to_bank_fj_per_bit);
  }
  if (j.contains("noise")) {
    const auto& s = j.at("noise");
    if (s.contains("mode")) {
      std::string m = s.at("mode").get<std::string>();
      if (m == "quantize_only")
        c.noise.mode = NoiseModel::Mode::quantize_only;
      else if (m == "quantize_plus_gaussian")
        c.noise.mode = NoiseModel::Mode::quantize_plus_gaussian;
      else
        throw std::invalid_argument("unknown noise mode: " + m);
    }
    maybe(s, "b_equiv", c.noise.b_equiv);
    maybe(s, "sigma", c.noise.sigma);
    maybe(s, "seed", c.noise.seed);
  }
  if (j.contains("layout")) {
    const auto& s = j.at("layout");
    maybe(s, "msb_bits", c.layout.msb_bits);
    maybe(s, "channels", c.layout.channels);
    maybe(s, "banks_per_channel", c.layout.banks_per_channel);
    maybe(s, "arrays_per_bank", c.layout.arrays_per_bank);
  }
  maybe(j, "softmax_shift", c.softmax_shift);
  maybe(j, "overlap_thresholding", c.overlap_thresholding);
}

uint64_t ceil_div(uint64_t a, uint64_t b) { return (a + b - 1) / b; }

uint64_t mix_seed(uint64_t base, uint64_t t) {
  uint64_t z = base + (t + 1) * 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace

std::string SimConfig::to_json() const { return config_to_json(*this).dump(2); }

SimConfig SimConfig::from_json(const std::string& text) {
  SimConfig c;
  apply_json(c, ordered_json::parse(text));
  return c;
}

void SimConfig::apply_json_overrides(const std::string& text) {
  apply_json(*this, ordered_json::parse(text));
}

RunResult run(const AttentionTrace& trace, const SimConfig& cfg) {
  trace.validate();
  cfg.timing.validate();

  const uint32_t s = trace.seq_len;
  const uint32_t d = trace.embed;
  const bool masked = cfg.mode == Mode::sprint || cfg.mode == Mode::mask_only;
  const MaskedExtent extent = apply_2d_mask(trace, masked);
  const uint32_t n_queries = extent.n_queries;
  const uint32_t key_extent = extent.n_keys;
  const int channels = cfg.timing.channels_per_corelet * cfg.corelet.n_corelets;
  const uint64_t passes = ceil_div(d, cfg.corelet.mac_width);
  const uint64_t accesses_per_vector = ceil_div(uint64_t(d) * 8, 512);

  EnergyLedger ledger(cfg.energy);
  RunResult out;
  out.attention.assign(std::size_t(s) * d, 0);
  out.prune_history.reserve(n_queries);

  ReramLayout layout = cfg.layout;
  layout.channels = channels;

  // ReRAM writes: K via the store (MSB/LSB split), plus Q and V rows actually
  // placed; masked modes skip the padded region entirely.
  ReramStore store(std::span<const int8_t>(trace.k.data(), std::size_t(key_extent) * d),
                   key_extent, d, layout, &ledger);
  ledger.charge_reram_write(int64_t(key_extent) * d * 8);  // V
  ledger.charge_reram_write(int64_t(n_queries) * d * 8);   // Q

  BufferState buffers(cfg.corelet.capacity_vectors(d));
  const int cap = buffers.capacity();

  const uint64_t copyq_beats = ceil_div(uint64_t(d) * layout.msb_bits, cfg.timing.channel_width_bits);
  const uint64_t readp_beats = std::max<uint64_t>(
      1, ceil_div(ceil_div(key_extent, channels), cfg.timing.channel_width_bits));
  const uint64_t thr_latency = (cfg.timing.tCL + copyq_beats - 1) + cfg.timing.tAxTh +
                               (cfg.timing.tCL + readp_beats - 1);
  const uint64_t beats_per_token = ceil_div(uint64_t(2) * d * 8, cfg.timing.channel_width_bits);

  PerfReport& rep = out.report;
  rep.mode = mode_name(cfg.mode);
  rep.preset = std::string(1, cfg.preset);
  rep.seq_len = s;
  rep.valid_len = trace.valid_len;
  rep.noise_note = cfg.noise.mode == NoiseModel::Mode::quantize_only
                       ? "quantize_only b=" + std::to_string(cfg.noise.b_equiv)
                       : "quantize+gaussian b=" + std::to_string(cfg.noise.b_equiv) +
                             " sigma=" + std::to_string(cfg.noise.sigma);
  int32_t range_lo = INT32_MAX, range_hi = INT32_MIN;

  PruneVector prev(s);
  uint64_t cycles = 0, prev_vpu = 0;
  uint64_t unpruned_sum = 0;

  for (uint32_t t = 0; t < n_queries; ++t) {
    auto q = trace.q_row(t);
    PruneVector curr(s);
    for (uint32_t j = key_extent; j < s; ++j) curr.set(j);  // outside the fetchable extent
    uint64_t thr_cycles = 0;

    if (cfg.mode == Mode::sprint) {
      std::vector<int8_t> q_msb(d);
      for (uint32_t i = 0; i < d; ++i) q_msb[i] = msb_nibble(q[i]);
      NoiseModel noise = cfg.noise;
      noise.seed = mix_seed(cfg.noise.seed, t);
      InmemScores inm = store.inmem_score(q_msb, noise);
      PruneVector pm = store.analog_compare(inm, msb_threshold(trace.threshold, layout.msb_bits));
      for (uint32_t j = 0; j < key_extent; ++j) curr.set(j, pm.test(j));
      range_lo = std::min(range_lo, inm.range_lo);
      range_hi = std::max(range_hi, inm.range_hi);
      thr_cycles = thr_latency;
      rep.bytes_overhead += ceil_div(uint64_t(d) * layout.msb_bits, 8) + ceil_div(key_extent, 8);
    } else if (cfg.mode == Mode::pruning_only) {
      // whole QxK^T computed on chip, then thresholded
      ScoreVector sc = exact_scores(q, trace.k, s, d);
      PruneVector p = threshold_prune(sc, trace.threshold);
      for (uint32_t j = 0; j < key_extent; ++j) curr.set(j, p.test(j));
    }
    // baseline: nothing pruned; mask_only: only the padded region is masked

    const uint64_t u = uint64_t(key_extent) - [&] {
      uint64_t c = 0;
      for (uint32_t j = 0; j < key_extent; ++j) c += curr.test(j);
      return c;
    }();
    unpruned_sum += u;

    // ---- fetch decisions ----
    std::vector<uint32_t> fetch_tokens;
    if (cfg.mode == Mode::sprint) {
      SldVectors sv = t == 0 ? first_query_bootstrap(curr) : sld_compute(prev, curr);
      // the index buffers only track adjacent queries: mem_req is always
      // fetched; locality hits must still be resident or they are refetched
      sv.mem_req.for_each_set([&](std::size_t j) {
        if (j < key_extent) fetch_tokens.push_back(static_cast<uint32_t>(j));
      });
      sv.locality.for_each_set([&](std::size_t j) {
        if (j < key_extent && !buffers.resident(static_cast<uint32_t>(j)))
          fetch_tokens.push_back(static_cast<uint32_t>(j));
      });
      std::sort(fetch_tokens.begin(), fetch_tokens.end());
    } else {
      // streaming baseline: the first `cap` vectors stay resident, the rest
      // of the sequence streams through on every query
      uint32_t first_streamed = std::min<uint32_t>(cap, key_extent);
      uint32_t from = t == 0 ? 0 : first_streamed;
      for (uint32_t j = from; j < key_extent; ++j) fetch_tokens.push_back(j);
    }

    for (uint32_t tok : fetch_tokens) {
      ledger.charge_reram_read(int64_t(2) * d * 8);  // K (MSB+LSB) and V
      ledger.charge_buffer_access(int64_t(2) * accesses_per_vector);
      rep.bytes_fetched += uint64_t(2) * d;
      rep.key_fetches++;
      if (cfg.mode == Mode::sprint) buffers.insert(tok, curr);
    }
    // query vector itself streams in from standard ReRAM
    ledger.charge_reram_read(int64_t(d) * 8);
    rep.bytes_fetched += d;

    // ---- arrivals: round-robin channels, sequential beats per channel ----
    std::unordered_map<uint32_t, uint64_t> arrivals;
    {
      std::vector<uint64_t> chan_busy(channels, 0);
      for (uint32_t tok : fetch_tokens) {
        int c = static_cast<int>(tok % channels);
        chan_busy[c] += beats_per_token;
        arrivals[tok] = thr_cycles + chan_busy[c];
      }
    }

    // ---- compute-side energy ----
    uint64_t scored = 0;   // exact on-chip q.k dot products this query
    uint64_t reduced = 0;  // softmax / V-PU lanes this query
    switch (cfg.mode) {
      case Mode::sprint: scored = u; reduced = u; break;
      case Mode::pruning_only: scored = s; reduced = u; break;
      case Mode::baseline: scored = s; reduced = s; break;
      case Mode::mask_only: scored = key_extent; reduced = key_extent; break;
    }
    ledger.charge_qk_dots(int64_t(scored) * passes);
    ledger.charge_buffer_access(int64_t(scored) * accesses_per_vector);   // K reads
    ledger.charge_buffer_access(int64_t(reduced) * accesses_per_vector);  // V reads
    ledger.charge_softmax(int64_t(reduced));
    ledger.charge_v_dots(int64_t(reduced) * passes);
    rep.score_computations += scored;

    // ---- timing ----
    QueryTiming qt;
    if (cfg.mode == Mode::sprint) {
      qt = process_query_timing(curr, key_extent, arrivals, cfg.corelet, d);
    } else {
      PruneVector none(s);
      for (uint32_t j = key_extent; j < s; ++j) none.set(j);
      qt = process_query_timing(none, key_extent, arrivals, cfg.corelet, d);
      if (cfg.mode == Mode::pruning_only && reduced != scored) {
        // QK runs dense; softmax and V-PU shrink to the unpruned set
        uint64_t per_c = ceil_div(reduced, cfg.corelet.n_corelets);
        qt.vpu_cycles = per_c * passes;
        qt.softmax_cycles =
            reduced == 0 ? 0
                         : uint64_t(cfg.corelet.divider_latency) +
                               ceil_div(reduced, cfg.corelet.n_dividers);
        qt.latency = qt.qk_cycles + qt.softmax_cycles + qt.vpu_cycles;
      }
    }
    uint64_t latency = thr_cycles + qt.latency;
    if (cfg.overlap_thresholding && t > 0) latency -= std::min(thr_cycles, prev_vpu);
    cycles += std::max<uint64_t>(latency, 1);
    prev_vpu = qt.vpu_cycles;

    // ---- values (always the bit-exact reference path) ----
    PruneVector value_prune = cfg.mode == Mode::baseline ? PruneVector(s) : curr;
    std::vector<int16_t> row = reference_attention_row(q, trace.k, trace.v, s, d, value_prune,
                                                       cfg.softmax_shift);
    std::copy(row.begin(), row.end(), out.attention.begin() + std::size_t(t) * d);

    out.prune_history.push_back(curr);
    prev = std::move(curr);
  }

  rep.cycles_total = cycles;
  rep.energy_fj = ledger.fj;
  rep.energy_events = ledger.events;
  rep.energy_total_fj = ledger.total_fj();
  if (cfg.mode == Mode::sprint) {
    rep.quant_range_lo = range_lo == INT32_MAX ? 0 : range_lo;
    rep.quant_range_hi = range_hi == INT32_MIN ? 0 : range_hi;
  }
  if (cfg.corelet.n_corelets >= 2 && !out.prune_history.empty()) {
    rep.imbalance_ratio =
        imbalance_ratio_interleaved(out.prune_history, cfg.corelet.n_corelets).ratio;
  } else {
    rep.imbalance_ratio = 1.0;
  }
  if (out.prune_history.size() >= 2) {
    OverlapStats st = empirical_overlap(out.prune_history);
    rep.empirical_overlap_mean = st.mean_common;
    rep.empirical_overlap_fraction = st.fraction;
  }
  if (n_queries > 0 && key_extent > 0) {
    int mean_u = static_cast<int>(
        std::llround(static_cast<double>(unpruned_sum) / n_queries));
    rep.expected_overlap_mean = expected_overlap(static_cast<int>(key_extent),
                                                 std::min<int>(mean_u, key_extent));
  }
  {
    // one MAC = two ops; QK-PU and V-PU events are mac_width-tap dots
    double macs = static_cast<double>(ledger.events[static_cast<int>(EnergyCat::qk_pu)] +
                                      ledger.events[static_cast<int>(EnergyCat::v_pu)]) *
                  cfg.corelet.mac_width;
    double ops = 2.0 * macs;
    double seconds = static_cast<double>(cycles) / (cfg.timing.clock_mhz * 1e6);
    double joules = static_cast<double>(rep.energy_total_fj) * 1e-15;
    rep.gops_per_s = seconds > 0 ? ops / 1e9 / seconds : 0.0;
    rep.gops_per_j = joules > 0 ? ops / 1e9 / joules : 0.0;
  }
  return out;
}

}  // namespace sprint
