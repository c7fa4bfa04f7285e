#include "sprint/workload.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>

#include "sprint/rng.hpp"

namespace sprint {

void AttentionTrace::validate() const {
  if (seq_len < 1 || seq_len > 65536) throw std::invalid_argument("seq_len out of range");
  if (embed < 1) throw std::invalid_argument("embed must be >= 1");
  if (valid_len > seq_len) throw std::invalid_argument("valid_len exceeds seq_len");
  std::size_t n = std::size_t(seq_len) * embed;
  if (q.size() != n || k.size() != n || v.size() != n)
    throw std::invalid_argument("matrix dimensions do not match seq_len x embed");
}

namespace {

constexpr char kMagic[4] = {'S', 'P', 'R', 'T'};
constexpr uint16_t kVersion = 1;

void put_u16(std::vector<uint8_t>& b, uint16_t v) {
  b.push_back(v & 0xff);
  b.push_back(v >> 8);
}
void put_u32(std::vector<uint8_t>& b, uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back((v >> (8 * i)) & 0xff);
}

uint16_t get_u16(std::span<const uint8_t> b, std::size_t off) {
  return uint16_t(b[off]) | uint16_t(b[off + 1]) << 8;
}
uint32_t get_u32(std::span<const uint8_t> b, std::size_t off) {
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= uint32_t(b[off + i]) << (8 * i);
  return v;
}

}  // namespace

std::vector<uint8_t> serialize_trace(const AttentionTrace& t) {
  t.validate();
  std::vector<uint8_t> b;
  b.reserve(18 + 3 * t.q.size());
  b.insert(b.end(), kMagic, kMagic + 4);
  put_u16(b, kVersion);
  put_u32(b, t.seq_len);
  put_u32(b, t.embed);
  put_u32(b, t.valid_len);
  put_u32(b, static_cast<uint32_t>(t.threshold));
  for (const auto* m : {&t.q, &t.k, &t.v})
    for (int8_t x : *m) b.push_back(static_cast<uint8_t>(x));
  return b;
}

AttentionTrace parse_trace(std::span<const uint8_t> b) {
  if (b.size() < 4 || std::memcmp(b.data(), kMagic, 4) != 0)
    throw TraceIoError(TraceIoError::Kind::bad_magic, 0, "missing SPRT magic at offset 0");
  if (b.size() < 22)
    throw TraceIoError(TraceIoError::Kind::truncated, b.size(), "header truncated at offset " + std::to_string(b.size()));
  if (get_u16(b, 4) != kVersion)
    throw TraceIoError(TraceIoError::Kind::bad_version, 4, "unsupported version at offset 4");
  AttentionTrace t;
  t.seq_len = get_u32(b, 6);
  t.embed = get_u32(b, 10);
  t.valid_len = get_u32(b, 14);
  if (t.seq_len < 1 || t.seq_len > 65536 || t.embed < 1 || t.valid_len > t.seq_len)
    throw TraceIoError(TraceIoError::Kind::bad_dimensions, 6, "bad dimensions in header at offset 6");
  t.threshold = static_cast<int32_t>(get_u32(b, 18));
  std::size_t n = std::size_t(t.seq_len) * t.embed;
  std::size_t need = 22 + 3 * n;
  // Header is 22 bytes: magic(4) version(2) s(4) d(4) valid(4) threshold(4).
  if (b.size() < need)
    throw TraceIoError(TraceIoError::Kind::truncated, b.size(),
                       "payload truncated: need " + std::to_string(need) + " bytes, have " +
                           std::to_string(b.size()) + " (offset " + std::to_string(b.size()) + ")");
  auto copy = [&](std::vector<int8_t>& dst, std::size_t off) {
    dst.resize(n);
    for (std::size_t i = 0; i < n; ++i) dst[i] = static_cast<int8_t>(b[off + i]);
  };
  copy(t.q, 22);
  copy(t.k, 22 + n);
  copy(t.v, 22 + 2 * n);
  t.validate();
  return t;
}

AttentionTrace load_trace(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw TraceIoError(TraceIoError::Kind::io, 0, "cannot open " + path);
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return parse_trace(bytes);
}

void save_trace(const AttentionTrace& trace, const std::string& path) {
  auto bytes = serialize_trace(trace);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw TraceIoError(TraceIoError::Kind::io, 0, "cannot open " + path + " for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw TraceIoError(TraceIoError::Kind::io, 0, "write failed for " + path);
}

namespace {

// Markov base pattern over token indices; bit 1 = unpruned ("important").
// Mean unpruned run length grows with locality, stationary fraction 1-rate.
BitVec markov_pattern(uint32_t s, double rate, double locality, Rng& rng) {
  double f = std::clamp(1.0 - rate, 0.005, 1.0);
  double run = 1.0 + locality * 7.0;
  double leave_u = std::clamp(1.0 / run, 0.01, 1.0);
  double enter_u = std::clamp(leave_u * f / std::max(1e-9, 1.0 - f), 0.0, 1.0);
  BitVec b(s);
  bool state = rng.bernoulli(f);
  for (uint32_t j = 0; j < s; ++j) {
    b.set(j, state);
    state = state ? !rng.bernoulli(leave_u) : rng.bernoulli(enter_u);
  }
  return b;
}

int8_t clamp8(int64_t x) {
  return static_cast<int8_t>(std::clamp<int64_t>(x, -128, 127));
}

}  // namespace

std::vector<PruneVector> markov_prune_sequence(uint32_t seq_len, uint32_t n_queries,
                                               double prune_rate, double locality,
                                               uint64_t seed) {
  Rng rng(seed);
  BitVec base = markov_pattern(seq_len, prune_rate, locality, rng);
  std::vector<PruneVector> out;
  out.reserve(n_queries);
  double pflip = 0.3 * (1.0 - locality);
  int64_t offset = 0;
  for (uint32_t t = 0; t < n_queries; ++t) {
    PruneVector p(seq_len);
    for (uint32_t j = 0; j < seq_len; ++j) {
      std::size_t src = static_cast<std::size_t>((int64_t(j) + offset) % int64_t(seq_len));
      bool unpruned = base.test(src);
      if (rng.bernoulli(pflip)) unpruned = !rng.bernoulli(prune_rate);
      p.set(j, !unpruned);
    }
    out.push_back(std::move(p));
    offset += rng.uniform_int(-2, 2);
    offset = ((offset % int64_t(seq_len)) + int64_t(seq_len)) % int64_t(seq_len);
  }
  return out;
}

AttentionTrace generate_synthetic(const SyntheticSpec& spec) {
  if (spec.valid_len == 0) throw std::invalid_argument("infeasible spec: valid_len must be >= 1");
  if (spec.valid_len > spec.seq_len) throw std::invalid_argument("valid_len exceeds seq_len");
  if (spec.seq_len < 1 || spec.seq_len > 65536) throw std::invalid_argument("seq_len out of range");
  if (spec.embed < 1) throw std::invalid_argument("embed must be >= 1");
  if (spec.target_prune_rate < 0.0 || spec.target_prune_rate > 1.0)
    throw std::invalid_argument("target_prune_rate must lie in [0,1]");
  if (spec.locality_strength < 0.0 || spec.locality_strength > 1.0)
    throw std::invalid_argument("locality_strength must lie in [0,1]");

  Rng rng(spec.rng_seed);
  const uint32_t s = spec.seq_len, d = spec.embed, n = spec.valid_len;
  const int64_t mix = static_cast<int64_t>(spec.locality_strength * 256.0 + 0.5);

  AttentionTrace t;
  t.seq_len = s;
  t.embed = d;
  t.valid_len = n;
  t.q.assign(std::size_t(s) * d, 0);
  t.k.assign(std::size_t(s) * d, 0);
  t.v.assign(std::size_t(s) * d, 0);

  // Shared direction; important (Markov-clustered) keys align with it so they
  // score high for every query, which is what makes unpruned sets overlap.
  std::vector<int64_t> dir(d);
  for (auto& x : dir) x = rng.uniform_int(-60, 60);
  BitVec important = markov_pattern(n, spec.target_prune_rate, spec.locality_strength, rng);

  for (uint32_t j = 0; j < n; ++j) {
    for (uint32_t i = 0; i < d; ++i) {
      int64_t noise = rng.uniform_int(-40, 40);
      int64_t val = important.test(j) ? (dir[i] * 3) / 5 + rng.uniform_int(-25, 25) : noise;
      t.k[std::size_t(j) * d + i] = clamp8(val);
      t.v[std::size_t(j) * d + i] = clamp8(rng.uniform_int(-127, 127));
    }
  }

  // Query random walk: each element resampled with prob (1-locality), then
  // mixed with the shared direction. locality=1 makes all queries identical.
  std::vector<int64_t> walk(d);
  for (auto& x : walk) x = rng.uniform_int(-60, 60);
  double presample = 1.0 - spec.locality_strength;
  for (uint32_t i = 0; i < n; ++i) {
    if (i > 0)
      for (auto& x : walk)
        if (rng.bernoulli(presample)) x = rng.uniform_int(-60, 60);
    for (uint32_t c = 0; c < d; ++c)
      t.q[std::size_t(i) * d + c] = clamp8((mix * dir[c] + (256 - mix) * walk[c]) >> 8);
  }

  // Threshold by empirical quantile of the pooled exact scores over the valid
  // region, so count(score < th) / total tracks the target rate.
  std::vector<int32_t> pool;
  pool.reserve(std::size_t(n) * n);
  for (uint32_t i = 0; i < n; ++i) {
    const int8_t* qi = t.q.data() + std::size_t(i) * d;
    for (uint32_t j = 0; j < n; ++j) {
      const int8_t* kj = t.k.data() + std::size_t(j) * d;
      int32_t acc = 0;
      for (uint32_t c = 0; c < d; ++c) acc += int32_t(qi[c]) * kj[c];
      pool.push_back(acc);
    }
  }
  std::sort(pool.begin(), pool.end());
  std::size_t idx = static_cast<std::size_t>(spec.target_prune_rate * double(pool.size()));
  if (idx >= pool.size())
    t.threshold = pool.back() == INT32_MAX ? INT32_MAX : pool.back() + 1;
  else
    t.threshold = pool[idx];
  return t;
}

}  // namespace sprint
