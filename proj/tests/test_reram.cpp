#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "sprint/reram.hpp"
#include "sprint/rng.hpp"

using namespace sprint;

namespace {

std::vector<int8_t> random_keys(std::size_t s, std::size_t d, uint64_t seed) {
  Rng rng(seed);
  std::vector<int8_t> k(s * d);
  for (auto& x : k) x = int8_t(rng.uniform_int(-128, 127));
  return k;
}

// independent MSB-product oracle: arithmetic >>4 on both operands
std::vector<int32_t> msb_oracle(std::span<const int8_t> q, std::span<const int8_t> k,
                                std::size_t s, std::size_t d) {
  std::vector<int32_t> out(s, 0);
  for (std::size_t j = 0; j < s; ++j)
    for (std::size_t i = 0; i < d; ++i)
      out[j] += (int32_t(q[i]) >> 4) * (int32_t(k[j * d + i]) >> 4);
  return out;
}

}  // namespace

TEST_CASE("msb threshold rescaling floors toward not pruning") {
  CHECK(msb_threshold(256, 4) == 1);
  CHECK(msb_threshold(255, 4) == 0);
  CHECK(msb_threshold(0, 4) == 0);
  CHECK(msb_threshold(-1, 4) == -1);    // floor, not truncation toward zero
  CHECK(msb_threshold(-256, 4) == -1);
  CHECK(msb_threshold(-257, 4) == -2);
  CHECK(msb_threshold(12345, 8) == 12345);  // no truncation at full width
}

TEST_CASE("placement follows the modulo-channel layout") {
  const std::size_t s = 128, d = 64;
  ReramLayout layout;
  layout.channels = 4;
  layout.banks_per_channel = 4;
  ReramStore store(random_keys(s, d, 1), s, d, layout, nullptr);
  for (uint32_t j : {0u, 4u, 8u, 124u}) CHECK(store.placement(j).channel == 0);
  CHECK(store.placement(1).channel == 1);
  CHECK(store.placement(7).channel == 3);
  CHECK_THROWS_AS(store.placement(128), std::out_of_range);
}

TEST_CASE("one key fills one transposable column; wide keys span two") {
  ReramLayout layout;
  layout.channels = 1;
  layout.banks_per_channel = 1;
  SUBCASE("d=64 single column") {
    ReramStore store(random_keys(1, 64, 2), 1, 64, layout, nullptr);
    CHECK(store.placement(0).column == 0);
    CHECK(store.tile_activations_per_query() == 1);
  }
  SUBCASE("d=128 double column") {
    ReramStore store(random_keys(4, 128, 2), 4, 128, layout, nullptr);
    CHECK(store.placement(0).column == 0);
    CHECK(store.placement(1).column == 2);  // adjacent column pair per key
    CHECK(store.placement(2).column == 4);
  }
}

TEST_CASE("capacity checking") {
  ReramLayout layout;
  layout.channels = 1;
  layout.banks_per_channel = 1;
  layout.arrays_per_bank = 1;  // 128 columns
  CHECK_NOTHROW(ReramStore(random_keys(128, 64, 3), 128, 64, layout, nullptr));
  CHECK_THROWS_AS(ReramStore(random_keys(129, 64, 3), 129, 64, layout, nullptr),
                  std::invalid_argument);
}

TEST_CASE("in-memory scores equal the exact MSB oracle with noise disabled") {
  const std::size_t s = 96, d = 64;
  auto k = random_keys(s, d, 4);
  Rng rng(5);
  std::vector<int8_t> q(d), q_msb(d);
  for (std::size_t i = 0; i < d; ++i) {
    q[i] = int8_t(rng.uniform_int(-128, 127));
    q_msb[i] = msb_nibble(q[i]);
  }
  ReramLayout layout;
  ReramStore store(k, s, d, layout, nullptr);
  NoiseModel off;
  off.b_equiv = 16;
  InmemScores sc = store.inmem_score(q_msb, off);
  CHECK(sc.scores.values == msb_oracle(q, k, s, d));
}

TEST_CASE("b=5 degradation stays within half a quantization step") {
  const std::size_t s = 256, d = 64;
  auto k = random_keys(s, d, 6);
  Rng rng(7);
  std::vector<int8_t> q_msb(d);
  for (auto& x : q_msb) x = int8_t(rng.uniform_int(-8, 7));
  ReramLayout layout;
  ReramStore store(k, s, d, layout, nullptr);
  NoiseModel exact_nm;
  exact_nm.b_equiv = 16;
  NoiseModel nm;
  nm.b_equiv = 5;
  InmemScores exact = store.inmem_score(q_msb, exact_nm);
  InmemScores deg = store.inmem_score(q_msb, nm);
  double span = double(deg.range_hi) - deg.range_lo;
  double half_step = span / ((1 << 5) - 1) / 2.0 + 0.5;  // +0.5 integer grid rounding
  for (std::size_t j = 0; j < s; ++j)
    CHECK(std::abs(double(deg.scores.values[j]) - exact.scores.values[j]) <= half_step);
}

TEST_CASE("gaussian term is deterministic under a fixed seed") {
  const std::size_t s = 64, d = 64;
  auto k = random_keys(s, d, 8);
  std::vector<int8_t> q_msb(d, 3);
  ReramLayout layout;
  ReramStore store(k, s, d, layout, nullptr);
  NoiseModel nm;
  nm.mode = NoiseModel::Mode::quantize_plus_gaussian;
  nm.sigma = 12.0;
  nm.seed = 99;
  CHECK(store.inmem_score(q_msb, nm).scores.values == store.inmem_score(q_msb, nm).scores.values);
  nm.seed = 100;
  CHECK(store.inmem_score(q_msb, nm).scores.values !=
        store.inmem_score(q_msb, NoiseModel{NoiseModel::Mode::quantize_plus_gaussian, 5, 12.0, 99})
            .scores.values);
}

TEST_CASE("analog compare matches software thresholding and charges comparators") {
  const std::size_t s = 128, d = 64;
  auto k = random_keys(s, d, 10);
  Rng rng(11);
  std::vector<int8_t> q_msb(d);
  for (auto& x : q_msb) x = int8_t(rng.uniform_int(-8, 7));
  ReramLayout layout;
  EnergyLedger ledger;
  ReramStore store(k, s, d, layout, &ledger);
  NoiseModel nm;
  InmemScores sc = store.inmem_score(q_msb, nm);

  int64_t before = ledger.fj[int(EnergyCat::analog_compare)];
  PruneVector p = store.analog_compare(sc, 5);
  CHECK(ledger.fj[int(EnergyCat::analog_compare)] - before == 5340);  // one 128-column block
  CHECK(ledger.events[int(EnergyCat::adc_1bit)] == 128);              // 1-bit ADC per column
  CHECK(p == threshold_prune(sc.scores, 5));

  int32_t below_all = sc.range_lo;  // nothing strictly below the minimum
  CHECK(store.analog_compare(sc, below_all).none());
}

TEST_CASE("transposed reads return stored nibbles and charge per channel") {
  const std::size_t s = 32;
  SUBCASE("identity at d=64") {
    const std::size_t d = 64;
    auto k = random_keys(s, d, 12);
    ReramLayout layout;
    ReramStore store(k, s, d, layout, nullptr);
    for (uint32_t j = 0; j < s; ++j) {
      auto got = store.transposed_read(j);
      for (std::size_t i = 0; i < d; ++i) CHECK(got[i] == msb_nibble(k[j * d + i]));
    }
    CHECK(store.channel_read_bits(0) == int64_t(s / layout.channels) * d * 4);
  }
  SUBCASE("a 512-bit read charges exactly 1587.2 pJ") {
    const std::size_t d = 128;  // 128 x 4-bit nibbles = 512 bits
    auto k = random_keys(s, d, 13);
    ReramLayout layout;
    EnergyLedger ledger;
    ReramStore store(k, s, d, layout, &ledger);
    int64_t before = ledger.fj[int(EnergyCat::reram_read)];
    store.transposed_read(3);
    CHECK(ledger.fj[int(EnergyCat::reram_read)] - before == 1587200);
    CHECK(store.channel_read_bits(3) == 512);
    CHECK(store.channel_read_bits(0) == 0);  // channel isolation
  }
}

TEST_CASE("storing keys charges write energy for every bit") {
  const std::size_t s = 16, d = 64;
  EnergyLedger ledger;
  ReramLayout layout;
  ReramStore store(random_keys(s, d, 14), s, d, layout, &ledger);
  CHECK(ledger.fj[int(EnergyCat::reram_write)] == int64_t(s) * d * 8 * 24400);
}
