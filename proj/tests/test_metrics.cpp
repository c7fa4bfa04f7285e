#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <string>
#include <vector>

#include "sprint/metrics.hpp"
#include "sprint/rng.hpp"

using namespace sprint;

namespace {

using boost::multiprecision::cpp_int;
using boost::multiprecision::cpp_rational;

// independent oracle: fix one M-subset as {0..M-1} (symmetry), enumerate all
// M-subsets of {0..S-1}, average the intersection size as an exact rational
cpp_rational enumerate_overlap(int S, int M) {
  std::vector<int> idx(M);
  for (int i = 0; i < M; ++i) idx[i] = i;
  cpp_int total = 0, count = 0;
  if (M == 0) return 0;
  while (true) {
    int inter = 0;
    for (int v : idx)
      if (v < M) ++inter;
    total += inter;
    count += 1;
    int pos = M - 1;
    while (pos >= 0 && idx[pos] == S - M + pos) --pos;
    if (pos < 0) break;
    ++idx[pos];
    for (int i = pos + 1; i < M; ++i) idx[i] = idx[i - 1] + 1;
  }
  return cpp_rational(total, count);
}

}  // namespace

TEST_CASE("energy constant cross-checks") {
  EnergyConstants k;
  CHECK_NOTHROW(k.validate());
  CHECK(512 * k.reram_read_fj_per_bit == 1587200);
  CHECK(512 * k.reram_write_fj_per_bit == 12492800);
  k.reram_read_fj_per_bit = 3000;
  CHECK_THROWS(k.validate());
}

TEST_CASE("ledger micro-run charges the documented aggregates") {
  EnergyLedger led;
  led.charge_reram_read(512);
  led.charge_reram_write(512);
  led.charge_inmem_tiles(1);
  led.charge_compare_columns(128);
  CHECK(led.fj[int(EnergyCat::reram_read)] == 1587200);   // 1587.2 pJ
  CHECK(led.fj[int(EnergyCat::reram_write)] == 12492800); // 12492.8 pJ
  CHECK(led.fj[int(EnergyCat::inmem_mac)] == 833600);     // 833.6 pJ
  CHECK(led.fj[int(EnergyCat::analog_compare)] == 5340);  // 5.34 pJ
  CHECK(led.total_fj() == 1587200 + 12492800 + 833600 + 5340);

  led.charge_adc_samples(64);
  CHECK(led.fj[int(EnergyCat::adc_1bit)] == 0);  // events tracked, energy folded elsewhere
  CHECK(led.events[int(EnergyCat::adc_1bit)] == 64);

  led.charge_compare_columns(129);  // rounds up to two 128-column blocks
  CHECK(led.fj[int(EnergyCat::analog_compare)] == 5340 * 3);
}

TEST_CASE("expected overlap degenerate and hand values") {
  CHECK(expected_overlap(10, 0) == 0.0);
  CHECK(expected_overlap(7, 7) == 7.0);
  CHECK(expected_overlap(4, 2) == doctest::Approx(1.0));
  ExactFraction f = expected_overlap_exact(4, 2);
  CHECK(f.num == "1");
  CHECK(f.den == "1");
  CHECK_THROWS(expected_overlap(4, 5));
}

TEST_CASE("expected overlap equals the enumeration oracle for small S") {
  for (int S = 1; S <= 9; ++S) {
    for (int M = 0; M <= S; ++M) {
      ExactFraction f = expected_overlap_exact(S, M);
      cpp_rational got(cpp_int(f.num), cpp_int(f.den));
      CHECK(got == enumerate_overlap(S, M));
    }
  }
}

TEST_CASE("expected overlap equals the hypergeometric mean M^2/S") {
  for (auto [S, M] : std::vector<std::pair<int, int>>{{64, 16}, {384, 96}, {384, 288}, {1024, 256}}) {
    ExactFraction f = expected_overlap_exact(S, M);
    cpp_rational got(cpp_int(f.num), cpp_int(f.den));
    CHECK(got == cpp_rational(cpp_int(M) * M, S));
  }
  CHECK(expected_overlap(4096, 1024) == doctest::Approx(1024.0 * 1024.0 / 4096.0));
}

TEST_CASE("empirical overlap on hand-built sequences") {
  PruneVector a(8), b(8);
  SUBCASE("identical all-unpruned vectors") {
    OverlapStats st = empirical_overlap(std::vector<PruneVector>{a, b});
    CHECK(st.mean_common == 8.0);
    CHECK(st.fraction == 1.0);
  }
  SUBCASE("complementary vectors share nothing") {
    for (int j = 0; j < 4; ++j) a.set(j);
    for (int j = 4; j < 8; ++j) b.set(j);
    OverlapStats st = empirical_overlap(std::vector<PruneVector>{a, b});
    CHECK(st.mean_common == 0.0);
    CHECK(st.fraction == 0.0);
  }
  SUBCASE("fewer than two vectors rejected") {
    CHECK_THROWS(empirical_overlap(std::vector<PruneVector>{a}));
  }
}

TEST_CASE("random subsets track the analytic overlap") {
  const int S = 96, M = 24;
  Rng rng(7);
  std::vector<PruneVector> pv;
  const int n = 4000;
  for (int t = 0; t < n; ++t) {
    // uniform M-subset via partial Fisher-Yates
    std::vector<int> perm(S);
    for (int i = 0; i < S; ++i) perm[i] = i;
    PruneVector p(S, true);
    for (int i = 0; i < M; ++i) {
      int j = i + int(rng.uniform_int(0, S - 1 - i));
      std::swap(perm[i], perm[j]);
      p.set(std::size_t(perm[i]), false);
    }
    pv.push_back(std::move(p));
  }
  OverlapStats st = empirical_overlap(pv);
  double mean = expected_overlap(S, M);
  // hypergeometric variance, mean over n-1 adjacent pairs (pairs overlap but
  // a conservative 3x the iid sigma absorbs the correlation)
  double var = double(M) * M * (S - M) * (S - M) / (double(S) * S * (S - 1));
  double sigma = std::sqrt(var / (n - 1));
  CHECK(std::abs(st.mean_common - mean) <= 3 * 3 * sigma);
}

TEST_CASE("report JSON is deterministic and schema-complete") {
  PerfReport r;
  r.trace_name = "t";
  r.preset = "S";
  r.mode = "sprint";
  r.cycles_total = 123;
  r.energy_total_fj = 42;
  std::string a = r.to_json();
  CHECK(a == r.to_json());
  for (int c = 0; c < int(EnergyCat::kCount); ++c)
    CHECK(a.find(energy_cat_name(EnergyCat(c))) != std::string::npos);
  CHECK(a.find("schema_version") != std::string::npos);
  CHECK(a.find("gops_per_s") != std::string::npos);
}

TEST_CASE("compare ratios") {
  PerfReport a;
  a.cycles_total = 100;
  a.energy_total_fj = 1000;
  a.bytes_fetched = 64;
  PerfReport b = a;
  CompareResult same = compare(a, b);
  CHECK_FALSE(same.undefined);
  CHECK(same.speedup == 1.0);
  CHECK(same.energy_reduction == 1.0);
  CHECK(same.data_movement_reduction == 1.0);

  b.cycles_total = 400;
  b.energy_total_fj = 3000;
  b.bytes_fetched = 128;
  CompareResult r = compare(a, b);
  CHECK(r.speedup == 4.0);
  CHECK(r.energy_reduction == 3.0);
  CHECK(r.data_movement_reduction == 2.0);

  PerfReport zero;
  CHECK(compare(zero, b).undefined);
}
