#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "sprint/attention_core.hpp"
#include "sprint/rng.hpp"

using namespace sprint;

TEST_CASE("exact_scores basis and all-ones cases") {
  const std::size_t d = 64, s = 3;
  std::vector<int8_t> q(d, 0), k(s * d, 0);
  q[0] = 1;  // basis vector e1
  k[0 * d + 0] = 17;
  k[1 * d + 0] = -5;
  k[2 * d + 0] = 127;
  ScoreVector sc = exact_scores(q, k, s, d);
  CHECK(sc.values == std::vector<int32_t>{17, -5, 127});

  std::vector<int8_t> ones_q(d, 1), ones_k(d, 1);
  CHECK(exact_scores(ones_q, ones_k, 1, d).values[0] == 64);
}

TEST_CASE("exact_scores matches a naive oracle") {
  Rng rng(77);
  const std::size_t s = 8, d = 64;
  std::vector<int8_t> q(d), k(s * d);
  for (auto& x : q) x = int8_t(rng.uniform_int(-128, 127));
  for (auto& x : k) x = int8_t(rng.uniform_int(-128, 127));
  ScoreVector sc = exact_scores(q, k, s, d);
  for (std::size_t j = 0; j < s; ++j) {
    long long ref = 0;
    for (std::size_t i = 0; i < d; ++i) ref += (long long)q[i] * (long long)k[j * d + i];
    CHECK(sc.values[j] == ref);
  }
}

TEST_CASE("quantization identity, extremes and monotonicity") {
  SUBCASE("b=16 is the identity on small spans") {
    ScoreVector s;
    s.values = {-100, 0, 1, 99, 100};
    ScoreVector q = quantize_scores(s, 16, -100, 100);
    CHECK(q.values == s.values);
  }
  SUBCASE("b=1 snaps 30 to the upper of two levels") {
    CHECK(quantize_value(30, 1, -100, 100) == 100);
    CHECK(quantize_value(-30, 1, -100, 100) == -100);
    CHECK(quantize_value(0, 1, -100, 100) == 100);  // round-half-up
  }
  SUBCASE("monotone on random pairs") {
    Rng rng(5);
    for (int it = 0; it < 1000; ++it) {
      int32_t a = int32_t(rng.uniform_int(-5000, 5000));
      int32_t b = int32_t(rng.uniform_int(-5000, 5000));
      if (a > b) std::swap(a, b);
      CHECK(quantize_value(a, 4, -4096, 4096) <= quantize_value(b, 4, -4096, 4096));
    }
  }
  SUBCASE("invalid ranges rejected") {
    ScoreVector s;
    s.values = {0};
    CHECK_THROWS(quantize_scores(s, 4, 10, 10));
    CHECK_THROWS(quantize_scores(s, 0, 0, 1));
  }
}

TEST_CASE("threshold_prune strict-less semantics") {
  ScoreVector s;
  s.values = {5, -2, 7};
  PruneVector p = threshold_prune(s, 0);
  CHECK_FALSE(p.test(0));
  CHECK(p.test(1));
  CHECK_FALSE(p.test(2));
  CHECK(threshold_prune(s, INT32_MIN).none());
  CHECK(threshold_prune(s, 5).test(1));
  CHECK_FALSE(threshold_prune(s, 5).test(0));  // tie kept
}

TEST_CASE("quantized pruning disagrees only near the threshold") {
  Rng rng(13);
  const int32_t lo = -20000, hi = 20000, th = 1234;
  const int b = 4;
  const double half_step = (double(hi) - lo) / ((1 << b) - 1) / 2.0 + 0.5;
  int checked = 0;
  for (int it = 0; it < 10000; ++it) {
    int32_t x = int32_t(rng.uniform_int(lo, hi));
    bool exact = x < th;
    bool quant = quantize_value(x, b, lo, hi) < th;
    if (exact != quant) {
      CHECK(std::abs(double(x) - th) <= half_step);
      ++checked;
    }
  }
  CHECK(checked > 0);  // the study actually exercised disagreements
}

TEST_CASE("disagreement count shrinks as b grows") {
  // adjacent b can wobble because the level grids are not nested, so check the
  // trend over two-bit steps plus a strong end-to-end reduction
  Rng rng(29);
  const int32_t lo = -30000, hi = 30000;
  std::vector<int32_t> xs(20000);
  for (auto& x : xs) x = int32_t(rng.uniform_int(lo, hi));
  std::vector<int32_t> ths = {-20011, -500, 0, 777, 4242, 17001};
  std::array<int, 9> dis{};
  for (int b = 2; b <= 8; ++b)
    for (int32_t th : ths)
      for (int32_t x : xs)
        if ((x < th) != (quantize_value(x, b, lo, hi) < th)) ++dis[b];
  for (int b = 2; b <= 6; ++b) CHECK(dis[b + 2] < dis[b]);
  CHECK(dis[8] * 20 < dis[2]);
}

TEST_CASE("softmax degenerate rows") {
  ScoreVector s;
  s.values = {100, -300, 50};
  SUBCASE("single unpruned entry gets the full code") {
    PruneVector p(3);
    p.set(0);
    p.set(2);
    ProbVector pr = softmax_lut(s, p);
    CHECK_FALSE(pr.empty_row);
    CHECK(pr.codes[1] == kProbOne);
    CHECK(pr.codes[0] == 0);
    CHECK(pr.codes[2] == 0);
  }
  SUBCASE("two equal scores split evenly") {
    ScoreVector eq;
    eq.values = {40, 40, -2048};
    PruneVector p(3);
    p.set(2);
    ProbVector pr = softmax_lut(eq, p);
    CHECK(std::abs(int(pr.codes[0]) - 128) <= 1);
    CHECK(std::abs(int(pr.codes[1]) - 128) <= 1);
  }
  SUBCASE("all pruned raises the empty-row flag") {
    PruneVector p(3, true);
    ProbVector pr = softmax_lut(s, p);
    CHECK(pr.empty_row);
    CHECK(pr.codes == std::vector<uint16_t>{0, 0, 0});
  }
  SUBCASE("out-of-domain input rejected") {
    ScoreVector bad;
    bad.values = {5000};
    CHECK_THROWS(softmax_lut(bad, PruneVector(1)));
  }
}

TEST_CASE("softmax tracks a float oracle on random 12-bit rows") {
  Rng rng(101);
  double max_err = 0.0;
  for (int it = 0; it < 1000; ++it) {
    std::size_t n = 2 + std::size_t(rng.uniform_int(0, 14));
    ScoreVector s;
    PruneVector p(n);
    for (std::size_t j = 0; j < n; ++j) {
      s.values.push_back(int32_t(rng.uniform_int(-2048, 2047)));
      if (rng.bernoulli(0.3) && j > 0) p.set(j);
    }
    ProbVector pr = softmax_lut(s, p);

    double m = -1e9;
    for (std::size_t j = 0; j < n; ++j)
      if (!p.test(j)) m = std::max(m, double(s.values[j]));
    double denom = 0.0;
    std::vector<double> e(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      if (p.test(j)) continue;
      e[j] = std::exp((double(s.values[j]) - m) / 16.0);  // 4 fractional bits
      denom += e[j];
    }
    int sum = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (p.test(j)) {
        CHECK(pr.codes[j] <= 1);  // pruned probability within 1 ULP of zero
        continue;
      }
      max_err = std::max(max_err, std::abs(double(pr.codes[j]) / 256.0 - e[j] / denom));
      sum += pr.codes[j];
    }
    CHECK(std::abs(sum - 256) <= 2);  // unpruned mass sums to 1 within 2 ULP
  }
  CHECK(max_err <= 2.0 / 256.0);
}

TEST_CASE("weighted value sum") {
  const std::size_t s = 3, d = 4;
  std::vector<int8_t> v = {10, -20, 30, -40, 1, 2, 3, 4, -7, 7, -7, 7};
  SUBCASE("one-hot probabilities select a row") {
    ProbVector pr;
    pr.codes = {0, 256, 0};
    PruneVector p(s);
    p.set(0);
    p.set(2);
    std::vector<int16_t> out = weighted_sum_v(pr, v, s, d, p);
    CHECK(out == std::vector<int16_t>{1, 2, 3, 4});
  }
  SUBCASE("identical rows are reproduced under an even split") {
    std::vector<int8_t> same = {9, -9, 3, 0, 9, -9, 3, 0, 9, -9, 3, 0};
    ProbVector pr;
    pr.codes = {128, 128, 0};
    PruneVector p(s);
    p.set(2);
    std::vector<int16_t> out = weighted_sum_v(pr, same, s, d, p);
    CHECK(out == std::vector<int16_t>{9, -9, 3, 0});
  }
  SUBCASE("random instance vs float oracle") {
    Rng rng(55);
    const std::size_t n = 16, dd = 8;
    std::vector<int8_t> vv(n * dd);
    for (auto& x : vv) x = int8_t(rng.uniform_int(-128, 127));
    ProbVector pr;
    PruneVector p(n);
    for (std::size_t j = 0; j < n; ++j) {
      pr.codes.push_back(uint16_t(rng.uniform_int(0, 64)));
      if (rng.bernoulli(0.4)) p.set(j);
    }
    std::vector<int16_t> out = weighted_sum_v(pr, vv, n, dd, p);
    for (std::size_t i = 0; i < dd; ++i) {
      double ref = 0.0;
      for (std::size_t j = 0; j < n; ++j)
        if (!p.test(j)) ref += double(pr.codes[j]) / 256.0 * vv[j * dd + i];
      CHECK(std::abs(double(out[i]) - ref) <= 1.0);
    }
  }
}

TEST_CASE("sparse recompute is bit-identical to the dense path") {
  Rng rng(91);
  const std::size_t s = 48, d = 64;
  std::vector<int8_t> q(d), k(s * d);
  for (auto& x : q) x = int8_t(rng.uniform_int(-128, 127));
  for (auto& x : k) x = int8_t(rng.uniform_int(-128, 127));
  ScoreVector dense = exact_scores(q, k, s, d);

  SUBCASE("no pruning") {
    SparseScores sp = recompute_unpruned(q, k, s, d, PruneVector(s));
    REQUIRE(sp.indices.size() == s);
    CHECK(sp.values == dense.values);
  }
  SUBCASE("full pruning") {
    SparseScores sp = recompute_unpruned(q, k, s, d, PruneVector(s, true));
    CHECK(sp.indices.empty());
  }
  SUBCASE("random pruning") {
    PruneVector p(s);
    for (std::size_t j = 0; j < s; ++j)
      if (rng.bernoulli(0.6)) p.set(j);
    SparseScores sp = recompute_unpruned(q, k, s, d, p);
    std::size_t pos = 0;
    for (std::size_t j = 0; j < s; ++j) {
      if (p.test(j)) continue;
      REQUIRE(pos < sp.indices.size());
      CHECK(sp.indices[pos] == j);
      CHECK(sp.values[pos] == dense.values[j]);
      ++pos;
    }
    CHECK(pos == sp.indices.size());
  }
}
