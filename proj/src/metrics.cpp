#include "sprint/metrics.hpp"

#include <boost/multiprecision/cpp_int.hpp>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace sprint {

using boost::multiprecision::cpp_int;

void EnergyConstants::validate() const {
  if (512 * reram_read_fj_per_bit != 1587200)
    throw std::invalid_argument("reram read constant inconsistent with 1587.2 pJ / 512 bits");
  if (512 * reram_write_fj_per_bit != 12492800)
    throw std::invalid_argument("reram write constant inconsistent with 12492.8 pJ / 512 bits");
}

const char* energy_cat_name(EnergyCat c) {
  switch (c) {
    case EnergyCat::reram_read: return "reram_read";
    case EnergyCat::reram_write: return "reram_write";
    case EnergyCat::inmem_mac: return "inmem_mac";
    case EnergyCat::analog_compare: return "analog_compare";
    case EnergyCat::adc_1bit: return "adc_1bit";
    case EnergyCat::onchip_buffer_rw: return "onchip_buffer_rw";
    case EnergyCat::qk_pu: return "qk_pu";
    case EnergyCat::softmax: return "softmax";
    case EnergyCat::v_pu: return "v_pu";
    case EnergyCat::bank_to_bank: return "bank_to_bank";
    default: return "?";
  }
}

static cpp_int binom(int n, int k) {
  if (k < 0 || k > n) return 0;
  if (k > n - k) k = n - k;
  cpp_int r = 1;
  for (int i = 1; i <= k; ++i) {
    r *= n - k + i;
    r /= i;
  }
  return r;
}

static void overlap_fraction(int S, int M, cpp_int& num, cpp_int& den) {
  if (S <= 0 || M < 0 || M > S) throw std::invalid_argument("expected_overlap: need 0 <= M <= S");
  // E(L) = sum_L L * C(M,L) * C(S-M, M-L) / C(S,M); also verify the
  // distribution sums to one before trusting the expectation. Both binomial
  // rows are built with the exact stepwise recurrence C(n,k+1) = C(n,k)(n-k)/(k+1).
  den = binom(S, M);
  std::vector<cpp_int> cm(M + 1), cr(M + 1);
  cm[0] = 1;
  for (int L = 0; L < M; ++L) cm[L + 1] = cm[L] * (M - L) / (L + 1);
  cr[0] = 1;  // cr[j] = C(S-M, j), zero once j exceeds S-M
  for (int j = 0; j < M; ++j)
    cr[j + 1] = j >= S - M ? cpp_int(0) : cpp_int(cr[j] * (S - M - j) / (j + 1));
  num = 0;
  cpp_int psum = 0;
  for (int L = 0; L <= M; ++L) {
    cpp_int p = cm[L] * cr[M - L];
    psum += p;
    num += L * p;
  }
  if (psum != den) throw std::logic_error("overlap distribution does not sum to 1");
}

double expected_overlap(int S, int M) {
  if (M == 0) return 0.0;
  cpp_int num, den;
  overlap_fraction(S, M, num, den);
  boost::multiprecision::cpp_rational r(num, den);
  return r.convert_to<double>();
}

ExactFraction expected_overlap_exact(int S, int M) {
  cpp_int num = 0, den = 1;
  if (M != 0) overlap_fraction(S, M, num, den);
  cpp_int g = boost::multiprecision::gcd(num, den);
  if (g != 0) {
    num /= g;
    den /= g;
  }
  return {num.str(), den.str()};
}

OverlapStats empirical_overlap(std::span<const PruneVector> prune_vectors) {
  if (prune_vectors.size() < 2)
    throw std::invalid_argument("empirical_overlap: need at least two prune vectors");
  double common = 0.0;
  double unpruned = 0.0;
  for (std::size_t t = 0; t + 1 < prune_vectors.size(); ++t) {
    BitVec a = ~prune_vectors[t];
    BitVec b = ~prune_vectors[t + 1];
    common += static_cast<double>((a & b).count());
  }
  for (const auto& p : prune_vectors) unpruned += static_cast<double>(p.size() - p.count());
  OverlapStats st;
  st.mean_common = common / static_cast<double>(prune_vectors.size() - 1);
  double mean_unpruned = unpruned / static_cast<double>(prune_vectors.size());
  st.fraction = mean_unpruned > 0 ? st.mean_common / mean_unpruned : 0.0;
  return st;
}

std::string PerfReport::to_json() const {
  nlohmann::ordered_json j;
  j["schema_version"] = 1;
  j["trace"] = trace_name;
  j["preset"] = preset;
  j["mode"] = mode;
  j["seq_len"] = seq_len;
  j["valid_len"] = valid_len;
  j["cycles_total"] = cycles_total;
  nlohmann::ordered_json e, ev;
  for (int c = 0; c < static_cast<int>(EnergyCat::kCount); ++c) {
    e[energy_cat_name(static_cast<EnergyCat>(c))] = energy_fj[c];
    ev[energy_cat_name(static_cast<EnergyCat>(c))] = energy_events[c];
  }
  j["energy_fj"] = e;
  j["energy_events"] = ev;
  j["energy_total_fj"] = energy_total_fj;
  j["bytes_fetched"] = bytes_fetched;
  j["bytes_overhead"] = bytes_overhead;
  j["key_fetches"] = key_fetches;
  j["score_computations"] = score_computations;
  j["imbalance_ratio"] = imbalance_ratio;
  j["empirical_overlap_mean"] = empirical_overlap_mean;
  j["empirical_overlap_fraction"] = empirical_overlap_fraction;
  j["expected_overlap_mean"] = expected_overlap_mean;
  j["gops_per_s"] = gops_per_s;
  j["gops_per_j"] = gops_per_j;
  j["quant_range_lo"] = quant_range_lo;
  j["quant_range_hi"] = quant_range_hi;
  j["noise"] = noise_note;
  // GOPs convention: one MAC counted as two ops.
  j["ops_convention"] = "2 ops per MAC";
  return j.dump(2);
}

CompareResult compare(const PerfReport& sprint_rep, const PerfReport& baseline_rep) {
  CompareResult r;
  if (sprint_rep.cycles_total == 0 || sprint_rep.energy_total_fj == 0 ||
      sprint_rep.bytes_fetched == 0) {
    r.undefined = true;
    return r;
  }
  r.speedup = static_cast<double>(baseline_rep.cycles_total) /
              static_cast<double>(sprint_rep.cycles_total);
  r.energy_reduction = static_cast<double>(baseline_rep.energy_total_fj) /
                       static_cast<double>(sprint_rep.energy_total_fj);
  r.data_movement_reduction = static_cast<double>(baseline_rep.bytes_fetched) /
                              static_cast<double>(sprint_rep.bytes_fetched);
  return r;
}

}  // namespace sprint
