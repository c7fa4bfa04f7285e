// Trace-driven simulator frontend: run / gen / sweep.

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "sprint/engine.hpp"

namespace {

std::string basename_of(const std::string& path) {
  std::size_t p = path.find_last_of("/\\");
  return p == std::string::npos ? path : path.substr(p + 1);
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  f << text;
}

sprint::SimConfig make_config(const std::string& preset, const std::string& mode,
                              const std::string& config_path) {
  sprint::SimConfig cfg =
      sprint::SimConfig::preset_config(preset.at(0), sprint::mode_from_name(mode));
  if (!config_path.empty()) cfg.apply_json_overrides(read_file(config_path));
  return cfg;
}

int n_threads() {
  if (const char* env = std::getenv("SPRINT_SIM_THREADS")) {
    int n = std::atoi(env);
    if (n > 0) return n;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

int cmd_run(const std::string& trace_path, const std::string& preset, const std::string& mode,
            const std::string& config_path, const std::string& out_path,
            const std::string& dump_path) {
  sprint::AttentionTrace trace = sprint::load_trace(trace_path);
  sprint::SimConfig cfg = make_config(preset, mode, config_path);
  sprint::RunResult res = sprint::run(trace, cfg);
  res.report.trace_name = basename_of(trace_path);
  std::string json = res.report.to_json();
  if (out_path.empty())
    std::cout << json << "\n";
  else
    write_file(out_path, json + "\n");
  if (!dump_path.empty()) {
    std::ostringstream ss;
    for (uint32_t i = 0; i < trace.seq_len; ++i) {
      for (uint32_t j = 0; j < trace.embed; ++j) {
        if (j) ss << ' ';
        ss << res.attention[std::size_t(i) * trace.embed + j];
      }
      ss << '\n';
    }
    write_file(dump_path, ss.str());
  }
  return 0;
}

int cmd_gen(uint32_t seq, uint32_t embed, double prune_rate, double padding, double locality,
            uint64_t seed, const std::string& out_path) {
  sprint::SyntheticSpec spec;
  spec.seq_len = seq;
  spec.embed = embed;
  spec.valid_len = std::max<uint32_t>(1, seq - static_cast<uint32_t>(std::llround(padding * seq)));
  spec.target_prune_rate = prune_rate;
  spec.locality_strength = locality;
  spec.rng_seed = seed;
  sprint::AttentionTrace trace = sprint::generate_synthetic(spec);
  sprint::save_trace(trace, out_path);
  return 0;
}

struct SweepCell {
  std::string trace_path;
  std::string preset;
  std::string mode;
  double buffer_fraction;
};

std::string csv_header() {
  std::ostringstream ss;
  ss << "trace,preset,mode,buffer_fraction,cycles";
  for (int c = 0; c < static_cast<int>(sprint::EnergyCat::kCount); ++c)
    ss << ",energy_fj_" << sprint::energy_cat_name(static_cast<sprint::EnergyCat>(c));
  ss << ",energy_total_fj,bytes_fetched,bytes_overhead,key_fetches,score_computations"
        ",imbalance_ratio,empirical_overlap_fraction,gops_per_s,gops_per_j";
  return ss.str();
}

std::string csv_row(const SweepCell& cell, const sprint::PerfReport& r) {
  std::ostringstream ss;
  ss << r.trace_name << ',' << cell.preset << ',' << cell.mode << ',' << cell.buffer_fraction
     << ',' << r.cycles_total;
  for (int c = 0; c < static_cast<int>(sprint::EnergyCat::kCount); ++c)
    ss << ',' << r.energy_fj[c];
  ss << ',' << r.energy_total_fj << ',' << r.bytes_fetched << ',' << r.bytes_overhead << ','
     << r.key_fetches << ',' << r.score_computations << ',' << r.imbalance_ratio << ','
     << r.empirical_overlap_fraction << ',' << r.gops_per_s << ',' << r.gops_per_j;
  return ss.str();
}

int cmd_sweep(const std::vector<std::string>& traces, const std::vector<std::string>& presets,
              const std::vector<std::string>& modes, const std::vector<double>& fractions,
              const std::string& config_path, const std::string& out_path) {
  std::vector<SweepCell> cells;
  for (const auto& t : traces)
    for (const auto& p : presets)
      for (const auto& m : modes)
        for (double f : fractions) cells.push_back({t, p, m, f});

  std::vector<std::string> rows(cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < cells.size(); i = next.fetch_add(1)) {
      const SweepCell& c = cells[i];
      sprint::AttentionTrace trace = sprint::load_trace(c.trace_path);
      sprint::SimConfig cfg = make_config(c.preset, c.mode, config_path);
      cfg.corelet.kv_buffer_bytes = std::max(
          static_cast<int>(2 * trace.embed),
          static_cast<int>(cfg.corelet.kv_buffer_bytes * c.buffer_fraction));
      sprint::RunResult res = sprint::run(trace, cfg);
      res.report.trace_name = basename_of(c.trace_path);
      rows[i] = csv_row(c, res.report);
    }
  };
  int nt = std::min<int>(n_threads(), std::max<std::size_t>(cells.size(), 1));
  std::vector<std::thread> pool;
  for (int i = 1; i < nt; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  std::ostringstream out;
  out << csv_header() << '\n';
  for (const auto& r : rows) out << r << '\n';
  if (out_path.empty())
    std::cout << out.str();
  else
    write_file(out_path, out.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sparse-attention accelerator simulator"};
  app.require_subcommand(1);

  auto* run_cmd = app.add_subcommand("run", "simulate one trace and emit a JSON report");
  std::string trace_path, preset = "S", mode = "sprint", config_path, out_path, dump_path;
  run_cmd->add_option("--trace", trace_path, "trace file")->required();
  run_cmd->add_option("--preset", preset, "S, M or L")
      ->check(CLI::IsMember({"S", "M", "L"}));
  run_cmd->add_option("--mode", mode, "sprint, baseline, pruning-only or mask-only")
      ->check(CLI::IsMember({"sprint", "baseline", "pruning-only", "mask-only"}));
  run_cmd->add_option("--config", config_path, "JSON config overrides");
  run_cmd->add_option("--out", out_path, "report destination (default stdout)");
  run_cmd->add_option("--dump-attention", dump_path, "write the attention output matrix as text");

  auto* gen_cmd = app.add_subcommand("gen", "generate a synthetic trace");
  uint32_t seq = 2048, embed = 64;
  double prune_rate = 0.75, padding = 0.5, locality = 0.8;
  uint64_t seed = 1;
  std::string gen_out = "t.sprt";
  gen_cmd->add_option("--seq", seq, "sequence length")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--embed", embed, "embedding dimension")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--prune-rate", prune_rate, "target prune rate")
      ->check(CLI::Range(0.0, 1.0));
  gen_cmd->add_option("--padding", padding, "padded fraction of the sequence")
      ->check(CLI::Range(0.0, 0.99));
  gen_cmd->add_option("--locality", locality, "temporal locality of prune patterns")
      ->check(CLI::Range(0.0, 1.0));
  gen_cmd->add_option("--seed", seed, "RNG seed");
  gen_cmd->add_option("--out", gen_out, "output trace path");

  auto* sweep_cmd = app.add_subcommand("sweep", "cross product of traces x presets x modes, CSV out");
  std::vector<std::string> traces, presets = {"S", "M", "L"}, modes = {"sprint", "baseline"};
  std::vector<double> fractions = {1.0};
  std::string sweep_config, sweep_out;
  sweep_cmd->add_option("--trace", traces, "trace file (repeatable)")->required();
  sweep_cmd->add_option("--presets", presets, "presets to sweep")->delimiter(',');
  sweep_cmd->add_option("--modes", modes, "modes to sweep")->delimiter(',');
  sweep_cmd->add_option("--buffer-fractions", fractions,
                        "scale factors applied to the KV buffer size")
      ->delimiter(',');
  sweep_cmd->add_option("--config", sweep_config, "JSON config overrides");
  sweep_cmd->add_option("--out", sweep_out, "CSV destination (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (run_cmd->parsed()) return cmd_run(trace_path, preset, mode, config_path, out_path, dump_path);
    if (gen_cmd->parsed()) return cmd_gen(seq, embed, prune_rate, padding, locality, seed, gen_out);
    if (sweep_cmd->parsed()) {
      for (const auto& m : modes) sprint::mode_from_name(m);  // validate before spawning work
      return cmd_sweep(traces, presets, modes, fractions, sweep_config, sweep_out);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
