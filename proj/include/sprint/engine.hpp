#pragma once

#include <string>
#include <vector>

#include "sprint/corelet.hpp"
#include "sprint/memctrl.hpp"
#include "sprint/metrics.hpp"
#include "sprint/reram.hpp"
#include "sprint/workload.hpp"

namespace sprint {

enum class Mode { sprint, baseline, pruning_only, mask_only };

std::string mode_name(Mode m);
Mode mode_from_name(const std::string& s);

struct SimConfig {
  char preset = 'S';  // 'S', 'M', 'L', 'C' (custom)
  CoreletConfig corelet;
  TimingConfig timing;
  EnergyConstants energy;
  NoiseModel noise;
  ReramLayout layout;
  Mode mode = Mode::sprint;
  int softmax_shift = 9;           // raw-score -> 12-bit softmax domain
  bool overlap_thresholding = true;  // next query's thresholding overlaps V-PU

  static SimConfig preset_config(char p, Mode mode = Mode::sprint);

  // JSON keys mirror the field names 1:1; unknown keys are rejected.
  std::string to_json() const;
  static SimConfig from_json(const std::string& text);
  void apply_json_overrides(const std::string& text);
};

struct RunResult {
  PerfReport report;
  std::vector<int16_t> attention;        // seq_len x embed, row-major
  std::vector<PruneVector> prune_history;  // one per processed query
};

// Per-query dataflow: CopyQ of q MSBs -> in-memory score + analog compare ->
// ReadP of the prune bits -> SLD -> selective fetch -> precise recompute ->
// softmax -> V-PU. Baseline-family modes replace the front end with streaming
// fetches. Output values never depend on the timing model.
RunResult run(const AttentionTrace& trace, const SimConfig& cfg);

}  // namespace sprint
