#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "greyant/mutator.hpp"
#include "greyant/plugin.hpp"

namespace greyant {

enum class FuzzMode { Greybox, Blackbox };

struct CampaignConfig {
  FuzzMode mode = FuzzMode::Greybox;
  int iterations = 2000;
  uint64_t rng_seed = 0;
  size_t min_len_override = 0;  // 0: derive from the plugin's scenario shape
  int seed_candidates = 16;
  BlockInfo block;
};

struct QueueEntry {
  Bytes input;
  uint64_t signature = 0;  // digest of the bucketized iteration bitmap
  uint32_t novel_cell = 0;
  uint8_t novel_bucket = 0;
  int discovered_at = 0;
};

struct StageTimings {
  double gen_ms = 0;
  double conv_ms = 0;
  double exec_ms = 0;
  double bitmap_ms = 0;

  double total() const { return gen_ms + conv_ms + exec_ms + bitmap_ms; }
};

struct CampaignReport {
  std::string plugin_id;
  std::string contract;
  std::vector<Finding> findings;
  size_t edges = 0;
  int iterations = 0;
  double iters_per_sec = 0;
  StageTimings timing;
  uint64_t bitmap_loop_reads = 0;  // coverage feedback reads inside the loop
  std::vector<QueueEntry> queue;

  // F|<plugin>|<iteration>|<input-hex> per finding, then
  // S|<edges>|<iters>|<iters_per_sec> and T|<gen>|<conv>|<exec>|<bitmap>.
  std::string render() const;
};

struct ParsedReport {
  std::vector<Finding> findings;
  size_t edges = 0;
  int iterations = 0;
  double iters_per_sec = 0;
  StageTimings timing;
};
ParsedReport parse_report(const std::string& text);

// Two-phase seed selection: draw seed_candidates parameter vectors from the
// victim's literal corpus (type-compatible buckets, random fallback), execute
// each on a throwaway chain, keep the one covering the most bitmap cells
// (ties: lowest candidate index).
Bytes select_seed(Plugin& plugin, const ScenarioShape& shape, const LiteralCorpus& corpus,
                  const std::function<Env()>& make_env, Vm& vm, Rng& rng, size_t min_len,
                  int candidates, uint64_t* feedback_reads = nullptr);

CampaignReport run_campaign(Plugin& plugin,
                            std::shared_ptr<const ContractModule> victim_module,
                            const CampaignConfig& config);

// Rebuilds the iteration environment for a finding's input and re-executes
// it, returning the results the oracle saw.
std::vector<ExecutionResult> replay_input(Plugin& plugin,
                                          std::shared_ptr<const ContractModule> victim_module,
                                          const CampaignConfig& config, const Bytes& input);

}  // namespace greyant
