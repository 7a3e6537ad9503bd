#pragma once

#include <string>
#include <vector>

#include "greyant/engine.hpp"

namespace greyant {

struct BenchmarkCase {
  std::string id;
  std::string plugin;
  std::string vulnerable_src;
  std::string safe_src;
  int expected_findings = 1;  // minimum findings on the vulnerable variant
};

// The six paired cases, one per detector.
const std::vector<BenchmarkCase>& benchmark_cases();

// Extra contracts used by dedicated experiments.
const std::string& lookalike_src();      // directly-callable transfer() that is
                                         // not the receipt handler (p1, expect 0)
const std::string& guarded_src();        // two one-byte guards ahead of the
                                         // vulnerable branch (grey-box target)
const std::string& guarded_wide_src();   // two two-byte guards (black-box target)

struct BenchCaseResult {
  std::string case_id;
  std::string plugin;
  std::string mode;
  size_t findings = 0;
  int expected = 0;
  size_t edges = 0;
  bool pass = false;
  double iters_per_sec = 0;
};

struct BenchOptions {
  FuzzMode mode = FuzzMode::Greybox;
  int iterations = 2000;
  int guarded_iterations = 50000;
  uint64_t seed = 0;
  bool run_guarded = true;
};

struct BenchSummary {
  std::vector<BenchCaseResult> cases;
  size_t grey_edges = 0;   // guarded-branch case, grey-box mode
  size_t black_edges = 0;  // guarded-branch case, black-box mode

  // Canonical report: B|<case>|<plugin>|<mode>|<findings>|<expected>|<edges>|<verdict>
  // lines plus a final D|<grey_edges>|<black_edges> line. Contains no
  // wall-clock values, so identical seeds render identical reports.
  std::string render() const;
};

BenchSummary run_bench(const BenchOptions& options);

}  // namespace greyant
