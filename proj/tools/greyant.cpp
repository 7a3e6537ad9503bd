#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>

#include "greyant/assembler.hpp"
#include "greyant/benchmarks.hpp"
#include "greyant/contracts.hpp"
#include "greyant/engine.hpp"

using namespace greyant;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ChainError("cannot read file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ChainError("cannot write file: " + path);
  out << text;
}

uint64_t effective_seed(uint64_t flag_seed) {
  if (const char* env = std::getenv("GREYANT_SEED")) {
    return std::strtoull(env, nullptr, 0);
  }
  return flag_seed;
}

std::shared_ptr<const ContractModule> load_contract(const std::string& contract_path,
                                                    const std::string& abi_path) {
  ContractModule m = assemble(read_file(contract_path));
  if (!abi_path.empty()) {
    m.abi = parse_abi_file(read_file(abi_path));
    validate(m);
  }
  return std::make_shared<const ContractModule>(std::move(m));
}

int cmd_fuzz(const std::string& contract_path, const std::string& abi_path,
             std::vector<std::string> plugins, int iterations, const std::string& mode,
             uint64_t seed, const std::string& report_path, size_t min_len_override) {
  auto module = load_contract(contract_path, abi_path);

  if (plugins.empty()) plugins = {"all"};
  if (plugins.size() == 1 && plugins[0] == "all") plugins = plugin_ids();

  CampaignConfig cfg;
  cfg.iterations = iterations;
  cfg.rng_seed = effective_seed(seed);
  cfg.min_len_override = min_len_override;
  cfg.mode = mode == "blackbox" ? FuzzMode::Blackbox : FuzzMode::Greybox;

  std::string report_text;
  size_t total_findings = 0;
  for (const auto& id : plugins) {
    auto plugin = make_plugin(id);
    CampaignReport report = run_campaign(*plugin, module, cfg);
    total_findings += report.findings.size();
    report_text += report.render();
    std::fprintf(stderr, "%s: %zu finding(s), %zu edges, %.0f iters/sec\n", id.c_str(),
                 report.findings.size(), report.edges, report.iters_per_sec);
  }
  write_output(report_path, report_text);
  return total_findings > 0 ? 2 : 0;
}

int cmd_bench(int iterations, int guarded_iterations, uint64_t seed, const std::string& mode,
              const std::string& report_path, bool skip_guarded) {
  BenchOptions options;
  options.iterations = iterations;
  options.guarded_iterations = guarded_iterations;
  options.seed = effective_seed(seed);
  options.mode = mode == "blackbox" ? FuzzMode::Blackbox : FuzzMode::Greybox;
  options.run_guarded = !skip_guarded;

  BenchSummary summary = run_bench(options);

  std::printf("%-26s %-6s %-9s %9s %9s %7s %10s %7s\n", "case", "plugin", "mode", "findings",
              "expected", "edges", "iters/sec", "verdict");
  bool all_pass = true;
  for (const auto& c : summary.cases) {
    std::printf("%-26s %-6s %-9s %9zu %9d %7zu %10.0f %7s\n", c.case_id.c_str(),
                c.plugin.c_str(), c.mode.c_str(), c.findings, c.expected, c.edges,
                c.iters_per_sec, c.pass ? "pass" : "FAIL");
    all_pass = all_pass && c.pass;
  }
  if (!skip_guarded && summary.black_edges > 0) {
    double delta = 100.0 * (static_cast<double>(summary.grey_edges) -
                            static_cast<double>(summary.black_edges)) /
                   static_cast<double>(summary.black_edges);
    std::printf("guarded coverage: greybox %zu edges vs blackbox %zu edges (%+.1f%%)\n",
                summary.grey_edges, summary.black_edges, delta);
  }
  if (!report_path.empty()) write_output(report_path, summary.render());
  return all_pass ? 0 : 2;
}

int cmd_coverage(const std::string& contract_path, const std::string& abi_path,
                 const std::string& plugin_id, int iterations, uint64_t seed) {
  auto module = load_contract(contract_path, abi_path);

  CampaignConfig cfg;
  cfg.iterations = iterations;
  cfg.rng_seed = effective_seed(seed);

  auto grey_plugin = make_plugin(plugin_id);
  cfg.mode = FuzzMode::Greybox;
  CampaignReport grey = run_campaign(*grey_plugin, module, cfg);

  auto black_plugin = make_plugin(plugin_id);
  cfg.mode = FuzzMode::Blackbox;
  CampaignReport black = run_campaign(*black_plugin, module, cfg);

  std::printf("greybox:  %zu edges\n", grey.edges);
  std::printf("blackbox: %zu edges\n", black.edges);
  if (black.edges > 0) {
    double delta = 100.0 *
                   (static_cast<double>(grey.edges) - static_cast<double>(black.edges)) /
                   static_cast<double>(black.edges);
    std::printf("delta:    %+.1f%%\n", delta);
  }
  return 0;
}

int cmd_corpus(const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  auto dump = [&](const std::string& stem, const std::string& src) {
    std::ofstream out(fs::path(dir) / (stem + ".mcb"), std::ios::binary);
    out << src;
  };
  for (const auto& c : benchmark_cases()) {
    dump(c.id + "_vuln", c.vulnerable_src);
    dump(c.id + "_safe", c.safe_src);
  }
  dump("fake-transfer-lookalike", lookalike_src());
  dump("guarded-branch", guarded_src());
  dump("guarded-branch-wide", guarded_wide_src());
  std::printf("wrote benchmark corpus to %s\n", dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"coverage-guided fuzzer for EOSIO-style contracts"};
  app.require_subcommand(1);

  // fuzz
  auto* fuzz = app.add_subcommand("fuzz", "fuzz one contract with selected detector plugins");
  std::string contract_path, abi_path, mode = "greybox", report_path;
  std::vector<std::string> plugins;
  int iterations = 2000;
  uint64_t seed = 0;
  size_t min_len_override = 0;
  fuzz->add_option("--contract", contract_path, "contract assembly file")->required();
  fuzz->add_option("--abi", abi_path, "standalone ABI descriptor (optional if embedded)");
  fuzz->add_option("--plugin", plugins, "plugin id p1..p6, repeatable, or 'all'");
  fuzz->add_option("--iterations", iterations, "fuzzing iterations per plugin");
  fuzz->add_option("--mode", mode, "greybox|blackbox")
      ->check(CLI::IsMember({"greybox", "blackbox"}));
  fuzz->add_option("--seed", seed, "rng seed (GREYANT_SEED overrides)");
  fuzz->add_option("--report", report_path, "report file ('-' or empty: stdout)");
  fuzz->add_option("--min-len-override", min_len_override, "force a minimum input length");

  // bench
  auto* bench = app.add_subcommand("bench", "run the bundled benchmark corpus");
  int bench_iterations = 2000, guarded_iterations = 50000;
  uint64_t bench_seed = 0;
  std::string bench_mode = "greybox", bench_report;
  bool skip_guarded = false;
  bench->add_option("--iterations", bench_iterations, "iterations per paired case");
  bench->add_option("--guarded-iterations", guarded_iterations,
                    "iterations for the guarded-branch case");
  bench->add_option("--seed", bench_seed, "rng seed (GREYANT_SEED overrides)");
  bench->add_option("--mode", bench_mode, "mode for the paired cases")
      ->check(CLI::IsMember({"greybox", "blackbox"}));
  bench->add_option("--report", bench_report, "write the canonical report to this file");
  bench->add_flag("--skip-guarded", skip_guarded, "skip the guarded-branch experiment");

  // coverage
  auto* coverage = app.add_subcommand("coverage", "compare greybox vs blackbox edge counts");
  std::string cov_contract, cov_abi, cov_plugin = "p3";
  int cov_iterations = 50000;
  uint64_t cov_seed = 0;
  coverage->add_option("--contract", cov_contract, "contract assembly file")->required();
  coverage->add_option("--abi", cov_abi, "standalone ABI descriptor");
  coverage->add_option("--plugin", cov_plugin, "scenario plugin to drive execution");
  coverage->add_option("--iterations", cov_iterations, "iterations per mode");
  coverage->add_option("--seed", cov_seed, "rng seed (GREYANT_SEED overrides)");

  // corpus
  auto* corpus = app.add_subcommand("corpus", "write the bundled benchmark contracts to a directory");
  std::string corpus_dir = "corpus";
  corpus->add_option("dir", corpus_dir, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(fuzz)) {
      if (iterations <= 0) {
        std::fprintf(stderr, "error: --iterations must be positive\n");
        return 1;
      }
      return cmd_fuzz(contract_path, abi_path, plugins, iterations, mode, seed, report_path,
                      min_len_override);
    }
    if (app.got_subcommand(bench)) {
      if (bench_iterations <= 0 || guarded_iterations <= 0) {
        std::fprintf(stderr, "error: iterations must be positive\n");
        return 1;
      }
      return cmd_bench(bench_iterations, guarded_iterations, bench_seed, bench_mode, bench_report,
                       skip_guarded);
    }
    if (app.got_subcommand(coverage)) {
      if (cov_iterations <= 0) {
        std::fprintf(stderr, "error: --iterations must be positive\n");
        return 1;
      }
      return cmd_coverage(cov_contract, cov_abi, cov_plugin, cov_iterations, cov_seed);
    }
    if (app.got_subcommand(corpus)) {
      return cmd_corpus(corpus_dir);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
