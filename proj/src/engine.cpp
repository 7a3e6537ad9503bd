#include "greyant/engine.hpp"

#include <chrono>
#include <cstdio>
#include <sstream>

#include "greyant/contracts.hpp"

namespace greyant {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

Env make_env(Vm& vm, const std::shared_ptr<const ContractModule>& victim_module) {
  Env env(vm);
  env.token = name_of("eosio.token");
  env.fuzzer = name_of("fuzzer");
  env.victim = name_of("victim");
  env.victim_module = victim_module;

  env.chain.create_account(env.token);
  env.chain.deploy(env.token, token_contract());
  env.chain.create_account(env.fuzzer);
  env.chain.issue(env.fuzzer, 1'000'000'000'0000LL);
  env.chain.create_account(env.victim);
  env.chain.deploy(env.victim, victim_module);
  env.fuzz_accounts = {env.fuzzer};
  return env;
}

Bytes random_bytes(Rng& rng, size_t len) {
  Bytes out(len);
  for (auto& b : out) b = static_cast<uint8_t>(rand_below(rng, 256));
  return out;
}

Bytes build_seed_candidate(const ScenarioShape& shape, const LiteralCorpus& corpus, Rng& rng,
                           size_t min_len) {
  Bytes out;
  if (!shape.choices.empty()) {
    size_t choice = rand_below(rng, shape.choices.size());
    if (shape.choices.size() > 1) out.push_back(static_cast<uint8_t>(choice));
    ParamVector params;
    for (AbiType t : shape.choices[choice].params) {
      AbiValue v;
      v.type = t;
      switch (t) {
        case AbiType::U8:
        case AbiType::U16:
        case AbiType::U32:
        case AbiType::U64:
        case AbiType::I64:
        case AbiType::Asset:
          v.num = corpus.constants.empty()
                      ? rng()
                      : static_cast<uint64_t>(
                            corpus.constants[rand_below(rng, corpus.constants.size())]);
          break;
        case AbiType::NameT:
          v.num = corpus.names.empty() ? (rng() & Name::kMask)
                                       : corpus.names[rand_below(rng, corpus.names.size())].v;
          break;
        case AbiType::PublicKey:
          v.blob = random_bytes(rng, 33);
          break;
        case AbiType::String:
        case AbiType::Bytes_:
          v.blob = corpus.strings.empty()
                       ? random_bytes(rng, 1 + rand_below(rng, 8))
                       : corpus.strings[rand_below(rng, corpus.strings.size())];
          break;
      }
      params.push_back(std::move(v));
    }
    Bytes encoded = params_to_bytes(params);
    out.insert(out.end(), encoded.begin(), encoded.end());
  }
  if (out.size() < min_len) out.resize(min_len, 0);
  return out;
}

struct IterationOutcome {
  std::vector<ExecutionResult> results;
  size_t covered_cells = 0;
};

IterationOutcome run_iteration(Plugin& plugin, const ScenarioShape& shape, Env& env,
                               const Bytes& input) {
  IterationOutcome out;
  DecodedCall decoded = decode_scenario(shape, input);
  std::vector<Transaction> txs = plugin.fuzz(env, decoded);
  for (const Transaction& tx : txs) {
    out.results.push_back(env.chain.push_transaction(tx, env.vm));
    for (auto& r : env.chain.run_deferred(env.vm)) out.results.push_back(std::move(r));
  }
  out.covered_cells = env.vm.touched_cells().size();
  return out;
}

}  // namespace

Bytes select_seed(Plugin& plugin, const ScenarioShape& shape, const LiteralCorpus& corpus,
                  const std::function<Env()>& make_env_fn, Vm& vm, Rng& rng, size_t min_len,
                  int candidates, uint64_t* feedback_reads) {
  Bytes best;
  size_t best_cells = 0;
  bool have_best = false;
  for (int c = 0; c < candidates; ++c) {
    Bytes candidate = build_seed_candidate(shape, corpus, rng, min_len);
    Env env = make_env_fn();
    plugin.before_fuzz(env);
    vm.reset_iteration_coverage();
    size_t cells = 0;
    try {
      cells = run_iteration(plugin, shape, env, candidate).covered_cells;
    } catch (const CodecError&) {
      cells = 0;  // a zero-coverage candidate is still a valid candidate
    }
    if (feedback_reads) ++*feedback_reads;
    if (!have_best || cells > best_cells) {
      best = std::move(candidate);
      best_cells = cells;
      have_best = true;
    }
  }
  if (!have_best) best.resize(min_len, 0);
  return best;
}

CampaignReport run_campaign(Plugin& plugin,
                            std::shared_ptr<const ContractModule> victim_module,
                            const CampaignConfig& config) {
  if (config.iterations <= 0) throw ChainError("iterations must be positive");

  Vm vm(config.block);
  Rng rng(config.rng_seed);

  CampaignReport report;
  report.plugin_id = plugin.id();
  report.contract = victim_module->name.to_string();
  report.iterations = config.iterations;

  auto env_factory = [&] { return make_env(vm, victim_module); };

  Env probe = env_factory();
  ScenarioShape shape = plugin.shape(probe);
  size_t min_len = config.min_len_override ? config.min_len_override
                                           : std::max<size_t>(shape.min_len(), 1);

  GlobalCoverage global;
  std::vector<QueueEntry> queue;
  size_t queue_cursor = 0;

  Bytes seed;
  if (config.mode == FuzzMode::Greybox) {
    LiteralCorpus corpus = extract_literals(*victim_module);
    seed = select_seed(plugin, shape, corpus, env_factory, vm, rng, min_len,
                       config.seed_candidates, &report.bitmap_loop_reads);
    queue.push_back(QueueEntry{seed, 0, 0, 0, 0});
  }

  auto campaign_start = Clock::now();

  for (int iter = 1; iter <= config.iterations; ++iter) {
    // --- generation ---
    auto t_gen = Clock::now();
    Bytes input;
    if (config.mode == FuzzMode::Blackbox) {
      size_t len = min_len + rand_below(rng, 65);
      input = random_bytes(rng, len);
    } else if (iter == 1) {
      input = seed;  // bootstrap: the selected seed runs unmutated first
    } else {
      const Bytes& base = queue[queue_cursor++ % queue.size()].input;
      const Bytes& donor = queue[rand_below(rng, queue.size())].input;
      input = mutate(base, donor, rng, min_len);
    }
    report.timing.gen_ms += ms_since(t_gen);

    // --- environment + scenario construction ---
    auto t_exec = Clock::now();
    Env env = env_factory();
    plugin.before_fuzz(env);
    vm.reset_iteration_coverage();
    report.timing.exec_ms += ms_since(t_exec);

    auto t_conv = Clock::now();
    std::vector<Transaction> txs;
    try {
      DecodedCall decoded = decode_scenario(shape, input);
      txs = plugin.fuzz(env, decoded);
    } catch (const CodecError&) {
      // undecodable inputs (possible under --min-len-override) are data
    }
    report.timing.conv_ms += ms_since(t_conv);

    // --- execution ---
    t_exec = Clock::now();
    std::vector<ExecutionResult> results;
    for (const Transaction& tx : txs) {
      results.push_back(env.chain.push_transaction(tx, vm));
      for (auto& r : env.chain.run_deferred(vm)) results.push_back(std::move(r));
    }
    for (Finding& f : plugin.after_fuzz(env, results)) {
      f.plugin_id = report.plugin_id;
      f.iteration = iter;
      f.input = input;
      report.findings.push_back(std::move(f));
    }
    report.timing.exec_ms += ms_since(t_exec);

    // --- coverage feedback (grey-box only) ---
    if (config.mode == FuzzMode::Greybox) {
      auto t_bitmap = Clock::now();
      ++report.bitmap_loop_reads;
      bool fresh = false;
      uint32_t novel_cell = 0;
      uint8_t novel_bucket = 0;
      uint64_t sig = 0xcbf29ce484222325ull;
      for (uint32_t idx : vm.touched_cells()) {
        uint8_t mask = bucket_mask(vm.iteration_coverage().cells[idx]);
        sig = fnv1a64(&idx, sizeof(idx), sig);
        sig = fnv1a64(&mask, sizeof(mask), sig);
        if (mask && !(global.seen[idx] & mask)) {
          if (!fresh) {
            novel_cell = idx;
            novel_bucket = hit_bucket(vm.iteration_coverage().cells[idx]);
          }
          global.seen[idx] |= mask;
          fresh = true;
        }
      }
      if (fresh) {
        queue.push_back(QueueEntry{input, sig, novel_cell, novel_bucket, iter});
      }
      report.timing.bitmap_ms += ms_since(t_bitmap);
    }
  }

  double elapsed_ms = ms_since(campaign_start);
  report.edges = vm.campaign_edge_count();
  report.iters_per_sec = elapsed_ms > 0 ? config.iterations / (elapsed_ms / 1000.0) : 0;
  report.queue = std::move(queue);
  return report;
}

std::vector<ExecutionResult> replay_input(Plugin& plugin,
                                          std::shared_ptr<const ContractModule> victim_module,
                                          const CampaignConfig& config, const Bytes& input) {
  Vm vm(config.block);
  Env env = make_env(vm, victim_module);
  plugin.before_fuzz(env);
  vm.reset_iteration_coverage();
  ScenarioShape shape = plugin.shape(env);
  return run_iteration(plugin, shape, env, input).results;
}

std::string CampaignReport::render() const {
  std::ostringstream out;
  for (const auto& f : findings) {
    out << "F|" << f.plugin_id << "|" << f.iteration << "|" << to_hex(f.input) << "\n";
  }
  char line[160];
  std::snprintf(line, sizeof(line), "S|%zu|%d|%.1f\n", edges, iterations, iters_per_sec);
  out << line;
  std::snprintf(line, sizeof(line), "T|%.3f|%.3f|%.3f|%.3f\n", timing.gen_ms, timing.conv_ms,
                timing.exec_ms, timing.bitmap_ms);
  out << line;
  return out.str();
}

ParsedReport parse_report(const std::string& text) {
  ParsedReport out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::string cur;
    for (char c : line) {
      if (c == '|') {
        f.push_back(cur);
        cur.clear();
      } else {
        cur.push_back(c);
      }
    }
    f.push_back(cur);
    if (f[0] == "F" && f.size() == 4) {
      Finding finding;
      finding.plugin_id = f[1];
      finding.iteration = std::stoi(f[2]);
      finding.input = from_hex(f[3]);
      out.findings.push_back(std::move(finding));
    } else if (f[0] == "S" && f.size() == 4) {
      out.edges = std::stoull(f[1]);
      out.iterations = std::stoi(f[2]);
      out.iters_per_sec = std::stod(f[3]);
    } else if (f[0] == "T" && f.size() == 5) {
      out.timing.gen_ms = std::stod(f[1]);
      out.timing.conv_ms = std::stod(f[2]);
      out.timing.exec_ms = std::stod(f[3]);
      out.timing.bitmap_ms = std::stod(f[4]);
    } else {
      throw ChainError("unparseable report line: " + line);
    }
  }
  return out;
}

}  // namespace greyant
