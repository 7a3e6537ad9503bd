#include "greyant/benchmarks.hpp"

#include <sstream>

#include "greyant/assembler.hpp"

namespace greyant {

namespace {

// ---- p1: fake transfer ------------------------------------------------------
// Vulnerable apply dispatches "transfer" whenever code == receiver OR the
// action is named transfer, so a direct call lands in the receipt handler.
const char* kFakeTransferVuln = R"(
contract victim
abi transfer (name,name,asset,string)
apply main
table transfer

fn main(3)
  local_get 1
  local_get 0
  eq
  br_if dispatch
  local_get 2
  const @transfer
  eq
  br_if dispatch
  return
dispatch:
  local_get 2
  const @transfer
  ne
  br_if out
  const 0
  call_indirect
out:
  return

fn transfer(0)
  # credit the sender's deposit row
  const @deposits
  param 0
  param 2
  host db_store
  return
)";

// Safe twin: transfer actions are dispatched only when they came through the
// token contract.
const char* kFakeTransferSafe = R"(
contract victim
abi transfer (name,name,asset,string)
apply main
table transfer

fn main(3)
  local_get 2
  const @transfer
  ne
  br_if out
  local_get 1
  const @eosio.token
  ne
  br_if out
  const 0
  call_indirect
out:
  return

fn transfer(0)
  const @deposits
  param 0
  param 2
  host db_store
  return
)";

// Lookalike: exposes a directly-callable transfer() that is NOT the token
// receipt handler (deposits go through deposit()). Oracle (i) holds, but the
// two dispatch destinations differ, so p1 must stay quiet.
const char* kLookalike = R"(
contract victim
abi transfer (name,name,asset,string)
apply main
table deposit transfer

fn main(3)
  # genuine receipt: code == eosio.token -> deposit handler
  local_get 2
  const @transfer
  ne
  br_if direct
  local_get 1
  const @eosio.token
  ne
  br_if direct
  const 0
  call_indirect
  return
direct:
  local_get 1
  local_get 0
  ne
  br_if out
  local_get 2
  const @transfer
  ne
  br_if out
  const 1
  call_indirect
out:
  return

fn deposit(0)
  const @vault
  param 0
  param 2
  host db_store
  return

fn transfer(0)
  # internal bookkeeping, not a token receipt handler
  const @ledger
  param 0
  param 2
  host db_store
  return
)";

// ---- p2: fake transfer notification ------------------------------------------
// Vulnerable handler only ignores self-sent transfers; it never checks that
// the notification's `to` field is this contract.
const char* kFakeNotificationVuln = R"(
contract victim
abi transfer (name,name,asset,string)
apply main
table transfer

fn main(3)
  local_get 2
  const @transfer
  ne
  br_if out
  local_get 1
  const @eosio.token
  ne
  br_if out
  const 0
  call_indirect
out:
  return

fn transfer(0)
  param 0
  const @victim
  eq
  br_if out
  const @deposits
  param 0
  param 2
  host db_store
out:
  return
)";

const char* kFakeNotificationSafe = R"(
contract victim
abi transfer (name,name,asset,string)
apply main
table transfer

fn main(3)
  local_get 2
  const @transfer
  ne
  br_if out
  local_get 1
  const @eosio.token
  ne
  br_if out
  const 0
  call_indirect
out:
  return

fn transfer(0)
  # drop notifications that were not addressed to us
  param 1
  const @victim
  ne
  br_if out
  param 0
  const @victim
  eq
  br_if out
  const @deposits
  param 0
  param 2
  host db_store
out:
  return
)";

// ---- p3: block information dependency -----------------------------------------
// Dice game: the winner is derived from tapos state; winners are paid back
// inline through the token contract.
const char* kBlockInfoVuln = R"(
contract victim
abi transfer (name,name,asset,string)
apply main
table transfer

fn main(3)
  local_get 2
  const @transfer
  ne
  br_if out
  local_get 1
  const @eosio.token
  ne
  br_if out
  const 0
  call_indirect
out:
  return

fn transfer(0)
  # ignore our own outgoing payouts
  param 0
  const @victim
  eq
  br_if out
  # luck = tapos_block_prefix + memo length; odd loses
  host tapos_block_prefix
  memo_len
  add
  const 2
  mod
  br_if out
  # pay double the bet back to the bettor
  const @victim
  param 0
  param 2
  const 2
  mul
  const @transfer
  const @eosio.token
  host send_inline
out:
  return
)";

// Safe twin: winner picked from the memo's first byte, no block state.
const char* kBlockInfoSafe = R"(
contract victim
abi transfer (name,name,asset,string)
apply main
table transfer

fn main(3)
  local_get 2
  const @transfer
  ne
  br_if out
  local_get 1
  const @eosio.token
  ne
  br_if out
  const 0
  call_indirect
out:
  return

fn transfer(0)
  param 0
  const @victim
  eq
  br_if out
  const 0
  memo_byte
  const 2
  mod
  br_if out
  const @victim
  param 0
  param 2
  const 2
  mul
  const @transfer
  const @eosio.token
  host send_inline
out:
  return
)";

// ---- p4: no permission check ----------------------------------------------------
const char* kNoAuthVuln = R"(
contract victim
abi setowner (name)
abi note (string)
apply main
table setowner note

fn main(3)
  local_get 1
  local_get 0
  ne
  br_if out
  local_get 2
  const @setowner
  eq
  br_if set
  local_get 2
  const @note
  eq
  br_if note
  return
set:
  const 0
  call_indirect
  return
note:
  const 1
  call_indirect
  return
out:
  return

fn setowner(0)
  # anyone can rewrite the owner row
  const @config
  const 1
  param 0
  host db_update
  return

fn note(0)
  memo_len
  drop
  return
)";

const char* kNoAuthSafe = R"(
contract victim
abi setowner (name)
abi note (string)
apply main
table setowner note

fn main(3)
  local_get 1
  local_get 0
  ne
  br_if out
  local_get 2
  const @setowner
  eq
  br_if set
  local_get 2
  const @note
  eq
  br_if note
  return
set:
  const 0
  call_indirect
  return
note:
  const 1
  call_indirect
  return
out:
  return

fn setowner(0)
  param 0
  host require_auth
  const @config
  const 1
  param 0
  host db_update
  return

fn note(0)
  memo_len
  drop
  return
)";

// ---- p5: rollback -----------------------------------------------------------------
// Bets arrive as token receipts and winners are revealed by an inline payout
// in the same transaction, so a betting agent can void losing bets.
const char* kRollbackVuln = R"(
contract victim
abi transfer (name,name,asset,string)
apply main
table transfer

fn main(3)
  local_get 2
  const @transfer
  ne
  br_if out
  local_get 1
  const @eosio.token
  ne
  br_if out
  const 0
  call_indirect
out:
  return

fn transfer(0)
  param 0
  const @victim
  eq
  br_if out
  # even memo length wins double the bet
  memo_len
  const 2
  mod
  br_if out
  const @victim
  param 0
  param 2
  const 2
  mul
  const @transfer
  const @eosio.token
  host send_inline
out:
  return
)";

// Safe twin: the payout is revealed in a deferred transaction, which a failed
// bet transaction cannot roll back (and p5's inline-reveal oracle stays unmet).
const char* kRollbackSafe = R"(
contract victim
abi transfer (name,name,asset,string)
apply main
table transfer

fn main(3)
  local_get 2
  const @transfer
  ne
  br_if out
  local_get 1
  const @eosio.token
  ne
  br_if out
  const 0
  call_indirect
out:
  return

fn transfer(0)
  param 0
  const @victim
  eq
  br_if out
  memo_len
  const 2
  mod
  br_if out
  const @victim
  param 0
  param 2
  const 2
  mul
  const @transfer
  const @eosio.token
  host send_deferred
out:
  return
)";

// ---- p6: receipt hijacking ----------------------------------------------------------
// notify() signs a deferred receipt action; the deferred handler forwards it
// to the user, so the contract pays for whatever rides along.
const char* kReceiptHijackVuln = R"(
contract victim
abi notify (name,string)
abi receipt (name,string)
apply main
table notify receipt

fn main(3)
  local_get 1
  local_get 0
  ne
  br_if out
  local_get 2
  const @notify
  eq
  br_if n
  local_get 2
  const @receipt
  eq
  br_if r
  return
n:
  const 0
  call_indirect
  return
r:
  const 1
  call_indirect
  return
out:
  return

fn notify(0)
  param 0
  const @receipt
  const @victim
  host send_deferred
  return

fn receipt(0)
  param 0
  host require_recipient
  return
)";

// Safe twin: the receipt goes out inline, so the caller's transaction (and
// resources) carry it.
const char* kReceiptHijackSafe = R"(
contract victim
abi notify (name,string)
apply main
table notify

fn main(3)
  local_get 1
  local_get 0
  ne
  br_if out
  local_get 2
  const @notify
  ne
  br_if out
  const 0
  call_indirect
out:
  return

fn notify(0)
  param 0
  host require_recipient
  return
)";

// ---- guarded branch (coverage experiment) ---------------------------------------
// The vulnerable branch sits behind two one-byte memo guards whose values
// appear nowhere in the literal pool strings.
const char* kGuarded = R"(
contract victim
abi transfer (name,name,asset,string)
apply main
table transfer

fn main(3)
  local_get 2
  const @transfer
  ne
  br_if out
  local_get 1
  const @eosio.token
  ne
  br_if out
  const 0
  call_indirect
out:
  return

fn transfer(0)
  param 0
  const @victim
  eq
  br_if out
  const 0
  memo_byte
  const 118
  ne
  br_if out
  const 1
  memo_byte
  const 108
  ne
  br_if out
  host tapos_block_prefix
  drop
  host tapos_block_num
  drop
  const @victim
  param 0
  param 2
  const @transfer
  const @eosio.token
  host send_inline
out:
  return
)";

// Same payload behind two two-byte guards; a black-box fuzzer has a ~2^-32
// per-iteration chance of passing both.
const char* kGuardedWide = R"(
contract victim
abi transfer (name,name,asset,string)
apply main
table transfer

fn main(3)
  local_get 2
  const @transfer
  ne
  br_if out
  local_get 1
  const @eosio.token
  ne
  br_if out
  const 0
  call_indirect
out:
  return

fn transfer(0)
  param 0
  const @victim
  eq
  br_if out
  const 0
  memo_byte
  const 256
  mul
  const 1
  memo_byte
  add
  const 47806
  ne
  br_if out
  const 2
  memo_byte
  const 256
  mul
  const 3
  memo_byte
  add
  const 51966
  ne
  br_if out
  host tapos_block_prefix
  drop
  host tapos_block_num
  drop
  const @victim
  param 0
  param 2
  const @transfer
  const @eosio.token
  host send_inline
out:
  return
)";

}  // namespace

const std::vector<BenchmarkCase>& benchmark_cases() {
  static const std::vector<BenchmarkCase> cases = {
      {"fake-transfer", "p1", kFakeTransferVuln, kFakeTransferSafe, 1},
      {"forged-notification", "p2", kFakeNotificationVuln, kFakeNotificationSafe, 1},
      {"block-info-dep", "p3", kBlockInfoVuln, kBlockInfoSafe, 1},
      {"missing-auth", "p4", kNoAuthVuln, kNoAuthSafe, 1},
      {"bet-rollback", "p5", kRollbackVuln, kRollbackSafe, 1},
      {"receipt-hijack", "p6", kReceiptHijackVuln, kReceiptHijackSafe, 1},
  };
  return cases;
}

const std::string& lookalike_src() {
  static const std::string src = kLookalike;
  return src;
}

const std::string& guarded_src() {
  static const std::string src = kGuarded;
  return src;
}

const std::string& guarded_wide_src() {
  static const std::string src = kGuardedWide;
  return src;
}

std::string BenchSummary::render() const {
  std::ostringstream out;
  for (const auto& c : cases) {
    out << "B|" << c.case_id << "|" << c.plugin << "|" << c.mode << "|" << c.findings << "|"
        << c.expected << "|" << c.edges << "|" << (c.pass ? "pass" : "FAIL") << "\n";
  }
  out << "D|" << grey_edges << "|" << black_edges << "\n";
  return out.str();
}

BenchSummary run_bench(const BenchOptions& options) {
  BenchSummary summary;

  auto run_case = [&](const std::string& case_id, const std::string& plugin_id,
                      const std::string& src, FuzzMode mode, int iterations, int expected,
                      bool expect_at_least) {
    auto module = std::make_shared<const ContractModule>(assemble(src));
    auto plugin = make_plugin(plugin_id);
    CampaignConfig cfg;
    cfg.mode = mode;
    cfg.iterations = iterations;
    cfg.rng_seed = options.seed;
    CampaignReport report = run_campaign(*plugin, module, cfg);

    BenchCaseResult r;
    r.case_id = case_id;
    r.plugin = plugin_id;
    r.mode = mode == FuzzMode::Greybox ? "greybox" : "blackbox";
    r.findings = report.findings.size();
    r.expected = expected;
    r.edges = report.edges;
    r.iters_per_sec = report.iters_per_sec;
    r.pass = expect_at_least ? r.findings >= static_cast<size_t>(expected)
                             : r.findings == static_cast<size_t>(expected);
    summary.cases.push_back(r);
    return report;
  };

  for (const auto& c : benchmark_cases()) {
    run_case(c.id + "-vuln", c.plugin, c.vulnerable_src, options.mode, options.iterations,
             c.expected_findings, true);
    run_case(c.id + "-safe", c.plugin, c.safe_src, options.mode, options.iterations, 0, false);
  }
  run_case("fake-transfer-lookalike", "p1", lookalike_src(), options.mode, options.iterations, 0,
           false);

  if (options.run_guarded) {
    auto grey = run_case("guarded-branch", "p3", guarded_src(), FuzzMode::Greybox,
                         options.guarded_iterations, 1, true);
    auto black = run_case("guarded-branch-wide", "p3", guarded_wide_src(), FuzzMode::Blackbox,
                          options.guarded_iterations, 0, false);
    summary.grey_edges = grey.edges;
    summary.black_edges = black.edges;
  }
  return summary;
}

}  // namespace greyant
