#pragma once

#include <memory>
#include <string>
#include <vector>

#include "greyant/chain.hpp"
#include "greyant/vm.hpp"

namespace greyant {

struct EventRef {
  size_t result_index = 0;
  size_t event_index = 0;

  friend bool operator==(const EventRef& a, const EventRef& b) {
    return a.result_index == b.result_index && a.event_index == b.event_index;
  }
};

struct Finding {
  std::string plugin_id;
  int iteration = 0;
  Bytes input;
  std::vector<EventRef> evidence;
};

// Per-iteration fuzzing environment. The chain is rebuilt from scratch every
// iteration (and for every seed candidate) so findings replay exactly.
struct Env {
  ChainState chain;
  Vm& vm;
  Name token;
  Name fuzzer;
  Name victim;
  std::shared_ptr<const ContractModule> victim_module;
  std::vector<Name> fuzz_accounts;  // accounts the fuzzer controls

  explicit Env(Vm& vm_) : vm(vm_) {}

  int64_t balance(Name account) const { return chain.balance_of(account); }

  Transaction make_call_tx(Name receiver, Name action, const ParamVector& params, Name signer);
  Transaction make_transfer_tx(Name from, Name to, int64_t amount, const Bytes& memo) {
    return chain.make_transfer_tx(from, to, amount, memo);
  }

  // Setup-time execution (beforeFuzz agents, prechecks); results are not part
  // of the iteration's oracle input.
  std::vector<ExecutionResult> setup_push(const Transaction& tx);

  bool is_fuzz_account(Name n) const {
    for (Name a : fuzz_accounts) {
      if (a == n.normalized()) return true;
    }
    return false;
  }
};

// How raw engine bytes map onto scenario transactions. With more than one
// choice the first input byte selects one; the rest decodes against the
// choice's parameter list.
struct ScenarioChoice {
  enum class Kind { InvokeVictim, TokenTransfer, AgentCall };
  Kind kind = Kind::InvokeVictim;
  Name action;
  std::vector<AbiType> params;
};

struct ScenarioShape {
  std::vector<ScenarioChoice> choices;

  size_t min_len() const;
};

struct DecodedCall {
  size_t choice = 0;
  ParamVector params;
};

DecodedCall decode_scenario(const ScenarioShape& shape, const Bytes& input);

class Plugin {
 public:
  virtual ~Plugin() = default;
  virtual std::string id() const = 0;
  // Sets up blockchain state and attack agents for one iteration.
  virtual void before_fuzz(Env& env) = 0;
  virtual ScenarioShape shape(const Env& env) const = 0;
  // Builds the iteration's attack-scenario transactions from the decoded
  // input. Plugins touch chain state only through transactions.
  virtual std::vector<Transaction> fuzz(Env& env, const DecodedCall& input) = 0;
  // Evaluates the test oracle over the iteration's execution results.
  virtual std::vector<Finding> after_fuzz(Env& env,
                                          const std::vector<ExecutionResult>& results) = 0;
};

// Registry of the built-in detectors, keyed p1..p6.
std::unique_ptr<Plugin> make_plugin(const std::string& plugin_id);
std::vector<std::string> plugin_ids();

}  // namespace greyant
