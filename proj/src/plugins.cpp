#include "greyant/plugin.hpp"

#include <algorithm>

#include "greyant/contracts.hpp"

namespace greyant {

Transaction Env::make_call_tx(Name receiver, Name action, const ParamVector& params,
                              Name signer) {
  Action a;
  a.code = receiver;
  a.receiver = receiver;
  a.action_name = action;
  a.data = params_to_bytes(params);
  a.auth = {signer};

  Transaction tx;
  tx.actions.push_back(std::move(a));
  tx.signer = signer;
  return tx;
}

std::vector<ExecutionResult> Env::setup_push(const Transaction& tx) {
  std::vector<ExecutionResult> results;
  results.push_back(chain.push_transaction(tx, vm));
  for (auto& r : chain.run_deferred(vm)) results.push_back(std::move(r));
  return results;
}

size_t ScenarioShape::min_len() const {
  if (choices.empty()) return 1;
  size_t longest = 0;
  for (const auto& c : choices) longest = std::max(longest, min_input_length(c.params));
  return (choices.size() > 1 ? 1 : 0) + longest;
}

DecodedCall decode_scenario(const ScenarioShape& shape, const Bytes& input) {
  DecodedCall out;
  if (shape.choices.empty()) return out;
  size_t off = 0;
  if (shape.choices.size() > 1) {
    out.choice = input.empty() ? 0 : input[0] % shape.choices.size();
    off = 1;
  }
  const auto& params = shape.choices[out.choice].params;
  std::span<const uint8_t> payload(input.data() + off, input.size() - off);
  bool has_variable = false;
  for (AbiType t : params) has_variable |= is_variable(t);
  if (!has_variable) payload = payload.first(min_input_length(params));
  out.params = bytes_to_params(payload, params);
  return out;
}

namespace {

Name nm(const char* s) { return name_of(s); }

// --- trace scanning helpers -------------------------------------------------

struct Span {
  Name receiver;
  Name code;
  Name action;
  bool open = false;
};

// Walks every event of every result in order, tracking the enclosing apply
// span. Callback: (result_idx, event_idx, event, span, result).
template <typename F>
void scan_events(const std::vector<ExecutionResult>& results, F&& fn) {
  for (size_t ri = 0; ri < results.size(); ++ri) {
    Span span;
    const auto& events = results[ri].trace.events;
    for (size_t ei = 0; ei < events.size(); ++ei) {
      if (const auto* ae = std::get_if<ApplyEvent>(&events[ei])) {
        if (ae->enter) {
          span = Span{ae->receiver.normalized(), ae->code.normalized(),
                      ae->action.normalized(), true};
        } else {
          span.open = false;
        }
      }
      fn(ri, ei, events[ei], span, results[ri]);
    }
  }
}

// --- P1: Fake EOS Transfer ---------------------------------------------------

// Flags contracts whose apply dispatches a directly-invoked "transfer" action
// into the same handler that services genuine token receipts. The handler
// address is learned from a setup-time probe transfer; direct calls that land
// on a different function are not findings.
class FakeTransferPlugin : public Plugin {
 public:
  std::string id() const override { return "p1"; }

  void before_fuzz(Env& env) override {
    agent_ = nm("impostor");
    env.chain.create_account(agent_);
    env.chain.deploy(agent_, direct_transfer_agent());
    env.chain.issue(agent_, 1'000'0000);
    env.fuzz_accounts.push_back(agent_);

    // probe: can the contract receive tokens, and which function handles it?
    can_receive_ = false;
    handler_pc_ = 0;
    auto results = env.setup_push(
        env.make_transfer_tx(env.fuzzer, env.victim, 1'0000, {'p', 'r', 'o', 'b', 'e'}));
    scan_events(results, [&](size_t, size_t, const TraceEvent& ev, const Span& span,
                             const ExecutionResult&) {
      if (can_receive_ || !span.open || span.receiver != env.victim) return;
      if (const auto* ie = std::get_if<InstrEvent>(&ev)) {
        if (ie->op == Op::CallIndirect) {
          handler_pc_ = ie->dst_pc;
          can_receive_ = true;
        }
      }
    });
  }

  ScenarioShape shape(const Env&) const override {
    return {{{ScenarioChoice::Kind::AgentCall, nm("attack"), {AbiType::Asset, AbiType::String}}}};
  }

  std::vector<Transaction> fuzz(Env& env, const DecodedCall& input) override {
    ParamVector params(3);
    params[0] = {AbiType::NameT, env.victim.v, {}};
    params[1] = input.params[0];
    params[2] = input.params[1];
    return {env.make_call_tx(agent_, nm("attack"), params, env.fuzzer)};
  }

  std::vector<Finding> after_fuzz(Env& env,
                                  const std::vector<ExecutionResult>& results) override {
    std::vector<Finding> findings;
    if (!can_receive_) return findings;
    bool attack_seen = false;
    EventRef attack_ref;
    scan_events(results, [&](size_t ri, size_t ei, const TraceEvent& ev, const Span& span,
                             const ExecutionResult&) {
      if (!findings.empty() || !span.open) return;
      const auto* ie = std::get_if<InstrEvent>(&ev);
      if (!ie || ie->op != Op::CallIndirect) return;
      if (span.receiver == agent_ && span.action == nm("attack")) {
        attack_seen = true;
        attack_ref = {ri, ei};
      } else if (attack_seen && span.receiver == env.victim && ie->dst_pc == handler_pc_) {
        Finding f;
        f.evidence = {attack_ref, {ri, ei}};
        findings.push_back(std::move(f));
      }
    });
    return findings;
  }

 private:
  Name agent_;
  bool can_receive_ = false;
  uint64_t handler_pc_ = 0;
};

// --- P2: Fake Transfer Notification -------------------------------------------

// A forwarded receipt reaches the victim's transfer handler; the contract is
// vulnerable when no eq/ne instruction compares the notification's `to` field
// against the victim's own name.
class FakeNotificationPlugin : public Plugin {
 public:
  std::string id() const override { return "p2"; }

  void before_fuzz(Env& env) override {
    sender_ = nm("sender");
    notifier_ = nm("notifier");
    env.chain.create_account(sender_);
    env.chain.create_account(notifier_);
    env.chain.deploy(notifier_, receipt_forwarder_agent());
    env.chain.issue(sender_, 1'000'000'0000);
    env.fuzz_accounts.push_back(sender_);
    env.fuzz_accounts.push_back(notifier_);
  }

  ScenarioShape shape(const Env&) const override {
    return {{{ScenarioChoice::Kind::TokenTransfer, Name(), {AbiType::Asset, AbiType::String}}}};
  }

  std::vector<Transaction> fuzz(Env& env, const DecodedCall& input) override {
    return {env.make_transfer_tx(sender_, notifier_,
                                 static_cast<int64_t>(input.params[0].num),
                                 input.params[1].blob)};
  }

  std::vector<Finding> after_fuzz(Env& env,
                                  const std::vector<ExecutionResult>& results) override {
    std::vector<Finding> findings;
    // chain of dispatches: token -> notifier -> victim
    int stage = 0;
    std::vector<EventRef> chain_refs;
    bool checked_to = false;
    scan_events(results, [&](size_t ri, size_t ei, const TraceEvent& ev, const Span& span,
                             const ExecutionResult&) {
      if (!span.open) return;
      if (const auto* ie = std::get_if<InstrEvent>(&ev)) {
        if (ie->op == Op::CallIndirect) {
          if (stage == 0 && span.receiver == env.token) {
            stage = 1;
            chain_refs.push_back({ri, ei});
          } else if (stage == 1 && span.receiver == notifier_) {
            stage = 2;
            chain_refs.push_back({ri, ei});
          } else if (stage == 2 && span.receiver == env.victim &&
                     span.code == env.token) {
            stage = 3;
            chain_refs.push_back({ri, ei});
          }
        }
        // does the victim compare the receipt's `to` field with itself?
        if ((ie->op == Op::Eq || ie->op == Op::Ne) && span.receiver == env.victim &&
            ie->operands.size() == 2) {
          bool has_self = ie->operands[0] == env.victim.v || ie->operands[1] == env.victim.v;
          bool has_to = ie->operands[0] == notifier_.v || ie->operands[1] == notifier_.v;
          if (has_self && has_to) checked_to = true;
        }
      }
    });
    if (stage == 3 && !checked_to) {
      Finding f;
      f.evidence = chain_refs;
      findings.push_back(std::move(f));
    }
    return findings;
  }

 private:
  Name sender_;
  Name notifier_;
};

// --- P3: Block Information Dependency ----------------------------------------

// A block-state query followed by a token transfer from the victim to a
// fuzzer-controlled account inside the same transaction.
class BlockInfoPlugin : public Plugin {
 public:
  std::string id() const override { return "p3"; }

  void before_fuzz(Env& env) override {
    env.chain.issue(env.victim, 1'000'000'0000);  // bankroll for payouts
  }

  ScenarioShape shape(const Env& env) const override {
    ScenarioShape s;
    for (const auto& entry : env.victim_module->abi.entries) {
      auto action = Name::parse(entry.fn_name);
      if (!action) continue;
      s.choices.push_back({ScenarioChoice::Kind::InvokeVictim, *action, entry.params});
    }
    s.choices.push_back(
        {ScenarioChoice::Kind::TokenTransfer, Name(), {AbiType::Asset, AbiType::String}});
    return s;
  }

  std::vector<Transaction> fuzz(Env& env, const DecodedCall& input) override {
    return generic_fuzz(env, *this, input);
  }

  std::vector<Finding> after_fuzz(Env& env,
                                  const std::vector<ExecutionResult>& results) override {
    std::vector<Finding> findings;
    // per transaction: block query before a victim-to-fuzzer transfer
    for (size_t ri = 0; ri < results.size() && findings.empty(); ++ri) {
      const auto& events = results[ri].trace.events;
      std::optional<size_t> query_idx;
      for (size_t ei = 0; ei < events.size(); ++ei) {
        if (const auto* he = std::get_if<HostCallEvent>(&events[ei])) {
          if (he->fn == HostFn::TaposBlockNum || he->fn == HostFn::TaposBlockPrefix ||
              he->fn == HostFn::BlockTimeStamp) {
            if (!query_idx) query_idx = ei;
          }
        } else if (const auto* te = std::get_if<TransferEvent>(&events[ei])) {
          if (query_idx && te->from == env.victim && env.is_fuzz_account(te->to)) {
            Finding f;
            f.evidence = {{ri, *query_idx}, {ri, ei}};
            findings.push_back(std::move(f));
            break;
          }
        }
      }
    }
    return findings;
  }

  static std::vector<Transaction> generic_fuzz(Env& env, const Plugin& plugin,
                                               const DecodedCall& input) {
    ScenarioShape s = plugin.shape(env);
    if (s.choices.empty()) return {};
    const ScenarioChoice& c = s.choices[input.choice];
    if (c.kind == ScenarioChoice::Kind::TokenTransfer) {
      return {env.make_transfer_tx(env.fuzzer, env.victim,
                                   static_cast<int64_t>(input.params[0].num),
                                   input.params[1].blob)};
    }
    return {env.make_call_tx(env.victim, c.action, input.params, env.fuzzer)};
  }
};

// --- P4: No Permission Check ---------------------------------------------------

// Sensitive host calls with no require_auth/has_auth earlier in the same
// dispatched action.
class NoAuthPlugin : public Plugin {
 public:
  std::string id() const override { return "p4"; }

  void before_fuzz(Env&) override {}

  ScenarioShape shape(const Env& env) const override {
    ScenarioShape s;
    for (const auto& entry : env.victim_module->abi.entries) {
      auto action = Name::parse(entry.fn_name);
      if (!action) continue;
      bool eligible = false;
      for (AbiType t : entry.params) {
        eligible |= t == AbiType::NameT || t == AbiType::PublicKey;
      }
      if (eligible) {
        s.choices.push_back({ScenarioChoice::Kind::InvokeVictim, *action, entry.params});
      }
    }
    return s;
  }

  std::vector<Transaction> fuzz(Env& env, const DecodedCall& input) override {
    return BlockInfoPlugin::generic_fuzz(env, *this, input);
  }

  std::vector<Finding> after_fuzz(Env& env,
                                  const std::vector<ExecutionResult>& results) override {
    std::vector<Finding> findings;
    bool auth_seen = false;
    scan_events(results, [&](size_t ri, size_t ei, const TraceEvent& ev, const Span& span,
                             const ExecutionResult&) {
      if (!findings.empty()) return;
      if (const auto* ae = std::get_if<ApplyEvent>(&ev)) {
        if (ae->enter) auth_seen = false;  // permission checks are scoped per action
        return;
      }
      if (!span.open || span.receiver != env.victim) return;
      const auto* he = std::get_if<HostCallEvent>(&ev);
      if (!he) return;
      if (he->fn == HostFn::RequireAuth || he->fn == HostFn::HasAuth) {
        auth_seen = true;
        return;
      }
      bool sensitive = he->fn == HostFn::SendInline || he->fn == HostFn::SendDeferred ||
                       he->fn == HostFn::DbStore || he->fn == HostFn::DbUpdate ||
                       he->fn == HostFn::DbDelete || he->fn == HostFn::Transfer;
      if (sensitive && !auth_seen) {
        Finding f;
        f.evidence = {{ri, ei}};
        findings.push_back(std::move(f));
      }
    });
    return findings;
  }
};

// --- P5: Rollback ---------------------------------------------------------------

// The victim reveals winners via an inline action and the betting agent's
// balance grew over the iteration: losing bets rolled back, winning ones paid.
class RollbackPlugin : public Plugin {
 public:
  std::string id() const override { return "p5"; }

  void before_fuzz(Env& env) override {
    agent_ = nm("gambler");
    env.chain.create_account(agent_);
    env.chain.deploy(agent_, rollback_bettor_agent());
    env.chain.issue(agent_, 100'000'0000);
    env.chain.issue(env.victim, 1'000'000'0000);
    env.fuzz_accounts.push_back(agent_);
    pre_balance_ = env.balance(agent_);
  }

  ScenarioShape shape(const Env&) const override {
    return {{{ScenarioChoice::Kind::AgentCall, nm("makebet"), {AbiType::Asset, AbiType::String}}}};
  }

  std::vector<Transaction> fuzz(Env& env, const DecodedCall& input) override {
    ParamVector params(3);
    params[0] = {AbiType::NameT, env.victim.v, {}};
    params[1] = input.params[0];
    params[2] = input.params[1];
    return {env.make_call_tx(agent_, nm("makebet"), params, env.fuzzer)};
  }

  std::vector<Finding> after_fuzz(Env& env,
                                  const std::vector<ExecutionResult>& results) override {
    std::vector<Finding> findings;
    if (env.balance(agent_) <= pre_balance_) return findings;
    scan_events(results, [&](size_t ri, size_t ei, const TraceEvent& ev, const Span& span,
                             const ExecutionResult&) {
      if (!findings.empty() || !span.open || span.receiver != env.victim) return;
      const auto* he = std::get_if<HostCallEvent>(&ev);
      if (he && he->fn == HostFn::SendInline && !he->args.empty() &&
          Name::from_bits(he->args[0]) == env.victim) {
        Finding f;
        f.evidence = {{ri, ei}};
        findings.push_back(std::move(f));
      }
    });
    return findings;
  }

 private:
  Name agent_;
  int64_t pre_balance_ = 0;
};

// --- P6: Receipt Hijacking --------------------------------------------------------

// The victim signs (and pays for) a deferred transaction that forwards a
// receipt to an outside account.
class ReceiptHijackPlugin : public Plugin {
 public:
  std::string id() const override { return "p6"; }

  void before_fuzz(Env& env) override { env.chain.issue(env.victim, 1'000'0000); }

  ScenarioShape shape(const Env& env) const override {
    ScenarioShape s;
    for (const auto& entry : env.victim_module->abi.entries) {
      auto action = Name::parse(entry.fn_name);
      if (!action) continue;
      s.choices.push_back({ScenarioChoice::Kind::InvokeVictim, *action, entry.params});
    }
    s.choices.push_back(
        {ScenarioChoice::Kind::TokenTransfer, Name(), {AbiType::Asset, AbiType::String}});
    return s;
  }

  std::vector<Transaction> fuzz(Env& env, const DecodedCall& input) override {
    return BlockInfoPlugin::generic_fuzz(env, *this, input);
  }

  std::vector<Finding> after_fuzz(Env& env,
                                  const std::vector<ExecutionResult>& results) override {
    std::vector<Finding> findings;
    std::optional<EventRef> deferred_send;
    scan_events(results, [&](size_t ri, size_t ei, const TraceEvent& ev, const Span& span,
                             const ExecutionResult& result) {
      if (!findings.empty() || !span.open) return;
      const auto* he = std::get_if<HostCallEvent>(&ev);
      if (!he) return;
      if (he->fn == HostFn::SendDeferred && !he->args.empty() &&
          Name::from_bits(he->args[0]) == env.victim) {
        deferred_send = EventRef{ri, ei};
      }
      // inside the deferred transaction the victim is the signer, so every
      // host event is charged to it
      if (deferred_send && he->fn == HostFn::RequireRecipient && result.deferred &&
          result.signer == env.victim && !he->args.empty() &&
          Name::from_bits(he->args[0]) != env.victim) {
        Finding f;
        f.evidence = {*deferred_send, {ri, ei}};
        findings.push_back(std::move(f));
      }
    });
    return findings;
  }
};

}  // namespace

std::unique_ptr<Plugin> make_plugin(const std::string& plugin_id) {
  if (plugin_id == "p1") return std::make_unique<FakeTransferPlugin>();
  if (plugin_id == "p2") return std::make_unique<FakeNotificationPlugin>();
  if (plugin_id == "p3") return std::make_unique<BlockInfoPlugin>();
  if (plugin_id == "p4") return std::make_unique<NoAuthPlugin>();
  if (plugin_id == "p5") return std::make_unique<RollbackPlugin>();
  if (plugin_id == "p6") return std::make_unique<ReceiptHijackPlugin>();
  throw ChainError("unknown plugin: " + plugin_id);
}

std::vector<std::string> plugin_ids() { return {"p1", "p2", "p3", "p4", "p5", "p6"}; }

}  // namespace greyant
