#include "greyant/chain.hpp"

#include <algorithm>
#include <sstream>

#include "greyant/vm.hpp"

namespace greyant {

namespace {
constexpr size_t kMaxActionsPerTx = 256;
constexpr size_t kMaxDeferredPerDrain = 64;
}  // namespace

Account& ChainState::create_account(Name name) {
  if (name != name.normalized() || name.v == 0) {
    throw ChainError("malformed account name");
  }
  auto [it, inserted] = accounts_.try_emplace(name);
  if (!inserted) throw ChainError("duplicate account: " + name.to_string());
  it->second.name = name;
  return it->second;
}

void ChainState::deploy(Name account, std::shared_ptr<const ContractModule> module) {
  Account* acct = find_account(account);
  if (!acct) throw ChainError("unknown account: " + account.to_string());
  acct->contract = std::move(module);
}

void ChainState::issue(Name to, int64_t amount, Vm* vm) {
  if (amount <= 0) throw ChainError("issue amount must be positive");
  Account* acct = find_account(to);
  if (!acct) throw ChainError("unknown account: " + to.to_string());
  set_balance(*acct, acct->balance + amount);
  if (vm) {
    vm->trace_transfer(token_account_, acct->name, amount, {'i', 's', 's', 'u', 'e'});
  }
}

Account* ChainState::find_account(Name name) {
  auto it = accounts_.find(name.normalized());
  return it == accounts_.end() ? nullptr : &it->second;
}

const Account* ChainState::find_account(Name name) const {
  auto it = accounts_.find(name.normalized());
  return it == accounts_.end() ? nullptr : &it->second;
}

Account& ChainState::require_account(Name name) {
  Account* acct = find_account(name);
  if (!acct) throw VmFault("unknown account: " + name.to_string());
  return *acct;
}

int64_t ChainState::balance_of(Name name) const {
  const Account* acct = find_account(name);
  return acct ? acct->balance : 0;
}

void ChainState::set_balance(Account& acct, int64_t value) {
  if (in_transaction_) {
    journal_.push_back({JournalEntry::BalanceWrite, acct.name, 0, 0, acct.balance, std::nullopt});
  }
  acct.balance = value;
}

void ChainState::table_store(Account& acct, uint64_t table, uint64_t key, Bytes value) {
  auto& rows = acct.tables[table];
  auto it = rows.find(key);
  if (in_transaction_) {
    JournalEntry e{it == rows.end() ? JournalEntry::RowErase : JournalEntry::RowWrite,
                   acct.name, table, key, 0, std::nullopt};
    if (it != rows.end()) e.old_row = it->second;
    journal_.push_back(std::move(e));
  }
  rows[key] = std::move(value);
}

void ChainState::table_delete(Account& acct, uint64_t table, uint64_t key) {
  auto& rows = acct.tables[table];
  auto it = rows.find(key);
  if (it == rows.end()) return;
  if (in_transaction_) {
    JournalEntry e{JournalEntry::RowWrite, acct.name, table, key, 0, it->second};
    journal_.push_back(std::move(e));
  }
  rows.erase(it);
}

void ChainState::charge(Name payer, int64_t units) {
  // Metering is attribution only and survives rollback: failed transactions
  // still consume the payer's resources.
  Account* acct = find_account(payer);
  if (acct) acct->resource_used += units;
}

void ChainState::stage_deferred(Transaction tx) {
  staged_deferred_.push_back(std::move(tx));
}

void ChainState::journal_begin() {
  journal_.clear();
  staged_deferred_.clear();
  in_transaction_ = true;
}

void ChainState::journal_commit() {
  journal_.clear();
  for (auto& tx : staged_deferred_) {
    tx.id = next_tx_id();
    deferred_queue_.push_back(std::move(tx));
  }
  staged_deferred_.clear();
  in_transaction_ = false;
}

void ChainState::journal_rollback() {
  for (auto it = journal_.rbegin(); it != journal_.rend(); ++it) {
    Account* acct = find_account(it->account);
    if (!acct) continue;
    switch (it->kind) {
      case JournalEntry::BalanceWrite: acct->balance = it->old_balance; break;
      case JournalEntry::RowWrite: acct->tables[it->table][it->key] = *it->old_row; break;
      case JournalEntry::RowErase: acct->tables[it->table].erase(it->key); break;
    }
  }
  journal_.clear();
  staged_deferred_.clear();
  in_transaction_ = false;
}

ExecutionResult ChainState::push_transaction(const Transaction& tx, Vm& vm) {
  ExecutionResult result;
  result.tx_id = tx.id ? tx.id : next_tx_id();
  result.signer = tx.signer;

  journal_begin();
  vm.begin_transaction(tx, *this);

  std::deque<Action> work;
  for (const Action& a : tx.actions) {
    Action copy = a;
    copy.payer = tx.signer;
    work.push_back(std::move(copy));
  }

  try {
    if (work.empty()) throw VmFault("transaction has no actions");
    size_t executed = 0;
    while (!work.empty()) {
      if (++executed > kMaxActionsPerTx) throw VmFault("action limit exceeded");
      Action action = std::move(work.front());
      work.pop_front();
      vm.dispatch_action(action);
      // Notifications run right after the current action, then its inline
      // actions, then whatever was already pending.
      auto notifs = vm.take_notifications();
      auto inls = vm.take_inlines();
      for (auto it = inls.rbegin(); it != inls.rend(); ++it) {
        it->payer = tx.signer;
        work.push_front(std::move(*it));
      }
      for (auto it = notifs.rbegin(); it != notifs.rend(); ++it) {
        it->payer = tx.signer;
        work.push_front(std::move(*it));
      }
    }
    for (auto& dtx : vm.take_deferred_staged()) stage_deferred(std::move(dtx));
    journal_commit();
    result.success = true;
  } catch (const VmFault& fault) {
    journal_rollback();
    vm.take_notifications();
    vm.take_inlines();
    vm.take_deferred_staged();
    result.success = false;
    result.fault = fault.what();
  }

  vm.end_transaction();
  result.trace = vm.take_trace();
  result.bitmap = vm.iteration_coverage();
  return result;
}

std::vector<ExecutionResult> ChainState::run_deferred(Vm& vm) {
  std::vector<ExecutionResult> results;
  size_t drained = 0;
  while (!deferred_queue_.empty() && drained < kMaxDeferredPerDrain) {
    Transaction tx = std::move(deferred_queue_.front());
    deferred_queue_.pop_front();
    ++drained;
    ExecutionResult r = push_transaction(tx, vm);
    r.deferred = true;
    results.push_back(std::move(r));
  }
  return results;
}

Transaction ChainState::make_transfer_tx(Name from, Name to, int64_t amount, const Bytes& memo) {
  ParamVector params(4);
  params[0] = {AbiType::NameT, from.v, {}};
  params[1] = {AbiType::NameT, to.v, {}};
  params[2] = {AbiType::Asset, static_cast<uint64_t>(amount), {}};
  params[3] = {AbiType::String, 0, memo};

  Action a;
  a.code = token_account_;
  a.receiver = token_account_;
  a.action_name = *Name::parse("transfer");
  a.data = params_to_bytes(params);
  a.auth = {from};

  Transaction tx;
  tx.actions.push_back(std::move(a));
  tx.signer = from;
  return tx;
}

std::string ChainState::snapshot() const {
  std::ostringstream out;
  for (const auto& [name, acct] : accounts_) {
    uint64_t tables_digest = 0xcbf29ce484222325ull;
    for (const auto& [table, rows] : acct.tables) {
      tables_digest = fnv1a64(&table, sizeof(table), tables_digest);
      for (const auto& [key, row] : rows) {
        tables_digest = fnv1a64(&key, sizeof(key), tables_digest);
        tables_digest = fnv1a64(row.data(), row.size(), tables_digest);
      }
    }
    out << name.to_string() << " " << acct.balance << " "
        << (acct.contract ? acct.contract->name.to_string() : "-") << " " << tables_digest
        << "\n";
  }
  return out.str();
}

uint64_t ChainState::digest() const {
  std::string snap = snapshot();
  uint64_t h = fnv1a64(snap.data(), snap.size());
  for (const auto& tx : deferred_queue_) {
    h = fnv1a64(&tx.signer.v, sizeof(tx.signer.v), h);
    for (const auto& a : tx.actions) {
      h = fnv1a64(&a.receiver.v, sizeof(a.receiver.v), h);
      h = fnv1a64(&a.action_name.v, sizeof(a.action_name.v), h);
      h = fnv1a64(a.data.data(), a.data.size(), h);
    }
  }
  return h;
}

}  // namespace greyant
