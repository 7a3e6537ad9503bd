#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "greyant/common.hpp"
#include "greyant/coverage.hpp"
#include "greyant/mcb.hpp"
#include "greyant/name.hpp"
#include "greyant/trace.hpp"

namespace greyant {

class Vm;

// Token amounts are integer units of 0.0001 of the single chain symbol.
inline constexpr int64_t kTokenScale = 10000;

struct Account {
  Name name;
  int64_t balance = 0;
  std::shared_ptr<const ContractModule> contract;
  // table name -> key -> row bytes
  std::map<uint64_t, std::map<uint64_t, Bytes>> tables;
  int64_t net_cpu_budget = 1'000'000;
  int64_t resource_used = 0;  // units charged to this account as payer
};

struct Action {
  Name code;      // original receiver; preserved across require_recipient
  Name receiver;  // current receiver
  Name action_name;
  Bytes data;
  std::vector<Name> auth;
  Name payer;  // resource payer of the enclosing transaction
};

struct Transaction {
  std::vector<Action> actions;
  Name signer;
  uint64_t id = 0;
};

struct ExecutionResult {
  bool success = false;
  std::string fault;
  TraceLog trace;
  CoverageBitmap bitmap;  // iteration coverage snapshot after this transaction
  uint64_t tx_id = 0;
  Name signer;
  bool deferred = false;  // produced by run_deferred
};

struct BlockInfo {
  uint32_t tapos_num = 3500;
  uint32_t tapos_prefix = 941147;
  uint64_t timestamp = 1'600'000'000;
};

class ChainState {
 public:
  Account& create_account(Name name);
  Account& create_account(std::string_view name) { return create_account(name_of(name)); }

  void deploy(Name account, std::shared_ptr<const ContractModule> module);

  // Mints `amount` to an existing account and traces a TransferEvent from the
  // token authority into `vm` when one is attached.
  void issue(Name to, int64_t amount, Vm* vm = nullptr);

  Account* find_account(Name name);  // normalizes the name value
  const Account* find_account(Name name) const;
  Account& require_account(Name name);

  int64_t balance_of(Name name) const;

  // Executes all actions in order; inline actions and notifications run
  // inside the same transaction; any fault rolls the whole transaction back.
  // Deferred transactions staged during execution survive only on success.
  ExecutionResult push_transaction(const Transaction& tx, Vm& vm);

  // Drains the deferred queue FIFO; each entry executes as an independent
  // transaction, so failures do not affect siblings.
  std::vector<ExecutionResult> run_deferred(Vm& vm);

  // Convenience builder for a token transfer pushed through the token
  // contract account.
  Transaction make_transfer_tx(Name from, Name to, int64_t amount, const Bytes& memo);

  uint64_t next_tx_id() { return ++last_tx_id_; }

  // Journaled writes; used by the VM's host handlers so a failing transaction
  // can undo them.
  void set_balance(Account& acct, int64_t value);
  void table_store(Account& acct, uint64_t table, uint64_t key, Bytes value);
  void table_delete(Account& acct, uint64_t table, uint64_t key);
  void charge(Name payer, int64_t units = 1);

  void stage_deferred(Transaction tx);
  size_t deferred_size() const { return deferred_queue_.size(); }

  // One account per line: name, balance, contract name, table digest.
  std::string snapshot() const;
  // Digest over accounts (balances, contracts, tables) and the deferred
  // queue. Resource metering is excluded: failed transactions still pay.
  uint64_t digest() const;

  const std::map<Name, Account>& accounts() const { return accounts_; }
  Name token_account() const { return token_account_; }

 private:
  friend class Vm;

  struct JournalEntry {
    enum Kind { BalanceWrite, RowWrite, RowErase } kind;
    Name account;
    uint64_t table = 0;
    uint64_t key = 0;
    int64_t old_balance = 0;
    std::optional<Bytes> old_row;
  };

  void journal_begin();
  void journal_commit();
  void journal_rollback();

  std::map<Name, Account> accounts_;
  std::deque<Transaction> deferred_queue_;
  std::vector<Transaction> staged_deferred_;
  std::vector<JournalEntry> journal_;
  bool in_transaction_ = false;
  uint64_t last_tx_id_ = 0;
  Name token_account_ = *Name::parse("eosio.token");
};

}  // namespace greyant
