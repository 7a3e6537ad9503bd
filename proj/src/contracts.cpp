#include "greyant/contracts.hpp"

#include "greyant/assembler.hpp"

namespace greyant {

namespace {

const char* kTokenSrc = R"(
contract eosio.token
abi transfer (name,name,asset,string)
apply main
table transfer

fn main(3)
  # dispatch only direct invocations: code == receiver && action == "transfer"
  local_get 1
  local_get 0
  ne
  br_if out
  local_get 2
  const @transfer
  ne
  br_if out
  const 0
  call_indirect
out:
  return

fn transfer(0)
  param 0
  param 1
  param 2
  host transfer
  return
)";

const char* kDirectTransferAgentSrc = R"(
contract impostor
abi attack (name,asset,string)
apply main
table attack

fn main(3)
  local_get 1
  local_get 0
  ne
  br_if out
  local_get 2
  const @attack
  ne
  br_if out
  const 0
  call_indirect
out:
  return

fn attack(0)
  # send transfer(self, target, quantity) directly to the target account
  const @impostor
  param 0
  param 1
  const @transfer
  param 0
  host send_inline
  return
)";

const char* kReceiptForwarderSrc = R"(
contract notifier
abi transfer (name,name,asset,string)
apply main
table transfer

fn main(3)
  # token receipts only
  local_get 1
  const @eosio.token
  ne
  br_if out
  local_get 2
  const @transfer
  ne
  br_if out
  const 0
  call_indirect
out:
  return

fn transfer(0)
  const @victim
  host require_recipient
  return
)";

const char* kRollbackBettorSrc = R"(
contract gambler
abi makebet (name,asset,string)
abi checkwin (u64)
apply main
table makebet checkwin

fn main(3)
  local_get 1
  local_get 0
  ne
  br_if out
  local_get 2
  const @makebet
  eq
  br_if bet
  local_get 2
  const @checkwin
  eq
  br_if win
  return
bet:
  const 0
  call_indirect
  return
win:
  const 1
  call_indirect
  return
out:
  return

fn makebet(0)
  # remember the balance before betting
  const @gambler
  host balance
  # bet: transfer(self, target, quantity) via the token contract
  const @gambler
  param 0
  param 1
  const @transfer
  const @eosio.token
  host send_inline
  # schedule the balance check in the same transaction
  const @checkwin
  const @gambler
  host send_inline
  return

fn checkwin(0)
  const @gambler
  host balance
  param 0
  gt_s
  assertnz "rollback"
  return
)";

std::shared_ptr<const ContractModule> build(const char* src) {
  return std::make_shared<const ContractModule>(assemble(src));
}

}  // namespace

std::shared_ptr<const ContractModule> token_contract() {
  static auto m = build(kTokenSrc);
  return m;
}

std::shared_ptr<const ContractModule> direct_transfer_agent() {
  static auto m = build(kDirectTransferAgentSrc);
  return m;
}

std::shared_ptr<const ContractModule> receipt_forwarder_agent() {
  static auto m = build(kReceiptForwarderSrc);
  return m;
}

std::shared_ptr<const ContractModule> rollback_bettor_agent() {
  static auto m = build(kRollbackBettorSrc);
  return m;
}

}  // namespace greyant
