#pragma once

#include <memory>

#include "greyant/mcb.hpp"

namespace greyant {

// Built-in contracts assembled once at startup: the token system contract
// and the attack agents deployed by detector plugins.
std::shared_ptr<const ContractModule> token_contract();

// P1 agent ("impostor"): sends a transfer action straight at the target,
// bypassing the token contract.
std::shared_ptr<const ContractModule> direct_transfer_agent();

// P2 agent ("notifier"): forwards incoming transfer receipts to the victim.
std::shared_ptr<const ContractModule> receipt_forwarder_agent();

// P5 agent ("gambler"): bets through the token contract, then asserts its
// balance grew so losing bets roll the whole transaction back.
std::shared_ptr<const ContractModule> rollback_bettor_agent();

}  // namespace greyant
