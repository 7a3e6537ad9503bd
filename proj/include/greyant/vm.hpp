#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "greyant/chain.hpp"
#include "greyant/coverage.hpp"
#include "greyant/mcb.hpp"
#include "greyant/trace.hpp"

namespace greyant {

// Instrumented interpreter. Owns the per-iteration coverage bitmap, the
// campaign-cumulative map, and the transaction trace. One Vm per campaign;
// the engine and the Vm alternate strictly, never concurrently.
class Vm {
 public:
  explicit Vm(BlockInfo block = {}) : block_(block) {}

  const BlockInfo& block_info() const { return block_; }

  // --- coverage ---
  void reset_iteration_coverage();
  const CoverageBitmap& iteration_coverage() const { return bitmap_; }
  const CoverageBitmap& campaign_coverage() const { return union_; }
  size_t campaign_edge_count() const { return union_edges_; }
  // Cells touched since the last reset, for O(touched) novelty checks.
  std::span<const uint32_t> touched_cells() const { return {touched_.data(), touched_.size()}; }

  // --- per-transaction state (driven by ChainState::push_transaction) ---
  void begin_transaction(const Transaction& tx, ChainState& chain);
  void end_transaction();
  TraceLog take_trace() { return std::move(trace_); }
  const TraceLog& trace() const { return trace_; }
  void trace_transfer(Name from, Name to, int64_t amount, Bytes memo);

  // Runs one action through the receiver's apply dispatch, emitting apply
  // markers and collecting emitted inline/notification/deferred actions.
  // Throws VmFault on any trap.
  void dispatch_action(const Action& action);

  std::vector<Action> take_notifications() { return std::move(notifications_); }
  std::vector<Action> take_inlines() { return std::move(inlines_); }
  std::vector<Transaction> take_deferred_staged();

  // Direct function execution (no apply dispatch); used by tests and tools.
  uint64_t execute(const ContractModule& m, uint32_t fn_index, std::span<const uint64_t> args,
                   ChainState& chain);

 private:
  struct ActionContext {
    const Action* action = nullptr;
    const ContractModule* module = nullptr;
    ParamVector params;
    Bytes memo;
    std::vector<Name> notified;
  };

  void record_cf(uint64_t pc);
  uint64_t run(const ContractModule& m, uint32_t fn_index, std::span<const uint64_t> args);
  void host_call(HostFn fn, const ContractModule& m, std::vector<uint64_t>& stack, size_t base);
  Bytes encode_outgoing_data(Name target, Name action_name, std::vector<uint64_t>& stack,
                             size_t base);

  BlockInfo block_;
  CoverageBitmap bitmap_;
  CoverageBitmap union_;
  size_t union_edges_ = 0;
  EdgeState edge_;
  std::vector<uint32_t> touched_;
  std::vector<uint8_t> touched_flag_ = std::vector<uint8_t>(kMapSize, 0);

  TraceLog trace_;
  ChainState* chain_ = nullptr;
  Name tx_signer_;
  std::vector<Action> notifications_;
  std::vector<Action> inlines_;
  std::vector<Transaction> staged_deferred_;
  ActionContext ctx_;
  uint64_t steps_ = 0;
};

}  // namespace greyant
