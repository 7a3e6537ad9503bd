#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "greyant/common.hpp"
#include "greyant/mcb.hpp"
#include "greyant/name.hpp"

namespace greyant {

// One record per executed control-flow or numeric instruction. src/dst carry
// the jump addresses for control flow; for straight-line instructions dst is
// the next address.
struct InstrEvent {
  Op op;
  std::vector<uint64_t> operands;
  std::optional<uint64_t> result;
  uint64_t src_pc = 0;
  uint64_t dst_pc = 0;
};

struct HostCallEvent {
  HostFn fn;
  std::vector<uint64_t> args;
  Name payer;       // signer of the enclosing transaction
  Bytes effect;     // optional payload (e.g. stored row bytes)
};

struct TransferEvent {
  Name from;
  Name to;
  int64_t amount = 0;
  Bytes memo;
};

// Emitted by the VM around every dispatched action; oracles use these to
// scope per-action event spans.
struct ApplyEvent {
  bool enter = true;
  Name receiver;
  Name code;
  Name action;
};

using TraceEvent = std::variant<InstrEvent, HostCallEvent, TransferEvent, ApplyEvent>;

struct TraceLog {
  std::vector<TraceEvent> events;

  void clear() { events.clear(); }
  size_t size() const { return events.size(); }
};

// Line format:
//   I|<opcode>|<operands csv>|<result>|<src>|<dst>
//   H|<fn>|<args csv>|<payer>
//   T|<from>|<to>|<amount>|<memo-hex>
//   A|enter|<receiver>|<code>|<action>   (and A|exit|...)
std::string trace_line(const TraceEvent& ev);
TraceEvent parse_trace_line(const std::string& line);

std::string render_trace(const TraceLog& log);
TraceLog parse_trace(const std::string& text);
void write_trace_file(const TraceLog& log, const std::string& path);

}  // namespace greyant
