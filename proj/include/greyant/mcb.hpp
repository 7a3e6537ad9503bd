#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "greyant/abi.hpp"
#include "greyant/common.hpp"
#include "greyant/name.hpp"

namespace greyant {

// Minimal contract bytecode (mcb): a stack machine over one 64-bit integer
// value domain. Strings live in the current action's data area and are read
// through MemoByte/MemoLen.
enum class Op : uint8_t {
  // control flow (coverage instrumentation points)
  Call,          // imm = function index
  CallIndirect,  // table slot popped from the stack
  Br,            // imm = target offset within the function
  BrIf,          // pops condition, branches when nonzero
  Return,
  // numeric, 64-bit integer
  Const,  // imm pushed
  Add,
  Sub,
  Mul,
  Mod,
  Eq,
  Ne,
  LtS,
  GtS,
  // stack / locals
  Drop,
  Dup,
  LocalGet,  // imm = local index
  LocalSet,
  // action data access
  ParamLoad,  // imm = decoded action parameter index
  MemoByte,   // offset popped from the stack
  MemoLen,
  // host environment
  HostCall,  // imm = HostFn id
  // misc
  AssertNz,  // imm = literal-pool string index of the fault message
};

const char* op_name(Op op);
bool is_control_flow(Op op);
bool is_numeric(Op op);

// Host function ids, resolved at validation time. Block/balance queries never
// mutate chain state.
enum class HostFn : uint8_t {
  TaposBlockNum,
  TaposBlockPrefix,
  BlockTimeStamp,
  Balance,
  SendInline,
  SendDeferred,
  RequireRecipient,
  DbStore,
  DbUpdate,
  DbDelete,
  RequireAuth,
  HasAuth,
  Transfer,
  Assert,
};
inline constexpr int kHostFnCount = 14;

const char* host_fn_name(HostFn fn);
std::optional<HostFn> parse_host_fn(std::string_view s);
// Number of values popped from the stack. SendInline/SendDeferred additionally
// pop the target entry's fixed parameters, resolved at run time.
int host_fn_arity(HostFn fn);
bool host_fn_pushes_result(HostFn fn);

struct Instr {
  Op op;
  int64_t imm = 0;

  friend bool operator==(const Instr& a, const Instr& b) { return a.op == b.op && a.imm == b.imm; }
};

struct Function {
  std::string name;
  uint32_t param_count = 0;
  std::vector<Instr> body;

  friend bool operator==(const Function& a, const Function& b) {
    return a.name == b.name && a.param_count == b.param_count && a.body == b.body;
  }
};

inline constexpr uint32_t kLocalsPerFrame = 16;  // includes call arguments

struct ContractModule {
  Name name;
  std::vector<Function> functions;
  std::vector<uint32_t> table;
  std::vector<int64_t> lit_constants;  // deduped, first-occurrence order
  std::vector<Bytes> lit_strings;      // deduped, first-occurrence order
  AbiDescriptor abi;
  uint32_t apply_fn = 0;

  // Derived by finalize(): every instruction gets a module-unique address so
  // coverage edges from different contracts do not collide.
  uint64_t pc_base = 0;
  std::vector<uint64_t> fn_entry;  // instruction offset of each function start
  uint64_t code_size = 0;

  void finalize();
  uint64_t entry_pc(uint32_t fn_index) const { return pc_base + fn_entry[fn_index]; }
  uint64_t pc_of(uint32_t fn_index, size_t offset) const {
    return pc_base + fn_entry[fn_index] + offset;
  }
  // Synthetic call-site address used when the VM dispatches apply().
  uint64_t dispatch_pc() const { return pc_base + code_size; }

  std::optional<uint32_t> find_function(std::string_view fn_name) const;
  int add_constant(int64_t v);     // returns pool index, dedup
  int add_string(const Bytes& s);  // returns pool index, dedup

  friend bool operator==(const ContractModule& a, const ContractModule& b) {
    return a.name == b.name && a.functions == b.functions && a.table == b.table &&
           a.lit_constants == b.lit_constants && a.lit_strings == b.lit_strings &&
           a.abi == b.abi && a.apply_fn == b.apply_fn;
  }
};

struct LiteralCorpus {
  std::vector<int64_t> constants;
  std::vector<Bytes> strings;
  std::vector<Name> names;  // pool strings that parse as account names
};

// Checks every module invariant; throws ValidationError enumerating all
// violations.
void validate(const ContractModule& m);

LiteralCorpus extract_literals(const ContractModule& m);

// Canonical text form; assembling it reproduces an identical module.
std::string disassemble(const ContractModule& m);

}  // namespace greyant
