#include "greyant/mcb.hpp"

#include <algorithm>
#include <sstream>

namespace greyant {

const char* op_name(Op op) {
  switch (op) {
    case Op::Call: return "call";
    case Op::CallIndirect: return "call_indirect";
    case Op::Br: return "br";
    case Op::BrIf: return "br_if";
    case Op::Return: return "return";
    case Op::Const: return "const";
    case Op::Add: return "add";
    case Op::Sub: return "sub";
    case Op::Mul: return "mul";
    case Op::Mod: return "mod";
    case Op::Eq: return "eq";
    case Op::Ne: return "ne";
    case Op::LtS: return "lt_s";
    case Op::GtS: return "gt_s";
    case Op::Drop: return "drop";
    case Op::Dup: return "dup";
    case Op::LocalGet: return "local_get";
    case Op::LocalSet: return "local_set";
    case Op::ParamLoad: return "param";
    case Op::MemoByte: return "memo_byte";
    case Op::MemoLen: return "memo_len";
    case Op::HostCall: return "host";
    case Op::AssertNz: return "assertnz";
  }
  return "?";
}

bool is_control_flow(Op op) {
  switch (op) {
    case Op::Call:
    case Op::CallIndirect:
    case Op::Br:
    case Op::BrIf:
    case Op::Return: return true;
    default: return false;
  }
}

bool is_numeric(Op op) {
  switch (op) {
    case Op::Const:
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Mod:
    case Op::Eq:
    case Op::Ne:
    case Op::LtS:
    case Op::GtS: return true;
    default: return false;
  }
}

const char* host_fn_name(HostFn fn) {
  switch (fn) {
    case HostFn::TaposBlockNum: return "tapos_block_num";
    case HostFn::TaposBlockPrefix: return "tapos_block_prefix";
    case HostFn::BlockTimeStamp: return "block_time_stamp";
    case HostFn::Balance: return "balance";
    case HostFn::SendInline: return "send_inline";
    case HostFn::SendDeferred: return "send_deferred";
    case HostFn::RequireRecipient: return "require_recipient";
    case HostFn::DbStore: return "db_store";
    case HostFn::DbUpdate: return "db_update";
    case HostFn::DbDelete: return "db_delete";
    case HostFn::RequireAuth: return "require_auth";
    case HostFn::HasAuth: return "has_auth";
    case HostFn::Transfer: return "transfer";
    case HostFn::Assert: return "assert";
  }
  return "?";
}

std::optional<HostFn> parse_host_fn(std::string_view s) {
  for (int i = 0; i < kHostFnCount; ++i) {
    HostFn fn = static_cast<HostFn>(i);
    if (s == host_fn_name(fn)) return fn;
  }
  return std::nullopt;
}

int host_fn_arity(HostFn fn) {
  switch (fn) {
    case HostFn::TaposBlockNum:
    case HostFn::TaposBlockPrefix:
    case HostFn::BlockTimeStamp: return 0;
    case HostFn::Balance: return 1;
    case HostFn::SendInline:
    case HostFn::SendDeferred: return 2;  // receiver, action name (+ target fixed params)
    case HostFn::RequireRecipient: return 1;
    case HostFn::DbStore:
    case HostFn::DbUpdate: return 3;  // table, key, value
    case HostFn::DbDelete: return 2;  // table, key
    case HostFn::RequireAuth:
    case HostFn::HasAuth: return 1;
    case HostFn::Transfer: return 3;  // from, to, amount (memo from action context)
    case HostFn::Assert: return 2;    // condition, message pool index
  }
  return 0;
}

bool host_fn_pushes_result(HostFn fn) {
  switch (fn) {
    case HostFn::TaposBlockNum:
    case HostFn::TaposBlockPrefix:
    case HostFn::BlockTimeStamp:
    case HostFn::Balance:
    case HostFn::HasAuth: return true;
    default: return false;
  }
}

void ContractModule::finalize() {
  fn_entry.clear();
  uint64_t off = 0;
  for (const auto& f : functions) {
    fn_entry.push_back(off);
    off += f.body.size();
  }
  code_size = off;
  // Salt addresses by the contract name so identical offsets in different
  // contracts map to different coverage locations.
  uint64_t x = name.v ? name.v : 0x9e3779b97f4a7c15ull;
  x ^= x >> 33;
  x *= 0xFF51AFD7ED558CCDull;
  x ^= x >> 33;
  pc_base = x << 20;
}

std::optional<uint32_t> ContractModule::find_function(std::string_view fn_name) const {
  for (uint32_t i = 0; i < functions.size(); ++i) {
    if (functions[i].name == fn_name) return i;
  }
  return std::nullopt;
}

int ContractModule::add_constant(int64_t v) {
  for (size_t i = 0; i < lit_constants.size(); ++i) {
    if (lit_constants[i] == v) return static_cast<int>(i);
  }
  lit_constants.push_back(v);
  return static_cast<int>(lit_constants.size() - 1);
}

int ContractModule::add_string(const Bytes& s) {
  for (size_t i = 0; i < lit_strings.size(); ++i) {
    if (lit_strings[i] == s) return static_cast<int>(i);
  }
  lit_strings.push_back(s);
  return static_cast<int>(lit_strings.size() - 1);
}

void validate(const ContractModule& m) {
  std::vector<std::string> errors;

  if (m.functions.empty()) {
    errors.push_back("module has no functions");
  } else if (m.apply_fn >= m.functions.size()) {
    errors.push_back("apply function index out of range");
  } else if (m.functions[m.apply_fn].param_count != 3) {
    errors.push_back("apply arity: apply takes (receiver, code, action), got " +
                     std::to_string(m.functions[m.apply_fn].param_count) + " parameters");
  }

  for (size_t slot = 0; slot < m.table.size(); ++slot) {
    if (m.table[slot] >= m.functions.size()) {
      errors.push_back("table slot " + std::to_string(slot) + " references missing function " +
                       std::to_string(m.table[slot]));
    }
  }

  for (const auto& entry : m.abi.entries) {
    if (!m.find_function(entry.fn_name)) {
      errors.push_back("dangling ABI entry '" + entry.fn_name + "'");
    }
    if (!Name::parse(entry.fn_name)) {
      errors.push_back("ABI entry '" + entry.fn_name + "' is not a valid action name");
    }
  }

  for (size_t fi = 0; fi < m.functions.size(); ++fi) {
    const Function& f = m.functions[fi];
    if (f.param_count > kLocalsPerFrame) {
      errors.push_back("function '" + f.name + "' declares more parameters than locals");
    }
    for (size_t pc = 0; pc < f.body.size(); ++pc) {
      const Instr& ins = f.body[pc];
      auto at = [&] { return "function '" + f.name + "' offset " + std::to_string(pc) + ": "; };
      switch (ins.op) {
        case Op::Br:
        case Op::BrIf:
          if (ins.imm < 0 || static_cast<size_t>(ins.imm) >= f.body.size()) {
            errors.push_back(at() + "invalid branch target " + std::to_string(ins.imm));
          }
          break;
        case Op::Call:
          if (ins.imm < 0 || static_cast<size_t>(ins.imm) >= m.functions.size()) {
            errors.push_back(at() + "call to missing function " + std::to_string(ins.imm));
          }
          break;
        case Op::HostCall:
          if (ins.imm < 0 || ins.imm >= kHostFnCount) {
            errors.push_back(at() + "unknown host function id " + std::to_string(ins.imm));
          }
          break;
        case Op::LocalGet:
        case Op::LocalSet:
          if (ins.imm < 0 || ins.imm >= static_cast<int64_t>(kLocalsPerFrame)) {
            errors.push_back(at() + "local index out of range");
          }
          break;
        case Op::AssertNz:
          if (ins.imm < 0 || static_cast<size_t>(ins.imm) >= m.lit_strings.size()) {
            errors.push_back(at() + "assert message index out of range");
          }
          break;
        default: break;
      }
    }
  }

  if (!errors.empty()) {
    std::string joined;
    for (size_t i = 0; i < errors.size(); ++i) {
      if (i) joined += "; ";
      joined += errors[i];
    }
    throw ValidationError(joined);
  }
}

LiteralCorpus extract_literals(const ContractModule& m) {
  LiteralCorpus out;
  out.constants = m.lit_constants;
  out.strings = m.lit_strings;
  for (const auto& s : m.lit_strings) {
    auto n = Name::parse(std::string_view(reinterpret_cast<const char*>(s.data()), s.size()));
    if (n) out.names.push_back(*n);
  }
  return out;
}

static std::string escape_string(const Bytes& s) {
  std::string out;
  for (uint8_t b : s) {
    if (b == '"' || b == '\\') {
      out.push_back('\\');
      out.push_back(static_cast<char>(b));
    } else if (b >= 0x20 && b < 0x7F) {
      out.push_back(static_cast<char>(b));
    } else {
      static const char* digits = "0123456789abcdef";
      out += "\\x";
      out.push_back(digits[b >> 4]);
      out.push_back(digits[b & 0xF]);
    }
  }
  return out;
}

std::string disassemble(const ContractModule& m) {
  std::ostringstream out;
  out << "contract " << m.name.to_string() << "\n";
  for (int64_t c : m.lit_constants) out << "lit " << c << "\n";
  for (const auto& s : m.lit_strings) out << "lit \"" << escape_string(s) << "\"\n";
  for (const auto& entry : m.abi.entries) {
    out << "abi " << entry.fn_name << " (";
    for (size_t i = 0; i < entry.params.size(); ++i) {
      if (i) out << ",";
      out << abi_type_name(entry.params[i]);
    }
    out << ")\n";
  }
  if (!m.table.empty()) {
    out << "table";
    for (uint32_t fi : m.table) out << " " << m.functions[fi].name;
    out << "\n";
  }
  out << "apply " << m.functions[m.apply_fn].name << "\n";

  for (const auto& f : m.functions) {
    out << "fn " << f.name << "(" << f.param_count << ")\n";
    std::vector<bool> is_target(f.body.size(), false);
    for (const auto& ins : f.body) {
      if (ins.op == Op::Br || ins.op == Op::BrIf) is_target[ins.imm] = true;
    }
    for (size_t pc = 0; pc < f.body.size(); ++pc) {
      if (is_target[pc]) out << "L" << pc << ":\n";
      const Instr& ins = f.body[pc];
      out << "  " << op_name(ins.op);
      switch (ins.op) {
        case Op::Call: out << " " << m.functions[ins.imm].name; break;
        case Op::Br:
        case Op::BrIf: out << " L" << ins.imm; break;
        case Op::Const:
        case Op::LocalGet:
        case Op::LocalSet:
        case Op::ParamLoad: out << " " << ins.imm; break;
        case Op::HostCall: out << " " << host_fn_name(static_cast<HostFn>(ins.imm)); break;
        case Op::AssertNz: out << " \"" << escape_string(m.lit_strings[ins.imm]) << "\""; break;
        default: break;
      }
      out << "\n";
    }
  }
  return out.str();
}

}  // namespace greyant
