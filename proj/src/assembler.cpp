#include "greyant/assembler.hpp"

#include <cctype>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace greyant {

namespace {

struct PendingBranch {
  size_t fn_index;
  size_t offset;
  std::string label;
  int line;
};

struct PendingCall {
  size_t fn_index;
  size_t offset;
  std::string callee;
  int line;
};

std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

// Strips a trailing comment. '#' inside a quoted string does not count.
std::string strip_comment(const std::string& line) {
  bool in_str = false;
  for (size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (c == '"' && (i == 0 || line[i - 1] != '\\')) in_str = !in_str;
    if (c == '#' && !in_str) return line.substr(0, i);
  }
  return line;
}

Bytes parse_quoted(const std::string& line, int lineno) {
  auto open = line.find('"');
  if (open == std::string::npos) throw AsmError(lineno, "expected quoted string");
  Bytes out;
  for (size_t i = open + 1; i < line.size(); ++i) {
    char c = line[i];
    if (c == '"') return out;
    if (c == '\\' && i + 1 < line.size()) {
      char n = line[i + 1];
      if (n == 'x' && i + 3 < line.size()) {
        auto hex = [&](char h) -> int {
          if (h >= '0' && h <= '9') return h - '0';
          if (h >= 'a' && h <= 'f') return h - 'a' + 10;
          if (h >= 'A' && h <= 'F') return h - 'A' + 10;
          return -1;
        };
        int hi = hex(line[i + 2]);
        int lo = hex(line[i + 3]);
        if (hi < 0 || lo < 0) throw AsmError(lineno, "bad \\x escape");
        out.push_back(static_cast<uint8_t>(hi << 4 | lo));
        i += 3;
        continue;
      }
      out.push_back(static_cast<uint8_t>(n));
      ++i;
      continue;
    }
    out.push_back(static_cast<uint8_t>(c));
  }
  throw AsmError(lineno, "unterminated string");
}

int64_t parse_int(const std::string& tok, int lineno) {
  try {
    size_t pos = 0;
    // stoll rejects the full u64 range; accept either signed or unsigned text
    if (!tok.empty() && tok[0] != '-') {
      unsigned long long v = std::stoull(tok, &pos, 0);
      if (pos != tok.size()) throw AsmError(lineno, "bad integer '" + tok + "'");
      return static_cast<int64_t>(v);
    }
    long long v = std::stoll(tok, &pos, 0);
    if (pos != tok.size()) throw AsmError(lineno, "bad integer '" + tok + "'");
    return v;
  } catch (const AsmError&) {
    throw;
  } catch (const std::exception&) {
    throw AsmError(lineno, "bad integer '" + tok + "'");
  }
}

}  // namespace

ContractModule assemble(std::string_view text) {
  ContractModule m;
  bool have_contract = false;
  std::string apply_name;
  int apply_line = 0;
  std::vector<std::string> table_names;
  int table_line = 0;

  Function* cur = nullptr;
  size_t cur_index = 0;
  // label -> offset, per function
  std::map<std::string, size_t> labels;
  std::vector<PendingBranch> branches;
  std::vector<PendingCall> calls;

  auto finish_function = [&](int lineno) {
    if (!cur) return;
    for (const auto& br : branches) {
      if (br.fn_index != cur_index) continue;
      auto it = labels.find(br.label);
      if (it == labels.end()) throw AsmError(br.line, "unresolved label '" + br.label + "'");
      m.functions[br.fn_index].body[br.offset].imm = static_cast<int64_t>(it->second);
    }
    // a label may point one past the last instruction only if something jumps
    // there; validation flags that as an invalid branch target later
    (void)lineno;
    labels.clear();
    cur = nullptr;
  };

  std::istringstream in{std::string(text)};
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = strip_comment(raw);
    auto toks = tokenize(line);
    if (toks.empty()) continue;
    const std::string& head = toks[0];

    if (head == "contract") {
      if (toks.size() != 2) throw AsmError(lineno, "usage: contract <name>");
      auto n = Name::parse(toks[1]);
      if (!n) throw AsmError(lineno, "malformed contract name '" + toks[1] + "'");
      m.name = *n;
      have_contract = true;
      continue;
    }
    if (head == "fn") {
      finish_function(lineno);
      // fn <name>(<argc>)
      std::string rest;
      for (size_t i = 1; i < toks.size(); ++i) rest += toks[i];
      auto open = rest.find('(');
      auto close = rest.find(')');
      if (open == std::string::npos || close == std::string::npos || close < open) {
        throw AsmError(lineno, "usage: fn <name>(<argc>)");
      }
      Function f;
      f.name = rest.substr(0, open);
      if (f.name.empty()) throw AsmError(lineno, "missing function name");
      if (m.find_function(f.name)) throw AsmError(lineno, "duplicate function '" + f.name + "'");
      f.param_count = static_cast<uint32_t>(parse_int(rest.substr(open + 1, close - open - 1), lineno));
      m.functions.push_back(std::move(f));
      cur = &m.functions.back();
      cur_index = m.functions.size() - 1;
      continue;
    }
    if (head == "table") {
      table_names.assign(toks.begin() + 1, toks.end());
      table_line = lineno;
      continue;
    }
    if (head == "abi") {
      // abi <fn> (<type>,...)
      if (toks.size() < 2) throw AsmError(lineno, "usage: abi <fn> (<types>)");
      std::string rest;
      for (size_t i = 2; i < toks.size(); ++i) rest += toks[i];
      auto open = rest.find('(');
      auto close = rest.rfind(')');
      if (open == std::string::npos || close == std::string::npos || close < open) {
        throw AsmError(lineno, "usage: abi <fn> (<types>)");
      }
      AbiEntry entry;
      entry.fn_name = toks[1];
      std::string list = rest.substr(open + 1, close - open - 1);
      std::istringstream ts(list);
      std::string tok;
      while (std::getline(ts, tok, ',')) {
        if (tok.empty()) continue;
        auto t = parse_abi_type(tok);
        if (!t) throw AsmError(lineno, "unknown abi type '" + tok + "'");
        entry.params.push_back(*t);
      }
      m.abi.entries.push_back(std::move(entry));
      continue;
    }
    if (head == "apply") {
      if (toks.size() != 2) throw AsmError(lineno, "usage: apply <fn>");
      apply_name = toks[1];
      apply_line = lineno;
      continue;
    }
    if (head == "lit") {
      if (toks.size() < 2) throw AsmError(lineno, "usage: lit <i64> | lit \"<str>\"");
      if (line.find('"') != std::string::npos) {
        m.add_string(parse_quoted(line, lineno));
      } else {
        m.add_constant(parse_int(toks[1], lineno));
      }
      continue;
    }

    // everything else is a function-body line
    if (!cur) throw AsmError(lineno, "instruction outside a function: '" + head + "'");

    if (head.size() > 1 && head.back() == ':') {
      std::string label = head.substr(0, head.size() - 1);
      if (labels.count(label)) throw AsmError(lineno, "duplicate label '" + label + "'");
      labels[label] = cur->body.size();
      continue;
    }

    auto need = [&](size_t n, const char* usage) {
      if (toks.size() != n) throw AsmError(lineno, std::string("usage: ") + usage);
    };

    if (head == "call") {
      need(2, "call <fn>");
      calls.push_back({cur_index, cur->body.size(), toks[1], lineno});
      cur->body.push_back({Op::Call, 0});
    } else if (head == "call_indirect") {
      cur->body.push_back({Op::CallIndirect, 0});
    } else if (head == "br" || head == "br_if") {
      need(2, "br[_if] <label>");
      branches.push_back({cur_index, cur->body.size(), toks[1], lineno});
      cur->body.push_back({head == "br" ? Op::Br : Op::BrIf, 0});
    } else if (head == "return") {
      cur->body.push_back({Op::Return, 0});
    } else if (head == "const") {
      need(2, "const <i64> | const @<name>");
      int64_t v;
      if (toks[1][0] == '@') {
        auto n = Name::parse(toks[1].substr(1));
        if (!n) throw AsmError(lineno, "malformed name literal '" + toks[1] + "'");
        v = static_cast<int64_t>(n->v);
      } else {
        v = parse_int(toks[1], lineno);
      }
      m.add_constant(v);
      cur->body.push_back({Op::Const, v});
    } else if (head == "add") {
      cur->body.push_back({Op::Add, 0});
    } else if (head == "sub") {
      cur->body.push_back({Op::Sub, 0});
    } else if (head == "mul") {
      cur->body.push_back({Op::Mul, 0});
    } else if (head == "mod") {
      cur->body.push_back({Op::Mod, 0});
    } else if (head == "eq") {
      cur->body.push_back({Op::Eq, 0});
    } else if (head == "ne") {
      cur->body.push_back({Op::Ne, 0});
    } else if (head == "lt_s") {
      cur->body.push_back({Op::LtS, 0});
    } else if (head == "gt_s") {
      cur->body.push_back({Op::GtS, 0});
    } else if (head == "drop") {
      cur->body.push_back({Op::Drop, 0});
    } else if (head == "dup") {
      cur->body.push_back({Op::Dup, 0});
    } else if (head == "local_get" || head == "local_set") {
      need(2, "local_get|local_set <idx>");
      cur->body.push_back({head == "local_get" ? Op::LocalGet : Op::LocalSet,
                           parse_int(toks[1], lineno)});
    } else if (head == "param") {
      need(2, "param <idx>");
      cur->body.push_back({Op::ParamLoad, parse_int(toks[1], lineno)});
    } else if (head == "memo_byte") {
      cur->body.push_back({Op::MemoByte, 0});
    } else if (head == "memo_len") {
      cur->body.push_back({Op::MemoLen, 0});
    } else if (head == "host") {
      need(2, "host <fn>");
      auto fn = parse_host_fn(toks[1]);
      if (!fn) throw AsmError(lineno, "unresolved host function '" + toks[1] + "'");
      cur->body.push_back({Op::HostCall, static_cast<int64_t>(*fn)});
    } else if (head == "assertnz") {
      int idx = m.add_string(parse_quoted(line, lineno));
      cur->body.push_back({Op::AssertNz, idx});
    } else {
      throw AsmError(lineno, "unknown instruction '" + head + "'");
    }
  }
  finish_function(lineno);

  if (!have_contract) throw AsmError(1, "missing 'contract <name>' directive");

  for (const auto& c : calls) {
    auto idx = m.find_function(c.callee);
    if (!idx) throw AsmError(c.line, "unresolved function '" + c.callee + "'");
    m.functions[c.fn_index].body[c.offset].imm = static_cast<int64_t>(*idx);
  }
  for (const auto& t : table_names) {
    auto idx = m.find_function(t);
    if (!idx) throw AsmError(table_line, "unresolved function '" + t + "' in table");
    m.table.push_back(*idx);
  }
  if (apply_name.empty()) {
    throw ValidationError("missing apply: no 'apply <fn>' directive");
  }
  auto apply_idx = m.find_function(apply_name);
  if (!apply_idx) throw AsmError(apply_line, "unresolved function '" + apply_name + "' in apply");
  m.apply_fn = *apply_idx;

  m.finalize();
  validate(m);
  return m;
}

}  // namespace greyant
