#include "greyant/trace.hpp"

#include <fstream>
#include <sstream>

namespace greyant {

namespace {

std::string csv(const std::vector<uint64_t>& vals) {
  std::string out;
  for (size_t i = 0; i < vals.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(vals[i]);
  }
  return out;
}

std::vector<uint64_t> parse_csv(const std::string& s) {
  std::vector<uint64_t> out;
  std::istringstream in(s);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    if (!tok.empty()) out.push_back(std::stoull(tok));
  }
  return out;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == '|') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

Op parse_op(const std::string& s) {
  for (int i = 0; i <= static_cast<int>(Op::AssertNz); ++i) {
    if (s == op_name(static_cast<Op>(i))) return static_cast<Op>(i);
  }
  throw ChainError("unknown opcode in trace: " + s);
}

}  // namespace

std::string trace_line(const TraceEvent& ev) {
  std::ostringstream out;
  if (const auto* ie = std::get_if<InstrEvent>(&ev)) {
    out << "I|" << op_name(ie->op) << "|" << csv(ie->operands) << "|";
    if (ie->result) out << *ie->result;
    out << "|" << ie->src_pc << "|" << ie->dst_pc;
  } else if (const auto* he = std::get_if<HostCallEvent>(&ev)) {
    out << "H|" << host_fn_name(he->fn) << "|" << csv(he->args) << "|" << he->payer.to_string();
  } else if (const auto* te = std::get_if<TransferEvent>(&ev)) {
    out << "T|" << te->from.to_string() << "|" << te->to.to_string() << "|" << te->amount << "|"
        << to_hex(te->memo);
  } else if (const auto* ae = std::get_if<ApplyEvent>(&ev)) {
    out << "A|" << (ae->enter ? "enter" : "exit") << "|" << ae->receiver.to_string() << "|"
        << ae->code.to_string() << "|" << ae->action.to_string();
  }
  return out.str();
}

TraceEvent parse_trace_line(const std::string& line) {
  auto f = split_fields(line);
  if (f.empty()) throw ChainError("empty trace line");
  if (f[0] == "I") {
    if (f.size() != 6) throw ChainError("bad I record: " + line);
    InstrEvent ie;
    ie.op = parse_op(f[1]);
    ie.operands = parse_csv(f[2]);
    if (!f[3].empty()) ie.result = std::stoull(f[3]);
    ie.src_pc = std::stoull(f[4]);
    ie.dst_pc = std::stoull(f[5]);
    return ie;
  }
  if (f[0] == "H") {
    if (f.size() != 4) throw ChainError("bad H record: " + line);
    HostCallEvent he;
    auto fn = parse_host_fn(f[1]);
    if (!fn) throw ChainError("unknown host fn in trace: " + f[1]);
    he.fn = *fn;
    he.args = parse_csv(f[2]);
    he.payer = f[3].empty() ? Name() : name_of(f[3]);
    return he;
  }
  if (f[0] == "T") {
    if (f.size() != 5) throw ChainError("bad T record: " + line);
    TransferEvent te;
    te.from = f[1].empty() ? Name() : name_of(f[1]);
    te.to = f[2].empty() ? Name() : name_of(f[2]);
    te.amount = std::stoll(f[3]);
    te.memo = from_hex(f[4]);
    return te;
  }
  if (f[0] == "A") {
    if (f.size() != 5) throw ChainError("bad A record: " + line);
    ApplyEvent ae;
    ae.enter = f[1] == "enter";
    ae.receiver = f[2].empty() ? Name() : name_of(f[2]);
    ae.code = f[3].empty() ? Name() : name_of(f[3]);
    ae.action = f[4].empty() ? Name() : name_of(f[4]);
    return ae;
  }
  throw ChainError("unknown trace record type: " + f[0]);
}

std::string render_trace(const TraceLog& log) {
  std::string out;
  for (const auto& ev : log.events) {
    out += trace_line(ev);
    out += "\n";
  }
  return out;
}

TraceLog parse_trace(const std::string& text) {
  TraceLog log;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) log.events.push_back(parse_trace_line(line));
  }
  return log;
}

void write_trace_file(const TraceLog& log, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ChainError("cannot open trace file for writing: " + path);
  out << render_trace(log);
}

}  // namespace greyant
