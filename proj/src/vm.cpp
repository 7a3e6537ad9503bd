#include "greyant/vm.hpp"

#include <array>

namespace greyant {

namespace {
constexpr size_t kMaxSteps = 1 << 20;
constexpr size_t kMaxDepth = 64;

struct Frame {
  uint32_t fn_index = 0;
  size_t pc = 0;
  size_t stack_base = 0;
  std::array<uint64_t, kLocalsPerFrame> locals{};
};
}  // namespace

void Vm::reset_iteration_coverage() {
  for (uint32_t idx : touched_) {
    bitmap_.cells[idx] = 0;
    touched_flag_[idx] = 0;
  }
  touched_.clear();
  edge_.prev_location = 0;
}

void Vm::record_cf(uint64_t pc) {
  uint16_t cur = static_cast<uint16_t>(mix_pc(pc) & 0xFFFF);
  uint32_t idx = static_cast<uint32_t>(cur ^ edge_.prev_location);
  uint8_t& cell = bitmap_.cells[idx];
  if (cell != 0xFF) ++cell;
  if (!touched_flag_[idx]) {
    touched_flag_[idx] = 1;
    touched_.push_back(idx);
  }
  uint8_t& agg = union_.cells[idx];
  if (agg == 0) ++union_edges_;
  if (agg != 0xFF) ++agg;
  edge_.prev_location = cur >> 1;
}

void Vm::begin_transaction(const Transaction& tx, ChainState& chain) {
  trace_.clear();
  edge_.prev_location = 0;
  chain_ = &chain;
  tx_signer_ = tx.signer;
  notifications_.clear();
  inlines_.clear();
  staged_deferred_.clear();
  ctx_ = ActionContext{};
}

void Vm::end_transaction() {
  chain_ = nullptr;
  ctx_ = ActionContext{};
}

void Vm::trace_transfer(Name from, Name to, int64_t amount, Bytes memo) {
  TransferEvent ev;
  ev.from = from;
  ev.to = to;
  ev.amount = amount;
  ev.memo = std::move(memo);
  trace_.events.push_back(std::move(ev));
}

std::vector<Transaction> Vm::take_deferred_staged() { return std::move(staged_deferred_); }

void Vm::dispatch_action(const Action& action) {
  Account* acct = chain_->find_account(action.receiver);
  if (!acct || !acct->contract) return;  // nothing deployed, nothing to run
  const ContractModule& m = *acct->contract;

  ctx_ = ActionContext{};
  ctx_.action = &action;
  ctx_.module = &m;
  ctx_.notified.push_back(action.receiver.normalized());
  if (const AbiEntry* entry = m.abi.find(action.action_name)) {
    try {
      ctx_.params = bytes_to_params(action.data, entry->params);
    } catch (const CodecError&) {
      ctx_.params.clear();  // undecodable data reads as zero parameters
    }
    for (auto it = ctx_.params.rbegin(); it != ctx_.params.rend(); ++it) {
      if (is_variable(it->type)) {
        ctx_.memo = it->blob;
        break;
      }
    }
  }

  trace_.events.push_back(ApplyEvent{true, action.receiver, action.code, action.action_name});
  // the VM's entry into apply() counts as a call edge from a synthetic site
  record_cf(m.dispatch_pc());
  InstrEvent call_ev;
  call_ev.op = Op::Call;
  call_ev.operands = {m.apply_fn};
  call_ev.src_pc = m.dispatch_pc();
  call_ev.dst_pc = m.entry_pc(m.apply_fn);
  trace_.events.push_back(std::move(call_ev));

  std::array<uint64_t, 3> args = {action.receiver.v, action.code.v, action.action_name.v};
  steps_ = 0;
  run(m, m.apply_fn, args);
  trace_.events.push_back(ApplyEvent{false, action.receiver, action.code, action.action_name});
  ctx_.action = nullptr;
}

uint64_t Vm::execute(const ContractModule& m, uint32_t fn_index, std::span<const uint64_t> args,
                     ChainState& chain) {
  if (fn_index >= m.functions.size()) throw VmFault("function index out of range");
  chain_ = &chain;
  ctx_ = ActionContext{};
  steps_ = 0;
  return run(m, fn_index, args);
}

uint64_t Vm::run(const ContractModule& m, uint32_t fn_index, std::span<const uint64_t> args) {
  std::vector<uint64_t> stack;
  std::vector<Frame> frames;

  {
    Frame f0;
    f0.fn_index = fn_index;
    const Function& fn = m.functions[fn_index];
    for (size_t i = 0; i < fn.param_count && i < args.size(); ++i) f0.locals[i] = args[i];
    frames.push_back(f0);
  }

  auto pop = [&](const Frame& fr) -> uint64_t {
    if (stack.size() <= fr.stack_base) throw VmFault("stack underflow");
    uint64_t v = stack.back();
    stack.pop_back();
    return v;
  };
  auto numeric_event = [&](Op op, std::vector<uint64_t> operands, uint64_t result, uint64_t abs) {
    InstrEvent ev;
    ev.op = op;
    ev.operands = std::move(operands);
    ev.result = result;
    ev.src_pc = abs;
    ev.dst_pc = abs + 1;
    trace_.events.push_back(std::move(ev));
  };

  uint64_t result = 0;
  while (!frames.empty()) {
    Frame& fr = frames.back();
    const Function& fn = m.functions[fr.fn_index];

    if (fr.pc >= fn.body.size()) {
      // fell off the end: implicit return, not an instrumentation point
      result = stack.size() > fr.stack_base ? stack.back() : 0;
      stack.resize(fr.stack_base);
      frames.pop_back();
      if (!frames.empty()) stack.push_back(result);
      continue;
    }
    if (++steps_ > kMaxSteps) throw VmFault("step limit exceeded");

    const Instr ins = fn.body[fr.pc];
    const uint64_t abs = m.pc_of(fr.fn_index, fr.pc);

    switch (ins.op) {
      case Op::Const:
        stack.push_back(static_cast<uint64_t>(ins.imm));
        numeric_event(ins.op, {}, static_cast<uint64_t>(ins.imm), abs);
        ++fr.pc;
        break;
      case Op::Add:
      case Op::Sub:
      case Op::Mul:
      case Op::Mod:
      case Op::Eq:
      case Op::Ne:
      case Op::LtS:
      case Op::GtS: {
        uint64_t b = pop(fr);
        uint64_t a = pop(fr);
        int64_t sa = static_cast<int64_t>(a);
        int64_t sb = static_cast<int64_t>(b);
        uint64_t r = 0;
        switch (ins.op) {
          case Op::Add: r = a + b; break;
          case Op::Sub: r = a - b; break;
          case Op::Mul: r = a * b; break;
          case Op::Mod:
            if (sb == 0) throw VmFault("mod by zero");
            r = static_cast<uint64_t>(sa % sb);
            break;
          case Op::Eq: r = a == b; break;
          case Op::Ne: r = a != b; break;
          case Op::LtS: r = sa < sb; break;
          case Op::GtS: r = sa > sb; break;
          default: break;
        }
        stack.push_back(r);
        numeric_event(ins.op, {a, b}, r, abs);
        ++fr.pc;
        break;
      }
      case Op::Drop:
        pop(fr);
        ++fr.pc;
        break;
      case Op::Dup: {
        uint64_t v = pop(fr);
        stack.push_back(v);
        stack.push_back(v);
        ++fr.pc;
        break;
      }
      case Op::LocalGet:
        stack.push_back(fr.locals[ins.imm]);
        ++fr.pc;
        break;
      case Op::LocalSet:
        fr.locals[ins.imm] = pop(fr);
        ++fr.pc;
        break;
      case Op::ParamLoad: {
        uint64_t v = 0;
        size_t idx = static_cast<size_t>(ins.imm);
        if (ins.imm >= 0 && idx < ctx_.params.size()) {
          const AbiValue& p = ctx_.params[idx];
          if (p.type == AbiType::PublicKey) {
            for (size_t i = 0; i < 8 && i < p.blob.size(); ++i) v = (v << 8) | p.blob[i];
          } else if (is_variable(p.type)) {
            v = p.blob.size();
          } else {
            v = p.num;
          }
        }
        stack.push_back(v);
        ++fr.pc;
        break;
      }
      case Op::MemoByte: {
        uint64_t off = pop(fr);
        stack.push_back(off < ctx_.memo.size() ? ctx_.memo[off] : 0);
        ++fr.pc;
        break;
      }
      case Op::MemoLen:
        stack.push_back(ctx_.memo.size());
        ++fr.pc;
        break;
      case Op::AssertNz: {
        uint64_t v = pop(fr);
        if (v == 0) {
          const Bytes& msg = m.lit_strings[ins.imm];
          throw VmFault(std::string(msg.begin(), msg.end()));
        }
        ++fr.pc;
        break;
      }
      case Op::HostCall:
        host_call(static_cast<HostFn>(ins.imm), m, stack, fr.stack_base);
        ++fr.pc;
        break;
      case Op::Call:
      case Op::CallIndirect: {
        record_cf(abs);
        uint32_t callee;
        InstrEvent ev;
        ev.op = ins.op;
        if (ins.op == Op::Call) {
          callee = static_cast<uint32_t>(ins.imm);
          ev.operands = {callee};
        } else {
          uint64_t slot = pop(fr);
          if (slot >= m.table.size()) {
            throw VmFault("bad table slot " + std::to_string(slot));
          }
          callee = m.table[slot];
          ev.operands = {slot};
        }
        ev.src_pc = abs;
        ev.dst_pc = m.entry_pc(callee);
        trace_.events.push_back(std::move(ev));

        if (frames.size() >= kMaxDepth) throw VmFault("call depth exceeded");
        Frame nf;
        nf.fn_index = callee;
        const Function& cf = m.functions[callee];
        for (size_t i = cf.param_count; i-- > 0;) nf.locals[i] = pop(fr);
        nf.stack_base = stack.size();
        ++fr.pc;  // return address
        frames.push_back(nf);  // invalidates fr
        break;
      }
      case Op::Br: {
        record_cf(abs);
        InstrEvent ev;
        ev.op = Op::Br;
        ev.src_pc = abs;
        ev.dst_pc = m.pc_of(fr.fn_index, static_cast<size_t>(ins.imm));
        trace_.events.push_back(std::move(ev));
        fr.pc = static_cast<size_t>(ins.imm);
        break;
      }
      case Op::BrIf: {
        record_cf(abs);
        uint64_t cond = pop(fr);
        size_t next = cond != 0 ? static_cast<size_t>(ins.imm) : fr.pc + 1;
        InstrEvent ev;
        ev.op = Op::BrIf;
        ev.operands = {cond};
        ev.src_pc = abs;
        ev.dst_pc = m.pc_of(fr.fn_index, next);
        trace_.events.push_back(std::move(ev));
        fr.pc = next;
        break;
      }
      case Op::Return: {
        record_cf(abs);
        result = stack.size() > fr.stack_base ? stack.back() : 0;
        InstrEvent ev;
        ev.op = Op::Return;
        ev.result = result;
        ev.src_pc = abs;
        ev.dst_pc = frames.size() >= 2
                        ? m.pc_of(frames[frames.size() - 2].fn_index, frames[frames.size() - 2].pc)
                        : abs;
        trace_.events.push_back(std::move(ev));
        stack.resize(fr.stack_base);
        frames.pop_back();
        if (!frames.empty()) stack.push_back(result);
        break;
      }
    }
  }
  return result;
}

Bytes Vm::encode_outgoing_data(Name target, Name action_name, std::vector<uint64_t>& stack,
                               size_t base) {
  const AbiEntry* entry = nullptr;
  if (const Account* acct = chain_->find_account(target)) {
    if (acct->contract) entry = acct->contract->abi.find(action_name);
  }
  if (!entry) return {};

  auto pop = [&]() -> uint64_t {
    if (stack.size() <= base) throw VmFault("stack underflow");
    uint64_t v = stack.back();
    stack.pop_back();
    return v;
  };

  ParamVector params(entry->params.size());
  // fixed parameters come off the stack in reverse declaration order;
  // variable-length parameters carry the current action's memo through
  for (size_t i = entry->params.size(); i-- > 0;) {
    AbiType t = entry->params[i];
    params[i].type = t;
    if (is_variable(t)) {
      params[i].blob = ctx_.memo;
    } else if (t == AbiType::PublicKey) {
      uint64_t v = pop();
      params[i].blob.assign(33, 0);
      for (size_t b = 0; b < 8; ++b) {
        params[i].blob[b] = static_cast<uint8_t>(v >> (8 * (7 - b)));
      }
    } else {
      params[i].num = pop();
    }
  }
  return params_to_bytes(params);
}

void Vm::host_call(HostFn fn, const ContractModule& m, std::vector<uint64_t>& stack,
                   size_t base) {
  auto pop = [&]() -> uint64_t {
    if (stack.size() <= base) throw VmFault("stack underflow");
    uint64_t v = stack.back();
    stack.pop_back();
    return v;
  };
  Name self = ctx_.action ? ctx_.action->receiver.normalized() : Name();

  HostCallEvent ev;
  ev.fn = fn;
  ev.payer = tx_signer_;
  uint64_t result = 0;
  bool push_result = host_fn_pushes_result(fn);

  if (ctx_.action && chain_) chain_->charge(ctx_.action->payer);

  switch (fn) {
    case HostFn::TaposBlockNum: result = block_.tapos_num; break;
    case HostFn::TaposBlockPrefix: result = block_.tapos_prefix; break;
    case HostFn::BlockTimeStamp: result = block_.timestamp; break;
    case HostFn::Balance: {
      Name acct = Name::from_bits(pop());
      ev.args = {acct.v};
      result = static_cast<uint64_t>(chain_->balance_of(acct));
      break;
    }
    case HostFn::RequireAuth:
    case HostFn::HasAuth: {
      Name actor = Name::from_bits(pop());
      ev.args = {actor.v};
      bool ok = false;
      if (ctx_.action) {
        for (Name a : ctx_.action->auth) {
          if (a.normalized() == actor) ok = true;
        }
      }
      if (fn == HostFn::HasAuth) {
        result = ok ? 1 : 0;
      } else if (!ok) {
        trace_.events.push_back(std::move(ev));
        throw VmFault("missing authority of " + actor.to_string());
      }
      break;
    }
    case HostFn::RequireRecipient: {
      Name target = Name::from_bits(pop());
      ev.args = {target.v};
      if (ctx_.action) {
        bool already = false;
        for (Name n : ctx_.notified) already |= n == target;
        if (!already) {
          ctx_.notified.push_back(target);
          const Account* acct = chain_->find_account(target);
          if (acct && acct->contract) {
            Action fwd = *ctx_.action;  // code stays, receiver is replaced
            fwd.receiver = target;
            notifications_.push_back(std::move(fwd));
          }
        }
      }
      break;
    }
    case HostFn::SendInline:
    case HostFn::SendDeferred: {
      Name receiver = Name::from_bits(pop());
      Name action_name = Name::from_bits(pop());
      ev.args = {self.v, receiver.v, action_name.v};
      Action a;
      a.code = receiver;
      a.receiver = receiver;
      a.action_name = action_name;
      a.data = encode_outgoing_data(receiver, action_name, stack, base);
      a.auth = {self};
      if (fn == HostFn::SendInline) {
        inlines_.push_back(std::move(a));
      } else {
        // the emitting contract signs (and pays for) the new transaction
        Transaction tx;
        tx.signer = self;
        tx.actions.push_back(std::move(a));
        staged_deferred_.push_back(std::move(tx));
      }
      break;
    }
    case HostFn::DbStore:
    case HostFn::DbUpdate: {
      uint64_t value = pop();
      uint64_t key = pop();
      uint64_t table = pop();
      ev.args = {table, key, value};
      Bytes row(8);
      for (size_t i = 0; i < 8; ++i) row[i] = static_cast<uint8_t>(value >> (8 * i));
      ev.effect = row;
      if (ctx_.action) {
        Account& acct = chain_->require_account(ctx_.action->receiver);
        chain_->table_store(acct, table, key, std::move(row));
      }
      break;
    }
    case HostFn::DbDelete: {
      uint64_t key = pop();
      uint64_t table = pop();
      ev.args = {table, key};
      if (ctx_.action) {
        Account& acct = chain_->require_account(ctx_.action->receiver);
        chain_->table_delete(acct, table, key);
      }
      break;
    }
    case HostFn::Transfer: {
      int64_t amount = static_cast<int64_t>(pop());
      Name to = Name::from_bits(pop());
      Name from = Name::from_bits(pop());
      ev.args = {from.v, to.v, static_cast<uint64_t>(amount)};
      trace_.events.push_back(ev);

      if (amount <= 0) throw VmFault("transfer amount must be positive");
      bool authorized = false;
      if (ctx_.action) {
        for (Name a : ctx_.action->auth) authorized |= a.normalized() == from;
      }
      if (!authorized) throw VmFault("missing authority of " + from.to_string());
      Account& src = chain_->require_account(from);
      Account& dst = chain_->require_account(to);
      if (src.balance < amount) throw VmFault("insufficient balance");
      if (&src != &dst) {
        chain_->set_balance(src, src.balance - amount);
        chain_->set_balance(dst, dst.balance + amount);
      }
      trace_transfer(from, to, amount, ctx_.memo);

      // forward the transfer action as a receipt to sender and receiver
      if (ctx_.action) {
        for (Name target : {from, to}) {
          bool already = false;
          for (Name n : ctx_.notified) already |= n == target;
          if (already) continue;
          ctx_.notified.push_back(target);
          const Account* racct = chain_->find_account(target);
          if (racct && racct->contract) {
            Action fwd = *ctx_.action;
            fwd.receiver = target;
            notifications_.push_back(std::move(fwd));
          }
        }
      }
      return;  // event already recorded
    }
    case HostFn::Assert: {
      uint64_t msg_idx = pop();
      uint64_t cond = pop();
      ev.args = {cond, msg_idx};
      trace_.events.push_back(ev);
      if (cond == 0) {
        std::string msg = "assertion failed";
        if (msg_idx < m.lit_strings.size()) {
          const Bytes& s = m.lit_strings[msg_idx];
          msg = std::string(s.begin(), s.end());
        }
        throw VmFault(msg);
      }
      return;
    }
  }

  trace_.events.push_back(std::move(ev));
  if (push_result) stack.push_back(result);
}

}  // namespace greyant
