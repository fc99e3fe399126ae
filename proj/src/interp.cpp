#include "crasp/interp.hpp"

#include <algorithm>
#include <sstream>

namespace crasp::interp {

using namespace dsl;

std::int64_t Trace::value(std::string_view op, std::size_t pos) const {
  for (std::size_t k = 0; k < op_names.size(); ++k)
    if (op_names[k] == op) return values[k].at(pos - 1);
  throw UnknownReference("trace lookup", std::string(op));
}

std::string Trace::to_text() const {
  std::ostringstream out;
  std::size_t w = 0;
  for (const auto& n : op_names) w = std::max(w, n.size());
  out << std::string(w, ' ') << " |";
  for (const auto& s : word) out << ' ' << s;
  out << '\n';
  for (std::size_t k = 0; k < op_names.size(); ++k) {
    out << op_names[k] << std::string(w - op_names[k].size(), ' ') << " |";
    for (std::int64_t v : values[k]) out << ' ' << v;
    out << '\n';
  }
  return out.str();
}

namespace {

// Index-based instruction form so that push() never does name lookups.
struct Instr {
  enum Kind {
    KInitial,
    KNot,
    KAnd,
    KTrue,
    KPos,
    KCmp,
    KCountTop,
    KCountLocal,
    KCond,
    KAdd,
    KSub,
    KOne,
    KLit
  } kind = KTrue;
  int a = -1, b = -1, c = -1;  // operand op indices
  CmpOp cmp = CmpOp::Leq;
  std::int64_t lit = 0;
  std::int64_t mod = 1, res = 0;
  bool strict = false;
  bool pred_is_symbol = false;
  int pred = -1;  // symbol index or op index
  std::vector<std::int64_t> offsets;
};

}  // namespace

struct Evaluator::Impl {
  std::vector<Instr> code;
};

Evaluator::Evaluator(const Program& p) : p_(&p), impl_(new Impl) {
  const std::size_t n = p.ops.size();
  cur_.assign(n, 0);
  acc_.assign(n, 0);
  retain_.assign(n, 0);

  std::unordered_map<std::string, int> index;
  index.reserve(n);
  auto op_idx = [&](const std::string& name) { return index.at(name); };
  auto sym_idx = [&](const std::string& s) { return p.alphabet.index_of(s); };

  impl_->code.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const Operation& op = p.ops[k];
    Instr ins;
    struct V {
      Instr& ins;
      decltype(op_idx)& oi;
      decltype(sym_idx)& si;
      void operator()(const Initial& x) const {
        ins.kind = Instr::KInitial;
        ins.pred = si(x.symbol);
      }
      void operator()(const Not& x) const {
        ins.kind = Instr::KNot;
        ins.a = oi(x.ref);
      }
      void operator()(const And& x) const {
        ins.kind = Instr::KAnd;
        ins.a = oi(x.lhs);
        ins.b = oi(x.rhs);
      }
      void operator()(const TrueConst&) const { ins.kind = Instr::KTrue; }
      void operator()(const Positional& x) const {
        ins.kind = Instr::KPos;
        ins.mod = x.rel.modulus;
        ins.res = x.rel.residue;
      }
      void operator()(const Compare& x) const {
        ins.kind = Instr::KCmp;
        ins.cmp = x.op;
        ins.a = oi(x.lhs);
        ins.b = oi(x.rhs);
      }
      void operator()(const Count& x) const {
        ins.pred_is_symbol = x.pred.is_symbol;
        ins.pred = x.pred.is_symbol ? si(x.pred.name) : oi(x.pred.name);
        if (!x.local) {
          ins.kind = Instr::KCountTop;
          ins.strict = x.strict;
        } else {
          ins.kind = Instr::KCountLocal;
          ins.offsets = x.local->offsets;
        }
      }
      void operator()(const Conditional& x) const {
        ins.kind = Instr::KCond;
        ins.a = oi(x.cond);
        ins.b = oi(x.then_ref);
        ins.c = oi(x.else_ref);
      }
      void operator()(const Add& x) const {
        ins.kind = Instr::KAdd;
        ins.a = oi(x.lhs);
        ins.b = oi(x.rhs);
      }
      void operator()(const Sub& x) const {
        ins.kind = Instr::KSub;
        ins.a = oi(x.lhs);
        ins.b = oi(x.rhs);
      }
      void operator()(const OneConst&) const { ins.kind = Instr::KOne; }
      void operator()(const LiteralConst& x) const {
        ins.kind = Instr::KLit;
        ins.lit = x.value;
      }
    };
    std::visit(V{ins, op_idx, sym_idx}, op.body);
    impl_->code.push_back(std::move(ins));
    index[op.name] = static_cast<int>(k);
  }

  // retention depths for local counts
  for (const Instr& ins : impl_->code) {
    if (ins.kind != Instr::KCountLocal) continue;
    std::int64_t depth = 0;
    for (std::int64_t c : ins.offsets) depth = std::max(depth, -c);
    if (depth == 0) continue;
    if (ins.pred_is_symbol)
      sym_retain_ = std::max(sym_retain_, depth);
    else
      retain_[static_cast<std::size_t>(ins.pred)] =
          std::max(retain_[static_cast<std::size_t>(ins.pred)], depth);
  }
  hist_.resize(n);
  for (std::size_t k = 0; k < n; ++k) hist_[k].assign(static_cast<std::size_t>(retain_[k]), 0);
  sym_hist_.assign(static_cast<std::size_t>(sym_retain_), -1);

  for (const auto& [sym, target] : p.predict) predict_ops_.push_back(p.index_of(target));
}

Evaluator::~Evaluator() = default;
Evaluator::Evaluator(Evaluator&&) noexcept = default;

void Evaluator::push(const std::string& symbol) {
  int s = p_->alphabet.index_of(symbol);
  if (s < 0) throw SymbolNotInAlphabet(static_cast<std::size_t>(t_ + 1), symbol);
  ++t_;
  cur_sym_ = s;

  const std::vector<Instr>& code = impl_->code;
  for (std::size_t k = 0; k < code.size(); ++k) {
    const Instr& ins = code[k];
    std::int64_t v = 0;
    switch (ins.kind) {
      case Instr::KInitial:
        v = cur_sym_ == ins.pred;
        break;
      case Instr::KNot:
        v = cur_[ins.a] ? 0 : 1;
        break;
      case Instr::KAnd:
        v = (cur_[ins.a] && cur_[ins.b]) ? 1 : 0;
        break;
      case Instr::KTrue:
        v = 1;
        break;
      case Instr::KPos:
        v = (t_ % ins.mod) == ins.res;
        break;
      case Instr::KCmp: {
        std::int64_t a = cur_[ins.a], b = cur_[ins.b];
        switch (ins.cmp) {
          case CmpOp::Leq: v = a <= b; break;
          case CmpOp::Geq: v = a >= b; break;
          case CmpOp::Eq: v = a == b; break;
          case CmpOp::Lt: v = a < b; break;
        }
        break;
      }
      case Instr::KCountTop: {
        std::int64_t cur = ins.pred_is_symbol ? (cur_sym_ == ins.pred)
                                              : (cur_[ins.pred] != 0 ? 1 : 0);
        acc_[k] += cur;
        v = ins.strict ? acc_[k] - cur : acc_[k];
        break;
      }
      case Instr::KCountLocal: {
        for (std::int64_t c : ins.offsets) {
          if (c > 0) continue;  // j = i + c > i: masked out
          if (c == 0) {
            v += ins.pred_is_symbol ? (cur_sym_ == ins.pred) : (cur_[ins.pred] != 0 ? 1 : 0);
          } else if (-c <= t_ - 1) {
            if (ins.pred_is_symbol) {
              int past = sym_hist_[static_cast<std::size_t>((t_ + c) % sym_retain_)];
              v += past == ins.pred;
            } else {
              const auto& ring = hist_[static_cast<std::size_t>(ins.pred)];
              std::int64_t r = retain_[static_cast<std::size_t>(ins.pred)];
              v += ring[static_cast<std::size_t>((t_ + c) % r)] != 0;
            }
          }
        }
        break;
      }
      case Instr::KCond:
        v = cur_[ins.a] ? cur_[ins.b] : cur_[ins.c];
        break;
      case Instr::KAdd:
        v = cur_[ins.a] + cur_[ins.b];
        break;
      case Instr::KSub:
        v = cur_[ins.a] - cur_[ins.b];
        break;
      case Instr::KOne:
        v = 1;
        break;
      case Instr::KLit:
        v = ins.lit;
        break;
    }
    cur_[k] = v;
  }

  for (std::size_t k = 0; k < cur_.size(); ++k)
    if (retain_[k] > 0) hist_[k][static_cast<std::size_t>(t_ % retain_[k])] = cur_[k];
  if (sym_retain_ > 0) sym_hist_[static_cast<std::size_t>(t_ % sym_retain_)] = cur_sym_;
}

std::int64_t Evaluator::value(std::string_view op_name) const {
  int idx = p_->index_of(op_name);
  if (idx < 0) throw UnknownReference("evaluator lookup", std::string(op_name));
  return cur_[static_cast<std::size_t>(idx)];
}

std::set<std::string> Evaluator::predicted() const {
  if (p_->predict.empty()) throw NoPredictDeclaration();
  std::set<std::string> out;
  for (std::size_t k = 0; k < p_->predict.size(); ++k)
    if (cur_[static_cast<std::size_t>(predict_ops_[k])] != 0) out.insert(p_->predict[k].first);
  return out;
}

Trace evaluate(const Program& p, const std::vector<std::string>& w) {
  Trace tr;
  tr.word = w;
  for (const auto& op : p.ops) tr.op_names.push_back(op.name);
  tr.values.assign(p.ops.size(), {});
  for (auto& v : tr.values) v.reserve(w.size());
  Evaluator ev(p);
  for (const auto& s : w) {
    ev.push(s);
    for (std::size_t k = 0; k < p.ops.size(); ++k) tr.values[k].push_back(ev.value(k));
  }
  return tr;
}

bool accepts(const Program& p, const std::vector<std::string>& w) {
  if (w.empty()) return p.empty_accepts;
  Evaluator ev(p);
  for (const auto& s : w) ev.push(s);
  return ev.value(p.accept) != 0;
}

std::set<std::string> predicted_set(const Program& p, const std::vector<std::string>& w,
                                    std::int64_t t) {
  if (p.predict.empty()) throw NoPredictDeclaration();
  if (t < 1 || static_cast<std::size_t>(t) > w.size())
    throw InvalidProgram("predicted_set: position out of range");
  Evaluator ev(p);
  for (std::int64_t k = 0; k < t; ++k) ev.push(w[static_cast<std::size_t>(k)]);
  return ev.predicted();
}

std::vector<std::string> generate(const Program& p, const std::vector<std::string>& prefix,
                                  std::int64_t max_steps, const std::string& stop) {
  if (p.predict.empty()) throw NoPredictDeclaration();
  if (prefix.empty()) throw InvalidProgram("generate: empty prefix");
  std::vector<std::string> seq = prefix;
  Evaluator ev(p);
  for (const auto& s : prefix) ev.push(s);
  for (std::int64_t step = 0; step < max_steps; ++step) {
    std::set<std::string> next = ev.predicted();
    if (next.empty()) break;
    const std::string& sym = *next.begin();  // alphabetically least
    seq.push_back(sym);
    ev.push(sym);
    if (!stop.empty() && sym == stop) break;
  }
  return seq;
}

std::vector<std::string> split_word(const Alphabet& a, const std::string& text) {
  bool single = true;
  for (const auto& s : a.symbols) single &= s.size() == 1;
  std::vector<std::string> out;
  if (single && text.find(' ') == std::string::npos) {
    for (char c : text) out.emplace_back(1, c);
    return out;
  }
  std::istringstream in(text);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

}  // namespace crasp::interp
