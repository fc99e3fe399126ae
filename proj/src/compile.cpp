#include "crasp/compile.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>

#include "crasp/dyadic.hpp"
#include "crasp/interp.hpp"

namespace crasp::comp {

using namespace dsl;
using rt::LimitTransformer;
using rt::Mat;

namespace {

double next_pow2(double x) {
  double m = 1.0;
  while (m < x) m *= 2.0;
  return m;
}

// Integer linear form of a Count value over Boolean/token channels plus a
// constant riding the is_SOS channel: value at row r equals
// (sum over channels of coef * prefix-count of that channel) / r.
// Materialized by a single uniform attention head, so the numerator stays an
// exact integer and comparisons of such forms have exact sign.
using LinearForm = std::map<int, std::int64_t>;  // channel -> coefficient

LinearForm combine(const LinearForm& a, const LinearForm& b, std::int64_t sign) {
  LinearForm out = a;
  for (const auto& [c, v] : b) {
    out[c] += sign * v;
    if (out[c] == 0) out.erase(c);
  }
  return out;
}

struct UnitSpec {
  std::vector<std::pair<int, double>> a;  // (channel, coef)
  double bias = 0.0;
  char act = 'R';
  std::vector<std::pair<int, double>> out;  // (channel, coef)
};

struct HeadSpec {
  std::vector<std::pair<int, std::pair<int, double>>> v;  // (out_chan, (in_chan, coef))
  std::vector<double> phi;                                // by-distance table
};

class Emitter {
 public:
  Emitter(const Program& lowered, rt::FixedPrecision fp) : p_(lowered), fp_(fp) {}

  Compiled run() {
    assign_channels();
    build_static();
    emit_bookkeeping();
    for (std::size_t k = 0; k < p_.ops.size(); ++k) emit_op(k);
    build_unembed();
    finish();
    return std::move(result_);
  }

 private:
  // ---- channel assignment -------------------------------------------------

  void assign_channels() {
    ChannelPlan& plan = result_.plan;
    const int S = static_cast<int>(p_.alphabet.symbols.size());
    plan.tok_base = 0;
    plan.is_sos = S;
    plan.const_true = S + 1;
    plan.one_count = S + 2;
    int next = S + 3;

    for (const auto& op : p_.ops) {
      if (const auto* pos = std::get_if<Positional>(&op.body)) {
        auto key = std::make_pair(pos->rel.modulus, pos->rel.residue);
        if (positional_chan(key) < 0) plan.positional.emplace_back(key, next++);
      }
      if (const auto* cnt = std::get_if<Count>(&op.body)) {
        if (cnt->local) {
          std::int64_t ell = -cnt->local->offsets[0];
          if (guard_chan(ell) < 0) plan.offset_guards.emplace_back(ell, next++);
          result_.report.tau = std::max(result_.report.tau, ell);
        }
      }
    }

    for (const auto& op : p_.ops) {
      OpChannel oc;
      oc.name = op.name;
      oc.sort = op.sort();
      oc.channel = next++;
      if (const auto* cnt = std::get_if<Count>(&op.body); cnt && cnt->local) {
        oc.scratch = {next, next + 1, next + 2};  // s, b1, b2
        next += 3;
      } else if (std::holds_alternative<Compare>(op.body)) {
        oc.scratch = {next++};  // fused difference channel (may stay unused)
      }
      plan.ops.push_back(std::move(oc));
    }
    plan.width = next;
    plan.accept_channel = plan.find(p_.accept)->channel;
    for (const auto& [sym, target] : p_.predict)
      plan.predict_channels.emplace_back(sym, plan.find(target)->channel);
  }

  int positional_chan(std::pair<std::int64_t, std::int64_t> key) const {
    for (const auto& [k, c] : result_.plan.positional)
      if (k == key) return c;
    return -1;
  }
  int guard_chan(std::int64_t ell) const {
    for (const auto& [k, c] : result_.plan.offset_guards)
      if (k == ell) return c;
    return -1;
  }

  int op_chan(const std::string& name) const { return result_.plan.find(name)->channel; }
  double op_bound(const std::string& name) const { return result_.plan.find(name)->bound; }

  int pred_chan(const CountPred& pred) const {
    if (pred.is_symbol)
      return result_.plan.tok_base + p_.alphabet.index_of(pred.name);
    return op_chan(pred.name);
  }

  // ---- static parts: embeddings, encodings --------------------------------

  void build_static() {
    LimitTransformer& net = result_.net;
    const ChannelPlan& plan = result_.plan;
    net.name = p_.name;
    net.symbols = p_.alphabet.symbols;
    net.width = plan.width;
    net.fp = fp_;
    net.param_bits = fp_.bits;
    net.empty_accepts = p_.empty_accepts;

    const std::size_t d = static_cast<std::size_t>(plan.width);
    net.embed.assign(net.symbols.size() + 1, std::vector<double>(d, 0.0));
    for (std::size_t s = 0; s < net.symbols.size(); ++s)
      net.embed[s][static_cast<std::size_t>(plan.tok_base) + s] = 1.0;
    net.embed[net.symbols.size()][static_cast<std::size_t>(plan.is_sos)] = 1.0;

    std::int64_t period = 1;
    for (const auto& [key, chan] : plan.positional)
      period = std::lcm(period, key.first);
    result_.report.period = period;
    net.enc.period = period;
    net.enc.table.assign(static_cast<std::size_t>(period), std::vector<double>(d, 0.0));
    // row r reads table[(r-1) mod period]; program position t = r-1,
    // so index k stores [k = residue (mod m)]
    for (const auto& [key, chan] : plan.positional)
      for (std::int64_t k = 0; k < period; ++k)
        if (k % key.first == key.second)
          net.enc.table[static_cast<std::size_t>(k)][static_cast<std::size_t>(chan)] = 1.0;
  }

  // ---- layer emission ------------------------------------------------------

  void emit_layer(const std::optional<HeadSpec>& head, const std::vector<UnitSpec>& units) {
    LimitTransformer& net = result_.net;
    const std::size_t d = static_cast<std::size_t>(result_.plan.width);
    rt::Layer layer;
    rt::Head h;
    h.K.assign(d, std::vector<double>(d, 0.0));
    h.Q.assign(d, std::vector<double>(d, 0.0));
    h.V.assign(d, std::vector<double>(d, 0.0));
    if (head) {
      for (const auto& [out, in] : head->v)
        h.V[static_cast<std::size_t>(out)][static_cast<std::size_t>(in.first)] += in.second;
      h.phi.by_distance = head->phi;
    }
    layer.heads.push_back(std::move(h));

    rt::Mlp& m = layer.mlp;
    const std::size_t dff = units.size();
    m.A.assign(dff, std::vector<double>(d, 0.0));
    m.b.assign(dff, 0.0);
    m.B.assign(d, std::vector<double>(dff, 0.0));
    m.acts.assign(dff, 'R');
    for (std::size_t u = 0; u < dff; ++u) {
      for (const auto& [c, coef] : units[u].a)
        m.A[u][static_cast<std::size_t>(c)] += coef;
      m.b[u] = units[u].bias;
      m.acts[u] = units[u].act;
      for (const auto& [c, coef] : units[u].out)
        m.B[static_cast<std::size_t>(c)][u] += coef;
    }
    net.layers.push_back(std::move(layer));
  }

  // head computing a linear form into `chan`: numerator = sum of coef * count
  HeadSpec form_head(int chan, const LinearForm& form) const {
    HeadSpec hs;
    for (const auto& [c, coef] : form)
      hs.v.emplace_back(chan, std::make_pair(c, static_cast<double>(coef)));
    return hs;
  }

  // two units forcing `chan` to zero at the SOS row (signed values up to m)
  void sos_zero_units(std::vector<UnitSpec>* units, int chan, double m) const {
    const int sos = result_.plan.is_sos;
    units->push_back(UnitSpec{{{chan, 1.0}, {sos, m}}, -m, 'R', {{chan, -1.0}}});
    units->push_back(UnitSpec{{{chan, -1.0}, {sos, m}}, -m, 'R', {{chan, 1.0}}});
  }

  void emit_bookkeeping() {
    const ChannelPlan& plan = result_.plan;
    // SOS row cleanup: zero the positional feature channels at row 1, keeping
    // the is_SOS indicator (the one_count construction needs it to survive)
    {
      std::vector<UnitSpec> units;
      for (const auto& [key, chan] : plan.positional) {
        units.push_back(UnitSpec{{{chan, 1.0}}, 0.0, 'R', {{chan, -1.0}}});
        units.push_back(UnitSpec{{{chan, 1.0}, {plan.is_sos, -1.0}}, 0.0, 'R', {{chan, 1.0}}});
      }
      emit_layer(std::nullopt, units);
      result_.report.notes.push_back(
          "sos layer zeroes positional channels only; is_SOS survives for one_count");
    }
    // constant-true channel: 1 at every non-SOS row
    emit_layer(std::nullopt,
               {UnitSpec{{{plan.is_sos, -1.0}}, 1.0, 'R', {{plan.const_true, 1.0}}}});
    // one_count: uniform attention over is_SOS gives 1/r at row r
    {
      HeadSpec hs;
      hs.v.emplace_back(plan.one_count, std::make_pair(plan.is_sos, 1.0));
      emit_layer(hs, {});
    }
    // per-offset guards: (t - ell)/r, sign decides whether a row at distance
    // ell exists below the query row
    for (const auto& [ell, chan] : plan.offset_guards) {
      HeadSpec hs;
      hs.v.emplace_back(chan, std::make_pair(plan.const_true, 1.0));
      hs.v.emplace_back(chan, std::make_pair(plan.is_sos, -static_cast<double>(ell)));
      emit_layer(hs, {});
    }
  }

  void set_gadget(std::size_t k, const std::string& g) {
    result_.plan.ops[k].gadget = g;
    result_.report.gadgets.emplace_back(p_.ops[k].name, g);
  }

  void emit_op(std::size_t k) {
    const Operation& op = p_.ops[k];
    OpChannel& oc = result_.plan.ops[k];
    const int dk = oc.channel;
    const int sos = result_.plan.is_sos;

    struct V {
      Emitter& e;
      std::size_t k;
      OpChannel& oc;
      int dk;
      int sos;

      void operator()(const Initial& x) {
        int tok = e.result_.plan.tok_base + e.p_.alphabet.index_of(x.symbol);
        e.emit_layer(std::nullopt,
                     {UnitSpec{{{tok, 1.0}, {sos, -1.0}}, 0.0, 'R', {{dk, 1.0}}}});
        e.set_gadget(k, "initial(Q_" + x.symbol + ")");
      }
      void operator()(const Positional& x) {
        int pc = e.positional_chan({x.rel.modulus, x.rel.residue});
        e.emit_layer(std::nullopt,
                     {UnitSpec{{{pc, 1.0}, {sos, -1.0}}, 0.0, 'R', {{dk, 1.0}}}});
        e.set_gadget(k, "positional(mod " + std::to_string(x.rel.modulus) + "," +
                            std::to_string(x.rel.residue) + ")");
      }
      void operator()(const Not& x) {
        e.emit_layer(std::nullopt, {UnitSpec{{{e.op_chan(x.ref), -1.0}, {sos, -1.0}},
                                             1.0, 'R', {{dk, 1.0}}}});
        e.set_gadget(k, "not");
      }
      void operator()(const And& x) {
        e.emit_layer(std::nullopt,
                     {UnitSpec{{{e.op_chan(x.lhs), 1.0}, {e.op_chan(x.rhs), 1.0}},
                               -1.0, 'R', {{dk, 1.0}}}});
        e.set_gadget(k, "and");
      }
      void operator()(const TrueConst&) {
        e.emit_layer(std::nullopt, {UnitSpec{{{sos, -1.0}}, 1.0, 'R', {{dk, 1.0}}}});
        e.set_gadget(k, "true");
      }
      void operator()(const Compare& x) {
        // hs on the count difference; when both operands are linear forms the
        // difference is recomputed by one uniform head so its sign is the
        // exact integer sign
        const LinearForm* f1 = e.form_of(x.lhs);
        const LinearForm* f2 = e.form_of(x.rhs);
        std::vector<UnitSpec> units;
        std::optional<HeadSpec> head;
        if (f1 && f2) {
          int sd = oc.scratch[0];
          head = e.form_head(sd, combine(*f2, *f1, -1));
          units.push_back(UnitSpec{{{sd, 1.0}}, 0.0, 'H', {{dk, 0.5}}});
          e.set_gadget(k, "leq(fused-diff, hs)");
        } else {
          units.push_back(UnitSpec{{{e.op_chan(x.rhs), 1.0}, {e.op_chan(x.lhs), -1.0}},
                                   0.0, 'H', {{dk, 0.5}}});
          e.set_gadget(k, "leq(channel-diff, hs)");
        }
        units.push_back(UnitSpec{{}, 0.0, 'H', {{dk, 0.5}}});  // constant-one hs unit
        e.emit_layer(head, units);
        // follow-up pass layer: SOS-gate the Boolean output
        std::vector<UnitSpec> gate;
        gate.push_back(UnitSpec{{{dk, 1.0}}, 0.0, 'R', {{dk, -1.0}}});
        gate.push_back(UnitSpec{{{dk, 1.0}, {sos, -1.0}}, 0.0, 'R', {{dk, 1.0}}});
        e.emit_layer(std::nullopt, gate);
      }
      void operator()(const Count& x) {
        if (!x.local) {
          // uniform attention over the predicate channel: exactly c/r
          HeadSpec hs;
          hs.v.emplace_back(dk, std::make_pair(e.pred_chan(x.pred), 1.0));
          e.emit_layer(hs, {});
          e.forms_[k] = LinearForm{{e.pred_chan(x.pred), 1}};
          oc.bound = 1.0;
          e.set_gadget(k, "count-top(uniform attention)");
          return;
        }
        // local count, offset -ell: sharp attention at distance ell, then
        // threshold at 1/2 AND the row-exists guard, then select one_count
        const std::int64_t ell = -x.local->offsets[0];
        const int s = oc.scratch[0], b1 = oc.scratch[1], b2 = oc.scratch[2];
        const int g = e.guard_chan(ell);
        HeadSpec hs;
        hs.phi.assign(static_cast<std::size_t>(ell + 1), 0.0);
        hs.phi[static_cast<std::size_t>(ell)] = 1.0;
        hs.v.emplace_back(s, std::make_pair(e.pred_chan(x.pred), 1.0));
        std::vector<UnitSpec> units;
        units.push_back(UnitSpec{{{s, 1.0}}, -0.5, 'H', {{b1, 0.5}}});
        units.push_back(UnitSpec{{{g, 1.0}}, 0.0, 'H', {{b2, 0.5}}});
        units.push_back(UnitSpec{{}, 0.0, 'H', {{b1, 0.5}, {b2, 0.5}}});
        e.emit_layer(hs, units);
        // select layer: dk = one_count if b1 and b2 else 0 (exact: the
        // integer-valued terms accumulate before one_count)
        std::vector<UnitSpec> sel;
        sel.push_back(UnitSpec{{{b2, 2.0}, {b1, 2.0}, {e.result_.plan.one_count, 1.0}},
                               -4.0, 'R', {{dk, 1.0}}});
        sel.push_back(UnitSpec{{{b2, 2.0}, {b1, 2.0}, {e.result_.plan.one_count, -1.0}},
                               -4.0, 'R', {{dk, -1.0}}});
        e.emit_layer(std::nullopt, sel);
        oc.bound = 1.0;
        e.set_gadget(k, "count-local(offset -" + std::to_string(ell) +
                            ", sharp attention + guard + select)");
      }
      void operator()(const Conditional& x) {
        double m = next_pow2(std::max({e.op_bound(x.then_ref), e.op_bound(x.else_ref), 1.0}));
        int pc = e.op_chan(x.cond), c1 = e.op_chan(x.then_ref), c2 = e.op_chan(x.else_ref);
        std::vector<UnitSpec> units;
        units.push_back(UnitSpec{{{c1, 1.0}, {pc, m}}, -m, 'R', {{dk, 1.0}}});
        units.push_back(UnitSpec{{{c1, -1.0}, {pc, m}}, -m, 'R', {{dk, -1.0}}});
        units.push_back(UnitSpec{{{c2, 1.0}, {pc, -m}}, 0.0, 'R', {{dk, 1.0}}});
        units.push_back(UnitSpec{{{c2, -1.0}, {pc, -m}}, 0.0, 'R', {{dk, -1.0}}});
        e.emit_layer(std::nullopt, units);
        oc.bound = std::max(e.op_bound(x.then_ref), e.op_bound(x.else_ref));
        e.set_gadget(k, "conditional(select, margin " + std::to_string(m) + ")");
      }
      void operator()(const Add& x) { arith(x.lhs, x.rhs, +1); }
      void operator()(const Sub& x) { arith(x.lhs, x.rhs, -1); }
      void arith(const std::string& lhs, const std::string& rhs, std::int64_t sign) {
        oc.bound = e.op_bound(lhs) + e.op_bound(rhs);
        const LinearForm* f1 = e.form_of(lhs);
        const LinearForm* f2 = e.form_of(rhs);
        const char* kind = sign > 0 ? "add" : "sub";
        if (f1 && f2) {
          LinearForm form = combine(*f1, *f2, sign);
          e.forms_[k] = form;
          std::vector<UnitSpec> units;
          auto it = form.find(sos);
          if (it != form.end() && it->second != 0)
            e.sos_zero_units(&units, dk, next_pow2(oc.bound));
          e.emit_layer(e.form_head(dk, form), units);
          e.set_gadget(k, std::string(kind) + "(fused uniform attention)");
        } else {
          double s = sign > 0 ? 1.0 : -1.0;
          int c1 = e.op_chan(lhs), c2 = e.op_chan(rhs);
          std::vector<UnitSpec> units;
          units.push_back(UnitSpec{{{c1, 1.0}, {c2, s}}, 0.0, 'R', {{dk, 1.0}}});
          units.push_back(UnitSpec{{{c1, -1.0}, {c2, -s}}, 0.0, 'R', {{dk, -1.0}}});
          e.emit_layer(std::nullopt, units);
          e.set_gadget(k, std::string(kind) + "(two-relu identity)");
        }
      }
      void operator()(const OneConst&) {
        LinearForm form{{sos, 1}};
        e.forms_[k] = form;
        std::vector<UnitSpec> units;
        e.sos_zero_units(&units, dk, 1.0);
        e.emit_layer(e.form_head(dk, form), units);
        oc.bound = 1.0;
        e.set_gadget(k, "one-const(fused uniform attention)");
      }
      void operator()(const LiteralConst&) {
        throw InvalidProgram("literal constant survived desugaring");
      }
    };
    std::visit(V{*this, k, oc, dk, sos}, op.body);
  }

  const LinearForm* form_of(const std::string& name) const {
    int idx = p_.index_of(name);
    auto it = forms_.find(static_cast<std::size_t>(idx));
    return it == forms_.end() ? nullptr : &it->second;
  }

  void build_unembed() {
    LimitTransformer& net = result_.net;
    const ChannelPlan& plan = result_.plan;
    const std::size_t d = static_cast<std::size_t>(plan.width);
    net.out_dim = static_cast<int>(plan.predict_channels.size()) + 1;
    net.unembed.assign(static_cast<std::size_t>(net.out_dim), std::vector<double>(d, 0.0));
    for (std::size_t r = 0; r < plan.predict_channels.size(); ++r) {
      net.unembed[r][static_cast<std::size_t>(plan.predict_channels[r].second)] = 2.0;
      net.unembed[r][static_cast<std::size_t>(plan.const_true)] = -1.0;
    }
    // last output dimension: 2*accept - 1
    net.unembed.back()[static_cast<std::size_t>(plan.accept_channel)] = 2.0;
    net.unembed.back()[static_cast<std::size_t>(plan.const_true)] = -1.0;
  }

  void finish() {
    result_.report.layers = result_.net.depth();
    result_.report.channels = result_.plan.width;
    result_.net.metadata = result_.plan.to_metadata();
    result_.lowered = p_;
    rt::validate(result_.net);
  }

  Program p_;
  rt::FixedPrecision fp_;
  Compiled result_;
  std::map<std::size_t, LinearForm> forms_;  // lowered op index -> linear form
};

}  // namespace

Compiled compile(const Program& p, rt::FixedPrecision fp) {
  validate(p);
  Program lowered = desugar(p);
  if (!is_core(lowered)) throw InvalidProgram("desugar produced non-core constructs");
  Emitter em(lowered, fp);
  Compiled out = em.run();
  out.lowered = std::move(lowered);
  return out;
}

// ---------------------------------------------------------------------------
// Channel checks

ChannelCheck check_channels(const Compiled& c, const std::vector<std::string>& w) {
  ChannelCheck out;
  out.per_op_max.assign(c.plan.ops.size(), 0.0);
  if (w.empty()) return out;
  interp::Trace tr = interp::evaluate(c.lowered, w);
  std::vector<std::string> tokens;
  tokens.push_back(rt::kSos);
  tokens.insert(tokens.end(), w.begin(), w.end());
  rt::ActivationTensor act = rt::Forward(c.net).run(tokens, 0);
  for (std::size_t k = 0; k < c.plan.ops.size(); ++k) {
    const OpChannel& oc = c.plan.ops[k];
    for (std::size_t t = 1; t <= w.size(); ++t) {
      double got = act.final_y[t][static_cast<std::size_t>(oc.channel)];
      double expected;
      if (oc.sort == Sort::Boolean) {
        expected = tr.values[k][t - 1] != 0 ? 1.0 : 0.0;
      } else {
        expected = static_cast<double>(tr.values[k][t - 1]) / static_cast<double>(t + 1);
      }
      double err = std::abs(got - expected);
      out.per_op_max[k] = std::max(out.per_op_max[k], err);
      if (oc.sort == Sort::Boolean)
        out.max_bool_err = std::max(out.max_bool_err, err);
      else
        out.max_count_err = std::max(out.max_count_err, err);
    }
  }
  return out;
}

ChannelCheck check_channels(const Program& p, const rt::LimitTransformer& net,
                            const ChannelPlan& plan, const std::vector<std::string>& w) {
  Compiled c;
  c.net = net;
  c.plan = plan;
  c.lowered = desugar(p);
  if (c.lowered.ops.size() != plan.ops.size())
    throw InvalidProgram("plan does not match the desugared program");
  for (std::size_t k = 0; k < plan.ops.size(); ++k)
    if (c.lowered.ops[k].name != plan.ops[k].name)
      throw InvalidProgram("plan operation order does not match the desugared program");
  return check_channels(c, w);
}

// ---------------------------------------------------------------------------
// Plan and report text forms

std::vector<std::string> ChannelPlan::to_metadata() const {
  std::vector<std::string> out;
  std::ostringstream head;
  head << "plan width " << width << " tok_base " << tok_base << " is_sos " << is_sos
       << " const_true " << const_true << " one_count " << one_count << " accept "
       << accept_channel;
  out.push_back(head.str());
  for (const auto& [key, chan] : positional)
    out.push_back("pos " + std::to_string(key.first) + " " + std::to_string(key.second) + " " +
                  std::to_string(chan));
  for (const auto& [ell, chan] : offset_guards)
    out.push_back("guard " + std::to_string(ell) + " " + std::to_string(chan));
  for (const auto& [sym, chan] : predict_channels)
    out.push_back("predict " + sym + " " + std::to_string(chan));
  for (const auto& oc : ops) {
    std::ostringstream line;
    line << "op " << oc.name << " " << (oc.sort == Sort::Boolean ? "B" : "C") << " "
         << oc.channel << " " << dyadic_to_string(oc.bound) << " " << oc.scratch.size();
    for (int s : oc.scratch) line << " " << s;
    line << " ; " << oc.gadget;
    out.push_back(line.str());
  }
  return out;
}

ChannelPlan ChannelPlan::from_metadata(const std::vector<std::string>& lines) {
  ChannelPlan plan;
  for (const auto& line : lines) {
    std::istringstream in(line);
    std::string kind;
    in >> kind;
    if (kind == "plan") {
      std::string key;
      while (in >> key) {
        long long v;
        if (!(in >> v)) throw SchemaError("plan", "malformed plan header");
        if (key == "width") plan.width = static_cast<int>(v);
        else if (key == "tok_base") plan.tok_base = static_cast<int>(v);
        else if (key == "is_sos") plan.is_sos = static_cast<int>(v);
        else if (key == "const_true") plan.const_true = static_cast<int>(v);
        else if (key == "one_count") plan.one_count = static_cast<int>(v);
        else if (key == "accept") plan.accept_channel = static_cast<int>(v);
        else throw SchemaError("plan", "unknown plan field '" + key + "'");
      }
    } else if (kind == "pos") {
      std::int64_t m, r;
      int chan;
      if (!(in >> m >> r >> chan)) throw SchemaError("plan / pos", "malformed line");
      plan.positional.emplace_back(std::make_pair(m, r), chan);
    } else if (kind == "guard") {
      std::int64_t ell;
      int chan;
      if (!(in >> ell >> chan)) throw SchemaError("plan / guard", "malformed line");
      plan.offset_guards.emplace_back(ell, chan);
    } else if (kind == "predict") {
      std::string sym;
      int chan;
      if (!(in >> sym >> chan)) throw SchemaError("plan / predict", "malformed line");
      plan.predict_channels.emplace_back(sym, chan);
    } else if (kind == "op") {
      OpChannel oc;
      std::string sort, bound;
      std::size_t nscratch;
      if (!(in >> oc.name >> sort >> oc.channel >> bound >> nscratch))
        throw SchemaError("plan / op", "malformed line");
      oc.sort = sort == "B" ? Sort::Boolean : Sort::Count;
      oc.bound = dyadic_from_string(bound, "plan / op bound");
      for (std::size_t k = 0; k < nscratch; ++k) {
        int s;
        if (!(in >> s)) throw SchemaError("plan / op", "missing scratch channel");
        oc.scratch.push_back(s);
      }
      std::string semi;
      in >> semi;
      std::getline(in, oc.gadget);
      if (!oc.gadget.empty() && oc.gadget[0] == ' ') oc.gadget.erase(0, 1);
      plan.ops.push_back(std::move(oc));
    } else {
      throw SchemaError("plan", "unknown metadata line '" + kind + "'");
    }
  }
  return plan;
}

std::string CompileReport::to_text() const {
  std::ostringstream out;
  out << "layers:   " << layers << "\n";
  out << "channels: " << channels << "\n";
  out << "tau:      " << tau << "\n";
  out << "period:   " << period << "\n";
  out << "gadgets:\n";
  for (const auto& [op, g] : gadgets) out << "  " << op << ": " << g << "\n";
  for (const auto& n : notes) out << "note: " << n << "\n";
  return out.str();
}

}  // namespace crasp::comp
