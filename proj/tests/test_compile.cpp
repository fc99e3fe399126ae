#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "crasp/compile.hpp"
#include "crasp/corpus.hpp"
#include "crasp/interp.hpp"
#include "crasp/prng.hpp"

using namespace crasp;

namespace {

std::vector<std::string> chars(const std::string& s) {
  std::vector<std::string> w;
  for (char c : s) w.emplace_back(1, c);
  return w;
}

const double kCountTol = std::ldexp(1.0, 2 - 24);  // 2^(2-p) at p = 24

void exhaustive_agreement(const dsl::Program& p, const comp::Compiled& c, int max_len) {
  rt::Forward fwd(c.net);
  const auto& alphabet = p.alphabet.symbols;
  std::vector<std::size_t> idx;
  for (int len = 1; len <= max_len; ++len) {
    idx.assign(static_cast<std::size_t>(len), 0);
    while (true) {
      std::vector<std::string> w;
      for (std::size_t k : idx) w.push_back(alphabet[k]);
      bool iv = interp::accepts(p, w);
      bool nv = fwd.accepts(w);
      if (iv != nv) {
        CAPTURE(len);
        REQUIRE(iv == nv);
      }
      int pos = len - 1;
      while (pos >= 0) {
        if (++idx[static_cast<std::size_t>(pos)] < alphabet.size()) break;
        idx[static_cast<std::size_t>(pos)] = 0;
        --pos;
      }
      if (pos < 0) break;
    }
  }
}

}  // namespace

TEST_CASE("compiled majority matches the interpreter exhaustively to length 10") {
  const auto& p = corpus::stdlib_program("majority");
  auto c = comp::compile(p);
  CHECK(c.report.period == 1);
  CHECK(c.report.tau == 0);
  for (const auto& layer : c.net.layers)
    for (const auto& h : layer.heads) CHECK(h.phi.by_distance.empty());
  exhaustive_agreement(p, c, 10);
}

TEST_CASE("channel values on majority '10' match c/(t+1) and stay in tolerance") {
  const auto& p = corpus::stdlib_program("majority");
  auto c = comp::compile(p);
  rt::Forward fwd(c.net);
  auto act = fwd.run({"$", "1", "0"}, 0);
  const auto* c1 = c.plan.find("C1");
  REQUIRE(c1 != nullptr);
  CHECK(act.final_y[1][static_cast<std::size_t>(c1->channel)] == 0.5);       // c=1, t=1
  CHECK(act.final_y[2][static_cast<std::size_t>(c1->channel)] == 1.0 / 3.0);  // c=1, t=2
  auto chk = comp::check_channels(c, chars("10"));
  CHECK(chk.max_bool_err == 0.0);
  CHECK(chk.max_count_err <= kCountTol);
}

TEST_CASE("boolean channels are exactly 0/1 on random strings") {
  Prng rng(41);
  for (const auto& name : {"majority", "dyck1", "tomita4", "aa_star", "substring_ab"}) {
    const auto& p = corpus::stdlib_program(name);
    auto c = comp::compile(p);
    for (int k = 0; k < 100; ++k) {
      std::int64_t len = 1 + static_cast<std::int64_t>(rng.below(30));
      auto w = corpus::random_word(p.alphabet.symbols, len, rng);
      auto chk = comp::check_channels(c, w);
      CHECK(chk.max_bool_err == 0.0);
      CHECK(chk.max_count_err <= kCountTol);
    }
  }
}

TEST_CASE("true-const channel is zero at the SOS row") {
  dsl::Program p = dsl::parse("program t over {a} { T(i) := true; C(i) := count[j<=i] T(j); "
                              "L(i) := C(i) >= 1; }");
  auto c = comp::compile(p);
  rt::Forward fwd(c.net);
  auto act = fwd.run({"$", "a", "a"}, 0);
  const auto* t_op = c.plan.find("T");
  REQUIRE(t_op != nullptr);
  CHECK(act.final_y[0][static_cast<std::size_t>(t_op->channel)] == 0.0);  // gated at SOS
  CHECK(act.final_y[1][static_cast<std::size_t>(t_op->channel)] == 1.0);
  // and the count over T is exact: c/(t+1) with c = t
  auto chk = comp::check_channels(c, {"a", "a", "a"});
  CHECK(chk.max_bool_err == 0.0);
  CHECK(chk.max_count_err <= kCountTol);
}

TEST_CASE("compiled aa_star has period 2 and accepts exactly (aa)^k up to length 12") {
  const auto& p = corpus::stdlib_program("aa_star");
  auto c = comp::compile(p);
  CHECK(c.report.period == 2);
  rt::Forward fwd(c.net);
  const auto& o = corpus::oracle("aa_star");
  std::vector<std::size_t> idx;
  for (int len = 1; len <= 12; ++len) {
    idx.assign(static_cast<std::size_t>(len), 0);
    while (true) {
      std::vector<std::string> w;
      for (std::size_t k : idx) w.push_back(p.alphabet.symbols[k]);
      CHECK(fwd.accepts(w) == o.member(w));
      int pos = len - 1;
      while (pos >= 0) {
        if (++idx[static_cast<std::size_t>(pos)] < p.alphabet.symbols.size()) break;
        idx[static_cast<std::size_t>(pos)] = 0;
        --pos;
      }
      if (pos < 0) break;
    }
  }
}

TEST_CASE("compiled substring_ab: tau 1, agreement with the substring oracle") {
  const auto& p = corpus::stdlib_program("substring_ab");
  auto c = comp::compile(p);
  CHECK(c.report.tau == 1);
  rt::Forward fwd(c.net);
  const auto& o = corpus::oracle("substring_ab");
  Prng rng(5);
  for (int len = 1; len <= 10; ++len)
    for (int k = 0; k < 64; ++k) {
      auto w = corpus::random_word(p.alphabet.symbols, len, rng);
      CHECK(fwd.accepts(w) == o.member(w));
    }
  exhaustive_agreement(p, c, 10);
}

TEST_CASE("tomita4 uses offsets -1 and -2; exhaustive agreement") {
  const auto& p = corpus::stdlib_program("tomita4");
  auto c = comp::compile(p);
  CHECK(c.report.tau == 2);
  exhaustive_agreement(p, c, 10);
}

TEST_CASE("negative control: flipping a heaviside to relu breaks equivalence") {
  const auto& p = corpus::stdlib_program("majority");
  auto c = comp::compile(p);
  rt::LimitTransformer broken = c.net;
  bool flipped = false;
  for (auto& layer : broken.layers)
    for (auto& ch : layer.mlp.acts)
      if (!flipped && ch == 'H') {
        ch = 'R';
        flipped = true;
      }
  REQUIRE(flipped);
  rt::Forward fwd(broken);
  std::int64_t mismatches = 0;
  std::vector<std::vector<std::string>> witnesses;
  Prng rng(9);
  for (int k = 0; k < 200; ++k) {
    auto w = corpus::random_word(p.alphabet.symbols,
                                 1 + static_cast<std::int64_t>(rng.below(10)), rng);
    if (interp::accepts(p, w) != fwd.accepts(w)) {
      ++mismatches;
      witnesses.push_back(w);
    }
  }
  CHECK(mismatches > 0);
  // witnesses replay deterministically
  for (const auto& w : witnesses) CHECK(interp::accepts(p, w) != fwd.accepts(w));
}

TEST_CASE("local-count margin: attention value strictly straddles 1/2") {
  // at every query row with an existing target row, the pre-threshold value
  // is > 1/2 when the predicate holds at the target and < 1/2 otherwise
  Prng rng(31);
  for (const auto& name : {"substring_ab", "tomita4"}) {
    const auto& p = corpus::stdlib_program(name);
    auto c = comp::compile(p);
    rt::Forward fwd(c.net);
    interp::Trace tr;
    for (std::int64_t n : {2, 3, 5, 17, 64, 199, 200}) {
      auto w = corpus::random_word(p.alphabet.symbols, n - 1, rng);  // n rows incl. SOS
      if (w.empty()) continue;
      std::vector<std::string> tokens = {"$"};
      tokens.insert(tokens.end(), w.begin(), w.end());
      auto act = fwd.run(tokens, 0);
      tr = interp::evaluate(c.lowered, w);
      for (std::size_t k = 0; k < c.plan.ops.size(); ++k) {
        const auto& oc = c.plan.ops[k];
        if (oc.gadget.rfind("count-local", 0) != 0) continue;
        const auto* cnt = std::get_if<dsl::Count>(&c.lowered.ops[k].body);
        REQUIRE(cnt != nullptr);
        std::int64_t ell = -cnt->local->offsets[0];
        int s_chan = oc.scratch[0];
        for (std::int64_t row = 1 + ell; row <= n - 1; ++row) {
          // target row exists: row - ell >= 1 (0-based index row - ell in act)
          double v = act.final_y[static_cast<std::size_t>(row)]
                               [static_cast<std::size_t>(s_chan)];
          std::int64_t t_pos = row - ell;  // program position of the target
          bool pred;
          if (cnt->pred.is_symbol) {
            pred = t_pos >= 1 && w[static_cast<std::size_t>(t_pos - 1)] == cnt->pred.name;
          } else {
            pred = t_pos >= 1 && tr.value(cnt->pred.name, static_cast<std::size_t>(t_pos)) != 0;
          }
          if (pred)
            CHECK(v > 0.5);
          else
            CHECK(v < 0.5);
        }
      }
    }
  }
}

TEST_CASE("conditional gadget is exact for signed counts") {
  dsl::Program p = dsl::parse(
      "program t over {a,b} {\n"
      "  Ca(i) := count[j<=i] Q_a(j);\n"
      "  Cb(i) := count[j<=i] Q_b(j);\n"
      "  D(i)  := Ca(i) - Cb(i);\n"     // may be negative
      "  P(i)  := Q_a(i);\n"
      "  S(i)  := if P(i) then D(i) else Cb(i);\n"
      "  G(i)  := S(i) <= Ca(i);\n"
      "}");
  auto c = comp::compile(p);
  exhaustive_agreement(p, c, 9);
  Prng rng(13);
  for (int k = 0; k < 60; ++k) {
    auto w = corpus::random_word(p.alphabet.symbols,
                                 1 + static_cast<std::int64_t>(rng.below(40)), rng);
    auto chk = comp::check_channels(c, w);
    CHECK(chk.max_bool_err == 0.0);
    CHECK(chk.max_count_err <= kCountTol);
  }
}

TEST_CASE("literal chains compare exactly against counts") {
  dsl::Program p = dsl::parse(
      "program t over {a,b} {\n"
      "  Ca(i) := count[j<=i] Q_a(j);\n"
      "  E3(i) := Ca(i) = 3;\n"
      "  G5(i) := Ca(i) >= 5;\n"
      "  L2(i) := Ca(i) < 2;\n"
      "  X(i)  := E3(i) and G5(i);\n"
      "  Y(i)  := X(i) and L2(i);\n"
      "}");
  auto c = comp::compile(p);
  exhaustive_agreement(p, c, 10);
}

TEST_CASE("plan metadata round-trips through the net file") {
  const auto& p = corpus::stdlib_program("tomita4");
  auto c = comp::compile(p);
  rt::LimitTransformer net2 = rt::deserialize(rt::serialize(c.net));
  comp::ChannelPlan plan2 = comp::ChannelPlan::from_metadata(net2.metadata);
  CHECK(plan2.width == c.plan.width);
  CHECK(plan2.accept_channel == c.plan.accept_channel);
  REQUIRE(plan2.ops.size() == c.plan.ops.size());
  for (std::size_t k = 0; k < plan2.ops.size(); ++k) {
    CHECK(plan2.ops[k].name == c.plan.ops[k].name);
    CHECK(plan2.ops[k].channel == c.plan.ops[k].channel);
    CHECK(plan2.ops[k].scratch == c.plan.ops[k].scratch);
  }
  // the spec-shaped overload works from program + net + plan
  auto chk = comp::check_channels(p, net2, plan2, chars("0010"));
  CHECK(chk.max_bool_err == 0.0);
  CHECK(chk.max_count_err <= kCountTol);
}

TEST_CASE("compile report lists gadgets and layer counts") {
  auto c = comp::compile(corpus::stdlib_program("tomita4"));
  CHECK(c.report.layers == c.net.depth());
  CHECK(c.report.channels == c.plan.width);
  CHECK_FALSE(c.report.gadgets.empty());
  std::string text = c.report.to_text();
  CHECK(text.find("count-local") != std::string::npos);
  CHECK(text.find("tau:") != std::string::npos);
}

TEST_CASE("predict programs expose one output dimension per declared symbol") {
  const auto& p = corpus::stdlib_program("induction_all");
  auto c = comp::compile(p);
  CHECK(c.net.out_dim == static_cast<int>(p.predict.size()) + 1);
  rt::Forward fwd(c.net);
  auto act = fwd.run({"$", "a", "b", "a"}, 0);
  // position 3: current a, bigram ab seen -> predicted set {b}
  std::set<std::string> net_set;
  for (std::size_t s = 0; s < c.plan.predict_channels.size(); ++s)
    if (act.outputs[3][s] > 0.0) net_set.insert(c.plan.predict_channels[s].first);
  CHECK(net_set == std::set<std::string>{"b"});
}

TEST_CASE("accepts_net: compiled nets of every small stdlib program, spot checks") {
  auto c_maj = comp::compile(corpus::stdlib_program("majority"));
  CHECK(rt::accepts_net(c_maj.net, chars("110")));
  CHECK_FALSE(rt::accepts_net(c_maj.net, chars("001")));
  auto c_aa = comp::compile(corpus::stdlib_program("aa_star"));
  CHECK(rt::accepts_net(c_aa.net, chars("aa")));
  CHECK_FALSE(rt::accepts_net(c_aa.net, chars("aaa")));
}
