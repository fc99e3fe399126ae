#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <variant>

#include "crasp/corpus.hpp"
#include "crasp/dsl.hpp"
#include "crasp/interp.hpp"
#include "crasp/prng.hpp"

using namespace crasp;
using namespace crasp::dsl;

namespace {

std::vector<std::vector<std::string>> all_words(const std::vector<std::string>& alphabet,
                                                int max_len) {
  std::vector<std::vector<std::string>> out;
  std::vector<std::size_t> idx;
  for (int len = 0; len <= max_len; ++len) {
    idx.assign(static_cast<std::size_t>(len), 0);
    while (true) {
      std::vector<std::string> w;
      for (std::size_t k : idx) w.push_back(alphabet[k]);
      out.push_back(w);
      int pos = len - 1;
      while (pos >= 0) {
        if (++idx[static_cast<std::size_t>(pos)] < alphabet.size()) break;
        idx[static_cast<std::size_t>(pos)] = 0;
        --pos;
      }
      if (pos < 0) break;
    }
    if (len == 0 && alphabet.empty()) break;
  }
  return out;
}

}  // namespace

TEST_CASE("parse the majority program") {
  Program p = parse(
      "program maj over {0,1} { C1(i) := count[j<=i] Q_1(j); C0(i) := count[j<=i] Q_0(j); "
      "M(i) := C0(i) <= C1(i); }");
  CHECK(p.name == "maj");
  CHECK(p.ops.size() == 3);
  CHECK(p.accept == "M");  // defaults to the last Boolean operation
  CHECK(p.alphabet.symbols == std::vector<std::string>{"0", "1"});
  CHECK(sort_of(p.ops[0].body) == Sort::Count);
  CHECK(sort_of(p.ops[2].body) == Sort::Boolean);
}

TEST_CASE("undefined reference is rejected") {
  CHECK_THROWS_AS(parse("program bad over {a} { P(i) := C(i) <= C(i); }"), UnknownReference);
}

TEST_CASE("parse errors carry position and expectation") {
  try {
    parse("program p over {a} {\n  X(i) = Q_a(i);\n}");
    FAIL("expected SyntaxError");
  } catch (const SyntaxError& e) {
    CHECK(e.line == 2);
    CHECK(e.col > 0);
  }
}

TEST_CASE("sort errors") {
  CHECK_THROWS_AS(parse("program p over {a} { B(i) := Q_a(i); X(i) := B(i) + B(i); }"),
                  SortError);
  CHECK_THROWS_AS(parse("program p over {a} { C(i) := count[j<=i] Q_a(j); X(i) := not C(i); }"),
                  SortError);
}

TEST_CASE("duplicate names and reserved symbol") {
  CHECK_THROWS_AS(parse("program p over {a} { B(i) := Q_a(i); B(i) := Q_a(i); }"),
                  DuplicateName);
  CHECK_THROWS_AS(parse("program p over {a,$} { B(i) := Q_a(i); }"), ReservedSymbol);
}

TEST_CASE("forward references are rejected even for later ops") {
  CHECK_THROWS_AS(parse("program p over {a} { X(i) := not Y(i); Y(i) := Q_a(i); }"),
                  UnknownReference);
}

TEST_CASE("print then parse is the identity on every stdlib program") {
  for (const auto& [name, p] : corpus::stdlib()) {
    CAPTURE(name);
    Program q = parse(print(p));
    CHECK(q == p);
  }
}

TEST_CASE("syntax round-trips for masks and positional relations") {
  Program p = parse(
      "program t over {a,b} {\n"
      "  B(i) := Q_a(i);\n"
      "  C1(i) := count[j<=i, j==i-1] B(j);\n"
      "  C2(i) := count[j<=i, j in {i-1,i-2}] B(j);\n"
      "  C3(i) := count[j<i] B(j);\n"
      "  C4(i) := count[j<=i, j==i] B(j);\n"
      "  C5(i) := count[j<=i, j==i+2] B(j);\n"
      "  P(i) := pos mod(2,0)(i);\n"
      "}");
  std::string text = print(p);
  CHECK(text.find("count[j<=i, j==i-1]") != std::string::npos);
  CHECK(text.find("count[j<=i, j in {i-1,i-2}]") != std::string::npos);
  CHECK(text.find("count[j<i]") != std::string::npos);
  CHECK(text.find("pos mod(2,0)(i)") != std::string::npos);
  CHECK(parse(text) == p);
}

TEST_CASE("desugar equality expands to a conjunction of comparisons") {
  Program p = parse(
      "program t over {a} { C1(i) := count[j<=i] Q_a(j); C2(i) := count[j<=i] Q_a(j); "
      "E(i) := C1(i) = C2(i); }");
  Program d = desugar(p);
  CHECK(is_core(d));
  const Operation* e = d.find("E");
  REQUIRE(e != nullptr);
  const auto* a = std::get_if<And>(&e->body);
  REQUIRE(a != nullptr);
  const auto* le = std::get_if<Compare>(&d.find(a->lhs)->body);
  const auto* ge = std::get_if<Compare>(&d.find(a->rhs)->body);
  REQUIRE(le != nullptr);
  REQUIRE(ge != nullptr);
  CHECK(le->op == CmpOp::Leq);
  CHECK(ge->op == CmpOp::Leq);
}

TEST_CASE("strict comparison is add-one-then-leq, checked by integer oracle") {
  // oracle: for every count pair in [0,10]^2, a < b iff a + 1 <= b
  for (int a = 0; a <= 10; ++a)
    for (int b = 0; b <= 10; ++b) CHECK(((a < b)) == ((a + 1 <= b)));
  Program p = parse(
      "program t over {a,b} { C1(i) := count[j<=i] Q_a(j); C2(i) := count[j<=i] Q_b(j); "
      "L(i) := C1(i) < C2(i); }");
  Program d = desugar(p);
  CHECK(is_core(d));
  const auto* cmp = std::get_if<Compare>(&d.find("L")->body);
  REQUIRE(cmp != nullptr);
  CHECK(cmp->op == CmpOp::Leq);
  const auto* sum = std::get_if<Add>(&d.find(cmp->lhs)->body);
  REQUIRE(sum != nullptr);  // lhs is C1 + 1
  CHECK(sum->lhs == "C1");
  CHECK(std::holds_alternative<OneConst>(d.find(sum->rhs)->body));
  CHECK(cmp->rhs == "C2");
}

TEST_CASE("multi-offset masks desugar to sums of single-offset counts") {
  Program p = parse(
      "program t over {a,b} { M(i) := count[j<=i, j in {i-1,i-2}] Q_a(j); "
      "G(i) := M(i) >= 2; }");
  Program d = desugar(p);
  CHECK(is_core(d));
  const auto* sum = std::get_if<Add>(&d.find("M")->body);
  REQUIRE(sum != nullptr);
  // equivalence on all binary strings of length <= 8, against a direct oracle
  for (const auto& w : all_words({"a", "b"}, 8)) {
    if (w.empty()) continue;
    interp::Trace t0 = interp::evaluate(p, w);
    interp::Trace t1 = interp::evaluate(d, w);
    for (std::size_t t = 1; t <= w.size(); ++t) {
      std::int64_t direct = 0;  // oracle: count offsets -1, -2 by hand
      for (std::int64_t c : {-1, -2}) {
        std::int64_t j = static_cast<std::int64_t>(t) + c;
        if (j >= 1 && w[static_cast<std::size_t>(j - 1)] == "a") ++direct;
      }
      CHECK(t0.value("M", t) == direct);
      CHECK(t1.value("M", t) == direct);
      CHECK(t0.value("G", t) == t1.value("G", t));
    }
  }
}

TEST_CASE("strict mask desugars via the count-minus-indicator construction") {
  Program p = parse("program t over {a,b} { S(i) := count[j<i] Q_a(j); A(i) := S(i) >= 1; }");
  Program d = desugar(p);
  CHECK(is_core(d));
  for (const auto& w : all_words({"a", "b"}, 6)) {
    if (w.empty()) continue;
    interp::Trace t0 = interp::evaluate(p, w);
    interp::Trace t1 = interp::evaluate(d, w);
    for (std::size_t t = 1; t <= w.size(); ++t) {
      std::int64_t direct = 0;
      for (std::size_t j = 1; j < t; ++j)
        if (w[j - 1] == "a") ++direct;
      CHECK(t0.value("S", t) == direct);
      CHECK(t1.value("S", t) == direct);
    }
  }
}

TEST_CASE("desugar preserves semantics on sugared stdlib programs") {
  Prng rng(2024);
  for (const auto& [name, p] : corpus::stdlib()) {
    if (p.ops.size() > 500) continue;  // keep the sweep fast
    Program d = desugar(p);
    CHECK(is_core(d));
    for (std::int64_t len = 1; len <= 12; ++len) {
      for (int k = 0; k < 40; ++k) {
        auto w = corpus::random_word(p.alphabet.symbols, len, rng);
        interp::Trace t0 = interp::evaluate(p, w);
        interp::Trace t1 = interp::evaluate(d, w);
        for (std::size_t op = 0; op < p.ops.size(); ++op)
          for (std::size_t t = 1; t <= w.size(); ++t)
            CHECK(t0.value(p.ops[op].name, t) == t1.value(p.ops[op].name, t));
      }
    }
  }
}

TEST_CASE("desugar is idempotent") {
  for (const auto& [name, p] : corpus::stdlib()) {
    if (p.ops.size() > 500) continue;
    Program d = desugar(p);
    CHECK(desugar(d) == d);
  }
}

TEST_CASE("validator rejects mutated programs") {
  const Program base = corpus::stdlib_program("dyck1");
  auto mutate = [&](auto fn) {
    Program p = base;
    fn(p);
    CHECK_THROWS_AS(validate(p), Error);
  };
  mutate([](Program& p) { p.ops[2].body = Not{"nonexistent"}; });
  mutate([](Program& p) { p.ops[2].body = Not{"CV"}; });            // wrong sort (later op)
  mutate([](Program& p) { p.ops[1].name = p.ops[0].name; });        // duplicate
  mutate([](Program& p) { p.alphabet.symbols.push_back("$"); });    // reserved
  mutate([](Program& p) { p.alphabet.symbols.push_back("a"); });    // duplicate symbol
  mutate([](Program& p) { p.accept = "Co"; });                      // count as accept
  mutate([](Program& p) { p.accept = "zzz"; });
  mutate([](Program& p) { p.ops[0].body = Positional{{2, 2}}; });   // residue out of range
  mutate([](Program& p) { p.ops[0].body = Positional{{0, 0}}; });   // modulus < 1
  mutate([](Program& p) { p.ops[0].body = Count{false, LocalRelation{{}}, {"a", true}}; });
  mutate([](Program& p) { p.predict.emplace_back("z", "D"); });     // symbol not in alphabet
  mutate([](Program& p) { p.predict.emplace_back("a", "Co"); });    // count target
  // random reference rewiring must never validate as long as it dangles
  Prng rng(7);
  for (int k = 0; k < 200; ++k) {
    Program p = base;
    std::size_t which = static_cast<std::size_t>(rng.below(p.ops.size()));
    if (auto* a = std::get_if<And>(&p.ops[which].body)) {
      a->lhs = "bogus_" + std::to_string(rng.below(100));
      CHECK_THROWS_AS(validate(p), Error);
    } else if (auto* c = std::get_if<Compare>(&p.ops[which].body)) {
      c->rhs = "bogus_" + std::to_string(rng.below(100));
      CHECK_THROWS_AS(validate(p), Error);
    }
  }
}

TEST_CASE("construct usage probes") {
  CHECK_FALSE(uses_positional(corpus::stdlib_program("majority")));
  CHECK_FALSE(uses_local(corpus::stdlib_program("majority")));
  CHECK(uses_positional(corpus::stdlib_program("aa_star")));
  CHECK(uses_local(corpus::stdlib_program("substring_ab")));
  CHECK(uses_local(corpus::stdlib_program("tomita4")));
  CHECK(uses_positional(corpus::stdlib_program("bmi3")));
}
