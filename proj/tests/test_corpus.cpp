#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "crasp/corpus.hpp"
#include "crasp/interp.hpp"
#include "crasp/prng.hpp"

using namespace crasp;
using corpus::Word;

namespace {

Word chars(const std::string& s) {
  Word w;
  for (char c : s) w.emplace_back(1, c);
  return w;
}

std::vector<Word> all_words(const std::vector<std::string>& alphabet, int len) {
  std::vector<Word> out;
  std::vector<std::size_t> idx(static_cast<std::size_t>(len), 0);
  while (true) {
    Word w;
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
  return out;
}

}  // namespace

TEST_CASE("tomita oracle memberships") {
  CHECK(corpus::oracle("tomita4").member(chars("0010")));
  CHECK_FALSE(corpus::oracle("tomita4").member(chars("1000")));
  CHECK(corpus::oracle("tomita1").member(chars("111")));
  CHECK_FALSE(corpus::oracle("tomita1").member(chars("101")));
  CHECK(corpus::oracle("tomita2").member(chars("1010")));
  CHECK_FALSE(corpus::oracle("tomita2").member(chars("101")));
  CHECK(corpus::oracle("tomita7").member(chars("001100")));   // 0*1*0*
  CHECK(corpus::oracle("tomita7").member(chars("0101")));
  CHECK_FALSE(corpus::oracle("tomita7").member(chars("10101")));
  // tomita3: run-based reading; 10 has an odd 1-run then an odd 0-run
  CHECK_FALSE(corpus::oracle("tomita3").member(chars("10")));
  CHECK(corpus::oracle("tomita3").member(chars("100")));
  CHECK(corpus::oracle("tomita3").member(chars("110")));
  CHECK_FALSE(corpus::oracle("tomita3").member(chars("010")));
  CHECK(corpus::oracle("tomita3").member(chars("11100")));
  CHECK(corpus::oracle("tomita5").member(chars("1100")));
  CHECK_FALSE(corpus::oracle("tomita5").member(chars("110")));
  CHECK_FALSE(corpus::oracle("tomita5").member(chars("100")));
  CHECK(corpus::oracle("tomita6").member(chars("01")));   // #0-#1 = 0
  CHECK(corpus::oracle("tomita6").member(chars("000")));  // 3 - 0
  CHECK_FALSE(corpus::oracle("tomita6").member(chars("00")));
}

TEST_CASE("periodic and star-free language oracles") {
  CHECK(corpus::oracle("aaaa_star").member(chars("aaaa")));
  CHECK_FALSE(corpus::oracle("aaaa_star").member(chars("aa")));
  CHECK(corpus::oracle("aaaa_star").member({}));
  CHECK(corpus::oracle("abab_star").member(chars("abab")));
  CHECK_FALSE(corpus::oracle("abab_star").member(chars("ab")));
  // {0,1,2}*02*: membership means ending in 0 followed by 2s
  CHECK(corpus::oracle("zot02").member(chars("102")));
  CHECK(corpus::oracle("zot02").member(chars("120")));
  CHECK_FALSE(corpus::oracle("zot02").member(chars("121")));
  CHECK_FALSE(corpus::oracle("zot02").member(chars("12")));
  CHECK(corpus::oracle("aabbccddee").member(chars("abcde")));
  CHECK(corpus::oracle("aabbccddee").member(chars("aabbccddee")));
  CHECK_FALSE(corpus::oracle("aabbccddee").member(chars("abcdea")));
  CHECK(corpus::oracle("abdbc").member(chars("abdbc")));
  CHECK(corpus::oracle("abdbc").member(chars("d")));
  CHECK_FALSE(corpus::oracle("abdbc").member(chars("adbda")));
  CHECK(corpus::oracle("parity").member(chars("1100")));
  CHECK_FALSE(corpus::oracle("parity").member(chars("100")));
  CHECK_THROWS_AS(corpus::oracle("nope"), UnknownLanguage);
}

TEST_CASE("legal next symbols via DFA liveness and closed forms") {
  CHECK(corpus::legal_next(corpus::oracle("tomita1"), chars("11")) ==
        std::set<std::string>{"1"});
  CHECK(corpus::legal_next(corpus::oracle("dyck1"), chars("a")) ==
        std::set<std::string>{"a", "b"});
  CHECK(corpus::legal_next(corpus::oracle("dyck1"), {}) == std::set<std::string>{"a"});
  CHECK(corpus::legal_next(corpus::oracle("anbncn"), chars("aab")) ==
        std::set<std::string>{"b"});
  CHECK(corpus::legal_next(corpus::oracle("anbncn"), chars("aabb")) ==
        std::set<std::string>{"c"});
  CHECK(corpus::legal_next(corpus::oracle("aa_star"), chars("a")) ==
        std::set<std::string>{"a"});
}

TEST_CASE("legal_next agrees with bounded brute force on DFA languages") {
  Prng rng(3);
  for (const auto& id : {"tomita1", "tomita2", "tomita3", "tomita4", "tomita5", "tomita6",
                         "tomita7", "aa_star", "abab_star", "abdbc", "d3"}) {
    const auto& o = corpus::oracle(id);
    // a live DFA state reaches acceptance within #states steps, so this
    // suffix bound makes the brute force sound
    const int bound = static_cast<int>(o.dfa->accepting.size());
    REQUIRE(bound <= 12);
    for (int rep = 0; rep < 25; ++rep) {
      std::int64_t len = static_cast<std::int64_t>(rng.below(10));
      Word prefix = corpus::random_word(o.alphabet, len, rng);
      std::set<std::string> brute;
      for (const auto& sym : o.alphabet) {
        Word base = prefix;
        base.push_back(sym);
        bool ok = o.member(base);
        for (int slen = 1; !ok && slen <= bound; ++slen) {
          std::vector<std::size_t> idx(static_cast<std::size_t>(slen), 0);
          while (!ok) {
            Word w = base;
            for (std::size_t k : idx) w.push_back(o.alphabet[k]);
            ok = o.member(w);
            int pos = slen - 1;
            while (pos >= 0) {
              if (++idx[static_cast<std::size_t>(pos)] < o.alphabet.size()) break;
              idx[static_cast<std::size_t>(pos)] = 0;
              --pos;
            }
            if (pos < 0) break;
          }
        }
        if (ok) brute.insert(sym);
      }
      CHECK(o.legal_next(prefix) == brute);
    }
  }
}

TEST_CASE("stdlib programs agree with their oracles") {
  Prng rng(77);
  for (const auto& row : corpus::manifest()) {
    if (row.program.empty() || row.oracle_id.empty()) continue;
    const auto& p = corpus::stdlib_program(row.program);
    const auto& o = corpus::oracle(row.oracle_id);
    CAPTURE(row.program);
    // empty-word convention matches the oracle
    CHECK(interp::accepts(p, {}) == o.member({}));
    int bound = p.alphabet.symbols.size() <= 2 ? 12 : (p.alphabet.symbols.size() == 3 ? 9 : 7);
    for (int len = 1; len <= bound; ++len)
      for (const auto& w : all_words(p.alphabet.symbols, len))
        CHECK(interp::accepts(p, w) == o.member(w));
    for (std::int64_t len : {25LL, 50LL, 100LL, 150LL})
      for (int k = 0; k < 100; ++k) {
        auto w = corpus::random_word(p.alphabet.symbols, len, rng);
        CHECK(interp::accepts(p, w) == o.member(w));
      }
  }
}

TEST_CASE("positive samplers yield members of the requested length") {
  Prng rng(15);
  for (const auto& id : corpus::oracle_ids()) {
    const auto& o = corpus::oracle(id);
    for (std::int64_t len : {12LL, 24LL, 25LL, 60LL, 150LL}) {
      auto w = o.sample_positive(len, rng);
      if (!w) continue;  // no member of this length (or predict-only oracle)
      CHECK(static_cast<std::int64_t>(w->size()) == len);
      CHECK(o.member(*w));
    }
  }
}

TEST_CASE("samplers cover sparse languages at every feasible length") {
  Prng rng(16);
  CHECK(corpus::oracle("aaaa_star").sample_positive(100, rng).has_value());
  CHECK_FALSE(corpus::oracle("aaaa_star").sample_positive(150, rng).has_value());
  CHECK(corpus::oracle("aa_star").sample_positive(150, rng).has_value());
  CHECK(corpus::oracle("anbncn").sample_positive(150, rng).has_value());
  CHECK(corpus::oracle("dyck1").sample_positive(150, rng).has_value());
  CHECK(corpus::oracle("d12").sample_positive(150, rng).has_value());
}

TEST_CASE("manifest references existing programs and oracles") {
  for (const auto& row : corpus::manifest()) {
    if (!row.program.empty()) CHECK(corpus::stdlib().count(row.program) == 1);
    if (!row.oracle_id.empty()) CHECK_NOTHROW(corpus::oracle(row.oracle_id));
  }
  CHECK(corpus::stdlib().size() >= 20);
  std::string text = corpus::manifest_text();
  CHECK(text.find("tomita3") != std::string::npos);
}

TEST_CASE("programs flagged [] use no positional constructs (static audit)") {
  for (const auto& row : corpus::manifest()) {
    if (row.empty_flag != corpus::Flag::Yes || row.program.empty()) continue;
    const auto& p = corpus::stdlib_program(row.program);
    CAPTURE(row.program);
    CHECK_FALSE(dsl::uses_positional(p));
    CHECK_FALSE(dsl::uses_local(p));
  }
}

TEST_CASE("task generation is deterministic and structured") {
  for (const auto& id : corpus::task_ids()) {
    std::int64_t len = std::max<std::int64_t>(corpus::task_min_len(id), 6);
    if (id == "binary_majority_interleave") len = 6;
    auto a = corpus::gen_task(id, len, 42);
    auto b = corpus::gen_task(id, len, 42);
    CHECK(a.tokens == b.tokens);
    CHECK(a.supervised_begin == b.supervised_begin);
    auto c = corpus::gen_task(id, len, 43);
    CHECK(a.tokens.size() >= 3);
    CHECK(a.tokens.front() == "SOS");
    CHECK(a.tokens.back() == "EOS");
    CHECK(a.supervised_end == a.tokens.size());
    CHECK(a.supervised_begin < a.supervised_end);
    (void)c;
  }
}

TEST_CASE("parity instances have the advertised shape") {
  auto inst = corpus::gen_task("parity", 5, 7);
  REQUIRE(inst.tokens.size() == 9);  // SOS b b b b b SEP label EOS
  CHECK(inst.tokens[0] == "SOS");
  CHECK(inst.tokens[6] == "SEP");
  std::int64_t ones = 0;
  for (int k = 1; k <= 5; ++k) {
    CHECK((inst.tokens[static_cast<std::size_t>(k)] == "0" ||
           inst.tokens[static_cast<std::size_t>(k)] == "1"));
    ones += inst.tokens[static_cast<std::size_t>(k)] == "1";
  }
  CHECK(inst.tokens[7] == (ones % 2 == 0 ? "e" : "o"));
  CHECK(inst.tokens[8] == "EOS");
  auto zero = corpus::gen_task("parity", 0, 7);
  CHECK(zero.tokens == std::vector<std::string>{"SOS", "SEP", "e", "EOS"});
}

TEST_CASE("addition instances compute binary sums") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    auto inst = corpus::gen_task("addition", 10, seed);
    auto plus = std::find(inst.tokens.begin(), inst.tokens.end(), "+");
    auto eq = std::find(inst.tokens.begin(), inst.tokens.end(), "=");
    REQUIRE(plus != inst.tokens.end());
    REQUIRE(eq != inst.tokens.end());
    auto value = [](auto begin, auto end) {
      unsigned long long v = 0;
      for (auto it = begin; it != end; ++it) v = v * 2 + (*it == "1" ? 1 : 0);
      return v;
    };
    unsigned long long a = value(inst.tokens.begin() + 1, plus);
    unsigned long long b = value(plus + 1, eq);
    unsigned long long s = value(eq + 1, inst.tokens.end() - 1);
    CHECK(a + b == s);
    // LEN covers both operands plus the '+' and '=' tokens
    std::int64_t len1 = (plus - inst.tokens.begin()) - 1;
    std::int64_t len2 = eq - plus - 1;
    CHECK(len1 >= 1);
    CHECK(len2 >= 1);
    CHECK(len1 + len2 + 2 == inst.len);
  }
}

TEST_CASE("copy and sort instances") {
  auto cu = corpus::gen_task("copy_unique", 8, 3);
  std::vector<std::string> in(cu.tokens.begin() + 1, cu.tokens.begin() + 9);
  std::vector<std::string> out(cu.tokens.begin() + 10, cu.tokens.end() - 1);
  CHECK(in == out);
  std::set<std::string> distinct(in.begin(), in.end());
  CHECK(distinct.size() == in.size());

  auto so = corpus::gen_task("sort", 8, 3);
  std::vector<std::string> sin(so.tokens.begin() + 1, so.tokens.begin() + 9);
  std::vector<std::string> sout(so.tokens.begin() + 10, so.tokens.end() - 1);
  std::sort(sin.begin(), sin.end(),
            [](const std::string& x, const std::string& y) { return std::stoi(x) < std::stoi(y); });
  CHECK(sin == sout);

  auto cr = corpus::gen_task("copy_repeat", 6, 3);
  std::vector<std::string> rin(cr.tokens.begin() + 1, cr.tokens.begin() + 7);
  std::vector<std::string> rout(cr.tokens.begin() + 8, cr.tokens.end() - 1);
  CHECK(rin == rout);
}

TEST_CASE("interleave instances carry one label per stream") {
  auto inst = corpus::gen_task("binary_majority_interleave", 9, 5);
  REQUIRE(inst.tokens.size() == 1 + 9 + 1 + 3 + 1);
  for (int s = 0; s < 3; ++s) {
    std::int64_t ones = 0, zeros = 0;
    for (int k = 0; k < 3; ++k) {
      const auto& bit = inst.tokens[static_cast<std::size_t>(1 + 3 * k + s)];
      (bit == "1" ? ones : zeros) += 1;
    }
    const auto& label = inst.tokens[static_cast<std::size_t>(11 + s)];
    CHECK(label == (ones > zeros ? "1" : "0"));
    CHECK(ones != zeros);
  }
}

TEST_CASE("task length floor is enforced") {
  CHECK_THROWS_AS(corpus::gen_task("addition", 3, 1), LenBelowMinimum);
  CHECK_THROWS_AS(corpus::gen_task("binary_majority_interleave", 1, 1), LenBelowMinimum);
  CHECK_NOTHROW(corpus::gen_task("parity", 0, 1));
  CHECK_THROWS_AS(corpus::gen_task("unknown_task", 5, 1), UnknownLanguage);
}

TEST_CASE("task instance text export is one token per line") {
  auto inst = corpus::gen_task("binary_majority", 3, 9);
  std::string text = inst.to_text();
  CHECK(std::count(text.begin(), text.end(), '\n') ==
        static_cast<std::ptrdiff_t>(inst.tokens.size()));
  CHECK(text.rfind("SOS\n", 0) == 0);
}
