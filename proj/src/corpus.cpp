#include "crasp/corpus.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "crasp/errors.hpp"

namespace crasp::corpus {

// ---------------------------------------------------------------------------
// DFA machinery

int Dfa::step(int state, const std::string& sym) const {
  for (std::size_t k = 0; k < alphabet.size(); ++k)
    if (alphabet[k] == sym) return delta[static_cast<std::size_t>(state)][k];
  throw SymbolNotInAlphabet(0, sym);
}

bool Dfa::member(const Word& w) const {
  int s = start;
  for (const auto& sym : w) s = step(s, sym);
  return accepting[static_cast<std::size_t>(s)];
}

std::vector<bool> Dfa::live() const {
  const std::size_t n = accepting.size();
  std::vector<bool> reach(n, false);
  for (std::size_t s = 0; s < n; ++s) reach[s] = accepting[s];
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t s = 0; s < n; ++s) {
      if (reach[s]) continue;
      for (std::size_t a = 0; a < alphabet.size(); ++a)
        if (reach[static_cast<std::size_t>(delta[s][a])]) {
          reach[s] = true;
          changed = true;
          break;
        }
    }
  }
  return reach;
}

bool LanguageOracle::member(const Word& w) const {
  if (dfa) return dfa->member(w);
  return membership_fn(w);
}

bool LanguageOracle::has_legal_next() const { return dfa.has_value() || bool(legal_next_fn); }

std::set<std::string> LanguageOracle::legal_next(const Word& prefix) const {
  if (dfa) {
    std::vector<bool> live = dfa->live();
    int s = dfa->start;
    for (const auto& sym : prefix) s = dfa->step(s, sym);
    std::set<std::string> out;
    for (std::size_t a = 0; a < dfa->alphabet.size(); ++a) {
      int t = dfa->delta[static_cast<std::size_t>(s)][a];
      if (live[static_cast<std::size_t>(t)]) out.insert(dfa->alphabet[a]);
    }
    return out;
  }
  if (legal_next_fn) return legal_next_fn(prefix);
  throw UnknownLanguage(id + " (no legal-next oracle)");
}

std::optional<Word> LanguageOracle::sample_positive(std::int64_t len, Prng& rng) const {
  if (positive_sampler) return positive_sampler(len, rng);
  return std::nullopt;
}

namespace {

// uniform member of a given length via path counting (double-precision DP);
// returns nothing when the language has no member of that length
std::optional<Word> dfa_sample(const Dfa& d, std::int64_t len, Prng& rng) {
  const std::size_t n = d.accepting.size();
  const std::size_t A = d.alphabet.size();
  // counts[k][s]: number of accepted completions of length k from state s
  std::vector<std::vector<double>> counts(static_cast<std::size_t>(len + 1),
                                          std::vector<double>(n, 0.0));
  for (std::size_t s = 0; s < n; ++s) counts[0][s] = d.accepting[s] ? 1.0 : 0.0;
  for (std::int64_t k = 1; k <= len; ++k)
    for (std::size_t s = 0; s < n; ++s) {
      double total = 0.0;
      for (std::size_t a = 0; a < A; ++a)
        total += counts[static_cast<std::size_t>(k - 1)]
                       [static_cast<std::size_t>(d.delta[s][a])];
      counts[static_cast<std::size_t>(k)][s] = total;
    }
  if (counts[static_cast<std::size_t>(len)][static_cast<std::size_t>(d.start)] <= 0.0)
    return std::nullopt;
  Word w;
  int s = d.start;
  for (std::int64_t k = len; k >= 1; --k) {
    double total = counts[static_cast<std::size_t>(k)][static_cast<std::size_t>(s)];
    double pick = rng.uniform() * total;
    std::size_t chosen = A;  // fallback: last viable
    double acc = 0.0;
    for (std::size_t a = 0; a < A; ++a) {
      double c = counts[static_cast<std::size_t>(k - 1)]
                       [static_cast<std::size_t>(d.delta[static_cast<std::size_t>(s)][a])];
      if (c <= 0.0) continue;
      acc += c;
      chosen = a;
      if (pick < acc) break;
    }
    if (chosen == A) return std::nullopt;  // numeric corner; treat as absent
    w.push_back(d.alphabet[chosen]);
    s = d.delta[static_cast<std::size_t>(s)][chosen];
  }
  return w;
}

std::int64_t count_sym(const Word& w, const std::string& s) {
  return std::count(w.begin(), w.end(), s);
}

// rejection sampler against a predicate over uniform words
std::optional<Word> rejection_sample(const std::vector<std::string>& alphabet, std::int64_t len,
                                     Prng& rng, const std::function<bool(const Word&)>& pred,
                                     int tries = 4000) {
  for (int k = 0; k < tries; ++k) {
    Word w = random_word(alphabet, len, rng);
    if (pred(w)) return w;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Oracle table

std::map<std::string, LanguageOracle> build_oracles() {
  std::map<std::string, LanguageOracle> out;
  auto add = [&](LanguageOracle o) { out[o.id] = std::move(o); };

  const std::vector<std::string> bin = {"0", "1"};
  const std::vector<std::string> ab = {"a", "b"};

  // --- Tomita grammars over {0,1}
  {
    LanguageOracle o;  // Tomita 1: 1*
    o.id = "tomita1";
    o.alphabet = bin;
    o.dfa = Dfa{bin, 0, {{1, 0}, {1, 1}}, {true, false}};
    add(o);
  }
  {
    LanguageOracle o;  // Tomita 2: (10)*
    o.id = "tomita2";
    o.alphabet = bin;
    o.dfa = Dfa{bin, 0, {{2, 1}, {0, 2}, {2, 2}}, {true, false, false}};
    add(o);
  }
  {
    // Tomita 3: no odd-length run of 1s immediately followed by an odd-length
    // run of 0s (run-based reading used by the benchmark implementations;
    // boundary-of-string runs count). States: 0 idle/safe-0s, 1 odd 1s,
    // 2 even 1s, 3 dangerous 0s odd, 4 dangerous 0s even, 5 dead.
    LanguageOracle o;
    o.id = "tomita3";
    o.alphabet = bin;
    o.dfa = Dfa{bin,
                0,
                {{0, 1}, {3, 2}, {0, 1}, {4, 5}, {3, 1}, {5, 5}},
                {true, true, true, false, true, false}};
    add(o);
  }
  {
    LanguageOracle o;  // Tomita 4: no 000 substring; states = trailing zeros
    o.id = "tomita4";
    o.alphabet = bin;
    o.dfa = Dfa{bin, 0, {{1, 0}, {2, 0}, {3, 0}, {3, 3}}, {true, true, true, false}};
    add(o);
  }
  {
    LanguageOracle o;  // Tomita 5: even length and even number of 1s
    o.id = "tomita5";
    o.alphabet = bin;
    // state = (len parity, ones parity): 00,01,10,11
    o.dfa = Dfa{bin, 0, {{2, 3}, {3, 2}, {0, 1}, {1, 0}}, {true, false, false, false}};
    add(o);
  }
  {
    LanguageOracle o;  // Tomita 6: (#0 - #1) divisible by 3
    o.id = "tomita6";
    o.alphabet = bin;
    o.dfa = Dfa{bin, 0, {{1, 2}, {2, 0}, {0, 1}}, {true, false, false}};
    add(o);
  }
  {
    LanguageOracle o;  // Tomita 7: 0*1*0*1*
    o.id = "tomita7";
    o.alphabet = bin;
    o.dfa = Dfa{bin, 0, {{0, 1}, {2, 1}, {2, 3}, {4, 3}, {4, 4}},
                {true, true, true, true, false}};
    add(o);
  }

  // --- Dyck-1 with depth bound k over {a,b}: D_k
  auto dyck_depth = [&](int k, const std::string& id) {
    LanguageOracle o;
    o.id = id;
    o.alphabet = ab;
    Dfa d;
    d.alphabet = ab;
    d.start = 0;
    const int dead = k + 1;
    for (int s = 0; s <= k + 1; ++s) {
      int on_a = (s <= k - 1) ? s + 1 : dead;
      int on_b = (s >= 1 && s <= k) ? s - 1 : dead;
      if (s == dead) on_a = on_b = dead;
      d.delta.push_back({on_a, on_b});
      d.accepting.push_back(s == 0);
    }
    o.dfa = std::move(d);
    add(o);
  };
  dyck_depth(2, "d2");
  dyck_depth(3, "d3");
  dyck_depth(4, "d4");
  dyck_depth(12, "d12");

  // --- periodic languages over {a,b}
  {
    LanguageOracle o;  // (aa)*
    o.id = "aa_star";
    o.alphabet = ab;
    o.dfa = Dfa{ab, 0, {{1, 2}, {0, 2}, {2, 2}}, {true, false, false}};
    add(o);
  }
  {
    LanguageOracle o;  // (aaaa)*
    o.id = "aaaa_star";
    o.alphabet = ab;
    o.dfa = Dfa{ab, 0, {{1, 4}, {2, 4}, {3, 4}, {0, 4}, {4, 4}},
                {true, false, false, false, false}};
    add(o);
  }
  {
    LanguageOracle o;  // (abab)*
    o.id = "abab_star";
    o.alphabet = ab;
    o.dfa = Dfa{ab, 0, {{1, 4}, {4, 2}, {3, 4}, {4, 0}, {4, 4}},
                {true, false, false, false, false}};
    add(o);
  }

  // --- star-free benchmark languages
  {
    LanguageOracle o;  // aa*bb*cc*dd*ee*
    o.id = "aabbccddee";
    o.alphabet = {"a", "b", "c", "d", "e"};
    const int X = 6;  // dead
    o.dfa = Dfa{o.alphabet,
                0,
                {
                    {1, X, X, X, X},  // start: need an a
                    {1, 2, X, X, X},  // in a's
                    {X, 2, 3, X, X},  // in b's
                    {X, X, 3, 4, X},  // in c's
                    {X, X, X, 4, 5},  // in d's
                    {X, X, X, X, 5},  // in e's (accepting)
                    {X, X, X, X, X},
                },
                {false, false, false, false, false, true, false}};
    add(o);
  }
  {
    LanguageOracle o;  // {a,b}* d {b,c}*
    o.id = "abdbc";
    o.alphabet = {"a", "b", "c", "d"};
    o.dfa = Dfa{o.alphabet,
                0,
                {
                    {0, 0, 2, 1},  // before d: a,b loop; c dead; d advances
                    {2, 1, 1, 2},  // after d: b,c loop; a,d dead
                    {2, 2, 2, 2},
                },
                {false, true, false}};
    add(o);
  }
  {
    LanguageOracle o;  // {0,1,2}* 0 2*
    o.id = "zot02";
    o.alphabet = {"0", "1", "2"};
    // state 1 = currently "0 then 2s" suffix holds
    o.dfa = Dfa{o.alphabet, 0, {{1, 0, 0}, {1, 0, 1}}, {false, true}};
    add(o);
  }
  {
    LanguageOracle o;  // PARITY: even number of 1s
    o.id = "parity";
    o.alphabet = bin;
    o.dfa = Dfa{bin, 0, {{0, 1}, {1, 0}}, {true, false}};
    add(o);
  }

  // --- languages of the worked programs
  {
    LanguageOracle o;  // Sigma* a Sigma*
    o.id = "exists_a";
    o.alphabet = ab;
    o.dfa = Dfa{ab, 0, {{1, 0}, {1, 1}}, {false, true}};
    add(o);
  }
  {
    LanguageOracle o;  // subsequence a,b,a
    o.id = "piecewise_aba";
    o.alphabet = ab;
    o.dfa = Dfa{ab, 0, {{1, 0}, {1, 2}, {3, 2}, {3, 3}}, {false, false, false, true}};
    add(o);
  }
  {
    LanguageOracle o;  // substring "ab"
    o.id = "substring_ab";
    o.alphabet = ab;
    o.dfa = Dfa{ab, 0, {{1, 0}, {1, 2}, {2, 2}}, {false, false, true}};
    add(o);
  }

  // --- counter languages (closed-form)
  {
    LanguageOracle o;  // MAJORITY: #1 >= #0
    o.id = "majority";
    o.alphabet = bin;
    o.membership_fn = [](const Word& w) { return count_sym(w, "1") >= count_sym(w, "0"); };
    o.legal_next_fn = [](const Word&) { return std::set<std::string>{"0", "1"}; };
    o.positive_sampler = [bin](std::int64_t len, Prng& rng) {
      return rejection_sample(bin, len, rng, [](const Word& w) {
        return count_sym(w, "1") >= count_sym(w, "0");
      });
    };
    add(o);
  }
  {
    LanguageOracle o;  // strictly more 1s than 0s
    o.id = "binary_majority";
    o.alphabet = bin;
    o.membership_fn = [](const Word& w) { return count_sym(w, "1") > count_sym(w, "0"); };
    o.legal_next_fn = [](const Word&) { return std::set<std::string>{"0", "1"}; };
    o.positive_sampler = [bin](std::int64_t len, Prng& rng) -> std::optional<Word> {
      if (len == 0) return std::nullopt;
      return rejection_sample(bin, len, rng, [](const Word& w) {
        return count_sym(w, "1") > count_sym(w, "0");
      });
    };
    add(o);
  }
  {
    LanguageOracle o;  // Dyck-1 over {a,b} with a = open, b = close
    o.id = "dyck1";
    o.alphabet = ab;
    auto depth_ok = [](const Word& w, std::int64_t* final_depth) {
      std::int64_t d = 0;
      for (const auto& s : w) {
        d += s == "a" ? 1 : -1;
        if (d < 0) return false;
      }
      *final_depth = d;
      return true;
    };
    o.membership_fn = [depth_ok](const Word& w) {
      std::int64_t d = 0;
      return depth_ok(w, &d) && d == 0;
    };
    o.legal_next_fn = [depth_ok](const Word& w) -> std::set<std::string> {
      std::int64_t d = 0;
      if (!depth_ok(w, &d)) return {};
      std::set<std::string> out = {"a"};
      if (d > 0) out.insert("b");
      return out;
    };
    o.positive_sampler = [](std::int64_t len, Prng& rng) -> std::optional<Word> {
      if (len % 2 != 0) return std::nullopt;
      // uniform Dyck path via completion counts
      const std::int64_t n = len;
      // paths[k][d]: balanced completions of length k from depth d
      std::vector<std::vector<double>> paths(static_cast<std::size_t>(n + 1));
      for (std::int64_t k = 0; k <= n; ++k)
        paths[static_cast<std::size_t>(k)].assign(static_cast<std::size_t>(n + 2), 0.0);
      paths[0][0] = 1.0;
      for (std::int64_t k = 1; k <= n; ++k)
        for (std::int64_t d = 0; d <= n; ++d) {
          double t = 0.0;
          if (d + 1 <= n) t += paths[static_cast<std::size_t>(k - 1)][static_cast<std::size_t>(d + 1)];
          if (d >= 1) t += paths[static_cast<std::size_t>(k - 1)][static_cast<std::size_t>(d - 1)];
          paths[static_cast<std::size_t>(k)][static_cast<std::size_t>(d)] = t;
        }
      Word w;
      std::int64_t depth = 0;
      for (std::int64_t k = n; k >= 1; --k) {
        double up = depth + 1 <= n
                        ? paths[static_cast<std::size_t>(k - 1)][static_cast<std::size_t>(depth + 1)]
                        : 0.0;
        double total = up + (depth >= 1 ? paths[static_cast<std::size_t>(k - 1)]
                                               [static_cast<std::size_t>(depth - 1)]
                                        : 0.0);
        if (total <= 0.0) return std::nullopt;
        if (rng.uniform() * total < up) {
          w.emplace_back("a");
          ++depth;
        } else {
          w.emplace_back("b");
          --depth;
        }
      }
      return w;
    };
    add(o);
  }
  {
    LanguageOracle o;  // a^n b^n c^n
    o.id = "anbncn";
    o.alphabet = {"a", "b", "c"};
    o.membership_fn = [](const Word& w) {
      std::size_t n = w.size() / 3;
      if (w.size() % 3 != 0) return false;
      for (std::size_t k = 0; k < w.size(); ++k) {
        const char* want = k < n ? "a" : (k < 2 * n ? "b" : "c");
        if (w[k] != want) return false;
      }
      return true;
    };
    o.legal_next_fn = [](const Word& w) -> std::set<std::string> {
      std::size_t i = 0;
      while (i < w.size() && w[i] == "a") ++i;
      std::size_t j = i;
      while (j < w.size() && w[j] == "b") ++j;
      std::size_t k = j;
      while (k < w.size() && w[k] == "c") ++k;
      if (k != w.size()) return {};
      std::size_t na = i, nb = j - i, nc = k - j;
      if (nb == 0 && nc == 0) return na == 0 ? std::set<std::string>{"a"}
                                             : std::set<std::string>{"a", "b"};
      if (nc == 0) return nb < na ? std::set<std::string>{"b"} : std::set<std::string>{"c"};
      return nc < na && nb == na
                 ? std::set<std::string>{"c"}
                 : (nc == na && nb == na ? std::set<std::string>{} : std::set<std::string>{});
    };
    o.positive_sampler = [](std::int64_t len, Prng&) -> std::optional<Word> {
      if (len % 3 != 0) return std::nullopt;
      Word w;
      std::int64_t n = len / 3;
      for (std::int64_t k = 0; k < n; ++k) w.emplace_back("a");
      for (std::int64_t k = 0; k < n; ++k) w.emplace_back("b");
      for (std::int64_t k = 0; k < n; ++k) w.emplace_back("c");
      return w;
    };
    add(o);
  }
  {
    LanguageOracle o;  // 'a' strictly most frequent
    o.id = "majority_task";
    o.alphabet = {"a", "b", "c"};
    o.membership_fn = [](const Word& w) {
      auto a = count_sym(w, "a");
      return a > count_sym(w, "b") && a > count_sym(w, "c");
    };
    o.legal_next_fn = [](const Word&) { return std::set<std::string>{"a", "b", "c"}; };
    o.positive_sampler = [](std::int64_t len, Prng& rng) -> std::optional<Word> {
      if (len == 0) return std::nullopt;
      return rejection_sample({"a", "b", "c"}, len, rng, [](const Word& w) {
        auto a = count_sym(w, "a");
        return a > count_sym(w, "b") && a > count_sym(w, "c");
      });
    };
    add(o);
  }
  {
    LanguageOracle o;  // interleaved binary majority, 3 streams
    o.id = "bmi3";
    o.alphabet = bin;
    auto stream_wins = [](const Word& w) {
      if (w.size() % 3 != 0) return false;
      for (int s = 0; s < 3; ++s) {
        std::int64_t ones = 0, zeros = 0;
        for (std::size_t k = static_cast<std::size_t>(s); k < w.size(); k += 3)
          (w[k] == "1" ? ones : zeros) += 1;
        if (ones <= zeros) return false;
      }
      return true;
    };
    o.membership_fn = stream_wins;
    o.legal_next_fn = [](const Word&) { return std::set<std::string>{"0", "1"}; };
    o.positive_sampler = [bin, stream_wins](std::int64_t len, Prng& rng) -> std::optional<Word> {
      if (len % 3 != 0 || len == 0) return std::nullopt;
      return rejection_sample(bin, len, rng, stream_wins, 20000);
    };
    add(o);
  }

  {
    // Eq. 5 support sets over {a,b,c}: sigma is possible at position i iff
    // the bigram (x_i, sigma) occurred at some k < i. Predict-only oracle
    // used to check the induction-head programs step by step.
    LanguageOracle o;
    o.id = "bigram_support_abc";
    o.alphabet = {"a", "b", "c"};
    o.membership_fn = [](const Word&) { return false; };
    o.legal_next_fn = [](const Word& w) {
      std::set<std::string> outset;
      if (w.empty()) return outset;
      for (std::size_t k = 0; k + 1 < w.size(); ++k)
        if (w[k] == w.back()) outset.insert(w[k + 1]);
      return outset;
    };
    add(o);
  }

  // generic DFA positive samplers
  for (auto& [id, o] : out)
    if (o.dfa && !o.positive_sampler) {
      const Dfa* d = &*o.dfa;
      o.positive_sampler = [d](std::int64_t len, Prng& rng) { return dfa_sample(*d, len, rng); };
    }
  return out;
}

std::map<std::string, LanguageOracle>& oracle_table() {
  static std::map<std::string, LanguageOracle> table = build_oracles();
  return table;
}

}  // namespace

const std::vector<std::string>& oracle_ids() {
  static std::vector<std::string> ids = [] {
    std::vector<std::string> v;
    for (const auto& [id, o] : oracle_table()) v.push_back(id);
    return v;
  }();
  return ids;
}

const LanguageOracle& oracle(const std::string& id) {
  auto it = oracle_table().find(id);
  if (it == oracle_table().end()) throw UnknownLanguage(id);
  return it->second;
}

bool membership(const LanguageOracle& o, const Word& w) { return o.member(w); }

std::set<std::string> legal_next(const LanguageOracle& o, const Word& prefix) {
  return o.legal_next(prefix);
}

Word random_word(const std::vector<std::string>& alphabet, std::int64_t len, Prng& rng) {
  Word w;
  w.reserve(static_cast<std::size_t>(len));
  for (std::int64_t k = 0; k < len; ++k)
    w.push_back(alphabet[static_cast<std::size_t>(rng.below(alphabet.size()))]);
  return w;
}

// ---------------------------------------------------------------------------
// Program sources

namespace {

std::map<std::string, std::string> build_sources() {
  std::map<std::string, std::string> src;

  src["majority"] = R"(# at least as many 1s as 0s
program majority over {0,1} {
  C1(i) := count[j<=i] Q_1(j);
  C0(i) := count[j<=i] Q_0(j);
  M(i)  := C1(i) >= C0(i);
  accept M;
  empty accepts;
}
)";

  src["binary_majority"] = R"(# strictly more 1s than 0s
program binary_majority over {0,1} {
  C1(i) := count[j<=i] Q_1(j);
  C0(i) := count[j<=i] Q_0(j);
  M(i)  := C0(i) < C1(i);
  accept M;
}
)";

  src["dyck1"] = R"(# balanced brackets, a = open, b = close
program dyck1 over {a,b} {
  Co(i) := count[j<=i] Q_a(j);
  Cc(i) := count[j<=i] Q_b(j);
  V(i)  := Co(i) < Cc(i);
  CV(i) := count[j<=i] V(j);
  M(i)  := CV(i) = 0;
  B(i)  := Co(i) = Cc(i);
  D(i)  := M(i) and B(i);
  accept D;
  empty accepts;
}
)";

  src["anbncn"] = R"(program anbncn over {a,b,c} {
  Ca(i)  := count[j<=i] Q_a(j);
  Cb(i)  := count[j<=i] Q_b(j);
  Cc(i)  := count[j<=i] Q_c(j);
  A(i)   := Cb(i) + Cc(i) = 0;
  B(i)   := Cc(i) = 0;
  QaA(i) := Q_a(i) and A(i);
  QbB(i) := Q_b(i) and B(i);
  CA(i)  := count[j<=i] QaA(j);
  CB(i)  := count[j<=i] QbB(j);
  Ga(i)  := CA(i) = Ca(i);
  Gb(i)  := CB(i) = Cb(i);
  Gab(i) := Ca(i) = Cb(i);
  Gbc(i) := Cb(i) = Cc(i);
  L(i)   := Ga(i) and Gb(i) and Gab(i) and Gbc(i);
  accept L;
  empty accepts;
}
)";

  src["exists_a"] = R"(# existential macro: some position holds an a
program exists_a over {a,b} {
  C(i) := count[j<=i] Q_a(j);
  P(i) := C(i) >= 1;
  accept P;
}
)";

  src["piecewise_aba"] = R"(# piecewise testable: subsequence a, b, a
program piecewise_aba over {a,b} {
  C1(i) := count[j<=i] Q_a(j);
  L1(i) := C1(i) >= 1;
  T2(i) := Q_b(i) and L1(i);
  C2(i) := count[j<=i] T2(j);
  L2(i) := C2(i) >= 1;
  T3(i) := Q_a(i) and L2(i);
  C3(i) := count[j<=i] T3(j);
  L3(i) := C3(i) >= 1;
  accept L3;
}
)";

  src["tomita1"] = R"(# 1*
program tomita1 over {0,1} {
  C0(i) := count[j<=i] Q_0(j);
  L(i)  := C0(i) = 0;
  accept L;
  empty accepts;
}
)";

  src["tomita2"] = R"(# (10)*: every prefix alternates starting with 1, string ends balanced
program tomita2 over {0,1} {
  C1(i)  := count[j<=i] Q_1(j);
  C0(i)  := count[j<=i] Q_0(j);
  BAL(i) := C1(i) = C0(i);
  UP(i)  := C1(i) = C0(i) + 1;
  OK0(i) := Q_0(i) and BAL(i);
  OK1(i) := Q_1(i) and UP(i);
  BAD(i) := not OK0(i) and not OK1(i);
  CB(i)  := count[j<=i] BAD(j);
  L(i)   := CB(i) = 0 and BAL(i);
  accept L;
  empty accepts;
}
)";

  src["tomita4"] = R"(# no 000 substring
program tomita4 over {0,1} {
  CZ(i) := count[j<=i, j in {i-1,i-2}] Q_0(j);
  V(i)  := Q_0(i) and CZ(i) >= 2;
  CV(i) := count[j<=i] V(j);
  L(i)  := CV(i) = 0;
  accept L;
  empty accepts;
}
)";

  src["tomita7"] = R"(# 0*1*0*1*: no subsequence 1,0,1,0
program tomita7 over {0,1} {
  C1(i) := count[j<=i] Q_1(j);
  S1(i) := C1(i) >= 1;
  T2(i) := Q_0(i) and S1(i);
  C2(i) := count[j<=i] T2(j);
  S2(i) := C2(i) >= 1;
  T3(i) := Q_1(i) and S2(i);
  C3(i) := count[j<=i] T3(j);
  S3(i) := C3(i) >= 1;
  T4(i) := Q_0(i) and S3(i);
  C4(i) := count[j<=i] T4(j);
  S4(i) := C4(i) >= 1;
  L(i)  := not S4(i);
  accept L;
  empty accepts;
}
)";

  src["d2"] = dyck_depth_source(2, "d2");
  src["d3"] = dyck_depth_source(3, "d3");
  src["d4"] = dyck_depth_source(4, "d4");
  src["d12"] = dyck_depth_source(12, "d12");

  src["aa_star"] = R"(# (aa)*: only a's, even position at the end
program aa_star over {a,b} {
  NA(i) := not Q_a(i);
  CN(i) := count[j<=i] NA(j);
  A(i)  := CN(i) = 0;
  E(i)  := pos mod(2,0)(i);
  D(i)  := E(i) and A(i);
  accept D;
  empty accepts;
}
)";

  src["aaaa_star"] = R"(# (aaaa)*
program aaaa_star over {a,b} {
  NA(i) := not Q_a(i);
  CN(i) := count[j<=i] NA(j);
  A(i)  := CN(i) = 0;
  E(i)  := pos mod(4,0)(i);
  D(i)  := E(i) and A(i);
  accept D;
  empty accepts;
}
)";

  src["abab_star"] = R"(# (abab)*
program abab_star over {a,b} {
  ODD(i) := pos mod(2,1)(i);
  EVN(i) := pos mod(2,0)(i);
  OKA(i) := ODD(i) and Q_a(i);
  OKB(i) := EVN(i) and Q_b(i);
  NOK(i) := not OKA(i) and not OKB(i);
  CN(i)  := count[j<=i] NOK(j);
  CL(i)  := CN(i) = 0;
  M4(i)  := pos mod(4,0)(i);
  L(i)   := CL(i) and M4(i);
  accept L;
  empty accepts;
}
)";

  src["aabbccddee"] = R"(# aa*bb*cc*dd*ee*
program aabbccddee over {a,b,c,d,e} {
  Ca(i) := count[j<=i] Q_a(j);
  Cb(i) := count[j<=i] Q_b(j);
  Cc(i) := count[j<=i] Q_c(j);
  Cd(i) := count[j<=i] Q_d(j);
  Ce(i) := count[j<=i] Q_e(j);
  HAa(i) := Ca(i) >= 1;
  HAb(i) := Cb(i) >= 1;
  HAc(i) := Cc(i) >= 1;
  HAd(i) := Cd(i) >= 1;
  HAe(i) := Ce(i) >= 1;
  BadA(i) := Q_a(i) and (Cb(i) + Cc(i) + Cd(i) + Ce(i) >= 1);
  BadB(i) := Q_b(i) and (Cc(i) + Cd(i) + Ce(i) >= 1);
  BadC(i) := Q_c(i) and (Cd(i) + Ce(i) >= 1);
  BadD(i) := Q_d(i) and Ce(i) >= 1;
  B1(i) := not BadA(i) and not BadB(i);
  B2(i) := not BadC(i) and not BadD(i);
  OK(i) := B1(i) and B2(i);
  NOK(i) := not OK(i);
  CN(i) := count[j<=i] NOK(j);
  Clean(i) := CN(i) = 0;
  H1(i) := HAa(i) and HAb(i);
  H2(i) := HAc(i) and HAd(i);
  H3(i) := H1(i) and H2(i);
  H4(i) := H3(i) and HAe(i);
  L(i) := Clean(i) and H4(i);
  accept L;
}
)";

  src["abdbc"] = R"(# {a,b}* d {b,c}*
program abdbc over {a,b,c,d} {
  Cd(i) := count[j<=i] Q_d(j);
  One(i) := Cd(i) = 1;
  BadC(i) := Q_c(i) and Cd(i) = 0;
  BadA(i) := Q_a(i) and Cd(i) >= 1;
  Bad(i) := not (not BadC(i) and not BadA(i));
  CB(i) := count[j<=i] Bad(j);
  L(i) := CB(i) = 0 and One(i);
  accept L;
}
)";

  src["majority_task"] = R"(# a strictly most frequent
program majority_task over {a,b,c} {
  Ca(i) := count[j<=i] Q_a(j);
  Cb(i) := count[j<=i] Q_b(j);
  Cc(i) := count[j<=i] Q_c(j);
  WB(i) := Cb(i) < Ca(i);
  WC(i) := Cc(i) < Ca(i);
  W(i)  := WB(i) and WC(i);
  accept W;
}
)";

  src["bmi3"] = R"(# interleaved binary majority, 3 streams by position mod 3
program bmi3 over {0,1} {
  P1(i) := pos mod(3,1)(i);
  P2(i) := pos mod(3,2)(i);
  P0(i) := pos mod(3,0)(i);
  A1(i) := Q_1(i) and P1(i);
  Z1(i) := Q_0(i) and P1(i);
  A2(i) := Q_1(i) and P2(i);
  Z2(i) := Q_0(i) and P2(i);
  A0(i) := Q_1(i) and P0(i);
  Z0(i) := Q_0(i) and P0(i);
  CA1(i) := count[j<=i] A1(j);
  CZ1(i) := count[j<=i] Z1(j);
  CA2(i) := count[j<=i] A2(j);
  CZ2(i) := count[j<=i] Z2(j);
  CA0(i) := count[j<=i] A0(j);
  CZ0(i) := count[j<=i] Z0(j);
  M1(i) := CZ1(i) < CA1(i);
  M2(i) := CZ2(i) < CA2(i);
  M0(i) := CZ0(i) < CA0(i);
  W1(i) := M1(i) and M2(i);
  W2(i) := W1(i) and M0(i);
  L(i)  := W2(i) and P0(i);
  accept L;
}
)";

  src["substring_ab"] = R"(# Sigma* ab Sigma*
program substring_ab over {a,b} {
  Cam(i) := count[j<=i, j==i-1] Q_a(j);
  Pam(i) := Cam(i) >= 1;
  Qab(i) := Q_b(i) and Pam(i);
  Cab(i) := count[j<=i] Qab(j);
  L(i)   := Cab(i) >= 1;
  accept L;
}
)";

  src["induction_all"] = induction_all_source({"a", "b", "c"}, "induction_all");
  src["induction_all_sep"] = induction_all_source({"a", "b", "c", "_"}, "induction_all_sep");
  src["induction_argmax"] = induction_argmax_source({"a", "b", "c"}, "induction_argmax");

  src["sort3"] = R"(# step-wise sorting: next symbol is the smallest input symbol
# greater than the current one; after the largest comes the separator
program sort3 over {a,b,c,s} {
  CS(i)  := count[j<=i] Q_s(j);
  BEF(i) := CS(i) = 0;
  IA(i)  := Q_a(i) and BEF(i);
  IB(i)  := Q_b(i) and BEF(i);
  IC(i)  := Q_c(i) and BEF(i);
  CIA(i) := count[j<=i] IA(j);
  CIB(i) := count[j<=i] IB(j);
  CIC(i) := count[j<=i] IC(j);
  HA(i)  := CIA(i) >= 1;
  HB(i)  := CIB(i) >= 1;
  HC(i)  := CIC(i) >= 1;
  NXa(i) := Q_s(i) and HA(i);
  Xb1(i) := Q_s(i) and (not HA(i) and HB(i));
  Xb2(i) := Q_a(i) and HB(i);
  NXb(i) := not (not Xb1(i) and not Xb2(i));
  Xc1(i) := Q_s(i) and (not HA(i) and (not HB(i) and HC(i)));
  Xc2(i) := Q_a(i) and (not HB(i) and HC(i));
  Xc3(i) := Q_b(i) and HC(i);
  Xc12(i) := not (not Xc1(i) and not Xc2(i));
  NXc(i) := not (not Xc12(i) and not Xc3(i));
  Xs1(i) := Q_a(i) and (not HB(i) and not HC(i));
  Xs2(i) := Q_b(i) and not HC(i);
  Xs3(i) := Q_c(i);
  Xs12(i) := not (not Xs1(i) and not Xs2(i));
  NXs(i) := not (not Xs12(i) and not Xs3(i));
  accept NXs;
  predict a -> NXa, b -> NXb, c -> NXc, s -> NXs;
}
)";

  return src;
}

}  // namespace

std::string dyck_depth_source(int depth, const std::string& name) {
  std::ostringstream out;
  out << "# Dyck-1 with nesting depth at most " << depth << "\n";
  out << "program " << name << " over {a,b} {\n";
  out << "  Ca(i) := count[j<=i] Q_a(j);\n";
  out << "  Cb(i) := count[j<=i] Q_b(j);\n";
  out << "  NEG(i) := Ca(i) < Cb(i);\n";
  out << "  DEEP(i) := Ca(i) - Cb(i) >= " << depth + 1 << ";\n";
  out << "  BAD(i) := not NEG(i) and not DEEP(i);\n";
  out << "  V(i) := not BAD(i);\n";
  out << "  CV(i) := count[j<=i] V(j);\n";
  out << "  BAL(i) := Ca(i) = Cb(i);\n";
  out << "  L(i) := CV(i) = 0 and BAL(i);\n";
  out << "  accept L;\n";
  out << "  empty accepts;\n";
  out << "}\n";
  return out.str();
}

namespace {

std::string sanitize(const std::string& sym) {
  std::string out;
  for (char c : sym)
    if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_')
      out.push_back(c);
  return out.empty() ? "u" : out;
}

// OR of the named Boolean operations via De Morgan, emitting helper ops
void emit_or(std::ostringstream& out, const std::string& result,
             const std::vector<std::string>& terms) {
  std::vector<std::string> negs;
  for (std::size_t k = 0; k < terms.size(); ++k) {
    std::string n = result + "_n" + std::to_string(k);
    out << "  " << n << "(i) := not " << terms[k] << "(i);\n";
    negs.push_back(n);
  }
  std::string acc = negs[0];
  for (std::size_t k = 1; k < negs.size(); ++k) {
    std::string n = k + 1 == negs.size() ? result + "_all" : result + "_a" + std::to_string(k);
    out << "  " << n << "(i) := " << acc << "(i) and " << negs[k] << "(i);\n";
    acc = n;
  }
  out << "  " << result << "(i) := not " << (negs.size() == 1 ? negs[0] : acc) << "(i);\n";
}

}  // namespace

std::string induction_all_source(const std::vector<std::string>& symbols,
                                 const std::string& name) {
  std::ostringstream out;
  out << "# induction head: next symbol is possible iff the bigram occurred before\n";
  out << "program " << name << " over {";
  for (std::size_t k = 0; k < symbols.size(); ++k) out << (k ? "," : "") << symbols[k];
  out << "} {\n";
  for (const auto& t : symbols) {
    std::string st = sanitize(t);
    out << "  CP_" << st << "(i) := count[j<=i, j==i-1] Q_" << t << "(j);\n";
    out << "  PR_" << st << "(i) := CP_" << st << "(i) >= 1;\n";
  }
  for (const auto& t : symbols)
    for (const auto& s : symbols) {
      std::string st = sanitize(t), ss = sanitize(s);
      out << "  BG_" << st << "_" << ss << "(i) := Q_" << s << "(i) and PR_" << st << "(i);\n";
      out << "  CB_" << st << "_" << ss << "(i) := count[j<=i] BG_" << st << "_" << ss
          << "(j);\n";
      out << "  EX_" << st << "_" << ss << "(i) := CB_" << st << "_" << ss << "(i) >= 1;\n";
    }
  for (const auto& s : symbols) {
    std::string ss = sanitize(s);
    std::vector<std::string> terms;
    for (const auto& t : symbols) {
      std::string st = sanitize(t);
      std::string term = "TQ_" + st + "_" + ss;
      out << "  " << term << "(i) := Q_" << t << "(i) and EX_" << st << "_" << ss << "(i);\n";
      terms.push_back(term);
    }
    emit_or(out, "NX_" + ss, terms);
  }
  out << "  accept NX_" << sanitize(symbols.back()) << ";\n";
  out << "  predict ";
  for (std::size_t k = 0; k < symbols.size(); ++k)
    out << (k ? ", " : "") << symbols[k] << " -> NX_" << sanitize(symbols[k]);
  out << ";\n";
  out << "}\n";
  return out.str();
}

std::string induction_argmax_source(const std::vector<std::string>& symbols,
                                    const std::string& name) {
  std::ostringstream out;
  out << "# induction head, argmax form: predict the most frequent successor bigram\n";
  out << "program " << name << " over {";
  for (std::size_t k = 0; k < symbols.size(); ++k) out << (k ? "," : "") << symbols[k];
  out << "} {\n";
  for (const auto& t : symbols) {
    std::string st = sanitize(t);
    out << "  CP_" << st << "(i) := count[j<=i, j==i-1] Q_" << t << "(j);\n";
    out << "  PR_" << st << "(i) := CP_" << st << "(i) >= 1;\n";
  }
  for (const auto& t : symbols)
    for (const auto& s : symbols) {
      std::string st = sanitize(t), ss = sanitize(s);
      out << "  BG_" << st << "_" << ss << "(i) := Q_" << s << "(i) and PR_" << st << "(i);\n";
      out << "  CB_" << st << "_" << ss << "(i) := count[j<=i] BG_" << st << "_" << ss
          << "(j);\n";
    }
  for (const auto& s : symbols) {
    std::string ss = sanitize(s);
    std::vector<std::string> terms;
    for (const auto& t : symbols) {
      std::string st = sanitize(t);
      // MR_t_s_u: bigram (t,s) at least as frequent as (t,u)
      std::string acc;
      for (const auto& u : symbols) {
        if (u == s) continue;
        std::string su = sanitize(u);
        std::string cmp = "MR_" + st + "_" + ss + "_" + su;
        out << "  " << cmp << "(i) := CB_" << st << "_" << su << "(i) <= CB_" << st << "_"
            << ss << "(i);\n";
        if (acc.empty()) {
          acc = cmp;
        } else {
          std::string n = "MA_" + st + "_" + ss + "_" + su;
          out << "  " << n << "(i) := " << acc << "(i) and " << cmp << "(i);\n";
          acc = n;
        }
      }
      std::string term = "TQ_" + st + "_" + ss;
      if (acc.empty())
        out << "  " << term << "(i) := Q_" << t << "(i);\n";
      else
        out << "  " << term << "(i) := Q_" << t << "(i) and " << acc << "(i);\n";
      terms.push_back(term);
    }
    emit_or(out, "NX_" + ss, terms);
  }
  out << "  accept NX_" << sanitize(symbols.back()) << ";\n";
  out << "  predict ";
  for (std::size_t k = 0; k < symbols.size(); ++k)
    out << (k ? ", " : "") << symbols[k] << " -> NX_" << sanitize(symbols[k]);
  out << ";\n";
  out << "}\n";
  return out.str();
}

const std::map<std::string, std::string>& stdlib_sources() {
  static std::map<std::string, std::string> src = build_sources();
  return src;
}

const std::map<std::string, dsl::Program>& stdlib() {
  static std::map<std::string, dsl::Program> progs = [] {
    std::map<std::string, dsl::Program> out;
    for (const auto& [name, src] : stdlib_sources()) out[name] = dsl::parse(src);
    return out;
  }();
  return progs;
}

const dsl::Program& stdlib_program(const std::string& name) {
  auto it = stdlib().find(name);
  if (it == stdlib().end()) throw UnknownLanguage(name);
  return it->second;
}

// ---------------------------------------------------------------------------
// Manifest

const char* flag_name(Flag f) {
  switch (f) {
    case Flag::Yes: return "yes";
    case Flag::No: return "no";
    case Flag::NoneFound: return "none_found";
    case Flag::NA: return "-";
  }
  return "-";
}

const std::vector<ManifestRow>& manifest() {
  static const std::vector<ManifestRow> rows = {
      // finite-state benchmark languages
      {"tomita1", "language", Flag::Yes, Flag::Yes, "tomita1", "tomita1", ""},
      {"tomita2", "language", Flag::Yes, Flag::Yes, "tomita2", "tomita2", ""},
      {"tomita3", "language", Flag::No, Flag::No, "", "tomita3",
       "run-based reading of the no-odd-1s-then-odd-0s condition; "
       "string-boundary runs count"},
      {"tomita4", "language", Flag::No, Flag::Yes, "tomita4", "tomita4", ""},
      {"tomita5", "language", Flag::No, Flag::No, "", "tomita5", ""},
      {"tomita6", "language", Flag::No, Flag::No, "", "tomita6", ""},
      {"tomita7", "language", Flag::Yes, Flag::Yes, "tomita7", "tomita7",
       "0*1*0*1* (avoid subsequence 1,0,1,0)"},
      {"d2", "language", Flag::Yes, Flag::Yes, "d2", "d2", ""},
      {"d3", "language", Flag::Yes, Flag::Yes, "d3", "d3", ""},
      {"d4", "language", Flag::Yes, Flag::Yes, "d4", "d4", ""},
      {"d12", "language", Flag::Yes, Flag::Yes, "d12", "d12", ""},
      {"parity", "language", Flag::No, Flag::No, "", "parity", ""},
      {"aa_star", "language", Flag::No, Flag::Yes, "aa_star", "aa_star", ""},
      {"aaaa_star", "language", Flag::No, Flag::Yes, "aaaa_star", "aaaa_star", ""},
      {"abab_star", "language", Flag::No, Flag::Yes, "abab_star", "abab_star", ""},
      {"aabbccddee", "language", Flag::Yes, Flag::Yes, "aabbccddee", "aabbccddee", ""},
      {"abdbc", "language", Flag::Yes, Flag::Yes, "abdbc", "abdbc", ""},
      {"zot02", "language", Flag::No, Flag::No, "", "zot02", "equivalent to Sigma* b e*"},
      // worked examples
      {"majority", "language", Flag::Yes, Flag::Yes, "majority", "majority", ""},
      {"dyck1", "language", Flag::Yes, Flag::Yes, "dyck1", "dyck1", ""},
      {"anbncn", "language", Flag::Yes, Flag::Yes, "anbncn", "anbncn", ""},
      {"exists_a", "language", Flag::Yes, Flag::Yes, "exists_a", "exists_a", ""},
      {"piecewise_aba", "language", Flag::Yes, Flag::Yes, "piecewise_aba", "piecewise_aba", ""},
      {"substring_ab", "language", Flag::NoneFound, Flag::Yes, "substring_ab", "substring_ab",
       "local relation required for the bigram test"},
      // algorithmic tasks
      {"binary_majority", "task", Flag::Yes, Flag::Yes, "binary_majority", "binary_majority",
       ""},
      {"binary_majority_interleave", "task", Flag::NoneFound, Flag::Yes, "bmi3", "bmi3",
       "periodic relations separate the interleaved streams"},
      {"majority", "task", Flag::Yes, Flag::Yes, "majority_task", "majority_task", ""},
      {"sort", "task", Flag::Yes, Flag::Yes, "sort3", "",
       "step-wise sorting as a predict program; repeated application sorts"},
      {"copy_unique", "task", Flag::No, Flag::Yes, "induction_all", "",
       "realized by the induction-head program and the generate loop"},
      {"copy_repeat", "task", Flag::No, Flag::No, "", "", ""},
      {"parity", "task", Flag::No, Flag::No, "", "parity", ""},
      {"addition", "task", Flag::No, Flag::No, "", "", ""},
  };
  return rows;
}

std::string manifest_text() {
  std::ostringstream out;
  out << "id | kind | crasp[] | crasp[periodic,local] | program | oracle | note\n";
  for (const auto& r : manifest()) {
    out << r.id << " | " << r.kind << " | " << flag_name(r.empty_flag) << " | "
        << flag_name(r.pl_flag) << " | " << (r.program.empty() ? "-" : r.program) << " | "
        << (r.oracle_id.empty() ? "-" : r.oracle_id) << " | " << (r.note.empty() ? "-" : r.note)
        << "\n";
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Algorithmic task instances

std::string TaskInstance::to_text() const {
  std::ostringstream out;
  for (const auto& t : tokens) out << t << "\n";
  return out.str();
}

const std::vector<std::string>& task_ids() {
  static const std::vector<std::string> ids = {
      "binary_majority", "binary_majority_interleave", "majority", "sort",
      "copy_unique",     "copy_repeat",                "parity",   "addition"};
  return ids;
}

std::int64_t task_min_len(const std::string& id) {
  if (id == "parity") return 0;
  if (id == "binary_majority_interleave") return 3;
  if (id == "addition") return 4;
  if (id == "binary_majority" || id == "majority" || id == "sort" || id == "copy_unique" ||
      id == "copy_repeat")
    return 1;
  throw UnknownLanguage(id);
}

namespace {

std::uint64_t mix_seed(const std::string& id, std::int64_t len, std::uint64_t seed) {
  std::uint64_t h = 1469598103934665603ULL;
  for (char c : id) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  h ^= static_cast<std::uint64_t>(len) * 0x9e3779b97f4a7c15ULL;
  return h ^ seed;
}

std::vector<std::string> untied_bits(std::int64_t len, Prng& rng) {
  while (true) {
    std::vector<std::string> bits;
    std::int64_t ones = 0;
    for (std::int64_t k = 0; k < len; ++k) {
      bool one = rng.coin();
      ones += one;
      bits.push_back(one ? "1" : "0");
    }
    if (2 * ones != len) return bits;
  }
}

std::vector<std::string> numeric_vocab(int n) {
  std::vector<std::string> v;
  for (int k = 1; k <= n; ++k) v.push_back(std::to_string(k));
  return v;
}

}  // namespace

TaskInstance gen_task(const std::string& id, std::int64_t len, std::uint64_t seed) {
  std::int64_t lmin = task_min_len(id);
  if (len < lmin) throw LenBelowMinimum(id, len, lmin);
  Prng rng(mix_seed(id, len, seed));
  TaskInstance inst;
  inst.task = id;
  inst.len = len;
  auto& tk = inst.tokens;
  tk.push_back("SOS");

  if (id == "binary_majority") {
    auto bits = untied_bits(len, rng);
    std::int64_t ones = std::count(bits.begin(), bits.end(), std::string("1"));
    tk.insert(tk.end(), bits.begin(), bits.end());
    tk.push_back("SEP");
    inst.supervised_begin = tk.size();
    tk.push_back(2 * ones > len ? "1" : "0");
    tk.push_back("EOS");
    inst.supervised_end = tk.size();
  } else if (id == "binary_majority_interleave") {
    if (len % 3 != 0) throw InvalidProgram("binary_majority_interleave: LEN must be a multiple of 3");
    std::int64_t n = len / 3;
    std::vector<std::vector<std::string>> streams;
    std::vector<std::string> labels;
    for (int s = 0; s < 3; ++s) {
      streams.push_back(untied_bits(n, rng));
      std::int64_t ones =
          std::count(streams.back().begin(), streams.back().end(), std::string("1"));
      labels.push_back(2 * ones > n ? "1" : "0");
    }
    for (std::int64_t k = 0; k < n; ++k)
      for (int s = 0; s < 3; ++s) tk.push_back(streams[static_cast<std::size_t>(s)]
                                                      [static_cast<std::size_t>(k)]);
    tk.push_back("SEP");
    inst.supervised_begin = tk.size();
    for (const auto& l : labels) tk.push_back(l);
    tk.push_back("EOS");
    inst.supervised_end = tk.size();
  } else if (id == "majority") {
    std::vector<std::string> vocab;
    for (char c = 'a'; c <= 'z'; ++c) vocab.emplace_back(1, c);
    while (true) {
      std::vector<std::string> seq = random_word(vocab, len, rng);
      std::map<std::string, std::int64_t> freq;
      for (const auto& s : seq) ++freq[s];
      std::string best;
      std::int64_t best_n = 0;
      bool unique = false;
      for (const auto& [s, n] : freq) {
        if (n > best_n) {
          best = s;
          best_n = n;
          unique = true;
        } else if (n == best_n) {
          unique = false;
        }
      }
      if (!unique) continue;
      tk.insert(tk.end(), seq.begin(), seq.end());
      tk.push_back("SEP");
      inst.supervised_begin = tk.size();
      tk.push_back(best);
      tk.push_back("EOS");
      inst.supervised_end = tk.size();
      break;
    }
  } else if (id == "sort" || id == "copy_unique") {
    auto vocab = numeric_vocab(150);
    if (len > static_cast<std::int64_t>(vocab.size()))
      throw InvalidProgram(id + ": LEN exceeds the distinct-token vocabulary");
    // sample without replacement
    std::vector<std::string> pool = vocab;
    std::vector<std::string> seq;
    for (std::int64_t k = 0; k < len; ++k) {
      std::size_t pick = static_cast<std::size_t>(rng.below(pool.size()));
      seq.push_back(pool[pick]);
      pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(pick));
    }
    std::vector<std::string> outseq = seq;
    if (id == "sort")
      std::sort(outseq.begin(), outseq.end(),
                [](const std::string& x, const std::string& y) {
                  return std::stoi(x) < std::stoi(y);
                });
    tk.insert(tk.end(), seq.begin(), seq.end());
    tk.push_back("SEP");
    inst.supervised_begin = tk.size();
    tk.insert(tk.end(), outseq.begin(), outseq.end());
    tk.push_back("EOS");
    inst.supervised_end = tk.size();
  } else if (id == "copy_repeat") {
    std::vector<std::string> seq = random_word({"a", "b"}, len, rng);
    tk.insert(tk.end(), seq.begin(), seq.end());
    tk.push_back("SEP");
    inst.supervised_begin = tk.size();
    tk.insert(tk.end(), seq.begin(), seq.end());
    tk.push_back("EOS");
    inst.supervised_end = tk.size();
  } else if (id == "parity") {
    // number of 1s uniform given LEN
    std::int64_t ones = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(len + 1)));
    std::vector<std::string> bits(static_cast<std::size_t>(len), "0");
    // choose `ones` positions without replacement
    std::vector<std::int64_t> idx(static_cast<std::size_t>(len));
    std::iota(idx.begin(), idx.end(), 0);
    for (std::int64_t k = 0; k < ones; ++k) {
      std::size_t pick = static_cast<std::size_t>(rng.below(idx.size()));
      bits[static_cast<std::size_t>(idx[pick])] = "1";
      idx.erase(idx.begin() + static_cast<std::ptrdiff_t>(pick));
    }
    tk.insert(tk.end(), bits.begin(), bits.end());
    tk.push_back("SEP");
    inst.supervised_begin = tk.size();
    tk.push_back(ones % 2 == 0 ? "e" : "o");
    tk.push_back("EOS");
    inst.supervised_end = tk.size();
  } else if (id == "addition") {
    // LEN covers both operands plus '+' and '='
    std::int64_t len1 = 1 + static_cast<std::int64_t>(rng.below(
                                static_cast<std::uint64_t>(len - 3)));
    std::int64_t len2 = len - 2 - len1;
    auto bits = [&](std::int64_t n) {
      std::vector<std::string> v;
      for (std::int64_t k = 0; k < n; ++k) v.push_back(rng.coin() ? "1" : "0");
      return v;
    };
    auto a = bits(len1), b = bits(len2);
    auto value = [](const std::vector<std::string>& v) {
      unsigned long long x = 0;
      for (const auto& s : v) x = x * 2 + (s == "1" ? 1 : 0);
      return x;
    };
    unsigned long long sum = value(a) + value(b);
    std::vector<std::string> out;
    if (sum == 0) {
      out.push_back("0");
    } else {
      while (sum > 0) {
        out.push_back(sum % 2 ? "1" : "0");
        sum /= 2;
      }
      std::reverse(out.begin(), out.end());
    }
    tk.insert(tk.end(), a.begin(), a.end());
    tk.push_back("+");
    tk.insert(tk.end(), b.begin(), b.end());
    tk.push_back("=");
    inst.supervised_begin = tk.size();
    tk.insert(tk.end(), out.begin(), out.end());
    tk.push_back("EOS");
    inst.supervised_end = tk.size();
  } else {
    throw UnknownLanguage(id);
  }
  return inst;
}

}  // namespace crasp::corpus
