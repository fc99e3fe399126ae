#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "crasp/errors.hpp"

namespace crasp::dsl {

// ---------------------------------------------------------------------------
// Domain types

struct Alphabet {
  std::vector<std::string> symbols;  // ordered, distinct, "$" excluded

  bool contains(std::string_view s) const {
    for (const auto& t : symbols)
      if (t == s) return true;
    return false;
  }
  int index_of(std::string_view s) const {
    for (std::size_t k = 0; k < symbols.size(); ++k)
      if (symbols[k] == s) return static_cast<int>(k);
    return -1;
  }
  bool operator==(const Alphabet&) const = default;
};

// phi(i) = true iff i = residue (mod modulus)
struct PeriodicRelation {
  std::int64_t modulus = 1;
  std::int64_t residue = 0;
  bool operator==(const PeriodicRelation&) const = default;
};

// psi(i,j) = true iff j - i in offsets. Positive offsets are legal but
// vacuous under the j <= i mask.
struct LocalRelation {
  std::vector<std::int64_t> offsets;
  bool operator==(const LocalRelation&) const = default;
};

enum class Sort { Boolean, Count };

inline const char* sort_name(Sort s) { return s == Sort::Boolean ? "Boolean" : "Count"; }

// --- operation bodies (core constructs plus documented sugar)

struct Initial {  // P(i) := Q_sigma(i)
  std::string symbol;
  bool operator==(const Initial&) const = default;
};
struct Not {
  std::string ref;
  bool operator==(const Not&) const = default;
};
struct And {
  std::string lhs, rhs;
  bool operator==(const And&) const = default;
};
struct TrueConst {
  bool operator==(const TrueConst&) const = default;
};
struct Positional {
  PeriodicRelation rel;
  bool operator==(const Positional&) const = default;
};

enum class CmpOp { Leq, Geq, Eq, Lt };  // Geq/Eq/Lt are sugar
struct Compare {
  CmpOp op = CmpOp::Leq;
  std::string lhs, rhs;  // count-op references
  bool operator==(const Compare&) const = default;
};

// Predicate counted by a Count op: a named Boolean op, or an inline Q_sigma.
struct CountPred {
  std::string name;       // op name or symbol
  bool is_symbol = false;  // true: Q_<name>(j)
  bool operator==(const CountPred&) const = default;
};

struct Count {
  bool strict = false;                  // sugar: mask j < i (Top mask only)
  std::optional<LocalRelation> local;   // nullopt = Top mask
  CountPred pred;
  bool operator==(const Count&) const = default;
};

struct Conditional {  // if P(i) then C1(i) else C2(i)
  std::string cond, then_ref, else_ref;
  bool operator==(const Conditional&) const = default;
};
struct Add {
  std::string lhs, rhs;
  bool operator==(const Add&) const = default;
};
struct Sub {
  std::string lhs, rhs;
  bool operator==(const Sub&) const = default;
};
struct OneConst {
  bool operator==(const OneConst&) const = default;
};
struct LiteralConst {  // sugar: non-negative integer literal
  std::int64_t value = 0;
  bool operator==(const LiteralConst&) const = default;
};

using Body = std::variant<Initial, Not, And, TrueConst, Positional, Compare, Count, Conditional,
                          Add, Sub, OneConst, LiteralConst>;

Sort sort_of(const Body& b);

struct Operation {
  std::string name;
  Body body;
  Sort sort() const { return sort_of(body); }
  bool operator==(const Operation&) const = default;
};

struct Program {
  std::string name;
  Alphabet alphabet;
  std::vector<Operation> ops;
  std::string accept;  // Boolean op name; parser defaults it to the last Boolean op
  std::vector<std::pair<std::string, std::string>> predict;  // symbol -> Boolean op
  bool empty_accepts = false;

  const Operation* find(std::string_view n) const {
    for (const auto& op : ops)
      if (op.name == n) return &op;
    return nullptr;
  }
  int index_of(std::string_view n) const {
    for (std::size_t k = 0; k < ops.size(); ++k)
      if (ops[k].name == n) return static_cast<int>(k);
    return -1;
  }
  bool operator==(const Program&) const = default;
};

// ---------------------------------------------------------------------------
// Operations

Program parse(std::string_view source);
std::string print(const Program& p);

// Throws SortError / UnknownReference / DuplicateName / ReservedSymbol /
// InvalidProgram on the first violation found.
void validate(const Program& p);

// Rewrites all sugar into core constructs; total on valid programs and
// idempotent. Preserves the names and values of all original operations.
Program desugar(const Program& p);

bool is_core(const Program& p);
bool uses_positional(const Program& p);
bool uses_local(const Program& p);

}  // namespace crasp::dsl
