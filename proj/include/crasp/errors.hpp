#pragma once

#include <stdexcept>
#include <string>

namespace crasp {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised by the .crasp parser; positions are 1-based.
struct SyntaxError : Error {
  int line = 0;
  int col = 0;
  std::string expected;
  SyntaxError(int line_, int col_, std::string expected_, const std::string& got)
      : Error("syntax error at " + std::to_string(line_) + ":" + std::to_string(col_) +
              ": expected " + expected_ + ", got " + got),
        line(line_), col(col_), expected(std::move(expected_)) {}
};

struct SortError : Error {
  std::string op, expected, found;
  SortError(std::string op_, std::string expected_, std::string found_)
      : Error("sort error in '" + op_ + "': expected " + expected_ + ", found " + found_),
        op(std::move(op_)), expected(std::move(expected_)), found(std::move(found_)) {}
};

struct UnknownReference : Error {
  std::string op, ref;
  UnknownReference(std::string op_, std::string ref_)
      : Error("unknown reference '" + ref_ + "' in '" + op_ + "'"),
        op(std::move(op_)), ref(std::move(ref_)) {}
};

struct DuplicateName : Error {
  std::string op;
  explicit DuplicateName(std::string op_)
      : Error("duplicate operation name '" + op_ + "'"), op(std::move(op_)) {}
};

struct ReservedSymbol : Error {
  explicit ReservedSymbol(const std::string& where)
      : Error("reserved SOS symbol \"$\" used in " + where) {}
};

struct InvalidProgram : Error {
  using Error::Error;
};

struct SymbolNotInAlphabet : Error {
  std::size_t position;
  std::string symbol;
  SymbolNotInAlphabet(std::size_t pos, std::string sym)
      : Error("symbol '" + sym + "' at position " + std::to_string(pos) + " not in alphabet"),
        position(pos), symbol(std::move(sym)) {}
};

struct NoPredictDeclaration : Error {
  NoPredictDeclaration() : Error("program has no predict declaration") {}
};

struct NonFinite : Error {
  NonFinite() : Error("non-finite value in fixed-precision rounding") {}
};

struct MalformedInput : Error {
  using Error::Error;
};

struct DimensionMismatch : Error {
  using Error::Error;
};

struct SchemaError : Error {
  std::string path;
  SchemaError(std::string path_, const std::string& what_)
      : Error("schema error at " + path_ + ": " + what_), path(std::move(path_)) {}
};

struct UnknownLanguage : Error {
  explicit UnknownLanguage(const std::string& id) : Error("unknown language '" + id + "'") {}
};

struct LenBelowMinimum : Error {
  explicit LenBelowMinimum(const std::string& task, long long len, long long lmin)
      : Error("task '" + task + "': LEN " + std::to_string(len) + " below minimum " +
              std::to_string(lmin)) {}
};

struct CapExceeded : Error {
  using Error::Error;
};

}  // namespace crasp
