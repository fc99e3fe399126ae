#include "crasp/dsl.hpp"

#include <algorithm>
#include <cctype>
#include <memory>
#include <set>
#include <sstream>

namespace crasp::dsl {

Sort sort_of(const Body& b) {
  struct V {
    Sort operator()(const Initial&) const { return Sort::Boolean; }
    Sort operator()(const Not&) const { return Sort::Boolean; }
    Sort operator()(const And&) const { return Sort::Boolean; }
    Sort operator()(const TrueConst&) const { return Sort::Boolean; }
    Sort operator()(const Positional&) const { return Sort::Boolean; }
    Sort operator()(const Compare&) const { return Sort::Boolean; }
    Sort operator()(const Count&) const { return Sort::Count; }
    Sort operator()(const Conditional&) const { return Sort::Count; }
    Sort operator()(const Add&) const { return Sort::Count; }
    Sort operator()(const Sub&) const { return Sort::Count; }
    Sort operator()(const OneConst&) const { return Sort::Count; }
    Sort operator()(const LiteralConst&) const { return Sort::Count; }
  };
  return std::visit(V{}, b);
}

// ---------------------------------------------------------------------------
// Lexer

namespace {

struct Token {
  enum Kind { Ident, Int, Punct, End } kind = End;
  std::string text;
  std::int64_t ival = 0;
  int line = 1, col = 1;
};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) { advance(); }

  const Token& peek() const { return tok_; }
  Token take() {
    Token t = tok_;
    advance();
    return t;
  }

 private:
  void advance() {
    skip_ws();
    tok_ = Token{};
    tok_.line = line_;
    tok_.col = col_;
    if (pos_ >= src_.size()) {
      tok_.kind = Token::End;
      tok_.text = "<end of input>";
      return;
    }
    char c = src_[pos_];
    if (ident_start(c)) {
      std::size_t start = pos_;
      while (pos_ < src_.size() && ident_char(src_[pos_])) bump();
      tok_.kind = Token::Ident;
      tok_.text = std::string(src_.substr(start, pos_ - start));
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t start = pos_;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) bump();
      tok_.kind = Token::Int;
      tok_.text = std::string(src_.substr(start, pos_ - start));
      tok_.ival = std::stoll(tok_.text);
      return;
    }
    // multi-char punctuation first
    static const char* two[] = {":=", "<=", ">=", "==", "->"};
    for (const char* p : two) {
      if (src_.compare(pos_, 2, p) == 0) {
        tok_.kind = Token::Punct;
        tok_.text = p;
        bump();
        bump();
        return;
      }
    }
    static const std::string singles = "{}()[],;+-=<";
    if (singles.find(c) != std::string::npos) {
      tok_.kind = Token::Punct;
      tok_.text = std::string(1, c);
      bump();
      return;
    }
    if (c == '$') {  // lexes as a symbol so the validator can reject it by name
      tok_.kind = Token::Ident;
      tok_.text = "$";
      bump();
      return;
    }
    throw SyntaxError(line_, col_, "a token", "'" + std::string(1, c) + "'");
  }

  void skip_ws() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n') bump();
      } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        bump();
      } else {
        break;
      }
    }
  }

  void bump() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1, col_ = 1;
  Token tok_;
};

// ---------------------------------------------------------------------------
// Parser with expression lowering

struct Expr;
using ExprPtr = std::unique_ptr<Expr>;

struct Expr {
  enum Kind {
    Ref,     // name
    QTest,   // Q_<symbol>(i)
    True,
    PosRel,  // pos mod(m,r)(i)
    NotE,
    AndE,
    CmpE,
    AddE,
    SubE,
    IntE,
    CountE,
    IfE,
  } kind;
  std::string name;  // Ref/QTest symbol
  PeriodicRelation rel{};
  CmpOp cmp = CmpOp::Leq;
  std::int64_t ival = 0;
  Count count{};  // CountE payload
  ExprPtr a, b, c;
  int line = 0, col = 0;
};

class Parser {
 public:
  explicit Parser(std::string_view src) : lex_(src) {}

  Program run() {
    expect_ident("program");
    prog_.name = expect_name("program name");
    expect_ident("over");
    expect_punct("{");
    while (true) {
      prog_.alphabet.symbols.push_back(expect_symbol());
      if (peek_is_punct(",")) {
        lex_.take();
        continue;
      }
      break;
    }
    expect_punct("}");
    expect_punct("{");
    while (!peek_is_punct("}")) statement();
    expect_punct("}");
    if (lex_.peek().kind != Token::End) fail("end of input");
    if (prog_.accept.empty()) {
      for (const auto& op : prog_.ops)
        if (op.sort() == Sort::Boolean) prog_.accept = op.name;
      // leave empty if no Boolean op exists; validate() reports it
    }
    return std::move(prog_);
  }

 private:
  [[noreturn]] void fail(const std::string& expected) {
    const Token& t = lex_.peek();
    throw SyntaxError(t.line, t.col, expected, "'" + t.text + "'");
  }

  bool peek_is_punct(const char* p) const {
    return lex_.peek().kind == Token::Punct && lex_.peek().text == p;
  }
  bool peek_is_ident(const char* s) const {
    return lex_.peek().kind == Token::Ident && lex_.peek().text == s;
  }
  void expect_punct(const char* p) {
    if (!peek_is_punct(p)) fail(std::string("'") + p + "'");
    lex_.take();
  }
  void expect_ident(const char* s) {
    if (!peek_is_ident(s)) fail(std::string("'") + s + "'");
    lex_.take();
  }
  std::string expect_name(const char* what) {
    if (lex_.peek().kind != Token::Ident) fail(what);
    return lex_.take().text;
  }
  // alphabet symbols and predict symbols may be identifiers or bare integers
  std::string expect_symbol() {
    const Token& t = lex_.peek();
    if (t.kind == Token::Ident || t.kind == Token::Int) return lex_.take().text;
    fail("an alphabet symbol");
  }

  void statement() {
    if (peek_is_ident("accept")) {
      lex_.take();
      prog_.accept = expect_name("accept target");
      expect_punct(";");
      return;
    }
    if (peek_is_ident("predict")) {
      lex_.take();
      while (true) {
        std::string sym = expect_symbol();
        expect_punct("->");
        std::string target = expect_name("predict target");
        prog_.predict.emplace_back(sym, target);
        if (peek_is_punct(",")) {
          lex_.take();
          continue;
        }
        break;
      }
      expect_punct(";");
      return;
    }
    if (peek_is_ident("empty")) {
      lex_.take();
      expect_ident("accepts");
      expect_punct(";");
      prog_.empty_accepts = true;
      return;
    }
    // op definition: NAME ( i ) := expr ;
    std::string name = expect_name("an operation definition");
    expect_punct("(");
    expect_ident("i");
    expect_punct(")");
    expect_punct(":=");
    synth_counter_ = 0;
    current_op_ = name;
    ExprPtr e = parse_and();
    expect_punct(";");
    Body body = lower_root(*e);
    names_.insert(name);
    prog_.ops.push_back(Operation{std::move(name), std::move(body)});
  }

  // --- expression grammar: and > not > cmp > add > primary
  ExprPtr parse_and() {
    ExprPtr e = parse_not();
    while (peek_is_ident("and")) {
      lex_.take();
      ExprPtr rhs = parse_not();
      ExprPtr n = std::make_unique<Expr>();
      n->kind = Expr::AndE;
      n->a = std::move(e);
      n->b = std::move(rhs);
      e = std::move(n);
    }
    return e;
  }

  ExprPtr parse_not() {
    if (peek_is_ident("not")) {
      Token t = lex_.take();
      ExprPtr n = std::make_unique<Expr>();
      n->kind = Expr::NotE;
      n->line = t.line;
      n->col = t.col;
      n->a = parse_not();
      return n;
    }
    return parse_cmp();
  }

  ExprPtr parse_cmp() {
    ExprPtr e = parse_add();
    CmpOp op;
    if (peek_is_punct("<=")) op = CmpOp::Leq;
    else if (peek_is_punct(">=")) op = CmpOp::Geq;
    else if (peek_is_punct("=")) op = CmpOp::Eq;
    else if (peek_is_punct("<")) op = CmpOp::Lt;
    else return e;
    lex_.take();
    ExprPtr rhs = parse_add();
    ExprPtr n = std::make_unique<Expr>();
    n->kind = Expr::CmpE;
    n->cmp = op;
    n->a = std::move(e);
    n->b = std::move(rhs);
    return n;
  }

  ExprPtr parse_add() {
    ExprPtr e = parse_primary();
    while (peek_is_punct("+") || peek_is_punct("-")) {
      bool add = peek_is_punct("+");
      lex_.take();
      ExprPtr rhs = parse_primary();
      ExprPtr n = std::make_unique<Expr>();
      n->kind = add ? Expr::AddE : Expr::SubE;
      n->a = std::move(e);
      n->b = std::move(rhs);
      e = std::move(n);
    }
    return e;
  }

  ExprPtr parse_primary() {
    const Token& t = lex_.peek();
    ExprPtr n = std::make_unique<Expr>();
    n->line = t.line;
    n->col = t.col;
    if (peek_is_punct("(")) {
      lex_.take();
      ExprPtr inner = parse_and();
      expect_punct(")");
      return inner;
    }
    if (t.kind == Token::Int) {
      n->kind = Expr::IntE;
      n->ival = lex_.take().ival;
      return n;
    }
    if (t.kind != Token::Ident) fail("an expression");
    if (t.text == "true") {
      lex_.take();
      n->kind = Expr::True;
      return n;
    }
    if (t.text == "pos") {
      lex_.take();
      expect_ident("mod");
      expect_punct("(");
      n->rel.modulus = expect_int();
      expect_punct(",");
      n->rel.residue = expect_int();
      expect_punct(")");
      expect_punct("(");
      expect_ident("i");
      expect_punct(")");
      n->kind = Expr::PosRel;
      return n;
    }
    if (t.text == "count") {
      lex_.take();
      n->kind = Expr::CountE;
      n->count = parse_count();
      return n;
    }
    if (t.text == "if") {
      lex_.take();
      n->kind = Expr::IfE;
      n->a = parse_and();
      expect_ident("then");
      n->b = parse_and();
      expect_ident("else");
      n->c = parse_and();
      return n;
    }
    // Q_<sym>(i) or NAME(i)
    std::string id = lex_.take().text;
    expect_punct("(");
    expect_ident("i");
    expect_punct(")");
    if (id.starts_with("Q_")) {
      n->kind = Expr::QTest;
      n->name = id.substr(2);
    } else {
      n->kind = Expr::Ref;
      n->name = id;
    }
    return n;
  }

  std::int64_t expect_int() {
    if (lex_.peek().kind != Token::Int) fail("an integer");
    return lex_.take().ival;
  }

  Count parse_count() {
    Count c;
    expect_punct("[");
    expect_ident("j");
    if (peek_is_punct("<")) {
      lex_.take();
      expect_ident("i");
      c.strict = true;
    } else {
      expect_punct("<=");
      expect_ident("i");
      if (peek_is_punct(",")) {
        lex_.take();
        expect_ident("j");
        if (peek_is_punct("==")) {
          lex_.take();
          c.local = LocalRelation{{parse_offset()}};
        } else {
          expect_ident("in");
          expect_punct("{");
          LocalRelation rel;
          while (true) {
            rel.offsets.push_back(parse_offset());
            if (peek_is_punct(",")) {
              lex_.take();
              continue;
            }
            break;
          }
          expect_punct("}");
          c.local = std::move(rel);
        }
      }
    }
    expect_punct("]");
    // predicate: NAME(j) or Q_<sym>(j)
    std::string id = expect_name("a predicate name");
    expect_punct("(");
    expect_ident("j");
    expect_punct(")");
    if (id.starts_with("Q_")) {
      c.pred = CountPred{id.substr(2), true};
    } else {
      c.pred = CountPred{id, false};
    }
    return c;
  }

  // offset element: i | i-K | i+K  (offset = j - i)
  std::int64_t parse_offset() {
    expect_ident("i");
    if (peek_is_punct("-")) {
      lex_.take();
      return -expect_int();
    }
    if (peek_is_punct("+")) {
      lex_.take();
      return expect_int();
    }
    return 0;
  }

  // --- lowering of expression trees to straight-line operations

  std::string fresh_name() {
    while (true) {
      std::string n = current_op_ + "__" + std::to_string(++synth_counter_);
      if (!names_.count(n)) return n;
    }
  }

  std::string lower_ref(Expr& e) {
    if (e.kind == Expr::Ref) return e.name;
    Body body = lower_root(e);
    std::string n = fresh_name();
    names_.insert(n);
    prog_.ops.push_back(Operation{n, std::move(body)});
    return n;
  }

  Body lower_root(Expr& e) {
    switch (e.kind) {
      case Expr::Ref:
        throw SyntaxError(e.line, e.col, "an operation body (bare references are not operations)",
                          "'" + e.name + "(i)'");
      case Expr::QTest:
        return Initial{e.name};
      case Expr::True:
        return TrueConst{};
      case Expr::PosRel:
        return Positional{e.rel};
      case Expr::NotE:
        return Not{lower_ref(*e.a)};
      case Expr::AndE:
        return And{lower_ref(*e.a), lower_ref(*e.b)};
      case Expr::CmpE:
        return Compare{e.cmp, lower_ref(*e.a), lower_ref(*e.b)};
      case Expr::AddE:
        return Add{lower_ref(*e.a), lower_ref(*e.b)};
      case Expr::SubE:
        return Sub{lower_ref(*e.a), lower_ref(*e.b)};
      case Expr::IntE:
        if (e.ival == 1) return OneConst{};
        return LiteralConst{e.ival};
      case Expr::CountE:
        return e.count;
      case Expr::IfE:
        return Conditional{lower_ref(*e.a), lower_ref(*e.b), lower_ref(*e.c)};
    }
    throw InvalidProgram("unreachable expression kind");
  }

  Lexer lex_;
  Program prog_;
  std::set<std::string> names_;
  std::string current_op_;
  int synth_counter_ = 0;
};

const std::set<std::string>& keywords() {
  static const std::set<std::string> kw = {"program", "over", "accept", "predict", "empty",
                                           "accepts", "count",  "if",    "then",   "else",
                                           "not",     "and",    "true",  "pos",    "mod",
                                           "in",      "i",      "j"};
  return kw;
}

bool valid_symbol_text(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!ident_char(c)) return false;
  return true;
}

}  // namespace

Program parse(std::string_view source) {
  Parser p(source);
  Program prog = p.run();
  validate(prog);
  return prog;
}

// ---------------------------------------------------------------------------
// Printer

namespace {

std::string print_mask(const Count& c) {
  if (c.strict) return "j<i";
  std::string out = "j<=i";
  if (!c.local) return out;
  auto elem = [](std::int64_t off) {
    if (off == 0) return std::string("i");
    if (off < 0) return "i-" + std::to_string(-off);
    return "i+" + std::to_string(off);
  };
  const auto& offs = c.local->offsets;
  if (offs.size() == 1) return out + ", j==" + elem(offs[0]);
  out += ", j in {";
  for (std::size_t k = 0; k < offs.size(); ++k) {
    if (k) out += ",";
    out += elem(offs[k]);
  }
  return out + "}";
}

std::string print_body(const Body& b) {
  struct V {
    std::string operator()(const Initial& x) const { return "Q_" + x.symbol + "(i)"; }
    std::string operator()(const Not& x) const { return "not " + x.ref + "(i)"; }
    std::string operator()(const And& x) const { return x.lhs + "(i) and " + x.rhs + "(i)"; }
    std::string operator()(const TrueConst&) const { return "true"; }
    std::string operator()(const Positional& x) const {
      return "pos mod(" + std::to_string(x.rel.modulus) + "," + std::to_string(x.rel.residue) +
             ")(i)";
    }
    std::string operator()(const Compare& x) const {
      const char* op = x.op == CmpOp::Leq  ? "<="
                       : x.op == CmpOp::Geq ? ">="
                       : x.op == CmpOp::Eq  ? "="
                                            : "<";
      return x.lhs + "(i) " + op + " " + x.rhs + "(i)";
    }
    std::string operator()(const Count& x) const {
      std::string pred = x.pred.is_symbol ? "Q_" + x.pred.name : x.pred.name;
      return "count[" + print_mask(x) + "] " + pred + "(j)";
    }
    std::string operator()(const Conditional& x) const {
      return "if " + x.cond + "(i) then " + x.then_ref + "(i) else " + x.else_ref + "(i)";
    }
    std::string operator()(const Add& x) const { return x.lhs + "(i) + " + x.rhs + "(i)"; }
    std::string operator()(const Sub& x) const { return x.lhs + "(i) - " + x.rhs + "(i)"; }
    std::string operator()(const OneConst&) const { return "1"; }
    std::string operator()(const LiteralConst& x) const { return std::to_string(x.value); }
  };
  return std::visit(V{}, b);
}

}  // namespace

std::string print(const Program& p) {
  std::ostringstream out;
  out << "program " << p.name << " over {";
  for (std::size_t k = 0; k < p.alphabet.symbols.size(); ++k) {
    if (k) out << ",";
    out << p.alphabet.symbols[k];
  }
  out << "} {\n";
  for (const auto& op : p.ops) out << "  " << op.name << "(i) := " << print_body(op.body) << ";\n";
  if (!p.accept.empty()) out << "  accept " << p.accept << ";\n";
  if (!p.predict.empty()) {
    out << "  predict ";
    for (std::size_t k = 0; k < p.predict.size(); ++k) {
      if (k) out << ", ";
      out << p.predict[k].first << " -> " << p.predict[k].second;
    }
    out << ";\n";
  }
  if (p.empty_accepts) out << "  empty accepts;\n";
  out << "}\n";
  return out.str();
}

// ---------------------------------------------------------------------------
// Validator

namespace {

struct Checker {
  const Program& p;
  std::unordered_map<std::string, std::pair<int, Sort>> defined;  // name -> (index, sort)

  void ref(const std::string& op, const std::string& target, int op_index, Sort want) const {
    auto it = defined.find(target);
    if (it == defined.end() || it->second.first >= op_index)
      throw UnknownReference(op, target);
    if (it->second.second != want)
      throw SortError(op, sort_name(want), sort_name(it->second.second));
  }
};

}  // namespace

void validate(const Program& p) {
  if (p.alphabet.symbols.empty()) throw InvalidProgram("alphabet is empty");
  {
    std::set<std::string> seen;
    for (const auto& s : p.alphabet.symbols) {
      if (s == "$") throw ReservedSymbol("alphabet");
      if (!valid_symbol_text(s)) throw InvalidProgram("malformed alphabet symbol '" + s + "'");
      if (!seen.insert(s).second) throw InvalidProgram("duplicate alphabet symbol '" + s + "'");
    }
  }

  Checker chk{p, {}};
  bool any_boolean = false;
  for (std::size_t k = 0; k < p.ops.size(); ++k) {
    const Operation& op = p.ops[k];
    const int idx = static_cast<int>(k);
    if (op.name.empty() || !ident_start(op.name[0]) || !valid_symbol_text(op.name) ||
        keywords().count(op.name) || op.name.starts_with("Q_"))
      throw InvalidProgram("invalid operation name '" + op.name + "'");
    if (chk.defined.count(op.name)) throw DuplicateName(op.name);

    struct V {
      const Checker& c;
      const Program& p;
      const std::string& name;
      int idx;
      void operator()(const Initial& x) const {
        if (x.symbol == "$") throw ReservedSymbol("operation '" + name + "'");
        if (!p.alphabet.contains(x.symbol))
          throw InvalidProgram("operation '" + name + "': symbol '" + x.symbol +
                               "' not in alphabet");
      }
      void operator()(const Not& x) const { c.ref(name, x.ref, idx, Sort::Boolean); }
      void operator()(const And& x) const {
        c.ref(name, x.lhs, idx, Sort::Boolean);
        c.ref(name, x.rhs, idx, Sort::Boolean);
      }
      void operator()(const TrueConst&) const {}
      void operator()(const Positional& x) const {
        if (x.rel.modulus < 1 || x.rel.residue < 0 || x.rel.residue >= x.rel.modulus)
          throw InvalidProgram("operation '" + name + "': bad periodic relation mod(" +
                               std::to_string(x.rel.modulus) + "," +
                               std::to_string(x.rel.residue) + ")");
      }
      void operator()(const Compare& x) const {
        c.ref(name, x.lhs, idx, Sort::Count);
        c.ref(name, x.rhs, idx, Sort::Count);
      }
      void operator()(const Count& x) const {
        if (x.pred.is_symbol) {
          if (x.pred.name == "$") throw ReservedSymbol("operation '" + name + "'");
          if (!p.alphabet.contains(x.pred.name))
            throw InvalidProgram("operation '" + name + "': symbol '" + x.pred.name +
                                 "' not in alphabet");
        } else {
          c.ref(name, x.pred.name, idx, Sort::Boolean);
        }
        if (x.local) {
          if (x.local->offsets.empty())
            throw InvalidProgram("operation '" + name + "': empty offset set");
          std::set<std::int64_t> s(x.local->offsets.begin(), x.local->offsets.end());
          if (s.size() != x.local->offsets.size())
            throw InvalidProgram("operation '" + name + "': duplicate offsets");
          if (x.strict)
            throw InvalidProgram("operation '" + name + "': strict mask with offsets");
        }
      }
      void operator()(const Conditional& x) const {
        c.ref(name, x.cond, idx, Sort::Boolean);
        c.ref(name, x.then_ref, idx, Sort::Count);
        c.ref(name, x.else_ref, idx, Sort::Count);
      }
      void operator()(const Add& x) const {
        c.ref(name, x.lhs, idx, Sort::Count);
        c.ref(name, x.rhs, idx, Sort::Count);
      }
      void operator()(const Sub& x) const {
        c.ref(name, x.lhs, idx, Sort::Count);
        c.ref(name, x.rhs, idx, Sort::Count);
      }
      void operator()(const OneConst&) const {}
      void operator()(const LiteralConst& x) const {
        if (x.value < 0)
          throw InvalidProgram("operation '" + name + "': negative literal");
        if (x.value == 1)
          throw InvalidProgram("operation '" + name + "': literal 1 must be OneConst");
      }
    };
    std::visit(V{chk, p, op.name, idx}, op.body);

    chk.defined[op.name] = {idx, op.sort()};
    any_boolean |= op.sort() == Sort::Boolean;
  }

  if (!any_boolean) throw InvalidProgram("program has no Boolean operation");
  if (p.accept.empty()) throw InvalidProgram("program has no accept operation");
  {
    auto it = chk.defined.find(p.accept);
    if (it == chk.defined.end()) throw UnknownReference("accept", p.accept);
    if (it->second.second != Sort::Boolean)
      throw SortError("accept", "Boolean", sort_name(it->second.second));
  }
  {
    std::set<std::string> seen;
    for (const auto& [sym, target] : p.predict) {
      if (sym == "$") throw ReservedSymbol("predict declaration");
      if (!p.alphabet.contains(sym))
        throw InvalidProgram("predict symbol '" + sym + "' not in alphabet");
      if (!seen.insert(sym).second)
        throw InvalidProgram("duplicate predict symbol '" + sym + "'");
      auto it = chk.defined.find(target);
      if (it == chk.defined.end()) throw UnknownReference("predict", target);
      if (it->second.second != Sort::Boolean)
        throw SortError("predict " + sym, "Boolean", sort_name(it->second.second));
    }
  }
}

// ---------------------------------------------------------------------------
// Desugar

namespace {

class Desugarer {
 public:
  explicit Desugarer(const Program& p) : in_(p) {
    out_.name = p.name;
    out_.alphabet = p.alphabet;
    out_.accept = p.accept;
    out_.predict = p.predict;
    out_.empty_accepts = p.empty_accepts;
    for (const auto& op : p.ops) names_.insert(op.name);
  }

  Program run() {
    for (const auto& op : in_.ops) emit_op(op);
    return std::move(out_);
  }

 private:
  std::string fresh(const std::string& hint) {
    for (int k = 0;; ++k) {
      std::string n = k == 0 ? hint : hint + "_" + std::to_string(k);
      if (!names_.count(n) && !keywords().count(n)) return n;
    }
  }

  std::string push(const std::string& hint, Body body) {
    std::string n = fresh(hint);
    names_.insert(n);
    out_.ops.push_back(Operation{n, std::move(body)});
    return n;
  }

  const std::string& one() {
    if (one_.empty()) one_ = push("one__", OneConst{});
    return one_;
  }
  const std::string& zero() {
    if (zero_.empty()) {
      const std::string& o = one();
      zero_ = push("zero__", Sub{o, o});
    }
    return zero_;
  }

  // k-fold Add chain of OneConst (k >= 0)
  std::string literal_chain(std::int64_t k, const std::string& hint) {
    if (k == 0) return zero();
    std::string acc = one();
    for (std::int64_t t = 1; t < k; ++t) acc = push(hint + "__s", Add{acc, one()});
    return acc;
  }

  // {0,1}-valued Count-sort indicator of a predicate
  std::string indicator(const CountPred& pred, const std::string& hint) {
    std::string p = pred.is_symbol ? push(hint + "__q", Initial{pred.name}) : pred.name;
    return push(hint + "__ind", Conditional{p, one(), zero()});
  }

  // body of a single-offset count; canonical local count only for c < 0
  Body single_offset_body(const CountPred& pred, std::int64_t c, const std::string& hint) {
    if (c < 0) return Count{false, LocalRelation{{c}}, pred};
    if (c == 0) {
      // count[j<=i, j==i] P(j) = indicator of P at the current position
      std::string p = pred.is_symbol ? push(hint + "__q", Initial{pred.name}) : pred.name;
      return Conditional{p, one(), zero()};
    }
    // positive offset: never fires under the j <= i mask
    const std::string& o = one();
    return Sub{o, o};
  }

  Body desugar_count(const Count& c, const std::string& hint) {
    if (c.strict) {
      // count[j<i] P  =  count[j<=i] P  -  (if P(i) then 1 else 0)
      std::string full = push(hint + "__all", Count{false, std::nullopt, c.pred});
      std::string ind = indicator(c.pred, hint);
      return Sub{full, ind};
    }
    if (!c.local) return c;  // core Top count
    const auto& offs = c.local->offsets;
    if (offs.size() == 1) return single_offset_body(c.pred, offs[0], hint);
    // multi-offset: Add chain of single-offset counts
    std::vector<std::string> parts;
    for (std::int64_t off : offs)
      parts.push_back(push(hint + "__o", single_offset_body(c.pred, off, hint)));
    std::string acc = parts[0];
    for (std::size_t k = 1; k + 1 < parts.size(); ++k)
      acc = push(hint + "__m", Add{acc, parts[k]});
    return Add{acc, parts.back()};
  }

  void emit_op(const Operation& op) {
    const std::string& hint = op.name;
    Body body = op.body;
    if (const auto* cmp = std::get_if<Compare>(&body)) {
      switch (cmp->op) {
        case CmpOp::Leq:
          break;
        case CmpOp::Geq:
          body = Compare{CmpOp::Leq, cmp->rhs, cmp->lhs};
          break;
        case CmpOp::Eq: {
          std::string le = push(hint + "__le", Compare{CmpOp::Leq, cmp->lhs, cmp->rhs});
          std::string ge = push(hint + "__ge", Compare{CmpOp::Leq, cmp->rhs, cmp->lhs});
          body = And{le, ge};
          break;
        }
        case CmpOp::Lt: {
          // C1 < C2  <=>  C1 + 1 <= C2 (counts are integers)
          std::string sum = push(hint + "__p1", Add{cmp->lhs, one()});
          body = Compare{CmpOp::Leq, sum, cmp->rhs};
          break;
        }
      }
    } else if (const auto* lit = std::get_if<LiteralConst>(&body)) {
      if (lit->value == 0) {
        const std::string& o = one();
        body = Sub{o, o};
      } else if (lit->value == 1) {
        body = OneConst{};
      } else {
        std::string chain = literal_chain(lit->value - 1, hint);
        body = Add{chain, one()};
      }
    } else if (const auto* cnt = std::get_if<Count>(&body)) {
      body = desugar_count(*cnt, hint);
    }
    out_.ops.push_back(Operation{op.name, std::move(body)});
  }

  const Program& in_;
  Program out_;
  std::set<std::string> names_;
  std::string one_, zero_;
};

}  // namespace

Program desugar(const Program& p) {
  Desugarer d(p);
  Program out = d.run();
  validate(out);
  return out;
}

bool is_core(const Program& p) {
  for (const auto& op : p.ops) {
    if (const auto* cmp = std::get_if<Compare>(&op.body)) {
      if (cmp->op != CmpOp::Leq) return false;
    } else if (std::holds_alternative<LiteralConst>(op.body)) {
      return false;
    } else if (const auto* cnt = std::get_if<Count>(&op.body)) {
      if (cnt->strict) return false;
      if (cnt->local) {
        if (cnt->local->offsets.size() != 1 || cnt->local->offsets[0] >= 0) return false;
      }
    }
  }
  return true;
}

bool uses_positional(const Program& p) {
  for (const auto& op : p.ops)
    if (std::holds_alternative<Positional>(op.body)) return true;
  return false;
}

bool uses_local(const Program& p) {
  for (const auto& op : p.ops)
    if (const auto* cnt = std::get_if<Count>(&op.body))
      if (cnt->local) return true;
  return false;
}

}  // namespace crasp::dsl
