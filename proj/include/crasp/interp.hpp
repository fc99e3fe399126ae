#pragma once

#include <cstdint>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "crasp/dsl.hpp"

namespace crasp::interp {

// Per-operation, per-position values. Boolean operations carry 0/1, Count
// operations exact integers. Positions are 1-based over the word; the SOS
// token is not part of interpreter input.
struct Trace {
  std::vector<std::string> word;
  std::vector<std::string> op_names;
  std::vector<std::vector<std::int64_t>> values;  // [op][position-1]

  std::int64_t value(std::string_view op, std::size_t pos) const;
  std::string to_text() const;  // operation x position table for debugging
};

// Streaming evaluator: push one symbol at a time; values at the current
// position are O(1) per operation. Used by evaluate/generate so that long
// autoregressive runs do not re-evaluate prefixes.
class Evaluator {
 public:
  explicit Evaluator(const dsl::Program& p);
  ~Evaluator();
  Evaluator(Evaluator&&) noexcept;

  void push(const std::string& symbol);  // throws SymbolNotInAlphabet
  std::int64_t position() const { return t_; }
  std::int64_t value(std::size_t op_index) const { return cur_[op_index]; }
  std::int64_t value(std::string_view op_name) const;
  const dsl::Program& program() const { return *p_; }

  // predicted symbols at the current position (requires a predict declaration)
  std::set<std::string> predicted() const;

 private:
  struct Impl;

  const dsl::Program* p_;
  std::unique_ptr<Impl> impl_;
  std::int64_t t_ = 0;
  int cur_sym_ = -1;
  std::vector<std::int64_t> cur_;           // current values per op
  std::vector<std::int64_t> acc_;           // running sums for Top counts
  std::vector<std::int64_t> retain_;        // history depth needed per op
  std::vector<std::vector<std::int64_t>> hist_;  // ring buffers per op
  std::int64_t sym_retain_ = 0;
  std::vector<int> sym_hist_;               // ring buffer of symbol indices
  std::vector<int> predict_ops_;            // op index per predict entry
};

Trace evaluate(const dsl::Program& p, const std::vector<std::string>& w);
bool accepts(const dsl::Program& p, const std::vector<std::string>& w);
std::set<std::string> predicted_set(const dsl::Program& p, const std::vector<std::string>& w,
                                    std::int64_t t);
std::vector<std::string> generate(const dsl::Program& p, const std::vector<std::string>& prefix,
                                  std::int64_t max_steps, const std::string& stop = "");

// Convenience for single-character alphabets.
std::vector<std::string> split_word(const dsl::Alphabet& a, const std::string& text);

}  // namespace crasp::interp
