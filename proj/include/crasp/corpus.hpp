#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "crasp/dsl.hpp"
#include "crasp/prng.hpp"

namespace crasp::corpus {

using Word = std::vector<std::string>;

struct Dfa {
  std::vector<std::string> alphabet;
  int start = 0;
  std::vector<std::vector<int>> delta;  // [state][symbol index]
  std::vector<bool> accepting;

  int step(int state, const std::string& sym) const;
  bool member(const Word& w) const;
  // states from which some accepting state is reachable
  std::vector<bool> live() const;
};

enum class Flag { Yes, No, NoneFound, NA };
const char* flag_name(Flag f);

struct LanguageOracle {
  std::string id;
  std::vector<std::string> alphabet;
  std::optional<Dfa> dfa;
  std::function<bool(const Word&)> membership_fn;  // used when no DFA
  std::function<std::set<std::string>(const Word&)> legal_next_fn;  // closed-form languages
  // returns a uniform-ish member of the requested length, if one exists
  std::function<std::optional<Word>(std::int64_t, Prng&)> positive_sampler;

  bool member(const Word& w) const;
  bool has_legal_next() const;
  std::set<std::string> legal_next(const Word& prefix) const;
  std::optional<Word> sample_positive(std::int64_t len, Prng& rng) const;
};

const std::vector<std::string>& oracle_ids();
const LanguageOracle& oracle(const std::string& id);  // throws UnknownLanguage
bool membership(const LanguageOracle& o, const Word& w);
std::set<std::string> legal_next(const LanguageOracle& o, const Word& prefix);

// ---------------------------------------------------------------------------
// Program library

// name -> canonical .crasp source
const std::map<std::string, std::string>& stdlib_sources();
// name -> parsed program (parsed once, cached)
const std::map<std::string, dsl::Program>& stdlib();
const dsl::Program& stdlib_program(const std::string& name);

// Parameterized generators (the stdlib entries are instances of these).
std::string induction_all_source(const std::vector<std::string>& symbols,
                                 const std::string& name = "induction_all");
std::string induction_argmax_source(const std::vector<std::string>& symbols,
                                    const std::string& name = "induction_argmax");
std::string dyck_depth_source(int depth, const std::string& name);

// ---------------------------------------------------------------------------
// Manifest (expressiveness flags per benchmark row)

struct ManifestRow {
  std::string id;
  std::string kind;  // "language" or "task"
  Flag empty_flag = Flag::NA;
  Flag pl_flag = Flag::NA;
  std::string program;    // stdlib program name, or "" when none exists
  std::string oracle_id;  // "" when no acceptance oracle applies
  std::string note;
};

const std::vector<ManifestRow>& manifest();
std::string manifest_text();

// ---------------------------------------------------------------------------
// Algorithmic task instances

struct TaskInstance {
  std::string task;
  std::vector<std::string> tokens;  // includes SOS / SEP / EOS markers
  std::size_t supervised_begin = 0;  // [begin, end) over tokens
  std::size_t supervised_end = 0;
  std::int64_t len = 0;
  std::string to_text() const;  // token per line
};

const std::vector<std::string>& task_ids();
std::int64_t task_min_len(const std::string& id);
TaskInstance gen_task(const std::string& id, std::int64_t len, std::uint64_t seed);

// Uniform random word over an alphabet (shared by the harness).
Word random_word(const std::vector<std::string>& alphabet, std::int64_t len, Prng& rng);

}  // namespace crasp::corpus
