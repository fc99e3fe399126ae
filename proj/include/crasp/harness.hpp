#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "crasp/compile.hpp"
#include "crasp/corpus.hpp"
#include "crasp/dsl.hpp"

namespace crasp::harness {

using corpus::Word;

struct SampleSpec {
  std::vector<std::int64_t> lengths = {25, 50, 100, 150};
  int count = 1000;          // uniform random strings per length
  int positive_count = 200;  // oracle-sampled positive strings per length
};

struct Mismatch {
  Word word;
  bool interp_accepts = false;
  bool net_accepts = false;
};

struct EquivalenceReport {
  std::string program;
  std::int64_t exhaustive_len = 0;
  std::int64_t exhaustive_count = 0;
  std::vector<std::pair<std::int64_t, std::int64_t>> sampled;  // length -> words tested
  std::int64_t mismatches = 0;
  std::vector<Mismatch> witnesses;  // up to 10, in deterministic order
  double max_bool_err = 0.0;
  double max_count_err = 0.0;
  struct Bin {
    std::int64_t lo = 0, hi = 0, total = 0, agree = 0;
  };
  Bin bins[3] = {{1, 50}, {51, 100}, {101, 150}};
  std::uint64_t seed = 0;
  double runtime_seconds = 0.0;

  std::string to_json(bool include_runtime = false) const;
  static std::string csv_header();
  std::string to_csv() const;
};

struct VerifyOptions {
  std::int64_t exhaustive_len = -1;     // -1: per alphabet size (12 / 10 / 8 / 7)
  std::int64_t exhaustive_cap = 200000;  // strings
  SampleSpec samples;
  int channel_check_words = 100;
  std::uint64_t seed = 1;
  int threads = 0;  // 0: CRASP_THREADS env or hardware default
  rt::FixedPrecision fp{24};
};

std::int64_t default_exhaustive_len(std::size_t alphabet_size);

// Compiles p and compares interpreter and network acceptance on every string
// up to the exhaustive bound plus sampled strings per the spec; runs the
// channel check on a random subsample.
EquivalenceReport check_equivalence(const dsl::Program& p, const VerifyOptions& opt,
                                    const corpus::LanguageOracle* oracle = nullptr);

struct BinReport {
  std::string program, oracle_id;
  bool predict_mode = false;
  struct Bin {
    std::int64_t lo = 0, hi = 0, total = 0, correct = 0;
    bool present() const { return total > 0; }
    double accuracy() const { return total == 0 ? 0.0 : double(correct) / double(total); }
  };
  Bin bins[3] = {{1, 50}, {51, 100}, {101, 150}};
  std::string to_text() const;
};

struct BinOptions {
  int words_per_bin = 50;
  std::uint64_t seed = 1;
  int threads = 0;
  rt::FixedPrecision fp{24};
};

// Per-bin accuracy of the compiled net against an oracle. For programs with a
// predict declaration the per-step symbol sets are compared (all steps must
// match); otherwise acceptance agreement is measured.
BinReport bin_report(const dsl::Program& p, const std::string& oracle_id,
                     const BinOptions& opt = {});

struct AuditRow {
  std::string id;
  std::string kind;
  bool pass = false;
  std::string detail;
};

// Cross-checks manifest flags against program existence and construct usage.
std::vector<AuditRow> audit_expressiveness();
std::string audit_text(const std::vector<AuditRow>& rows);

// Parallelism degree: explicit > CRASP_THREADS env > hardware concurrency.
int thread_count(int requested);

}  // namespace crasp::harness
