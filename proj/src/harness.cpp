#include "crasp/harness.hpp"

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "crasp/interp.hpp"

namespace crasp::harness {

using json = nlohmann::ordered_json;

int thread_count(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("CRASP_THREADS")) {
    int v = std::atoi(env);
    if (v > 0) return v;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

namespace {

// chunked parallel map with a deterministic result layout: the work is split
// into fixed-size chunks claimed via an atomic counter, so results do not
// depend on the number of workers
void parallel_chunks(std::int64_t total, int threads,
                     const std::function<void(std::int64_t, std::int64_t)>& body) {
  if (total <= 0) return;
  const std::int64_t chunk = 1024;
  std::atomic<std::int64_t> next{0};
  auto worker = [&] {
    while (true) {
      std::int64_t begin = next.fetch_add(chunk);
      if (begin >= total) break;
      body(begin, std::min(total, begin + chunk));
    }
  };
  int n = std::max(1, threads);
  if (n == 1) {
    worker();
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
}

// word with the given index in the length-`len` block of the alphabet order
Word word_at(const std::vector<std::string>& alphabet, std::int64_t len, std::int64_t index) {
  Word w(static_cast<std::size_t>(len));
  const std::int64_t s = static_cast<std::int64_t>(alphabet.size());
  for (std::int64_t k = len - 1; k >= 0; --k) {
    w[static_cast<std::size_t>(k)] = alphabet[static_cast<std::size_t>(index % s)];
    index /= s;
  }
  return w;
}

std::int64_t ipow_capped(std::int64_t base, std::int64_t exp, std::int64_t cap) {
  std::int64_t v = 1;
  for (std::int64_t k = 0; k < exp; ++k) {
    v *= base;
    if (v > cap) return cap + 1;
  }
  return v;
}

}  // namespace

std::int64_t default_exhaustive_len(std::size_t alphabet_size) {
  switch (alphabet_size) {
    case 1: return 12;
    case 2: return 12;
    case 3: return 10;
    case 4: return 8;
    default: return 7;
  }
}

EquivalenceReport check_equivalence(const dsl::Program& p, const VerifyOptions& opt,
                                    const corpus::LanguageOracle* oracle) {
  const auto t0 = std::chrono::steady_clock::now();
  EquivalenceReport rep;
  rep.program = p.name;
  rep.seed = opt.seed;

  comp::Compiled compiled = comp::compile(p, opt.fp);
  rt::Forward fwd(compiled.net);
  const int threads = thread_count(opt.threads);

  std::int64_t exhaustive = opt.exhaustive_len >= 0
                                ? opt.exhaustive_len
                                : default_exhaustive_len(p.alphabet.symbols.size());
  // trim the exhaustive sweep to the configured cap
  {
    std::int64_t total = 0;
    std::int64_t len = 0;
    while (len < exhaustive) {
      std::int64_t next = total + ipow_capped(static_cast<std::int64_t>(p.alphabet.symbols.size()),
                                              len + 1, opt.exhaustive_cap + 1);
      if (next > opt.exhaustive_cap) break;
      total = next;
      ++len;
    }
    if (len < exhaustive && opt.exhaustive_len >= 0)
      throw CapExceeded("exhaustive sweep for '" + p.name + "' exceeds the string cap");
    exhaustive = len;
  }
  rep.exhaustive_len = exhaustive;

  auto bin_of = [](std::int64_t len) -> int {
    if (len >= 1 && len <= 50) return 0;
    if (len >= 51 && len <= 100) return 1;
    if (len >= 101 && len <= 150) return 2;
    return -1;
  };

  auto evaluate_block = [&](const std::vector<Word>& words) {
    std::vector<std::uint8_t> agree(words.size(), 1);
    parallel_chunks(static_cast<std::int64_t>(words.size()), threads,
                    [&](std::int64_t lo, std::int64_t hi) {
                      for (std::int64_t k = lo; k < hi; ++k) {
                        const Word& w = words[static_cast<std::size_t>(k)];
                        bool iv = interp::accepts(p, w);
                        bool nv = fwd.accepts(w);
                        agree[static_cast<std::size_t>(k)] = iv == nv ? 1 : 0;
                      }
                    });
    for (std::size_t k = 0; k < words.size(); ++k) {
      const Word& w = words[k];
      int b = bin_of(static_cast<std::int64_t>(w.size()));
      if (b >= 0) {
        rep.bins[b].total += 1;
        rep.bins[b].agree += agree[k];
      }
      if (!agree[k]) {
        rep.mismatches += 1;
        if (rep.witnesses.size() < 10)
          rep.witnesses.push_back(Mismatch{w, interp::accepts(p, w), fwd.accepts(w)});
      }
    }
  };

  // exhaustive sweep, length by length
  const std::int64_t S = static_cast<std::int64_t>(p.alphabet.symbols.size());
  for (std::int64_t len = 1; len <= exhaustive; ++len) {
    std::int64_t count = 1;
    for (std::int64_t k = 0; k < len; ++k) count *= S;
    std::vector<std::uint8_t> agree(static_cast<std::size_t>(count), 1);
    parallel_chunks(count, threads, [&](std::int64_t lo, std::int64_t hi) {
      for (std::int64_t k = lo; k < hi; ++k) {
        Word w = word_at(p.alphabet.symbols, len, k);
        bool iv = interp::accepts(p, w);
        bool nv = fwd.accepts(w);
        agree[static_cast<std::size_t>(k)] = iv == nv ? 1 : 0;
      }
    });
    rep.exhaustive_count += count;
    int b = bin_of(len);
    for (std::int64_t k = 0; k < count; ++k) {
      if (b >= 0) {
        rep.bins[b].total += 1;
        rep.bins[b].agree += agree[static_cast<std::size_t>(k)];
      }
      if (!agree[static_cast<std::size_t>(k)]) {
        rep.mismatches += 1;
        if (rep.witnesses.size() < 10) {
          Word w = word_at(p.alphabet.symbols, len, k);
          rep.witnesses.push_back(Mismatch{w, interp::accepts(p, w), fwd.accepts(w)});
        }
      }
    }
  }

  // sampled lengths: uniform words plus oracle-sampled positive words
  for (std::int64_t len : opt.samples.lengths) {
    std::vector<Word> words;
    Prng rng(opt.seed ^ (0x5eedULL + static_cast<std::uint64_t>(len) * 0x9e3779b97f4a7c15ULL));
    for (int k = 0; k < opt.samples.count; ++k)
      words.push_back(corpus::random_word(p.alphabet.symbols, len, rng));
    if (oracle) {
      for (int k = 0; k < opt.samples.positive_count; ++k) {
        auto w = oracle->sample_positive(len, rng);
        if (w) words.push_back(std::move(*w));
      }
    }
    rep.sampled.emplace_back(len, static_cast<std::int64_t>(words.size()));
    evaluate_block(words);
  }

  // channel checks on a random subsample (lengths up to 50)
  {
    Prng rng(opt.seed ^ 0xc0ffeeULL);
    std::vector<Word> words;
    for (int k = 0; k < opt.channel_check_words; ++k) {
      std::int64_t len = 1 + static_cast<std::int64_t>(rng.below(50));
      words.push_back(corpus::random_word(p.alphabet.symbols, len, rng));
    }
    std::vector<double> berr(words.size(), 0.0), cerr_(words.size(), 0.0);
    parallel_chunks(static_cast<std::int64_t>(words.size()), threads,
                    [&](std::int64_t lo, std::int64_t hi) {
                      for (std::int64_t k = lo; k < hi; ++k) {
                        auto chk =
                            comp::check_channels(compiled, words[static_cast<std::size_t>(k)]);
                        berr[static_cast<std::size_t>(k)] = chk.max_bool_err;
                        cerr_[static_cast<std::size_t>(k)] = chk.max_count_err;
                      }
                    });
    for (std::size_t k = 0; k < words.size(); ++k) {
      rep.max_bool_err = std::max(rep.max_bool_err, berr[k]);
      rep.max_count_err = std::max(rep.max_count_err, cerr_[k]);
    }
  }

  rep.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

std::string EquivalenceReport::to_json(bool include_runtime) const {
  json j;
  j["program"] = program;
  j["exhaustive_len"] = exhaustive_len;
  j["exhaustive_count"] = exhaustive_count;
  json s = json::object();
  for (const auto& [len, n] : sampled) s[std::to_string(len)] = n;
  j["sampled"] = s;
  j["mismatches"] = mismatches;
  json ws = json::array();
  for (const auto& m : witnesses) {
    json w;
    w["word"] = m.word;
    w["interp"] = m.interp_accepts;
    w["net"] = m.net_accepts;
    ws.push_back(w);
  }
  j["witnesses"] = ws;
  j["max_bool_err"] = max_bool_err;
  j["max_count_err"] = max_count_err;
  json bs = json::array();
  for (const auto& b : bins) {
    json jb;
    jb["lo"] = b.lo;
    jb["hi"] = b.hi;
    jb["total"] = b.total;
    jb["agree"] = b.agree;
    bs.push_back(jb);
  }
  j["bins"] = bs;
  j["seed"] = seed;
  if (include_runtime) j["runtime_seconds"] = runtime_seconds;
  return j.dump();
}

std::string EquivalenceReport::csv_header() {
  return "program,bin1,bin2,bin3,mismatches,max_count_err";
}

std::string EquivalenceReport::to_csv() const {
  std::ostringstream out;
  out << program;
  for (const auto& b : bins) {
    out << ",";
    if (b.total == 0)
      out << "-";
    else
      out << static_cast<double>(b.agree) / static_cast<double>(b.total);
  }
  out << "," << mismatches << "," << max_count_err;
  return out.str();
}

// ---------------------------------------------------------------------------
// Bin report

BinReport bin_report(const dsl::Program& p, const std::string& oracle_id, const BinOptions& opt) {
  const corpus::LanguageOracle& o = corpus::oracle(oracle_id);
  BinReport rep;
  rep.program = p.name;
  rep.oracle_id = oracle_id;
  rep.predict_mode = !p.predict.empty();

  comp::Compiled compiled = comp::compile(p, opt.fp);
  rt::Forward fwd(compiled.net);
  const int threads = thread_count(opt.threads);

  for (int b = 0; b < 3; ++b) {
    std::int64_t lo = rep.bins[b].lo, hi = rep.bins[b].hi;
    std::vector<Word> words;
    Prng rng(opt.seed ^ (0xb1ULL + static_cast<std::uint64_t>(b) * 977));
    for (int k = 0; k < opt.words_per_bin; ++k) {
      std::int64_t len = lo + static_cast<std::int64_t>(rng.below(
                                  static_cast<std::uint64_t>(hi - lo + 1)));
      words.push_back(corpus::random_word(p.alphabet.symbols, len, rng));
      if (!rep.predict_mode) {
        auto pos = o.sample_positive(len, rng);
        if (pos) words.push_back(std::move(*pos));
      }
    }
    std::vector<std::uint8_t> ok(words.size(), 0);
    parallel_chunks(static_cast<std::int64_t>(words.size()), threads,
                    [&](std::int64_t klo, std::int64_t khi) {
                      for (std::int64_t k = klo; k < khi; ++k) {
                        const Word& w = words[static_cast<std::size_t>(k)];
                        bool good = true;
                        if (rep.predict_mode) {
                          // per-step set agreement: every step must match
                          std::vector<std::string> tokens;
                          tokens.push_back(rt::kSos);
                          tokens.insert(tokens.end(), w.begin(), w.end());
                          auto act = fwd.run(tokens, 0);
                          for (std::size_t t = 1; t <= w.size() && good; ++t) {
                            std::set<std::string> net_set;
                            for (std::size_t s = 0;
                                 s < compiled.plan.predict_channels.size(); ++s)
                              if (act.outputs[t][s] > 0.0)
                                net_set.insert(compiled.plan.predict_channels[s].first);
                            Word prefix(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(t));
                            good = net_set == o.legal_next(prefix);
                          }
                        } else {
                          good = fwd.accepts(w) == o.member(w);
                        }
                        ok[static_cast<std::size_t>(k)] = good ? 1 : 0;
                      }
                    });
    for (std::size_t k = 0; k < words.size(); ++k) {
      rep.bins[b].total += 1;
      rep.bins[b].correct += ok[k];
    }
  }
  return rep;
}

std::string BinReport::to_text() const {
  std::ostringstream out;
  out << program << " vs " << oracle_id << (predict_mode ? " (per-step sets)" : " (acceptance)")
      << ": ";
  for (int b = 0; b < 3; ++b) {
    if (b) out << " / ";
    if (!bins[b].present())
      out << "absent";
    else
      out << bins[b].accuracy();
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Expressiveness audit

std::vector<AuditRow> audit_expressiveness() {
  std::vector<AuditRow> rows;
  for (const auto& r : corpus::manifest()) {
    AuditRow a;
    a.id = r.id + " (" + r.kind + ")";
    a.kind = r.kind;
    const bool has_program = !r.program.empty();
    bool prog_exists = false, positional = false, local = false;
    if (has_program) {
      auto it = corpus::stdlib().find(r.program);
      prog_exists = it != corpus::stdlib().end();
      if (prog_exists) {
        positional = dsl::uses_positional(it->second);
        local = dsl::uses_local(it->second);
      }
    }
    if (r.empty_flag == corpus::Flag::Yes) {
      a.pass = prog_exists && !positional && !local;
      a.detail = a.pass ? "program " + r.program + " uses no positional constructs"
                        : "expected a positional-free program";
    } else if (r.pl_flag == corpus::Flag::Yes) {
      a.pass = prog_exists && (positional || local);
      a.detail = a.pass ? "program " + r.program + " uses " +
                              std::string(positional && local  ? "periodic+local"
                                          : positional         ? "periodic"
                                                               : "local") +
                              " constructs"
                        : "expected a program using positional constructs";
    } else {
      a.pass = !has_program;
      a.detail = a.pass ? "no program, as proven impossible" : "unexpected program present";
    }
    rows.push_back(std::move(a));
  }
  return rows;
}

std::string audit_text(const std::vector<AuditRow>& rows) {
  std::ostringstream out;
  for (const auto& r : rows)
    out << (r.pass ? "pass" : "FAIL") << "  " << r.id << ": " << r.detail << "\n";
  return out.str();
}

}  // namespace crasp::harness
