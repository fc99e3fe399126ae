#include "crasp/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "crasp/compile.hpp"
#include "crasp/corpus.hpp"
#include "crasp/harness.hpp"
#include "crasp/interp.hpp"

namespace crasp::cli {

namespace {

constexpr int kOk = 0, kMismatch = 1, kUsage = 2, kIo = 3;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::ios_base::failure("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::ios_base::failure("cannot write '" + path + "'");
  out << content;
}

dsl::Program load_program(const std::string& ref) {
  if (ref.size() > 6 && ref.ends_with(".crasp")) return dsl::parse(read_file(ref));
  return corpus::stdlib_program(ref);
}

const corpus::LanguageOracle* oracle_for_program(const std::string& program_name) {
  for (const auto& row : corpus::manifest())
    if (row.program == program_name && !row.oracle_id.empty())
      return &corpus::oracle(row.oracle_id);
  return nullptr;
}

// "25,50,100,150:1000:200" -> lengths, uniform count, positive count
harness::SampleSpec parse_samples(const std::string& spec) {
  harness::SampleSpec out;
  if (spec.empty()) return out;
  std::istringstream in(spec);
  std::string lengths, count, positive;
  std::getline(in, lengths, ':');
  std::getline(in, count, ':');
  std::getline(in, positive, ':');
  out.lengths.clear();
  std::istringstream ls(lengths);
  std::string tok;
  while (std::getline(ls, tok, ',')) out.lengths.push_back(std::stoll(tok));
  if (!count.empty()) out.count = std::stoi(count);
  if (!positive.empty()) out.positive_count = std::stoi(positive);
  return out;
}

int verify_one(const dsl::Program& p, const harness::VerifyOptions& opt, bool timing,
               const std::string& format) {
  const corpus::LanguageOracle* oracle = oracle_for_program(p.name);
  harness::EquivalenceReport rep = harness::check_equivalence(p, opt, oracle);
  if (format == "json") {
    std::cout << rep.to_json(timing) << "\n";
  } else {
    std::cout << rep.program << ": exhaustive<=" << rep.exhaustive_len << " ("
              << rep.exhaustive_count << " strings), sampled";
    for (const auto& [len, n] : rep.sampled) std::cout << " " << len << "x" << n;
    std::cout << ", mismatches=" << rep.mismatches << ", max_bool_err=" << rep.max_bool_err
              << ", max_count_err=" << rep.max_count_err;
    if (timing) std::cout << ", seconds=" << rep.runtime_seconds;
    std::cout << "\n";
    for (const auto& m : rep.witnesses) {
      std::cout << "  mismatch:";
      for (const auto& s : m.word) std::cout << " " << s;
      std::cout << " interp=" << m.interp_accepts << " net=" << m.net_accepts << "\n";
    }
  }
  return rep.mismatches == 0 ? kOk : kMismatch;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"C-RASP toolchain: parse, interpret, compile to limit-transformer weights, "
               "execute, and verify equivalence"};
  app.require_subcommand(1);

  // --- check
  std::string check_file;
  auto* cmd_check = app.add_subcommand("check", "parse and validate a .crasp file");
  cmd_check->add_option("file", check_file)->required();

  // --- run
  std::string run_file, run_word;
  bool run_trace = false;
  auto* cmd_run = app.add_subcommand("run", "interpret a program on a word");
  cmd_run->add_option("file", run_file)->required();
  cmd_run->add_option("word", run_word,
                      "input word; single characters, or space-separated tokens");
  cmd_run->add_flag("--trace", run_trace, "print the operation x position table");

  // --- compile
  std::string compile_file, compile_out;
  int compile_bits = 24;
  auto* cmd_compile = app.add_subcommand("compile", "compile a program to a net file");
  cmd_compile->add_option("file", compile_file)->required();
  cmd_compile->add_option("-o,--output", compile_out)->required();
  cmd_compile->add_option("--precision", compile_bits, "fractional bits (default 24)");

  // --- exec
  std::string exec_file, exec_word;
  auto* cmd_exec = app.add_subcommand("exec", "run a compiled net on a word");
  cmd_exec->add_option("net", exec_file)->required();
  cmd_exec->add_option("word", exec_word);

  // --- verify
  std::string verify_target, verify_samples, verify_format = "text";
  std::int64_t verify_exhaustive = -1;
  std::uint64_t verify_seed = 1;
  int verify_threads = 0;
  bool verify_timing = false;
  auto* cmd_verify =
      app.add_subcommand("verify", "check interpreter/net equivalence (program, file, or all)");
  cmd_verify->add_option("target", verify_target)->required();
  cmd_verify->add_option("--exhaustive", verify_exhaustive, "exhaustive length bound");
  cmd_verify->add_option("--samples", verify_samples, "lengths:count:positives, e.g. 25,50:500:100");
  cmd_verify->add_option("--seed", verify_seed);
  cmd_verify->add_option("--threads", verify_threads, "0 = CRASP_THREADS env or all cores");
  cmd_verify->add_flag("--timing", verify_timing, "include runtimes in the output");
  cmd_verify->add_option("--format", verify_format)->check(CLI::IsMember({"text", "json"}));

  // --- corpus
  auto* cmd_corpus = app.add_subcommand("corpus", "list or audit the program corpus");
  auto* cmd_corpus_list = cmd_corpus->add_subcommand("list", "print the corpus manifest");
  auto* cmd_corpus_audit =
      cmd_corpus->add_subcommand("audit", "cross-check expressiveness flags");
  std::string export_dir;
  auto* cmd_corpus_export = cmd_corpus->add_subcommand("export", "write .crasp sources");
  cmd_corpus_export->add_option("--dir", export_dir)->required();

  // --- report
  std::string report_format = "json";
  std::uint64_t report_seed = 1;
  std::string report_samples;
  std::int64_t report_exhaustive = -1;
  int report_threads = 0;
  auto* cmd_report =
      app.add_subcommand("report", "verify the full corpus and emit JSON-lines or CSV");
  cmd_report->add_option("--format", report_format)->check(CLI::IsMember({"json", "csv"}));
  cmd_report->add_option("--seed", report_seed);
  cmd_report->add_option("--samples", report_samples);
  cmd_report->add_option("--exhaustive", report_exhaustive);
  cmd_report->add_option("--threads", report_threads);

  // --- reg
  std::string reg_file;
  auto* cmd_reg = app.add_subcommand("reg", "print the complexity breakdown of a net");
  cmd_reg->add_option("net", reg_file)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*cmd_check) {
      dsl::Program p = dsl::parse(read_file(check_file));
      std::cout << "ok: " << p.name << " (" << p.ops.size() << " operations, accept "
                << p.accept << ")\n";
      return kOk;
    }
    if (*cmd_run) {
      dsl::Program p = load_program(run_file);
      auto w = interp::split_word(p.alphabet, run_word);
      if (run_trace && !w.empty()) std::cout << interp::evaluate(p, w).to_text();
      std::cout << (interp::accepts(p, w) ? "accept" : "reject") << "\n";
      return kOk;
    }
    if (*cmd_compile) {
      dsl::Program p = load_program(compile_file);
      comp::Compiled c = comp::compile(p, rt::FixedPrecision{compile_bits});
      write_file(compile_out, rt::serialize(c.net));
      std::cout << c.report.to_text();
      return kOk;
    }
    if (*cmd_exec) {
      rt::LimitTransformer net = rt::deserialize(read_file(exec_file));
      std::vector<std::string> w;
      {
        dsl::Alphabet a;
        a.symbols = net.symbols;
        w = interp::split_word(a, exec_word);
      }
      std::cout << (rt::accepts_net(net, w) ? "accept" : "reject") << "\n";
      return kOk;
    }
    if (*cmd_verify) {
      harness::VerifyOptions opt;
      opt.exhaustive_len = verify_exhaustive;
      opt.samples = parse_samples(verify_samples);
      opt.seed = verify_seed;
      opt.threads = verify_threads;
      int rc = kOk;
      if (verify_target == "all") {
        for (const auto& [name, p] : corpus::stdlib())
          rc = std::max(rc, verify_one(p, opt, verify_timing, verify_format));
      } else {
        rc = verify_one(load_program(verify_target), opt, verify_timing, verify_format);
      }
      return rc;
    }
    if (*cmd_corpus) {
      if (*cmd_corpus_list) {
        std::cout << corpus::manifest_text();
        std::cout << "\nprograms:\n";
        for (const auto& [name, src] : corpus::stdlib_sources())
          std::cout << "  " << name << "\n";
        std::cout << "\ntasks:\n";
        for (const auto& id : corpus::task_ids())
          std::cout << "  " << id << " (l_min " << corpus::task_min_len(id) << ")\n";
        return kOk;
      }
      if (*cmd_corpus_audit) {
        auto rows = harness::audit_expressiveness();
        std::cout << harness::audit_text(rows);
        for (const auto& r : rows)
          if (!r.pass) return kMismatch;
        return kOk;
      }
      if (*cmd_corpus_export) {
        std::filesystem::create_directories(export_dir);
        for (const auto& [name, src] : corpus::stdlib_sources())
          write_file((std::filesystem::path(export_dir) / (name + ".crasp")).string(), src);
        std::cout << "wrote " << corpus::stdlib_sources().size() << " programs to "
                  << export_dir << "\n";
        return kOk;
      }
      std::cerr << "corpus: expected list, audit, or export\n";
      return kUsage;
    }
    if (*cmd_report) {
      harness::VerifyOptions opt;
      opt.exhaustive_len = report_exhaustive;
      opt.samples = parse_samples(report_samples);
      opt.seed = report_seed;
      opt.threads = report_threads;
      std::vector<harness::EquivalenceReport> reps;
      for (const auto& [name, p] : corpus::stdlib())
        reps.push_back(
            harness::check_equivalence(p, opt, oracle_for_program(name)));
      int rc = kOk;
      if (report_format == "json") {
        for (const auto& r : reps) std::cout << r.to_json() << "\n";
      } else {
        std::cout << harness::EquivalenceReport::csv_header() << "\n";
        for (const auto& r : reps) std::cout << r.to_csv() << "\n";
      }
      for (const auto& r : reps)
        if (r.mismatches > 0) rc = kMismatch;
      return rc;
    }
    if (*cmd_reg) {
      rt::LimitTransformer net = rt::deserialize(read_file(reg_file));
      std::cout << rt::reg_infinity(net).to_text();
      return kOk;
    }
  } catch (const std::ios_base::failure& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kIo;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}

}  // namespace crasp::cli
