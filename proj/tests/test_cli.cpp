#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "crasp/corpus.hpp"

namespace {

struct RunResult {
  int exit_code = -1;
  std::string out;
};

RunResult run_cli(const std::string& args) {
  std::string cmd = std::string(CRASP_CLI_PATH) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  RunResult r;
  char buf[4096];
  while (std::size_t n = fread(buf, 1, sizeof buf, pipe)) r.out.append(buf, n);
  int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::filesystem::path temp_dir() {
  auto dir = std::filesystem::temp_directory_path() / "crasp_cli_test";
  std::filesystem::create_directories(dir);
  return dir;
}

std::string write_temp(const std::string& name, const std::string& content) {
  auto path = temp_dir() / name;
  std::ofstream(path) << content;
  return path.string();
}

}  // namespace

TEST_CASE("run: accepts and rejects from a .crasp file and from the stdlib") {
  std::string file = write_temp("majority.crasp", crasp::corpus::stdlib_sources().at("majority"));
  auto a = run_cli("run " + file + " 110");
  CHECK(a.exit_code == 0);
  CHECK(a.out == "accept\n");
  auto b = run_cli("run majority 100");
  CHECK(b.exit_code == 0);
  CHECK(b.out == "reject\n");
  auto c = run_cli("run majority 110 --trace");
  CHECK(c.out.find("C1") != std::string::npos);
  CHECK(c.out.find("accept") != std::string::npos);
}

TEST_CASE("check: valid file ok, sort error reported with exit 2") {
  std::string good = write_temp("good.crasp", crasp::corpus::stdlib_sources().at("dyck1"));
  auto a = run_cli("check " + good);
  CHECK(a.exit_code == 0);
  CHECK(a.out.find("ok:") != std::string::npos);
  std::string bad = write_temp("broken.crasp",
                               "program broken over {a} {\n"
                               "  B(i) := Q_a(i);\n"
                               "  X(i) := B(i) <= B(i);\n"
                               "}\n");
  auto b = run_cli("check " + bad);
  CHECK(b.exit_code == 2);
  CHECK(b.out.find("sort error") != std::string::npos);
}

TEST_CASE("compile then exec round-trips through the net file") {
  auto dir = temp_dir();
  std::string net = (dir / "majority.lt").string();
  auto c = run_cli("compile majority -o " + net);
  CHECK(c.exit_code == 0);
  CHECK(c.out.find("gadgets:") != std::string::npos);
  auto acc = run_cli("exec " + net + " 110");
  CHECK(acc.exit_code == 0);
  CHECK(acc.out == "accept\n");
  auto rej = run_cli("exec " + net + " 001");
  CHECK(rej.out == "reject\n");
  auto reg = run_cli("reg " + net);
  CHECK(reg.exit_code == 0);
  CHECK(reg.out.find("minimal period:") != std::string::npos);
  CHECK(reg.out.find("phi energy:") != std::string::npos);
}

TEST_CASE("verify exits 0 on agreement and prints a report line") {
  auto r = run_cli("verify majority --exhaustive 8 --samples 25:50:10 --seed 7");
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("mismatches=0") != std::string::npos);
}

TEST_CASE("verify output is byte-identical across runs and thread counts") {
  std::string args = "verify dyck1 --exhaustive 8 --samples 25,50:40:10 --seed 3";
  auto a = run_cli(args);
  auto b = run_cli(args);
  CHECK(a.out == b.out);
  auto c = run_cli(args + " --threads 3");
  CHECK(a.out == c.out);
}

TEST_CASE("corpus subcommands") {
  auto list = run_cli("corpus list");
  CHECK(list.exit_code == 0);
  CHECK(list.out.find("tomita4") != std::string::npos);
  auto audit = run_cli("corpus audit");
  CHECK(audit.exit_code == 0);
  CHECK(audit.out.find("FAIL") == std::string::npos);
  auto dir = (temp_dir() / "exported").string();
  auto exp = run_cli("corpus export --dir " + dir);
  CHECK(exp.exit_code == 0);
  CHECK(std::filesystem::exists(std::filesystem::path(dir) / "majority.crasp"));
  // exported sources re-parse to the same programs
  std::ifstream in(std::filesystem::path(dir) / "tomita4.crasp");
  std::string src((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  CHECK(crasp::dsl::parse(src) == crasp::corpus::stdlib_program("tomita4"));
}

TEST_CASE("usage errors exit with 2 and io errors with 3") {
  CHECK(run_cli("").exit_code == 2);
  CHECK(run_cli("bogus_subcommand").exit_code == 2);
  CHECK(run_cli("check /nonexistent/x.crasp").exit_code == 3);
  CHECK(run_cli("exec /nonexistent/net.lt aa").exit_code == 3);
}

TEST_CASE("report emits json lines or a csv summary") {
  auto csv = run_cli("report --format csv --exhaustive 5 --samples 25:20:5 --seed 2");
  CHECK(csv.exit_code == 0);
  CHECK(csv.out.rfind("program,bin1,bin2,bin3,mismatches,max_count_err", 0) == 0);
  CHECK(csv.out.find("majority,") != std::string::npos);
  auto json = run_cli("report --format json --exhaustive 4 --samples 25:10:5 --seed 2");
  CHECK(json.exit_code == 0);
  CHECK(json.out.find("\"program\":\"dyck1\"") != std::string::npos);
}
