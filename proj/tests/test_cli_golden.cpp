#include <cstdio>
#include <string>
#include <sys/wait.h>

#include <catch2/catch_amalgamated.hpp>

#include "support/gen.hpp"

namespace {

struct CmdResult {
  std::string out;
  int exit_code = -1;
};

CmdResult run_cmd(const std::string& args) {
  const std::string cmd = std::string(SESH_PGV_BIN) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  CmdResult r;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof(buf), pipe)) > 0) r.out.append(buf, n);
  const int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

struct GoldenCase {
  const char* name;
  const char* sub;
  const char* flags;
};

const GoldenCase kCases[] = {
    {"mul", "check", ""},          {"mul", "run", ""},          {"mul", "graph", ""},
    {"sum", "check", ""},          {"sum", "run", ""},          {"sum", "graph", ""},
    {"woops", "check", ""},        {"woops", "run", "--no-priority-check"},
    {"woops", "graph", "--no-priority-check"},
    {"totally_fine", "check", ""}, {"totally_fine", "run", ""}, {"totally_fine", "graph", ""},
    {"sched", "check", ""},        {"sched", "run", ""},        {"sched", "graph", ""},
    {"unit_end", "check", ""},     {"unit_end", "run", ""},     {"unit_end", "graph", ""},
};

}  // namespace

TEST_CASE("CLI output matches the committed golden files byte for byte") {
  for (const GoldenCase& c : kCases) {
    CAPTURE(c.name, c.sub, c.flags);
    std::string args = std::string(c.sub);
    if (c.flags[0] != '\0') args += std::string(" ") + c.flags;
    args += std::string(" ") + SESH_CORPUS_DIR + "/" + c.name + ".pgv";
    const CmdResult r = run_cmd(args);

    const std::string base = std::string(SESH_GOLDEN_DIR) + "/" + c.name + "." + c.sub;
    const std::string want_out = testgen::read_file_or_throw(base + ".out");
    const std::string want_exit = testgen::read_file_or_throw(base + ".exit");
    CHECK(r.out == want_out);
    CHECK(std::to_string(r.exit_code) + "\n" == want_exit);
  }
}

TEST_CASE("diagnostics go to stderr, not stdout") {
  // A type error prints nothing on stdout.
  const CmdResult r = run_cmd(std::string("check ") + SESH_CORPUS_DIR + "/woops.pgv");
  CHECK(r.out.empty());
  CHECK(r.exit_code == 1);
}

TEST_CASE("missing files exit with the I/O code") {
  const CmdResult r = run_cmd("check /nonexistent/nope.pgv");
  CHECK(r.exit_code == 3);
}

TEST_CASE("parse errors exit with code 2") {
  const std::string bad = std::string(SESH_GOLDEN_DIR) + "/../support/bad_syntax.pgv";
  const CmdResult r = run_cmd("check " + bad);
  CHECK(r.exit_code == 2);
}

TEST_CASE("an uncaught cancellation exits with code 11") {
  const std::string f = std::string(SESH_GOLDEN_DIR) + "/../support/cancel_recv.pgv";
  const CmdResult r = run_cmd("run " + f);
  CHECK(r.out.empty());
  CHECK(r.exit_code == 11);
}

TEST_CASE("--timeout is accepted and the watchdog still reports the deadlock") {
  const CmdResult r = run_cmd(std::string("run --no-priority-check --timeout 1000 ") +
                              SESH_CORPUS_DIR + "/woops.pgv");
  CHECK(r.exit_code == 10);
}

TEST_CASE("--output writes the same bytes to a file") {
  const std::string tmp = "cli_golden_out.tmp";
  const CmdResult direct = run_cmd(std::string("check ") + SESH_CORPUS_DIR + "/mul.pgv");
  const CmdResult redirected =
      run_cmd(std::string("check --output ") + tmp + " " + SESH_CORPUS_DIR + "/mul.pgv");
  CHECK(redirected.exit_code == 0);
  CHECK(redirected.out.empty());
  CHECK(testgen::read_file_or_throw(tmp) == direct.out);
  std::remove(tmp.c_str());
}
