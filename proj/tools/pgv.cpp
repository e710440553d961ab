// Command-line driver for the PGV checker and interpreter.
//
// Exit codes: 0 success, 1 type error, 2 parse error, 3 I/O error,
// 10 deadlock, 11 uncaught cancellation, 70 internal error.

#include <chrono>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "sesh/sesh.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitTypeError = 1;
constexpr int kExitParseError = 2;
constexpr int kExitIoError = 3;
constexpr int kExitDeadlock = 10;
constexpr int kExitCancelled = 11;
constexpr int kExitInternal = 70;

struct Options {
  std::string path;
  std::string output;
  bool no_priority_check = false;
  unsigned long timeout_ms = 5000;
};

bool read_file(const std::string& path, std::string& out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  std::ostringstream ss;
  ss << in.rdbuf();
  out = ss.str();
  return true;
}

int with_output(const Options& opts, const std::function<void(std::ostream&)>& body) {
  if (opts.output.empty()) {
    body(std::cout);
    return kExitOk;
  }
  std::ofstream out(opts.output, std::ios::binary);
  if (!out) {
    std::cerr << "error: cannot open output file '" << opts.output << "'\n";
    return kExitIoError;
  }
  body(out);
  return kExitOk;
}

int cmd_check(const Options& opts) {
  std::string src;
  if (!read_file(opts.path, src)) {
    std::cerr << "error: cannot read '" << opts.path << "'\n";
    return kExitIoError;
  }
  sesh::pgv::Term term = sesh::pgv::parse(src);
  sesh::pgv::CheckResult r =
      sesh::pgv::typecheck(term, {}, sesh::pgv::CheckOptions{!opts.no_priority_check});
  return with_output(opts, [&](std::ostream& out) {
    out << "OK : " << sesh::pgv::to_string(r.type) << " " << sesh::to_string(r.bounds) << "\n";
  });
}

int cmd_run(const Options& opts) {
  std::string src;
  if (!read_file(opts.path, src)) {
    std::cerr << "error: cannot read '" << opts.path << "'\n";
    return kExitIoError;
  }
  sesh::DeadlockPolicy policy{std::chrono::milliseconds(opts.timeout_ms)};
  sesh::Value v = sesh::pgv::eval_source(src, policy, !opts.no_priority_check);
  return with_output(opts, [&](std::ostream& out) { out << v.to_string() << "\n"; });
}

int cmd_graph(const Options& opts) {
  std::string src;
  if (!read_file(opts.path, src)) {
    std::cerr << "error: cannot read '" << opts.path << "'\n";
    return kExitIoError;
  }
  sesh::pgv::Term term = sesh::pgv::parse(src);
  sesh::pgv::typecheck(term, {}, sesh::pgv::CheckOptions{!opts.no_priority_check});
  sesh::pgv::CommGraph g = sesh::pgv::comm_graph(term);
  return with_output(opts, [&](std::ostream& out) { out << g.to_dot(); });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pgv - checker and interpreter for a priority-typed session calculus"};
  app.require_subcommand(1);

  Options opts;
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("file", opts.path, "source file")->required();
    cmd->add_flag("--no-priority-check", opts.no_priority_check,
                  "skip the priority checks (linearity and types still apply)");
    cmd->add_option("--timeout", opts.timeout_ms, "watchdog timeout in milliseconds")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--output", opts.output, "write results to a file instead of stdout");
  };

  CLI::App* check = app.add_subcommand("check", "typecheck a program and report type and bounds");
  add_common(check);
  CLI::App* run = app.add_subcommand("run", "typecheck, translate, and run a program");
  add_common(run);
  CLI::App* graph = app.add_subcommand("graph", "emit the communication graph in DOT format");
  add_common(graph);

  CLI11_PARSE(app, argc, argv);

  try {
    if (check->parsed()) return cmd_check(opts);
    if (run->parsed()) return cmd_run(opts);
    if (graph->parsed()) return cmd_graph(opts);
    return kExitInternal;
  } catch (const sesh::pgv::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitParseError;
  } catch (const sesh::pgv::TypeError& e) {
    std::cerr << e.what() << "\n";
    return kExitTypeError;
  } catch (const sesh::pgv::GraphError& e) {
    std::cerr << "graph error: " << e.what() << "\n";
    return kExitInternal;
  } catch (const sesh::DeadlockError& e) {
    std::cerr << "deadlock: " << e.what() << "\n";
    return kExitDeadlock;
  } catch (const sesh::CancellationError& e) {
    std::cerr << "cancellation: " << e.what() << "\n";
    return kExitCancelled;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}
