// Graph rewrite shell: runs .grs scripts, or extracts a state machine in one
// step.
//
//   grsh scripts/reengineering.grs
//   grsh --time --trace run.trace.jsonl --script scripts/reengineering.grs
//   grsh extract fixtures/tcp_large.xmi -o machine.xmi --time
//
// Exit codes: 0 success, 1 a command or the extraction failed, 2 usage error.

#include <CLI11.hpp>

#include <iostream>

#include "grrw/shell.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Graph rewrite shell"};
  app.fallthrough();
  grrw::shell::Options options;
  std::string script;
  std::string trace;
  std::string seed_order = "creation";
  app.add_option("--script,script", script, "Script to run")->check(CLI::ExistingFile);
  app.add_flag("-q,--quiet", options.quiet, "Suppress status lines");
  app.add_flag("--time", options.time, "Print the phase timing report");
  app.add_option("--trace", trace, "Write a step trace (JSON lines); traces every xgrs");
  app.add_option("--seed-order", seed_order, "Candidate order of node lookups")
      ->check(CLI::IsMember({"creation", "reverse"}));
  app.add_option("--step-budget", options.step_budget,
                 "Maximum rule invocations per xgrs (0 = unlimited)");

  grrw::shell::ExtractRequest request;
  request.root = GRRW_DATA_DIR;
  std::string output;
  std::string dot;
  auto* extract = app.add_subcommand("extract", "Extract the state machine of a program graph");
  extract->add_option("program", request.program, "Program graph (XMI)")
      ->required()
      ->check(CLI::ExistingFile);
  extract->add_option("-o,--output", output, "State machine XMI (default: stdout)");
  extract->add_option("--dot", dot, "Also write the graph as DOT");
  extract->add_option("--root", request.root, "Directory holding fixtures/ and rules/")
      ->check(CLI::ExistingDirectory);

  try {
    app.parse(argc, argv);
    if (!*extract && script.empty()) throw CLI::RequiredError("script");
    if (*extract && !script.empty()) throw CLI::ValidationError("extract takes no script");
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  options.reverse_seed_order = seed_order == "reverse";
  if (!trace.empty()) options.trace = trace;

  if (*extract) {
    if (!output.empty()) request.output = output;
    if (!dot.empty()) request.dot = dot;
    return grrw::shell::extract(request, options, std::cout, std::cerr);
  }
  grrw::shell::Shell shell(options, std::cout, std::cerr);
  return shell.run_file(script);
}
