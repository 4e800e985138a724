#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "grrw/graph.hpp"
#include "grrw/rules/ruleset.hpp"
#include "grrw/trace.hpp"

// Script runner for `.grs` files (grammar in docs/shell.md). One script, one
// graph; commands run strictly in file order and the first failure stops the
// script.
namespace grrw::shell {

struct Options {
  bool quiet = false;  // no status lines
  bool time = false;   // phase report at the end
  // Trace file; when set every `xgrs` is traced as if written `debug xgrs`.
  std::optional<std::filesystem::path> trace;
  bool reverse_seed_order = false;
  std::size_t step_budget = 1'000'000;
};

// Wall-clock milliseconds per phase, as in the case's measurement table:
// import covers `import` and `include`, extraction covers `xgrs`, export
// covers `export`, `dot` and file output. Total spans the whole script and is
// at least the sum of the parts.
struct Timing {
  double import_ms = 0;
  double extraction_ms = 0;
  double export_ms = 0;
  double total_ms = 0;
  long peak_rss_kib = 0;  // process high-water mark; 0 where unavailable
};

void print_timing(const Timing& timing, std::ostream& out);
long peak_rss_kib();

class Shell {
 public:
  Shell(Options options, std::ostream& out, std::ostream& err);
  ~Shell();
  Shell(const Shell&) = delete;
  Shell& operator=(const Shell&) = delete;

  // Returns the exit code: 0 if every command succeeded, else 1 after
  // printing `file:line: error: message` to the error stream.
  int run_file(const std::filesystem::path& script);
  // `base` is the directory relative paths are resolved against; `name`
  // appears in diagnostics.
  int run_text(std::string_view text, const std::filesystem::path& base, const std::string& name);

  const Graph* graph() const { return graph_.get(); }
  const Timing& timing() const { return timing_; }

 private:
  struct Command;
  void execute(const Command& cmd);
  void cmd_new(const Command& cmd);
  void cmd_import(const Command& cmd);
  void cmd_include(const Command& cmd);
  void cmd_xgrs(const Command& cmd, bool debug);
  void cmd_redirect(const Command& cmd);
  void cmd_export(const Command& cmd);
  void cmd_dot(const Command& cmd);

  std::filesystem::path resolve(const std::string& path) const;
  std::ofstream open_output(const std::filesystem::path& path) const;
  void status(const std::string& line);
  void set_schema(Schema schema);
  Graph& require_graph(const char* what);
  void start_trace();

  Options options_;
  std::ostream& out_;
  std::ostream& err_;
  std::filesystem::path base_;
  std::filesystem::path script_;

  std::shared_ptr<const Schema> schema_;
  std::unique_ptr<Graph> graph_;
  std::unique_ptr<rules::RuleSet> rules_;

  std::unique_ptr<std::ofstream> emit_file_;
  std::ostream* emit_ = nullptr;

  std::unique_ptr<std::ofstream> trace_file_;
  std::unique_ptr<trace::TraceWriter> trace_;

  Timing timing_;
  bool quit_ = false;
};

// One-shot extraction without a script: loads the bundled metamodels and
// rules from `root`, extracts the state machine of `program` and writes the
// XMI produced by the export rules to `output` (or `out`). With `dot`, the
// transitions are then redrawn as edges and the graph is written as DOT
// using root/fixtures/layout.cfg. Returns the exit code (0 or 1).
struct ExtractRequest {
  std::filesystem::path program;
  std::filesystem::path root;
  std::optional<std::filesystem::path> output;
  std::optional<std::filesystem::path> dot;
};

int extract(const ExtractRequest& request, const Options& options, std::ostream& out,
            std::ostream& err);

}  // namespace grrw::shell
