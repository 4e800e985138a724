#include "grrw/shell.hpp"

#include <sys/resource.h>

#include <cctype>
#include <chrono>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "grrw/dot.hpp"
#include "grrw/ecore.hpp"
#include "grrw/error.hpp"
#include "grrw/reengineering.hpp"
#include "grrw/sequences.hpp"
#include "grrw/xmi.hpp"
#include "grrw/xml.hpp"

namespace grrw::shell {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::string format_ms(double ms) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(1) << ms << " ms";
  return out.str();
}

// A failed command; `column` is 1-based within the script line when known.
struct CommandError {
  std::string message;
  std::size_t column = 0;
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

}  // namespace

long peak_rss_kib() {
  rusage usage{};
  if (getrusage(RUSAGE_SELF, &usage) != 0) return 0;
  return usage.ru_maxrss;  // KiB on Linux
}

void print_timing(const Timing& t, std::ostream& out) {
  auto row = [&](const char* phase, double ms) {
    out << "  " << std::left << std::setw(12) << phase << std::right << std::setw(10) << std::fixed
        << std::setprecision(1) << ms << " ms\n";
  };
  out << "timing:\n";
  row("import", t.import_ms);
  row("extraction", t.extraction_ms);
  row("export", t.export_ms);
  row("total", t.total_ms);
  out << "  " << std::left << std::setw(12) << "peak RSS" << std::right << std::setw(10)
      << t.peak_rss_kib << " KiB\n";
}

// --- parsing -------------------------------------------------------------

struct Shell::Command {
  std::size_t line = 0;
  std::string keyword;            // "debug xgrs" for the two-word form
  std::vector<std::string> args;  // whitespace-separated, "quoted" allowed
  std::string rest;               // raw text after the keyword
  std::size_t rest_column = 0;    // 1-based column where `rest` starts
};

namespace {

std::vector<std::string> split_args(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    if (std::isspace(static_cast<unsigned char>(text[i]))) {
      ++i;
      continue;
    }
    std::string word;
    if (text[i] == '"') {
      ++i;
      bool closed = false;
      while (i < text.size()) {
        if (text[i] == '\\' && i + 1 < text.size()) {
          word += text[i + 1];
          i += 2;
        } else if (text[i] == '"') {
          ++i;
          closed = true;
          break;
        } else {
          word += text[i++];
        }
      }
      if (!closed) throw CommandError{"unterminated string"};
    } else {
      while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) word += text[i++];
    }
    out.push_back(std::move(word));
  }
  return out;
}

// Splits off the first word; returns the remainder and its offset.
std::pair<std::string_view, std::size_t> after_word(std::string_view line, std::size_t from) {
  std::size_t i = from;
  while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
  while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
  std::size_t j = i;
  while (j < line.size() && std::isspace(static_cast<unsigned char>(line[j]))) ++j;
  return {line.substr(j), j};
}

std::string first_word(std::string_view text) {
  std::size_t i = 0;
  while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
  return std::string(text.substr(0, i));
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

// --- shell ---------------------------------------------------------------

Shell::Shell(Options options, std::ostream& out, std::ostream& err)
    : options_(std::move(options)), out_(out), err_(err), emit_(&out) {}

Shell::~Shell() = default;

int Shell::run_file(const fs::path& script) {
  std::string text;
  try {
    text = read_file(script);
  } catch (const Error& e) {
    err_ << script.string() << ": error: " << e.what() << "\n";
    return 1;
  }
  script_ = script;
  fs::path base = script.parent_path();
  if (base.empty()) base = ".";
  return run_text(text, base, script.string());
}

int Shell::run_text(std::string_view text, const fs::path& base, const std::string& name) {
  base_ = base;
  if (script_.empty()) script_ = base / "script.grs";
  const auto start = Clock::now();
  std::size_t line_no = 0;
  int code = 0;
  while (!text.empty() && !quit_) {
    const std::size_t nl = text.find('\n');
    std::string_view raw = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
    const std::string_view body = trim(raw);
    if (body.empty() || body.front() == '#') continue;

    Command cmd;
    cmd.line = line_no;
    try {
      const std::size_t lead = static_cast<std::size_t>(body.data() - raw.data());
      std::string word = first_word(body);
      auto [rest, offset] = after_word(raw, lead);
      if (word == "debug") {
        if (first_word(rest) != "xgrs") throw CommandError{"expected 'xgrs' after 'debug'"};
        word = "debug xgrs";
        std::tie(rest, offset) = after_word(raw, offset);
      }
      cmd.keyword = word;
      cmd.rest = std::string(trim(rest));
      cmd.rest_column = offset + 1;
      cmd.args = split_args(cmd.rest);
      execute(cmd);
    } catch (const CommandError& e) {
      err_ << name << ":" << line_no;
      if (e.column) err_ << ":" << e.column;
      err_ << ": error: " << e.message << "\n";
      code = 1;
      break;
    } catch (const std::exception& e) {
      err_ << name << ":" << line_no << ": error: " << e.what() << "\n";
      code = 1;
      break;
    }
  }
  // A requested trace exists even when no sequence ran: snapshot only.
  if (code == 0 && options_.trace && !trace_ && graph_) {
    try {
      start_trace();
    } catch (const std::exception& e) {
      err_ << name << ": error: " << e.what() << "\n";
      code = 1;
    }
  }
  if (emit_) emit_->flush();
  if (trace_file_ && !trace_file_->flush()) {
    err_ << name << ": error: cannot write the trace\n";
    code = 1;
  }
  timing_.total_ms = ms_since(start);
  timing_.peak_rss_kib = peak_rss_kib();
  if (options_.time) print_timing(timing_, out_);
  return code;
}

void Shell::status(const std::string& line) {
  if (!options_.quiet) out_ << line << "\n";
}

fs::path Shell::resolve(const std::string& path) const {
  fs::path p(path);
  return p.is_absolute() ? p : base_ / p;
}

std::ofstream Shell::open_output(const fs::path& path) const {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

Graph& Shell::require_graph(const char* what) {
  if (!graph_) throw CommandError{std::string(what) + " needs a graph; import a metamodel first"};
  return *graph_;
}

void Shell::set_schema(Schema schema) {
  schema_ = std::make_shared<const Schema>(std::move(schema));
  graph_ = std::make_unique<Graph>(schema_);
}

void Shell::execute(const Command& cmd) {
  const std::string& k = cmd.keyword;
  if (k == "new") {
    cmd_new(cmd);
  } else if (k == "import") {
    cmd_import(cmd);
  } else if (k == "include") {
    cmd_include(cmd);
  } else if (k == "xgrs") {
    cmd_xgrs(cmd, options_.trace.has_value() || trace_ != nullptr);
  } else if (k == "debug xgrs") {
    cmd_xgrs(cmd, true);
  } else if (k == "redirect") {
    cmd_redirect(cmd);
  } else if (k == "export") {
    cmd_export(cmd);
  } else if (k == "dot") {
    cmd_dot(cmd);
  } else if (k == "echo") {
    out_ << cmd.rest << "\n";
  } else if (k == "quit") {
    if (!cmd.args.empty()) throw CommandError{"'quit' takes no arguments"};
    quit_ = true;
  } else {
    throw CommandError{"unknown command '" + k + "'"};
  }
}

void Shell::cmd_new(const Command& cmd) {
  if (cmd.args.empty() || cmd.args[0] != "graph" || cmd.args.size() > 2) {
    throw CommandError{"usage: new graph [name]"};
  }
  if (trace_) throw CommandError{"cannot replace the graph while a trace is being written"};
  schema_.reset();
  graph_.reset();
  rules_.reset();
  status("new graph" + (cmd.args.size() == 2 ? " " + cmd.args[1] : std::string()));
}

// Metamodels (.ecore, .gm) extend the schema while the graph is still empty
// and no rules are loaded; instances (.xmi) are added to the graph.
// Consecutive .ecore files are imported together so they may reference each
// other.
void Shell::cmd_import(const Command& cmd) {
  if (cmd.args.empty()) throw CommandError{"usage: import <file>..."};
  if (trace_) throw CommandError{"cannot import while a trace is being written"};
  const auto start = Clock::now();
  ImportReport report;
  std::vector<xml::Document> ecores;
  auto schema_base = [&]() -> Schema {
    if (graph_ && (graph_->node_count() > 0 || graph_->edge_count() > 0)) {
      throw CommandError{"metamodels must be imported before instance graphs"};
    }
    if (rules_) throw CommandError{"metamodels must be imported before rules are included"};
    return schema_ ? Schema(*schema_) : Schema();
  };
  auto flush_ecores = [&] {
    if (ecores.empty()) return;
    set_schema(import_ecore(ecores, schema_base(), &report));
    ecores.clear();
  };
  for (const std::string& arg : cmd.args) {
    const fs::path path = resolve(arg);
    const std::string ext = path.extension().string();
    if (ext == ".ecore") {
      ecores.push_back(xml::parse_file(path));
      continue;
    }
    flush_ecores();
    if (ext == ".gm") {
      set_schema(parse_schema_text(read_file(path), path.string(), schema_base()));
    } else if (ext == ".xmi") {
      import_xmi(require_graph("importing an instance"), xml::parse_file(path), &report);
    } else {
      throw CommandError{"cannot import '" + arg + "': expected .ecore, .gm or .xmi"};
    }
  }
  flush_ecores();
  const double ms = ms_since(start);
  timing_.import_ms += ms;
  for (const auto& w : report.warnings) err_ << "warning: " << w << "\n";
  std::ostringstream msg;
  msg << "imported " << cmd.args.size() << " file(s): " << graph_->node_count() << " nodes, "
      << graph_->edge_count() << " edges (" << format_ms(ms) << ")";
  status(msg.str());
}

void Shell::cmd_include(const Command& cmd) {
  if (cmd.args.size() != 1) throw CommandError{"usage: include <rulefile>"};
  require_graph("include");
  const auto start = Clock::now();
  if (!rules_) rules_ = std::make_unique<rules::RuleSet>(schema_);
  const fs::path path = resolve(cmd.args[0]);
  const std::size_t before = rules_->rules().size();
  rules_->add_source(read_file(path), path.string());
  const double ms = ms_since(start);
  timing_.import_ms += ms;
  status("included " + cmd.args[0] + ": " + std::to_string(rules_->rules().size() - before) +
         " rules (" + format_ms(ms) + ")");
}

void Shell::start_trace() {
  fs::path path = options_.trace ? *options_.trace : script_;
  if (!options_.trace) path.replace_extension(".trace.jsonl");
  trace_file_ = std::make_unique<std::ofstream>(open_output(path));
  trace_ = std::make_unique<trace::TraceWriter>(*trace_file_, *graph_);
  status("tracing to " + path.string());
}

void Shell::cmd_xgrs(const Command& cmd, bool debug) {
  if (cmd.rest.empty()) throw CommandError{"usage: xgrs <sequence>"};
  Graph& graph = require_graph("xgrs");
  if (!rules_) throw CommandError{"xgrs needs rules; include a rule file first"};
  std::unique_ptr<seq::Sequence> sequence;
  try {
    sequence = seq::parse_sequence(cmd.rest);
  } catch (const ParseError& e) {
    throw CommandError{e.message(), cmd.rest_column + e.column() - 1};
  }
  if (debug && !trace_) start_trace();

  const auto start = Clock::now();
  seq::ExecutionEnv env{graph, *rules_, emit_};
  env.trace = trace_.get();
  env.step_budget = options_.step_budget;
  env.match_options.reverse_seed_order = options_.reverse_seed_order;
  const bool result = seq::execute(env, *sequence);
  const double ms = ms_since(start);
  timing_.extraction_ms += ms;
  std::ostringstream msg;
  msg << (debug ? "debug xgrs: " : "xgrs: ") << (result ? "true" : "false") << ", " << env.applied
      << " rewrites in " << env.steps << " rule invocations (" << format_ms(ms) << ")";
  status(msg.str());
}

void Shell::cmd_redirect(const Command& cmd) {
  if (cmd.args.size() != 2 || cmd.args[0] != "emit") throw CommandError{"usage: redirect emit <file|->"};
  if (emit_) emit_->flush();
  if (cmd.args[1] == "-") {
    emit_file_.reset();
    emit_ = &out_;
    return;
  }
  emit_file_ = std::make_unique<std::ofstream>(open_output(resolve(cmd.args[1])));
  emit_ = emit_file_.get();
}

void Shell::cmd_export(const Command& cmd) {
  if (cmd.args.size() != 1) throw CommandError{"usage: export <file>"};
  const Graph& graph = require_graph("export");
  const auto start = Clock::now();
  const std::string text = export_state_machine_xmi(graph);
  auto out = open_output(resolve(cmd.args[0]));
  out << text;
  if (!out.flush()) throw Error("cannot write " + cmd.args[0]);
  const double ms = ms_since(start);
  timing_.export_ms += ms;
  status("exported " + cmd.args[0] + " (" + format_ms(ms) + ")");
}

void Shell::cmd_dot(const Command& cmd) {
  if (cmd.args.empty() || cmd.args.size() > 2) throw CommandError{"usage: dot <file> [config]"};
  const Graph& graph = require_graph("dot");
  const auto start = Clock::now();
  LayoutConfig config;
  if (cmd.args.size() == 2) {
    const fs::path path = resolve(cmd.args[1]);
    config = LayoutConfig::parse(read_file(path), path.string());
    config.validate(graph.schema());
  }
  const std::string text = export_dot(graph, config);
  auto out = open_output(resolve(cmd.args[0]));
  out << text;
  if (!out.flush()) throw Error("cannot write " + cmd.args[0]);
  const double ms = ms_since(start);
  timing_.export_ms += ms;
  status("wrote " + cmd.args[0] + " (" + format_ms(ms) + ")");
}

// --- one-shot extraction ---------------------------------------------------

int extract(const ExtractRequest& request, const Options& options, std::ostream& out,
            std::ostream& err) {
  const auto start = Clock::now();
  Timing timing;
  auto report = [&](const std::string& line) {
    if (!options.quiet) err << line << "\n";
  };
  try {
    const reeng::CaseFiles files{request.root};
    auto phase = Clock::now();
    auto schema = reeng::load_case_schema(files);
    const auto rules = reeng::load_case_rules(files, schema);
    Graph graph = reeng::load_program(request.program, schema);
    timing.import_ms = ms_since(phase);
    report("imported " + request.program.string() + ": " + std::to_string(graph.node_count()) +
           " nodes, " + std::to_string(graph.edge_count()) + " edges");

    std::unique_ptr<std::ofstream> trace_file;
    std::unique_ptr<trace::TraceWriter> tracer;
    if (options.trace) {
      if (options.trace->has_parent_path()) fs::create_directories(options.trace->parent_path());
      trace_file = std::make_unique<std::ofstream>(*options.trace, std::ios::binary);
      if (!*trace_file) throw Error("cannot write " + options.trace->string());
      tracer = std::make_unique<trace::TraceWriter>(*trace_file, graph);
    }

    phase = Clock::now();
    std::ostringstream xmi;
    seq::ExecutionEnv env{graph, rules, &xmi};
    env.trace = tracer.get();
    env.step_budget = options.step_budget;
    env.match_options.reverse_seed_order = options.reverse_seed_order;
    const auto summary = reeng::run_extraction(env);
    timing.extraction_ms = ms_since(phase);
    report("extracted " + std::to_string(summary.states) + " states, " +
           std::to_string(summary.transitions) + " transitions");

    phase = Clock::now();
    auto write = [](const fs::path& path, const std::string& text) {
      if (path.has_parent_path()) fs::create_directories(path.parent_path());
      std::ofstream file(path, std::ios::binary);
      file << text;
      if (!file.flush()) throw Error("cannot write " + path.string());
    };
    if (request.output) {
      write(*request.output, xmi.str());
    } else {
      out << xmi.str();
    }
    if (request.dot) {
      seq::ExecutionEnv render{graph, rules, nullptr};
      render.trace = tracer.get();
      seq::execute(render, *seq::parse_sequence("[transitionEdge]"));
      const fs::path layout = request.root / "fixtures" / "layout.cfg";
      auto config = LayoutConfig::parse(read_file(layout), layout.string());
      config.validate(graph.schema());
      write(*request.dot, export_dot(graph, config));
    }
    if (trace_file && !trace_file->flush()) throw Error("cannot write " + options.trace->string());
    timing.export_ms = ms_since(phase);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  timing.total_ms = ms_since(start);
  timing.peak_rss_kib = peak_rss_kib();
  if (options.time) print_timing(timing, err);
  return 0;
}

}  // namespace grrw::shell
