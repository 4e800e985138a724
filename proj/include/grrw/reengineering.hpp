#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <set>
#include <string>
#include <string_view>

#include "grrw/graph.hpp"
#include "grrw/rules/ruleset.hpp"
#include "grrw/sequences.hpp"

// State machine extraction from mini-Java program graphs (the Reengineering
// case). The rules ship as DSL source in rules/; this module loads them, runs
// them in the documented order, and provides an independent plain-traversal
// oracle plus program-graph builders for fixtures and tests.
namespace grrw::reeng {

// Bundled case files below a repository root.
struct CaseFiles {
  std::filesystem::path root;

  std::filesystem::path java_ecore() const { return root / "fixtures" / "java.ecore"; }
  std::filesystem::path statemachine_ecore() const {
    return root / "fixtures" / "statemachine.ecore";
  }
  std::filesystem::path helpers() const { return root / "fixtures" / "helpers.gm"; }
  std::filesystem::path extract_rules() const { return root / "rules" / "extract.grg"; }
  std::filesystem::path export_rules() const { return root / "rules" / "export.gri"; }
};

// java + sm packages plus the helper types.
std::shared_ptr<const Schema> load_case_schema(const CaseFiles& files);
// extract.grg followed by export.gri.
rules::RuleSet load_case_rules(const CaseFiles& files, std::shared_ptr<const Schema> schema);
Graph load_program(const std::filesystem::path& xmi, std::shared_ptr<const Schema> schema);

// The phases, as rule application sequences over the shipped rules.
inline constexpr std::string_view kStatesSequence = "[createStates]";
inline constexpr std::string_view kTransitionsSequence = "[createTransitions]";
inline constexpr std::string_view kTriggersSequence =
    "[triggerMethod] ;> triggerSwitchCase* ;> triggerCatch* ;> [triggerFallback]";
inline constexpr std::string_view kActionsSequence = "[actionSend] ;> [actionFallback]";
inline constexpr std::string_view kExportSequence =
    "[assignIds] ;> prefix ;> [states] ;> [transitions] ;> suffix";
// All five joined with ";>"; this is the xgrs line of scripts/reengineering.grs.
std::string extraction_sequence();

inline constexpr std::string_view kUnset = "";
inline constexpr std::string_view kFallback = "--";

// Throws ExtractionError unless the graph has exactly one class named "State"
// and that class is abstract.
void check_program(const Graph& graph);

// Each phase checks the program, runs its sequence in `env` and reports the
// resulting number of states/transitions in the graph.
std::size_t extract_states(seq::ExecutionEnv& env);
std::size_t extract_transitions(seq::ExecutionEnv& env);
void assign_triggers(seq::ExecutionEnv& env);
void assign_actions(seq::ExecutionEnv& env);

struct Summary {
  std::size_t states = 0;
  std::size_t transitions = 0;
};

// Runs extraction_sequence(); the XMI produced by the export rules goes to
// env.emit.
Summary run_extraction(seq::ExecutionEnv& env);

// Abstract state machine value: state names and transition tuples, compared
// by value.
struct TransitionTuple {
  std::string source;
  std::string target;
  std::string trigger;
  std::string action;

  friend auto operator<=>(const TransitionTuple&, const TransitionTuple&) = default;
};

struct Machine {
  std::set<std::string> states;
  std::multiset<TransitionTuple> transitions;

  friend bool operator==(const Machine&, const Machine&) = default;
};

std::string describe(const Machine& machine);

// Reads the single sm_StateMachine of a graph (extracted or imported).
Machine machine_of(const Graph& graph);

// Independent oracle: computes the machine by plain traversals of the program
// graph, without the rule engine.
Machine brute_force_extract(const Graph& graph);

// Builds mini-Java program graphs. All nodes end up in the containment tree
// of one java_Model.
class ProgramBuilder {
 public:
  explicit ProgramBuilder(Graph& graph);

  NodeRef model() const { return model_; }
  Graph& graph() { return g_; }

  NodeRef add_class(const std::string& name, bool is_abstract = false, NodeRef super = {});
  NodeRef add_enum(const std::string& name);
  NodeRef add_constant(NodeRef enumeration, const std::string& name);

  // Method with its body block; returns the body.
  NodeRef add_method(NodeRef cls, const std::string& name);
  NodeRef method_of(NodeRef body) const;

  // Statement containers; `container` is a java_Block or java_SwitchCase.
  NodeRef add_block(NodeRef container);
  NodeRef add_switch(NodeRef container);
  NodeRef add_case(NodeRef switch_stmt, const std::string& constant);
  // Try statement; returns its body block.
  NodeRef add_try(NodeRef container);
  NodeRef try_of(NodeRef body) const;
  // Catch clause of the try owning `try_body`; returns the catch body block.
  NodeRef add_catch(NodeRef try_body, const std::string& exception_type);

  // `Target.Instance().activate();`
  NodeRef add_activate(NodeRef container, NodeRef target_class);
  // `send(Enum.CONSTANT);`
  NodeRef add_send(NodeRef container, NodeRef constant);
  // `name();` without arguments.
  NodeRef add_call(NodeRef container, const std::string& method_name);
  // `receiver.method_name()` where the receiver is a plain `Instance` call on
  // `target_class`, i.e. the activate shape with another method name.
  NodeRef add_instance_call(NodeRef container, NodeRef target_class,
                            const std::string& method_name);

 private:
  NodeRef child(NodeRef parent, std::string_view edge, std::string_view cls);
  NodeRef statement(NodeRef container, std::string_view cls);
  NodeRef method_call(NodeRef parent, std::string_view edge, const std::string& name);

  Graph& g_;
  NodeRef model_;
};

// A TCP-like program: an abstract State hierarchy with eleven connection
// states (some below an abstract intermediate class), their run/open/close
// methods with switch cases, try/catch and send calls, plus classes outside
// the hierarchy. `copies` > 1 repeats the non-root classes with a numeric
// suffix (all below the one State class) to build large graphs.
void build_tcp_program(ProgramBuilder& b, std::size_t copies = 1);

struct RandomProgramOptions {
  std::size_t max_classes = 200;
  std::size_t max_statements = 500;
};

// Seeded random program: random class hierarchy (with abstract classes and
// classes outside the State hierarchy), nested blocks/switches/try-catches,
// activate and send calls, plus near-miss decoys.
void build_random_program(ProgramBuilder& b, std::uint64_t seed,
                          const RandomProgramOptions& options = {});

}  // namespace grrw::reeng
