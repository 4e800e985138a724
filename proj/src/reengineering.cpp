#include "grrw/reengineering.hpp"

#include <fstream>
#include <sstream>

#include "grrw/ecore.hpp"
#include "grrw/xmi.hpp"
#include "grrw/xml.hpp"

namespace grrw::reeng {

namespace {

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

std::size_t count(const Graph& graph, std::string_view cls) {
  return graph.nodes_of_type(graph.schema().node_class(cls)).size();
}

bool run(seq::ExecutionEnv& env, std::string_view text) {
  return seq::execute(env, *seq::parse_sequence(text));
}

const std::string& string_attr(const Graph& g, ElemId id, std::string_view name) {
  return std::get<std::string>(g.get_attr(ElementRef{id}, name));
}

ElemId single_target(const Graph& g, ElemId from, std::string_view edge_cls) {
  const auto edges = g.outgoing(NodeRef{{from}}, g.schema().edge_class(edge_cls));
  if (edges.size() != 1) {
    throw ExtractionError("element #" + std::to_string(from) + " has " +
                          std::to_string(edges.size()) + " '" + std::string(edge_cls) +
                          "' edges, expected 1");
  }
  return g.target(EdgeRef{{edges.front()}}).id;
}

}  // namespace

std::shared_ptr<const Schema> load_case_schema(const CaseFiles& files) {
  const std::vector<xml::Document> docs = {xml::parse_file(files.java_ecore()),
                                           xml::parse_file(files.statemachine_ecore())};
  Schema schema = import_ecore(docs);
  return std::make_shared<Schema>(
      parse_schema_text(read_text(files.helpers()), files.helpers().string(), std::move(schema)));
}

rules::RuleSet load_case_rules(const CaseFiles& files, std::shared_ptr<const Schema> schema) {
  rules::RuleSet rules(std::move(schema));
  rules.add_source(read_text(files.extract_rules()), files.extract_rules().string());
  rules.add_source(read_text(files.export_rules()), files.export_rules().string());
  return rules;
}

Graph load_program(const std::filesystem::path& xmi, std::shared_ptr<const Schema> schema) {
  return import_xmi(xml::parse_file(xmi), std::move(schema));
}

std::string extraction_sequence() {
  std::string out;
  for (std::string_view part : {kStatesSequence, kTransitionsSequence, kTriggersSequence,
                                kActionsSequence, kExportSequence}) {
    if (!out.empty()) out += " ;> ";
    out += part;
  }
  return out;
}

void check_program(const Graph& graph) {
  const Schema& s = graph.schema();
  std::vector<ElemId> roots;
  for (ElemId c : graph.nodes_of_type(s.node_class("java_Class"))) {
    if (string_attr(graph, c, "name") == "State") roots.push_back(c);
  }
  if (roots.size() != 1) {
    throw ExtractionError("expected exactly one class named 'State', found " +
                          std::to_string(roots.size()));
  }
  if (!std::get<bool>(graph.get_attr(ElementRef{roots.front()}, "isAbstract"))) {
    throw ExtractionError("class 'State' must be abstract");
  }
}

std::size_t extract_states(seq::ExecutionEnv& env) {
  check_program(env.graph);
  run(env, kStatesSequence);
  return count(env.graph, "sm_State");
}

std::size_t extract_transitions(seq::ExecutionEnv& env) {
  check_program(env.graph);
  run(env, kTransitionsSequence);
  return count(env.graph, "sm_Transition");
}

void assign_triggers(seq::ExecutionEnv& env) {
  check_program(env.graph);
  run(env, kTriggersSequence);
}

void assign_actions(seq::ExecutionEnv& env) {
  check_program(env.graph);
  run(env, kActionsSequence);
}

Summary run_extraction(seq::ExecutionEnv& env) {
  check_program(env.graph);
  run(env, extraction_sequence());
  return {count(env.graph, "sm_State"), count(env.graph, "sm_Transition")};
}

std::string describe(const Machine& machine) {
  std::ostringstream out;
  out << "states:";
  for (const auto& s : machine.states) out << " " << s;
  out << "\n";
  for (const auto& t : machine.transitions) {
    out << "  " << t.source << " -> " << t.target << " [" << t.trigger << " / " << t.action
        << "]\n";
  }
  return out.str();
}

Machine machine_of(const Graph& graph) {
  const auto machines = graph.nodes_of_type(graph.schema().node_class("sm_StateMachine"));
  if (machines.size() != 1) {
    throw ExtractionError("expected exactly one sm_StateMachine, found " +
                          std::to_string(machines.size()));
  }
  const Schema& s = graph.schema();
  const NodeRef sm{{machines.front()}};
  Machine m;
  for (ElemId e : graph.outgoing(sm, s.edge_class("sm_StateMachine_states"))) {
    m.states.insert(string_attr(graph, graph.target(EdgeRef{{e}}).id, "name"));
  }
  for (ElemId e : graph.outgoing(sm, s.edge_class("sm_StateMachine_transitions"))) {
    const ElemId t = graph.target(EdgeRef{{e}}).id;
    m.transitions.insert({string_attr(graph, single_target(graph, t, "sm_Transition_source"), "name"),
                          string_attr(graph, single_target(graph, t, "sm_Transition_target"), "name"),
                          string_attr(graph, t, "trigger"), string_attr(graph, t, "action")});
  }
  return m;
}

}  // namespace grrw::reeng
