#include <gtest/gtest.h>

#include <sstream>

#include "grrw/reengineering.hpp"
#include "grrw/xmi.hpp"
#include "grrw/xml.hpp"
#include "support/isomorphism.hpp"

using namespace grrw;
using namespace grrw::reeng;

namespace {

const CaseFiles& files() {
  static const CaseFiles f{GRRW_SOURCE_DIR};
  return f;
}

const std::shared_ptr<const Schema>& schema() {
  static const auto s = load_case_schema(files());
  return s;
}

const rules::RuleSet& case_rules() {
  static const auto r = load_case_rules(files(), schema());
  return r;
}

struct Session {
  explicit Session(Graph& g) : env{g, case_rules(), &emitted} {}
  std::ostringstream emitted;
  seq::ExecutionEnv env;
};

Graph tcp_graph() {
  Graph g(schema());
  ProgramBuilder b(g);
  build_tcp_program(b);
  return g;
}

Machine extract(Graph& g, std::string* xmi = nullptr) {
  Session run(g);
  run_extraction(run.env);
  if (xmi) *xmi = run.emitted.str();
  return machine_of(g);
}

// Program skeleton: abstract State with the states Src and Dst, and an empty
// enumeration; tests add methods and statements.
struct Mini {
  Mini() : g(schema()), b(g) {
    state = b.add_class("State", true);
    src = b.add_class("Src", false, state);
    dst = b.add_class("Dst", false, state);
    flags = b.add_enum("Flags");
  }
  Graph g;
  ProgramBuilder b;
  NodeRef state, src, dst, flags;
};

std::string only_trigger(const Machine& m) {
  EXPECT_EQ(m.transitions.size(), 1u) << describe(m);
  return m.transitions.empty() ? "<none>" : m.transitions.begin()->trigger;
}

std::string only_action(const Machine& m) {
  EXPECT_EQ(m.transitions.size(), 1u) << describe(m);
  return m.transitions.empty() ? "<none>" : m.transitions.begin()->action;
}

}  // namespace

TEST(CaseRules, LoadWithoutErrors) {
  for (const char* name : {"createStates", "createTransitions", "triggerMethod", "triggerSwitchCase",
                           "triggerCatch", "triggerFallback", "actionSend", "actionFallback",
                           "assignIds", "prefix", "states", "transitions", "suffix",
                           "transitionEdge"}) {
    EXPECT_NE(case_rules().find_rule(name), nullptr) << name;
  }
  EXPECT_NO_THROW(seq::bind(*seq::parse_sequence(extraction_sequence()), case_rules()));
}

TEST(ExtractStates, TcpHierarchy) {
  Graph g = tcp_graph();
  Session run(g);
  EXPECT_EQ(extract_states(run.env), 11u);
  EXPECT_EQ(machine_of(g).states,
            (std::set<std::string>{"CloseWait", "Closed", "Closing", "Established", "FinWait1",
                                   "FinWait2", "LastAck", "Listen", "SynReceived", "SynSent",
                                   "TimeWait"}));
}

TEST(ExtractStates, AbstractIntermediateProducesNoState) {
  Graph g(schema());
  ProgramBuilder b(g);
  NodeRef state = b.add_class("State", true);
  NodeRef mid = b.add_class("Intermediate", true, state);
  b.add_class("Leaf", false, mid);
  b.add_class("Unrelated");
  Session run(g);
  EXPECT_EQ(extract_states(run.env), 1u);
  EXPECT_EQ(machine_of(g).states, std::set<std::string>{"Leaf"});
  EXPECT_EQ(brute_force_extract(g).states, std::set<std::string>{"Leaf"});
}

TEST(ExtractStates, LoneStateStillCreatesMachine) {
  Graph g(schema());
  ProgramBuilder b(g);
  b.add_class("State", true);
  Session run(g);
  EXPECT_EQ(run_extraction(run.env).states, 0u);
  EXPECT_EQ(machine_of(g), Machine{});
  EXPECT_EQ(brute_force_extract(g), Machine{});
}

TEST(ExtractStates, RejectsMissingOrConcreteStateRoot) {
  Graph none(schema());
  ProgramBuilder nb(none);
  nb.add_class("Other");
  Session r1(none);
  EXPECT_THROW(extract_states(r1.env), ExtractionError);
  EXPECT_THROW(brute_force_extract(none), ExtractionError);

  Graph twice(schema());
  ProgramBuilder tb(twice);
  tb.add_class("State", true);
  tb.add_class("State", true);
  Session r2(twice);
  EXPECT_THROW(extract_states(r2.env), ExtractionError);

  Graph concrete(schema());
  ProgramBuilder cb(concrete);
  cb.add_class("State", false);
  Session r3(concrete);
  EXPECT_THROW(extract_states(r3.env), ExtractionError);
}

TEST(ExtractTransitions, SourceFoundByAscentTargetByCall) {
  Mini m;
  NodeRef run = m.b.add_method(m.src, "run");
  NodeRef sw = m.b.add_switch(run);
  NodeRef c = m.b.add_case(sw, "GO");
  NodeRef inner = m.b.add_block(c);
  NodeRef call = m.b.add_activate(inner, m.dst);
  Session r(m.g);
  extract_states(r.env);
  EXPECT_EQ(extract_transitions(r.env), 1u);

  // Links run from the transition through every container up to the method.
  const Schema& s = m.g.schema();
  const ElemId t = m.g.nodes_of_type(s.node_class("sm_Transition")).at(0);
  std::vector<std::string> linked;
  for (ElemId e : m.g.outgoing(NodeRef{{t}}, s.edge_class("link"))) {
    linked.push_back(m.g.class_name(m.g.target(EdgeRef{{e}}).id));
  }
  EXPECT_EQ(linked, (std::vector<std::string>{"java_ExpressionStatement", "java_Block",
                                              "java_SwitchCase", "java_Switch", "java_Block",
                                              "java_Method"}));
  (void)call;
}

TEST(ExtractTransitions, SelfTransition) {
  Mini m;
  m.b.add_activate(m.b.add_method(m.src, "run"), m.src);
  const Machine got = extract(m.g);
  ASSERT_EQ(got.transitions.size(), 1u);
  EXPECT_EQ(got.transitions.begin()->source, "Src");
  EXPECT_EQ(got.transitions.begin()->target, "Src");
}

TEST(ExtractTransitions, CallOutsideStateHierarchyIsIgnored) {
  Mini m;
  NodeRef other = m.b.add_class("Helper");
  m.b.add_activate(m.b.add_method(other, "go"), m.dst);
  // Abstract or unrelated targets have no state either.
  m.b.add_activate(m.b.add_method(m.src, "go"), other);
  m.b.add_instance_call(m.b.add_method(m.src, "stop"), m.dst, "deactivate");
  EXPECT_TRUE(extract(m.g).transitions.empty());
  EXPECT_TRUE(brute_force_extract(m.g).transitions.empty());
}

TEST(AssignTriggers, NonRunMethodName) {
  Mini m;
  m.b.add_activate(m.b.add_method(m.src, "close"), m.dst);
  EXPECT_EQ(only_trigger(extract(m.g)), "close");
}

TEST(AssignTriggers, SwitchCaseInsideRun) {
  Mini m;
  NodeRef sw = m.b.add_switch(m.b.add_method(m.src, "run"));
  m.b.add_activate(m.b.add_case(sw, "SYN_ACK"), m.dst);
  EXPECT_EQ(only_trigger(extract(m.g)), "SYN_ACK");
}

TEST(AssignTriggers, CatchBlockInsideRun) {
  Mini m;
  NodeRef body = m.b.add_try(m.b.add_method(m.src, "run"));
  m.b.add_call(body, "work");
  m.b.add_activate(m.b.add_catch(body, "TimeoutException"), m.dst);
  EXPECT_EQ(only_trigger(extract(m.g)), "TimeoutException");
}

TEST(AssignTriggers, FallbackInsidePlainRun) {
  Mini m;
  m.b.add_activate(m.b.add_method(m.src, "run"), m.dst);
  EXPECT_EQ(only_trigger(extract(m.g)), "--");
}

TEST(AssignTriggers, MethodNameBeatsSwitchCaseBeatsCatch) {
  {
    Mini m;
    NodeRef body = m.b.add_try(m.b.add_method(m.src, "close"));
    NodeRef sw = m.b.add_switch(m.b.add_catch(body, "IOException"));
    m.b.add_activate(m.b.add_case(sw, "FIN"), m.dst);
    EXPECT_EQ(only_trigger(extract(m.g)), "close");
    EXPECT_EQ(only_trigger(brute_force_extract(m.g)), "close");
  }
  {
    Mini m;
    NodeRef body = m.b.add_try(m.b.add_method(m.src, "run"));
    NodeRef sw = m.b.add_switch(m.b.add_catch(body, "IOException"));
    m.b.add_activate(m.b.add_case(sw, "FIN"), m.dst);
    EXPECT_EQ(only_trigger(extract(m.g)), "FIN");
  }
}

TEST(AssignTriggers, InnermostSwitchCaseWins) {
  Mini m;
  NodeRef outer = m.b.add_switch(m.b.add_method(m.src, "run"));
  NodeRef inner = m.b.add_switch(m.b.add_case(outer, "OUTER"));
  m.b.add_activate(m.b.add_case(inner, "INNER"), m.dst);
  EXPECT_EQ(only_trigger(extract(m.g)), "INNER");
  EXPECT_EQ(only_trigger(brute_force_extract(m.g)), "INNER");
}

TEST(AssignTriggers, EmptyLabelsNeverCountAsSet) {
  Mini m;
  NodeRef outer = m.b.add_switch(m.b.add_method(m.src, "run"));
  NodeRef inner = m.b.add_switch(m.b.add_case(outer, "OUTER"));
  m.b.add_activate(m.b.add_case(inner, ""), m.dst);
  EXPECT_EQ(only_trigger(extract(m.g)), "OUTER");
  EXPECT_EQ(only_trigger(brute_force_extract(m.g)), "OUTER");
}

TEST(AssignActions, AdjacentSendConstant) {
  Mini m;
  NodeRef body = m.b.add_method(m.src, "run");
  NodeRef ack = m.b.add_constant(m.flags, "ACK");
  m.b.add_send(body, ack);
  m.b.add_activate(body, m.dst);
  EXPECT_EQ(only_action(extract(m.g)), "ACK");
}

TEST(AssignActions, FallbackWithoutSend) {
  Mini m;
  NodeRef body = m.b.add_method(m.src, "run");
  NodeRef ack = m.b.add_constant(m.flags, "ACK");
  m.b.add_activate(body, m.dst);
  m.b.add_send(m.b.add_block(body), ack);  // not a sibling
  EXPECT_EQ(only_action(extract(m.g)), "--");
}

TEST(AssignActions, FirstOfTwoSendsWinsDeterministically) {
  std::string first_xmi;
  for (int round = 0; round < 2; ++round) {
    Mini m;
    NodeRef body = m.b.add_method(m.src, "run");
    NodeRef fin = m.b.add_constant(m.flags, "FIN");
    NodeRef ack = m.b.add_constant(m.flags, "ACK");
    m.b.add_activate(body, m.dst);
    m.b.add_send(body, fin);
    m.b.add_send(body, ack);
    std::string xmi;
    EXPECT_EQ(only_action(extract(m.g, &xmi)), "FIN");
    if (round == 0) {
      first_xmi = xmi;
    } else {
      EXPECT_EQ(xmi, first_xmi);
    }
  }
}

TEST(AssignPhases, AreIdempotent) {
  Graph g = tcp_graph();
  Session run(g);
  extract_states(run.env);
  extract_transitions(run.env);
  assign_triggers(run.env);
  assign_actions(run.env);
  Graph before = g;
  const std::size_t applied = run.env.applied;
  assign_triggers(run.env);
  assign_actions(run.env);
  EXPECT_EQ(run.env.applied, applied);
  EXPECT_TRUE(testutil::isomorphic(before, g));
}

TEST(RunExtraction, TcpProgramMatchesOracle) {
  Graph g = tcp_graph();
  const Machine expected = brute_force_extract(g);
  const Machine got = extract(g);
  EXPECT_EQ(got, expected) << "engine:\n" << describe(got) << "oracle:\n" << describe(expected);
  EXPECT_EQ(got.transitions.size(), 23u);
  EXPECT_TRUE(got.transitions.contains({"SynSent", "Established", "SYN_ACK", "ACK"}));
  EXPECT_TRUE(got.transitions.contains({"Established", "FinWait1", "close", "FIN"}));
  EXPECT_TRUE(got.transitions.contains({"TimeWait", "Closed", "--", "--"}));
  EXPECT_TRUE(got.transitions.contains({"Listen", "Listen", "RST", "--"}));
}

TEST(RunExtraction, RuleExportEqualsBuiltInExporter) {
  Graph g = tcp_graph();
  std::string xmi;
  extract(g, &xmi);
  EXPECT_EQ(xmi, export_state_machine_xmi(g));
  // The bookkeeping node is gone again.
  EXPECT_TRUE(g.nodes_of_type(g.schema().node_class("sm_XmiIds")).empty());
}

TEST(RunExtraction, ExportRoundTripsThroughXmi) {
  Graph g = tcp_graph();
  std::string xmi;
  const Machine machine = extract(g, &xmi);
  Graph back = import_xmi(xml::parse(xmi, "machine.xmi"), schema());
  EXPECT_EQ(machine_of(back), machine);
}

TEST(RunExtraction, RepeatedRunsAreByteIdentical) {
  Graph a = tcp_graph();
  Graph b = tcp_graph();
  std::string xa, xb;
  extract(a, &xa);
  extract(b, &xb);
  EXPECT_EQ(xa, xb);
}

TEST(RunExtraction, ReverseSeedOrderGivesSameMachine) {
  Graph a = tcp_graph();
  Graph b = tcp_graph();
  Session run(b);
  run.env.match_options.reverse_seed_order = true;
  run_extraction(run.env);
  EXPECT_EQ(machine_of(b), extract(a));
}

TEST(RunExtraction, TransitionEdgeRuleForRendering) {
  Graph g = tcp_graph();
  const Machine m = extract(g);
  Session run(g);
  EXPECT_TRUE(seq::execute(run.env, *seq::parse_sequence("[transitionEdge]")));
  const Schema& s = g.schema();
  EXPECT_TRUE(g.nodes_of_type(s.node_class("sm_Transition")).empty());
  std::multiset<TransitionTuple> edges;
  for (ElemId e : g.edges_of_type(s.edge_class("sm_TransitionEdge"))) {
    auto name = [&](NodeRef n) { return std::get<std::string>(g.get_attr(n, "name")); };
    edges.insert({name(g.source(EdgeRef{{e}})), name(g.target(EdgeRef{{e}})),
                  std::get<std::string>(g.get_attr(ElementRef{e}, "trigger")),
                  std::get<std::string>(g.get_attr(ElementRef{e}, "action"))});
  }
  EXPECT_EQ(edges, m.transitions);
}

TEST(Differential, RandomProgramsMatchOracle) {
  std::size_t transitions = 0;
  std::set<std::string> trigger_kinds;
  std::set<std::string> action_kinds;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    Graph g(schema());
    ProgramBuilder b(g);
    build_random_program(b, seed);
    const Machine expected = brute_force_extract(g);
    std::string xmi;
    const Machine got = extract(g, &xmi);
    ASSERT_EQ(got, expected) << "seed " << seed << "\nengine:\n"
                             << describe(got) << "oracle:\n"
                             << describe(expected);
    ASSERT_EQ(xmi, export_state_machine_xmi(g)) << "seed " << seed;
    transitions += got.transitions.size();
    for (const auto& t : got.transitions) {
      trigger_kinds.insert(t.trigger.substr(0, 2));
      action_kinds.insert(t.action.substr(0, 1));
    }
  }
  // The generator reaches every rule: method names, case labels, exception
  // types and the fallback; sent constants and the fallback.
  EXPECT_GT(transitions, 500u);
  for (const char* kind : {"op", "cl", "re", "ti", "CA", "Ex", "--"}) {
    EXPECT_TRUE(trigger_kinds.contains(kind)) << kind;
  }
  EXPECT_EQ(action_kinds, (std::set<std::string>{"-", "K"}));
}

TEST(ProgramXmi, WriterOutputImportsIsomorphic) {
  Graph g = tcp_graph();
  std::ostringstream out;
  export_xmi(g, NodeRef{{g.nodes_of_type(g.schema().node_class("java_Model")).at(0)}}, out);
  Graph back = import_xmi(xml::parse(out.str(), "tcp.xmi"), schema());
  EXPECT_TRUE(testutil::isomorphic(g, back));
}
