#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "grrw/sequences.hpp"
#include "support/isomorphism.hpp"

using namespace grrw;
using namespace grrw::seq;

namespace {

std::shared_ptr<const Schema> counter_schema() {
  return std::make_shared<Schema>(parse_schema_text(R"(
    node class Item { n : int; done : boolean; }
    node class Mark;
    edge class marks connect Mark -> Item;
  )",
                                                    "test.gm"));
}

const char* kRules = R"(
  rule noMatch {
    x:Mark;
    if { false; }
    modify { }
  }

  rule three {
    i:Item;
    negative { :Mark -:marks-> i; }
    modify { :Mark -:marks-> i; }
  }

  rule finishOne {
    i:Item;
    if { !i.done; }
    modify { eval { i.done = true; i.n = i.n + 1; } }
  }

  rule countItems {
    i:Item;
    modify { emit(i.n, ";"); }
  }

  rule dropMarks {
    m:Mark -:marks-> i:Item;
    modify { delete(m); }
  }

  rule bump(var k:int, var f:double) {
    i:Item;
    modify { eval { i.n = i.n + k; } }
  }
)";

struct Fixture {
  Fixture() : schema(counter_schema()), graph(schema), rules(rules::parse_rules(kRules, schema, "t.grg")) {
    for (int k = 0; k < 3; ++k) graph.set_attr(graph.add_node("Item"), "n", std::int64_t{k});
  }
  std::shared_ptr<const Schema> schema;
  Graph graph;
  rules::RuleSet rules;
};

struct Recorder : TraceHook {
  std::vector<std::string> events;
  std::vector<Delta> deltas;
  void sequence_enter(const Sequence&) override { events.push_back("enter"); }
  void rule_applied(const rules::Rule& rule, const rules::Match&, const Delta& delta,
                    const std::string&) override {
    events.push_back("applied " + rule.name);
    deltas.push_back(delta);
  }
  void rule_failed(const rules::Rule& rule) override { events.push_back("failed " + rule.name); }
  void sequence_exit(const Sequence&, bool result) override {
    events.push_back(result ? "exit true" : "exit false");
  }
  std::size_t rule_events() const { return events.size() - 2; }
};

bool run(Fixture& f, const std::string& text, TraceHook* trace = nullptr, std::ostream* emit = nullptr) {
  ExecutionEnv env{f.graph, f.rules, emit, trace};
  return execute(env, *parse_sequence(text));
}

std::string parse_error(const std::string& text) {
  try {
    parse_sequence(text);
  } catch (const ParseError& e) {
    return e.what();
  }
  return "<no error>";
}

std::string bind_error(const std::string& text) {
  Fixture f;
  try {
    bind(*parse_sequence(text), f.rules);
  } catch (const SequenceError& e) {
    return e.what();
  }
  return "<no error>";
}

}  // namespace

TEST(SequenceParser, ThenRightOfTwoAllBrackets) {
  EXPECT_EQ(describe(*parse_sequence("[a] ;> [b]")), "ThenRight(AllBracket(a), AllBracket(b))");
}

TEST(SequenceParser, BareNameIsSingleCall) {
  EXPECT_EQ(describe(*parse_sequence("r")), "RuleCall(r)");
}

TEST(SequenceParser, ThenChainsAreLeftAssociative) {
  EXPECT_EQ(describe(*parse_sequence("a ;> b <; c")),
            "ThenLeft(ThenRight(RuleCall(a), RuleCall(b)), RuleCall(c))");
}

TEST(SequenceParser, PrecedenceOfOperators) {
  EXPECT_EQ(describe(*parse_sequence("!a && b* || (c ;> [d])")),
            "LazyOr(LazyAnd(Not(RuleCall(a)), Star(RuleCall(b))), "
            "ThenRight(RuleCall(c), AllBracket(d)))");
}

TEST(SequenceParser, LiteralArguments) {
  EXPECT_EQ(describe(*parse_sequence("[r(1, -2.5, \"x\", true)]")),
            "AllBracket(r, 1, -2.5, \"x\", true)");
}

TEST(SequenceParser, ReferencedRulesInSourceOrder) {
  const auto names = referenced_rules(*parse_sequence("[a] ;> b* && !a"));
  EXPECT_EQ(names, (std::vector<std::string>{"a", "b", "a"}));
}

TEST(SequenceParser, Errors) {
  EXPECT_EQ(parse_error(""), "<sequence>:1:1: empty sequence");
  EXPECT_EQ(parse_error("[a"), "<sequence>:1:3: expected ']', found end of input");
  EXPECT_EQ(parse_error("a ;> ;> b"), "<sequence>:1:6: expected rule call, found ';'");
  EXPECT_EQ(parse_error("a b"), "<sequence>:1:3: unexpected 'b'");
  EXPECT_EQ(parse_error("r(x)"), "<sequence>:1:3: rule arguments must be literals");
}

TEST(SequenceBind, RejectsUnknownRulesAndBadArguments) {
  EXPECT_EQ(bind_error("[three] ;> missing"), "column 12: unknown rule 'missing'");
  EXPECT_EQ(bind_error("bump(1)"), "column 1: rule 'bump' expects 2 arguments, got 1");
  EXPECT_EQ(bind_error("bump(\"a\", 1.0)"), "column 1: argument 1 of 'bump' must be of type int");
  EXPECT_EQ(bind_error("bump(1, 2)"), "<no error>");
}

TEST(SequenceExec, ThenRightYieldsRightOperand) {
  Fixture f;
  EXPECT_TRUE(run(f, "[noMatch] ;> [three]"));
  EXPECT_EQ(f.graph.nodes_of_type(f.schema->node_class("Mark")).size(), 3u);
}

TEST(SequenceExec, EmptyAllBracketIsFalseAndNegationTrue) {
  Fixture f;
  EXPECT_FALSE(run(f, "[noMatch]"));
  EXPECT_TRUE(run(f, "![noMatch]"));
}

TEST(SequenceExec, ThenLeftYieldsLeftOperand) {
  Fixture f;
  EXPECT_TRUE(run(f, "[three] <; [noMatch]"));
}

TEST(SequenceExec, LazyOperatorsShortCircuit) {
  Fixture f;
  Recorder and_trace;
  EXPECT_FALSE(run(f, "noMatch && [three]", &and_trace));
  EXPECT_EQ(and_trace.events, (std::vector<std::string>{"enter", "failed noMatch", "exit false"}));

  Recorder or_trace;
  EXPECT_TRUE(run(f, "finishOne || [three]", &or_trace));
  EXPECT_EQ(or_trace.events, (std::vector<std::string>{"enter", "applied finishOne", "exit true"}));
  EXPECT_TRUE(f.graph.nodes_of_type(f.schema->node_class("Mark")).empty());
}

TEST(SequenceExec, StarRepeatsUntilFailure) {
  Fixture f;
  Recorder trace;
  EXPECT_TRUE(run(f, "finishOne*", &trace));
  EXPECT_EQ(trace.rule_events(), 4u);  // three applications, then one failure
  EXPECT_FALSE(run(f, "finishOne*"));
}

TEST(SequenceExec, SingleCallAppliesFirstMatchOnly) {
  Fixture f;
  EXPECT_TRUE(run(f, "three"));
  EXPECT_EQ(f.graph.nodes_of_type(f.schema->node_class("Mark")).size(), 1u);
}

TEST(SequenceExec, ArgumentsReachTheRule) {
  Fixture f;
  std::ostringstream out;
  EXPECT_TRUE(run(f, "[bump(10, 0.5)] ;> [countItems]", nullptr, &out));
  EXPECT_EQ(out.str(), "10;11;12;");
}

TEST(SequenceExec, StepBudgetStopsRunaways) {
  Fixture f;
  ExecutionEnv env{f.graph, f.rules};
  env.step_budget = 5;
  // `!noMatch` is always true, so the loop never ends on its own.
  const auto seq = parse_sequence("(!noMatch)*");
  EXPECT_THROW(execute(env, *seq), SequenceError);
  EXPECT_EQ(env.steps, 5u);
}

TEST(SequenceExec, QuerySequenceLeavesGraphUnchanged) {
  Fixture f;
  Fixture untouched;
  std::ostringstream out;
  EXPECT_TRUE(run(f, "[countItems] ;> !noMatch ;> [countItems]", nullptr, &out));
  EXPECT_EQ(out.str(), "0;1;2;0;1;2;");
  EXPECT_TRUE(testutil::isomorphic(f.graph, untouched.graph));
}

// Running `a ;> b` must be indistinguishable from running `a` and then `b`.
TEST(SequenceExec, ThenRightMatchesSeparateRuns) {
  const std::vector<std::string> parts = {"[three]", "finishOne", "[dropMarks]", "[noMatch]",
                                          "finishOne*", "[countItems]"};
  std::mt19937 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const std::string a = parts[rng() % parts.size()];
    const std::string b = parts[rng() % parts.size()];
    Fixture combined;
    Fixture separate;
    std::ostringstream out_combined;
    std::ostringstream out_separate;
    const bool r = run(combined, a + " ;> " + b, nullptr, &out_combined);
    run(separate, a, nullptr, &out_separate);
    const bool rb = run(separate, b, nullptr, &out_separate);
    EXPECT_EQ(r, rb) << a << " ;> " << b;
    EXPECT_EQ(out_combined.str(), out_separate.str()) << a << " ;> " << b;
    EXPECT_TRUE(testutil::isomorphic(combined.graph, separate.graph)) << a << " ;> " << b;
  }
}

TEST(SequenceExec, DeltasRecordCreationChangesAndDeletion) {
  Fixture f;
  Recorder trace;
  run(f, "three ;> finishOne ;> dropMarks", &trace);
  ASSERT_EQ(trace.deltas.size(), 3u);
  const Delta& created = trace.deltas[0];
  ASSERT_EQ(created.created.size(), 2u);
  EXPECT_EQ(created.created[0].kind, ElementKind::Node);
  EXPECT_EQ(created.created[1].kind, ElementKind::Edge);
  EXPECT_EQ(created.created[1].source, created.created[0].id);
  const Delta& changed = trace.deltas[1];
  ASSERT_EQ(changed.changes.size(), 2u);
  EXPECT_EQ(changed.changes[0].name, "done");
  EXPECT_EQ(changed.changes[1].name, "n");
  EXPECT_EQ(changed.changes[1].value, Value{std::int64_t{1}});
  const Delta& deleted = trace.deltas[2];
  EXPECT_EQ(deleted.deleted, (std::vector<ElemId>{created.created[1].id, created.created[0].id}));
}

// Replaying the recorded deltas onto a copy of the start graph reproduces the
// final graph.
TEST(SequenceExec, ReplayOfDeltasReproducesResult) {
  const std::vector<std::string> scripts = {
      "[three] ;> finishOne* ;> [dropMarks] ;> [three]",
      "[bump(2, 1.0)] ;> three ;> three ;> dropMarks",
      "(finishOne && [three]) ;> [dropMarks] ;> [noMatch]",
  };
  for (const auto& script : scripts) {
    Fixture live;
    Fixture copy;
    std::unordered_map<ElemId, ElemId> ids;
    for (ElemId id : copy.graph.nodes()) ids[id] = id;
    Recorder trace;
    run(live, script, &trace);
    for (const Delta& d : trace.deltas) replay(copy.graph, d, ids);
    EXPECT_TRUE(testutil::isomorphic(live.graph, copy.graph)) << script;
  }
}
