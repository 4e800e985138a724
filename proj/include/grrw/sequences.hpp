#pragma once

#include <cstddef>
#include <memory>
#include <ostream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "grrw/graph.hpp"
#include "grrw/rules/engine.hpp"

namespace grrw::seq {

// Rule application control language:
//   seq     := then
//   then    := or { (";>" | "<;") or }     left-associative
//   or      := and { "||" and }
//   and     := unary { "&&" unary }
//   unary   := "!" unary | postfix
//   postfix := primary [ "*" ]
//   primary := "[" call "]" | call | "(" seq ")"
//   call    := name [ "(" [ literal { "," literal } ] ")" ]
struct Sequence {
  enum class Kind { RuleCall, AllBracket, ThenRight, ThenLeft, LazyAnd, LazyOr, Not, Star };

  Kind kind = Kind::RuleCall;
  std::string rule;          // RuleCall, AllBracket
  std::vector<Value> args;   // literal arguments for the rule's `var` parameters
  std::unique_ptr<Sequence> left;   // operand of unary forms
  std::unique_ptr<Sequence> right;
  std::size_t column = 0;    // 1-based position in the source text
};

// Throws ParseError (file "<sequence>" unless given).
std::unique_ptr<Sequence> parse_sequence(std::string_view text, const std::string& file = {});

// Structural form, e.g. "ThenRight(AllBracket(a), RuleCall(b))".
std::string describe(const Sequence& seq);

// Every rule name referenced, in source order (with repetitions).
std::vector<std::string> referenced_rules(const Sequence& seq);

// Graph changes made by one rule application.
struct Delta {
  struct Created {
    ElemId id = kNoElement;
    ElementKind kind = ElementKind::Node;
    ClassId cls = 0;
    ElemId source = kNoElement;  // edges
    ElemId target = kNoElement;
  };
  struct AttributeChange {
    ElemId id = kNoElement;
    std::string name;
    Value value;  // value after the change
  };
  std::vector<Created> created;
  std::vector<AttributeChange> changes;
  std::vector<ElemId> deleted;  // edges of a deleted node precede the node

  bool empty() const { return created.empty() && changes.empty() && deleted.empty(); }
};

// Replays a delta recorded on another graph. `ids` maps recorded ids to ids of
// `graph` and is extended with the created elements.
void replay(Graph& graph, const Delta& delta, std::unordered_map<ElemId, ElemId>& ids);

// Receives execution events; must not mutate the graph.
class TraceHook {
 public:
  virtual ~TraceHook() = default;
  virtual void sequence_enter(const Sequence& /*seq*/) {}
  virtual void rule_applied(const rules::Rule& /*rule*/, const rules::Match& /*match*/,
                            const Delta& /*delta*/, const std::string& /*emitted*/) {}
  virtual void rule_failed(const rules::Rule& /*rule*/) {}
  virtual void sequence_exit(const Sequence& /*seq*/, bool /*result*/) {}
};

struct ExecutionEnv {
  Graph& graph;
  const rules::RuleSet& rules;
  std::ostream* emit = nullptr;
  TraceHook* trace = nullptr;
  // Maximum number of rule invocations (a `[r]` counts once); 0 = unlimited.
  std::size_t step_budget = 1'000'000;
  rules::MatchOptions match_options{};

  std::size_t steps = 0;    // rule invocations so far
  std::size_t applied = 0;  // rewrites performed so far
};

// Checks that every referenced rule exists, has no element parameters and
// accepts the literal arguments. Throws SequenceError.
void bind(const Sequence& seq, const rules::RuleSet& rules);

// Binds, then runs the sequence. Throws SequenceError when the step budget is
// exhausted; rule errors propagate.
bool execute(ExecutionEnv& env, const Sequence& seq);

}  // namespace grrw::seq
