#pragma once

#include <cstddef>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "grrw/graph.hpp"
#include "grrw/rules/ast.hpp"
#include "grrw/rules/ruleset.hpp"

namespace grrw::rules {

// One match of a pattern scope. `binding` has one entry per scope element
// (see Pattern::elems); unbound entries (defs never yielded, created
// elements, rewrite parameters) hold kNoElement.
struct Match {
  const Pattern* pattern = nullptr;
  std::vector<ElemId> binding;
  std::vector<Match> uses;                // per Pattern::uses entry
  std::vector<std::vector<Match>> nested;  // per Pattern::nested entry: accepted instances
  std::vector<Value> values;              // rule value arguments (top level only)

  ElemId operator[](std::string_view name) const;
};

struct MatchOptions {
  std::size_t limit = 0;  // 0: all matches
  // Reverse the candidate order of node lookups; exists to check that results
  // do not depend on iteration order where they should not.
  bool reverse_seed_order = false;
  std::size_t max_depth = 10000;  // nested subpattern instantiations
};

// Arguments of a rule call: element parameters, then `var` value parameters.
struct RuleArgs {
  std::vector<ElemId> elements;
  std::vector<Value> values;
};

// Throws MatchError on argument arity/type mismatches, runtime errors in
// conditions or yields, and when the recursion depth cap is exceeded.
std::vector<Match> find_matches(const Graph& graph, const RuleSet& rules, const Rule& rule,
                                const RuleArgs& args = {}, const MatchOptions& options = {});

struct RewriteEnv {
  std::ostream* emit = nullptr;  // emitted text is appended here as well as to the outcome
};

struct RewriteOutcome {
  std::map<std::string, ElemId> created;  // named elements created by the top-level rewrite
  std::string emitted;
  std::map<std::string, ElemId> yielded;  // top-level def elements
};

// Throws StaleMatchError (before changing anything) when a bound element has
// been deleted since matching, RewriteError on eval type mismatches.
RewriteOutcome apply_rewrite(Graph& graph, const RuleSet& rules, const Rule& rule,
                             const Match& match, RewriteEnv& env);

struct ApplyAllResult {
  std::size_t applied = 0;
  std::size_t stale = 0;
};

// Collects all matches first, then rewrites them in match order; matches
// invalidated by an earlier rewrite of the batch are skipped and counted.
ApplyAllResult apply_all(Graph& graph, const RuleSet& rules, const Rule& rule, const RuleArgs& args,
                         RewriteEnv& env, const MatchOptions& options = {});

}  // namespace grrw::rules
