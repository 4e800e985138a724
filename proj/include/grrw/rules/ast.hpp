#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "grrw/graph.hpp"

namespace grrw::rules {

struct SourcePos {
  std::size_t line = 0;
  std::size_t column = 0;
};

enum class ExprOp {
  Literal,  // literal
  Null,
  Elem,     // element of the current scope, `index`
  Var,      // rule value parameter, `index`
  Attr,     // args[0].name
  Index,    // args[0][args[1]]
  Not,
  Neg,
  And,
  Or,
  Eq,
  Ne,
  Lt,
  Le,
  Gt,
  Ge,
  Add,
  Sub,
  Mul,
  Div,
  Mod,
  Call,  // built-in function `name`
};

struct Expr {
  ExprOp op = ExprOp::Null;
  SourcePos pos;
  Value literal;
  std::string name;
  int index = -1;
  std::vector<std::unique_ptr<Expr>> args;
};
using ExprPtr = std::unique_ptr<Expr>;

// Where a scope element comes from.
enum class Origin {
  Param,         // rule/subpattern parameter, bound on entry
  Local,         // declared in this pattern, bound by the matcher
  Def,           // def element, bound by yields
  Import,        // element of the enclosing scope (`parent`)
  RewriteParam,  // subpattern rewrite parameter, bound when the rewrite is called
  Created,       // created by the rewrite part
};

struct ScopeElem {
  std::string name;  // "$<n>" for anonymous elements
  ElementKind kind = ElementKind::Node;
  ClassId cls = 0;
  Origin origin = Origin::Local;
  int parent = -1;  // Import: index in the enclosing scope
  int source = -1;  // edges declared here: endpoint indexes in this scope
  int target = -1;
  // Bound whenever the scope's pattern part has been matched: params, locals
  // and imports of such elements.
  bool matched = false;
  SourcePos pos;
};

struct Pattern;

struct SubpatternUse {
  std::string name;
  int decl = -1;              // index into RuleSet subpatterns
  std::vector<int> args;      // per callee parameter: element here; for def params the receiving def (-1: none)
  SourcePos pos;
};

struct RewriteStmt {
  enum class Kind { Assign, Emit, Call } kind = Kind::Assign;
  SourcePos pos;
  ExprPtr target;              // Assign: Attr or Index expression
  ExprPtr value;               // Assign
  std::vector<ExprPtr> parts;  // Emit: concatenated
  int use = -1;                // Call: subpattern use of this scope
  std::vector<int> call_args;  // Call: elements passed as rewrite parameters
};

struct Rewrite {
  bool replace = false;
  SourcePos pos;
  std::vector<int> create_nodes;  // in declaration order
  std::vector<int> create_edges;
  std::vector<bool> kept;         // replace mode: per element, mentioned in the replace part
  std::vector<RewriteStmt> stmts;
  std::vector<int> deletes;       // modify mode delete() list
};

enum class NestedKind { Iterated, Optional, Negative };

struct Nested {
  NestedKind kind = NestedKind::Optional;
  SourcePos pos;
  std::unique_ptr<Pattern> pattern;
};

struct Yield {
  int def = -1;  // Def element of this scope, or an Import of one
  ExprPtr value;
  SourcePos pos;
};

// Compiled search step. Candidates for `elem` are enumerated:
//   LookupNode: all nodes of the element's class
//   ExtendOut / ExtendIn: edges leaving / entering the bound node `from`,
//     then the edge's other endpoint is bound or checked
// `conds` are conditions that become evaluable once this step has bound.
struct Step {
  enum class Op { LookupNode, ExtendOut, ExtendIn } op = Op::LookupNode;
  int elem = -1;
  int from = -1;
  std::vector<int> conds;
};

struct Pattern {
  std::vector<ScopeElem> elems;
  std::vector<ExprPtr> conditions;  // conjuncts
  std::vector<SubpatternUse> uses;
  std::vector<Nested> nested;
  std::vector<Yield> yields;
  std::optional<Rewrite> rewrite;

  // Filled by the parser once the scope is resolved.
  std::vector<int> entry_conds;     // evaluable before any step
  std::vector<Step> plan;
  std::vector<int> late_conds;      // read def elements: evaluated after yields
  std::vector<int> locals;          // Local elements, for injectivity and iterated
  std::vector<int> injective;       // Param + Local elements

  int find(std::string_view name) const {
    for (std::size_t i = 0; i < elems.size(); ++i) {
      if (elems[i].name == name) return static_cast<int>(i);
    }
    return -1;
  }
};

struct VarParam {
  std::string name;
  ValueType type;
};

struct Rule {
  std::string name;
  SourcePos pos;
  std::vector<int> params;  // element parameters (indexes into pattern.elems)
  std::vector<VarParam> vars;
  Pattern pattern;
};

struct SubpatternDecl {
  std::string name;
  SourcePos pos;
  std::vector<int> params;          // includes def params, in declaration order
  std::vector<int> rewrite_params;  // RewriteParam elements
  bool rewrite_replace = false;
  Pattern pattern;
};

}  // namespace grrw::rules
