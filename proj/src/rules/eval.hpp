#pragma once

#include <span>
#include <string>
#include <variant>
#include <vector>

#include "grrw/error.hpp"
#include "grrw/graph.hpp"
#include "grrw/rules/ast.hpp"

namespace grrw::rules {

struct ElemVal {
  ElemId id = kNoElement;
  friend auto operator<=>(const ElemVal&, const ElemVal&) = default;
};

// Runtime value of an expression: attribute values plus null and elements.
using RValue = std::variant<std::monostate, bool, std::int64_t, double, std::string, EnumValue,
                            SetValue, MapValue, ArrayValue, ElemVal>;

// Raised by the evaluator; the matcher and rewriter rethrow it as MatchError
// or RewriteError with the rule name prepended.
class EvalError : public Error {
 public:
  EvalError(const SourcePos& pos, const std::string& message)
      : Error(std::to_string(pos.line) + ":" + std::to_string(pos.column) + ": " + message) {}
};

struct EvalContext {
  const Graph& graph;
  std::span<const ElemId> binding;
  const std::vector<Value>* vars = nullptr;
};

RValue evaluate(const Expr& expr, const EvalContext& ctx);
bool evaluate_condition(const Expr& expr, const EvalContext& ctx);

RValue to_rvalue(const Value& value);
// Converts to an attribute value of `type` (ints widen to double); throws
// EvalError at `pos` when the value does not fit.
Value to_attribute(const Schema& schema, const ValueType& type, const RValue& value,
                   const SourcePos& pos);
std::string display(const Schema& schema, const RValue& value);
const char* type_name(const RValue& value);

// Every element index an expression reads, in no particular order.
void collect_elements(const Expr& expr, std::vector<int>& out);

// Assigns `value` to the attribute (or map/array entry) denoted by `target`.
void assign(Graph& graph, const Expr& target, const RValue& value, const EvalContext& ctx);

}  // namespace grrw::rules
