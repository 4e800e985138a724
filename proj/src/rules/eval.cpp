#include "eval.hpp"

#include <cmath>

#include "grrw/xml.hpp"

namespace grrw::rules {

namespace {

bool is_numeric(const RValue& v) {
  return std::holds_alternative<std::int64_t>(v) || std::holds_alternative<double>(v);
}

double as_double(const RValue& v) {
  if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
  return std::get<double>(v);
}

std::optional<Scalar> to_scalar(const RValue& v) {
  return std::visit(
      [](const auto& x) -> std::optional<Scalar> {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, bool> || std::is_same_v<T, std::int64_t> ||
                      std::is_same_v<T, double> || std::is_same_v<T, std::string> ||
                      std::is_same_v<T, EnumValue>) {
          return Scalar{x};
        } else {
          return std::nullopt;
        }
      },
      v);
}

RValue from_scalar(const Scalar& s) {
  return std::visit([](const auto& x) -> RValue { return x; }, s);
}

ElemId element_of(const RValue& v, const SourcePos& pos, const char* what) {
  if (std::holds_alternative<std::monostate>(v)) {
    throw EvalError(pos, std::string(what) + " of null");
  }
  const auto* e = std::get_if<ElemVal>(&v);
  if (!e) throw EvalError(pos, std::string(what) + " needs an element, got " + type_name(v));
  return e->id;
}

std::size_t slot_of(const Graph& g, ElemId id, const std::string& name, const SourcePos& pos) {
  if (!g.is_live(id)) throw EvalError(pos, "access to deleted element " + std::to_string(id));
  auto slot = g.schema().slot_index(g.class_of(id), name);
  if (!slot) {
    throw EvalError(pos, "class " + g.class_name(id) + " has no attribute '" + name + "'");
  }
  return *slot;
}

bool equal(const RValue& a, const RValue& b, const SourcePos& pos) {
  const bool a_null = std::holds_alternative<std::monostate>(a);
  const bool b_null = std::holds_alternative<std::monostate>(b);
  if (a_null || b_null) return a_null == b_null;
  if (is_numeric(a) && is_numeric(b)) {
    if (std::holds_alternative<std::int64_t>(a) && std::holds_alternative<std::int64_t>(b)) {
      return std::get<std::int64_t>(a) == std::get<std::int64_t>(b);
    }
    return as_double(a) == as_double(b);
  }
  if (a.index() != b.index()) {
    throw EvalError(pos, std::string("cannot compare ") + type_name(a) + " with " + type_name(b));
  }
  return a == b;
}

int order(const RValue& a, const RValue& b, const SourcePos& pos) {
  if (is_numeric(a) && is_numeric(b)) {
    if (std::holds_alternative<std::int64_t>(a) && std::holds_alternative<std::int64_t>(b)) {
      auto x = std::get<std::int64_t>(a), y = std::get<std::int64_t>(b);
      return x < y ? -1 : (x > y ? 1 : 0);
    }
    double x = as_double(a), y = as_double(b);
    return x < y ? -1 : (x > y ? 1 : 0);
  }
  if (std::holds_alternative<std::string>(a) && std::holds_alternative<std::string>(b)) {
    int c = std::get<std::string>(a).compare(std::get<std::string>(b));
    return c < 0 ? -1 : (c > 0 ? 1 : 0);
  }
  throw EvalError(pos, std::string("cannot order ") + type_name(a) + " and " + type_name(b));
}

bool need_bool(const RValue& v, const SourcePos& pos) {
  const auto* b = std::get_if<bool>(&v);
  if (!b) throw EvalError(pos, std::string("expected boolean, got ") + type_name(v));
  return *b;
}

RValue arithmetic(ExprOp op, const RValue& a, const RValue& b, const Schema& schema,
                  const SourcePos& pos) {
  if (op == ExprOp::Add &&
      (std::holds_alternative<std::string>(a) || std::holds_alternative<std::string>(b))) {
    return display(schema, a) + display(schema, b);
  }
  if (!is_numeric(a) || !is_numeric(b)) {
    throw EvalError(pos, std::string("invalid operands ") + type_name(a) + " and " +
                             type_name(b) + " for arithmetic");
  }
  if (std::holds_alternative<std::int64_t>(a) && std::holds_alternative<std::int64_t>(b)) {
    const auto x = std::get<std::int64_t>(a), y = std::get<std::int64_t>(b);
    switch (op) {
      case ExprOp::Add:
        return x + y;
      case ExprOp::Sub:
        return x - y;
      case ExprOp::Mul:
        return x * y;
      case ExprOp::Div:
      case ExprOp::Mod:
        if (y == 0) throw EvalError(pos, "division by zero");
        return op == ExprOp::Div ? x / y : x % y;
      default:
        break;
    }
  }
  const double x = as_double(a), y = as_double(b);
  switch (op) {
    case ExprOp::Add:
      return x + y;
    case ExprOp::Sub:
      return x - y;
    case ExprOp::Mul:
      return x * y;
    case ExprOp::Div:
      return x / y;
    case ExprOp::Mod:
      return std::fmod(x, y);
    default:
      break;
  }
  throw EvalError(pos, "invalid arithmetic operator");
}

RValue call(const Expr& e, const EvalContext& ctx) {
  std::vector<RValue> args;
  for (const auto& a : e.args) args.push_back(evaluate(*a, ctx));
  if (e.name == "uniqueof") {
    return static_cast<std::int64_t>(element_of(args.at(0), e.pos, "uniqueof"));
  }
  if (e.name == "xmlEscape") {
    const auto* s = std::get_if<std::string>(&args.at(0));
    if (!s) throw EvalError(e.pos, std::string("xmlEscape needs a string, got ") + type_name(args[0]));
    return xml::escape(*s);
  }
  if (e.name == "size") {
    return std::visit(
        [&](const auto& v) -> RValue {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, std::string> || std::is_same_v<T, SetValue> ||
                        std::is_same_v<T, MapValue> || std::is_same_v<T, ArrayValue>) {
            return static_cast<std::int64_t>(v.size());
          } else {
            throw EvalError(e.pos, std::string("size needs a string or container, got ") +
                                       type_name(args[0]));
          }
        },
        args.at(0));
  }
  throw EvalError(e.pos, "unknown function '" + e.name + "'");
}

}  // namespace

const char* type_name(const RValue& value) {
  static const char* const kNames[] = {"null", "boolean", "int", "double", "string",
                                       "enum", "set",     "map", "array",  "element"};
  return kNames[value.index()];
}

RValue to_rvalue(const Value& value) {
  return std::visit([](const auto& x) -> RValue { return x; }, value);
}

Value to_attribute(const Schema& schema, const ValueType& type, const RValue& value,
                   const SourcePos& pos) {
  Value out;
  bool ok = std::visit(
      [&](const auto& x) -> bool {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, std::monostate> || std::is_same_v<T, ElemVal>) {
          return false;
        } else {
          out = x;
          return true;
        }
      },
      value);
  if (ok && type.is_scalar() && type.element.kind == ScalarKind::Double &&
      std::holds_alternative<std::int64_t>(out)) {
    out = static_cast<double>(std::get<std::int64_t>(out));
  }
  if (!ok || !conforms(schema, type, out)) {
    throw EvalError(pos, std::string("cannot assign ") + type_name(value) + " to attribute of type " +
                             type.to_string());
  }
  return out;
}

std::string display(const Schema& schema, const RValue& value) {
  if (std::holds_alternative<std::monostate>(value)) return "null";
  if (const auto* e = std::get_if<ElemVal>(&value)) return std::to_string(e->id);
  return std::visit(
      [&](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, std::monostate> || std::is_same_v<T, ElemVal>) {
          return {};
        } else {
          return to_display(schema, Value{x});
        }
      },
      value);
}

RValue evaluate(const Expr& e, const EvalContext& ctx) {
  const Graph& g = ctx.graph;
  switch (e.op) {
    case ExprOp::Literal:
      return to_rvalue(e.literal);
    case ExprOp::Null:
      return std::monostate{};
    case ExprOp::Elem: {
      const ElemId id = ctx.binding[static_cast<std::size_t>(e.index)];
      if (id == kNoElement) return std::monostate{};
      return ElemVal{id};
    }
    case ExprOp::Var:
      return to_rvalue(ctx.vars->at(static_cast<std::size_t>(e.index)));
    case ExprOp::Attr: {
      const ElemId id = element_of(evaluate(*e.args[0], ctx), e.pos, "attribute access");
      return to_rvalue(g.get_attr(ElementRef{id}, slot_of(g, id, e.name, e.pos)));
    }
    case ExprOp::Index: {
      const RValue base = evaluate(*e.args[0], ctx);
      const RValue key = evaluate(*e.args[1], ctx);
      if (const auto* m = std::get_if<MapValue>(&base)) {
        auto k = to_scalar(key);
        auto it = k ? m->find(*k) : m->end();
        if (it == m->end()) throw EvalError(e.pos, "map has no key " + display(g.schema(), key));
        return from_scalar(it->second);
      }
      if (const auto* a = std::get_if<ArrayValue>(&base)) {
        const auto* i = std::get_if<std::int64_t>(&key);
        if (!i) throw EvalError(e.pos, std::string("array index must be int, got ") + type_name(key));
        if (*i < 0 || static_cast<std::size_t>(*i) >= a->size()) {
          throw EvalError(e.pos, "array index " + std::to_string(*i) + " out of range");
        }
        return from_scalar((*a)[static_cast<std::size_t>(*i)]);
      }
      if (const auto* s = std::get_if<SetValue>(&base)) {
        auto k = to_scalar(key);
        return k && s->count(*k) > 0;
      }
      throw EvalError(e.pos, std::string("cannot index ") + type_name(base));
    }
    case ExprOp::Not:
      return !need_bool(evaluate(*e.args[0], ctx), e.pos);
    case ExprOp::Neg: {
      RValue v = evaluate(*e.args[0], ctx);
      if (const auto* i = std::get_if<std::int64_t>(&v)) return -*i;
      if (const auto* d = std::get_if<double>(&v)) return -*d;
      throw EvalError(e.pos, std::string("cannot negate ") + type_name(v));
    }
    case ExprOp::And:
      return need_bool(evaluate(*e.args[0], ctx), e.pos) &&
             need_bool(evaluate(*e.args[1], ctx), e.pos);
    case ExprOp::Or:
      return need_bool(evaluate(*e.args[0], ctx), e.pos) ||
             need_bool(evaluate(*e.args[1], ctx), e.pos);
    case ExprOp::Eq:
    case ExprOp::Ne: {
      const bool eq = equal(evaluate(*e.args[0], ctx), evaluate(*e.args[1], ctx), e.pos);
      return e.op == ExprOp::Eq ? eq : !eq;
    }
    case ExprOp::Lt:
    case ExprOp::Le:
    case ExprOp::Gt:
    case ExprOp::Ge: {
      const int c = order(evaluate(*e.args[0], ctx), evaluate(*e.args[1], ctx), e.pos);
      switch (e.op) {
        case ExprOp::Lt:
          return c < 0;
        case ExprOp::Le:
          return c <= 0;
        case ExprOp::Gt:
          return c > 0;
        default:
          return c >= 0;
      }
    }
    case ExprOp::Add:
    case ExprOp::Sub:
    case ExprOp::Mul:
    case ExprOp::Div:
    case ExprOp::Mod:
      return arithmetic(e.op, evaluate(*e.args[0], ctx), evaluate(*e.args[1], ctx), g.schema(),
                        e.pos);
    case ExprOp::Call:
      return call(e, ctx);
  }
  throw EvalError(e.pos, "invalid expression");
}

bool evaluate_condition(const Expr& expr, const EvalContext& ctx) {
  return need_bool(evaluate(expr, ctx), expr.pos);
}

void collect_elements(const Expr& expr, std::vector<int>& out) {
  if (expr.op == ExprOp::Elem) out.push_back(expr.index);
  for (const auto& a : expr.args) collect_elements(*a, out);
}

void assign(Graph& graph, const Expr& target, const RValue& value, const EvalContext& ctx) {
  const Schema& schema = graph.schema();
  if (target.op == ExprOp::Attr) {
    const ElemId id = element_of(evaluate(*target.args[0], ctx), target.pos, "attribute assignment");
    const std::size_t slot = slot_of(graph, id, target.name, target.pos);
    const ValueType& type = schema.slots(graph.class_of(id))[slot].type;
    graph.set_attr(ElementRef{id}, slot, to_attribute(schema, type, value, target.pos));
    return;
  }
  // Index: container attribute entry.
  const Expr& attr = *target.args[0];
  const ElemId id = element_of(evaluate(*attr.args[0], ctx), attr.pos, "attribute assignment");
  const std::size_t slot = slot_of(graph, id, attr.name, attr.pos);
  const ValueType& type = schema.slots(graph.class_of(id))[slot].type;
  const RValue key = evaluate(*target.args[1], ctx);
  Value container = graph.get_attr(ElementRef{id}, slot);
  ValueType scalar_type = ValueType{ContainerKind::None, type.element, {}};
  auto scalar_of = [&](const ValueType& t, const RValue& v) {
    Value w = to_attribute(schema, t, v, target.pos);
    return std::visit(
        [](const auto& x) -> Scalar {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, SetValue> || std::is_same_v<T, MapValue> ||
                        std::is_same_v<T, ArrayValue>) {
            return false;  // unreachable: scalar types only
          } else {
            return x;
          }
        },
        w);
  };
  if (auto* m = std::get_if<MapValue>(&container)) {
    const ValueType key_type{ContainerKind::None, type.key, {}};
    (*m)[scalar_of(key_type, key)] = scalar_of(scalar_type, value);
  } else if (auto* a = std::get_if<ArrayValue>(&container)) {
    const auto* i = std::get_if<std::int64_t>(&key);
    if (!i || *i < 0 || static_cast<std::size_t>(*i) > a->size()) {
      throw EvalError(target.pos, "array index " + display(schema, key) + " out of range");
    }
    if (static_cast<std::size_t>(*i) == a->size()) {
      a->push_back(scalar_of(scalar_type, value));
    } else {
      (*a)[static_cast<std::size_t>(*i)] = scalar_of(scalar_type, value);
    }
  } else if (auto* s = std::get_if<SetValue>(&container)) {
    const auto* flag = std::get_if<bool>(&value);
    if (!flag) throw EvalError(target.pos, "set membership assignment needs a boolean");
    Scalar k = scalar_of(scalar_type, key);
    if (*flag) {
      s->insert(k);
    } else {
      s->erase(k);
    }
  } else {
    throw EvalError(target.pos, "attribute '" + attr.name + "' is not a container");
  }
  graph.set_attr(ElementRef{id}, slot, std::move(container));
}

}  // namespace grrw::rules
