// Plain-traversal implementation of the extraction, used as a test oracle.
// It deliberately shares nothing with the rule engine: containment parents
// are found through the schema's containment flags, not through per-kind
// patterns.

#include <deque>
#include <optional>
#include <unordered_map>
#include <unordered_set>

#include "grrw/reengineering.hpp"

namespace grrw::reeng {

namespace {

class Oracle {
 public:
  explicit Oracle(const Graph& g) : g_(g), s_(g.schema()) {}

  Machine run() {
    check_program(g_);
    collect_states();
    Machine m;
    for (const auto& [cls, name] : state_of_) m.states.insert(name);
    for (ElemId stmt : g_.nodes_of_type(s_.node_class("java_ExpressionStatement"))) {
      if (auto t = transition_for(stmt)) m.transitions.insert(*t);
    }
    return m;
  }

 private:
  bool is(ElemId id, std::string_view cls) const {
    return s_.is_subtype_of(g_.class_of(id), s_.node_class(cls));
  }
  const std::string& str(ElemId id, std::string_view attr) const {
    return std::get<std::string>(g_.get_attr(ElementRef{id}, attr));
  }
  std::vector<ElemId> targets(ElemId from, std::string_view edge_cls) const {
    std::vector<ElemId> out;
    for (ElemId e : g_.outgoing(NodeRef{{from}}, s_.edge_class(edge_cls))) {
      out.push_back(g_.target(EdgeRef{{e}}).id);
    }
    return out;
  }
  std::optional<ElemId> only_target(ElemId from, std::string_view edge_cls) const {
    auto t = targets(from, edge_cls);
    if (t.size() != 1) return std::nullopt;
    return t.front();
  }

  // Breadth-first descent from "State" along reversed `extends` edges.
  void collect_states() {
    const ClassId extends = s_.edge_class("java_Class_extends");
    std::deque<ElemId> todo;
    for (ElemId c : g_.nodes_of_type(s_.node_class("java_Class"))) {
      if (str(c, "name") == "State") todo.push_back(c);
    }
    std::unordered_set<ElemId> seen(todo.begin(), todo.end());
    while (!todo.empty()) {
      const ElemId c = todo.front();
      todo.pop_front();
      for (ElemId e : g_.incoming(NodeRef{{c}}, extends)) {
        const ElemId sub = g_.source(EdgeRef{{e}}).id;
        if (!seen.insert(sub).second) continue;
        if (!std::get<bool>(g_.get_attr(ElementRef{sub}, "isAbstract"))) {
          state_of_.emplace(sub, str(sub, "name"));
        }
        todo.push_back(sub);
      }
    }
  }

  std::optional<ElemId> container(ElemId node) const {
    for (ElemId e : g_.incoming(NodeRef{{node}})) {
      if (s_.info(g_.class_of(e)).containment) return g_.source(EdgeRef{{e}}).id;
    }
    return std::nullopt;
  }

  // `C.Instance().activate()` -> C
  std::optional<ElemId> activated_class(ElemId stmt) const {
    auto call = only_target(stmt, "java_ExpressionStatement_expression");
    if (!call || !is(*call, "java_MethodCall") || str(*call, "methodName") != "activate") {
      return std::nullopt;
    }
    auto instance = only_target(*call, "java_MethodCall_target");
    if (!instance || !is(*instance, "java_MethodCall") || str(*instance, "methodName") != "Instance") {
      return std::nullopt;
    }
    auto cls = only_target(*instance, "java_MethodCall_target");
    if (!cls || !is(*cls, "java_Class")) return std::nullopt;
    return cls;
  }

  std::optional<TransitionTuple> transition_for(ElemId stmt) const {
    auto target_cls = activated_class(stmt);
    if (!target_cls) return std::nullopt;
    auto target = state_of_.find(*target_cls);
    if (target == state_of_.end()) return std::nullopt;

    // Containers from the statement outwards, up to the enclosing class.
    std::vector<ElemId> path;
    std::optional<ElemId> cls;
    for (auto up = container(stmt); up; up = container(*up)) {
      if (is(*up, "java_Class")) {
        cls = up;
        break;
      }
      path.push_back(*up);
    }
    if (!cls) return std::nullopt;
    auto source = state_of_.find(*cls);
    if (source == state_of_.end()) return std::nullopt;

    return TransitionTuple{source->second, target->second, trigger(path), action(stmt)};
  }

  std::string trigger(const std::vector<ElemId>& path) const {
    for (ElemId p : path) {
      if (is(p, "java_Method") && str(p, "name") != "run" && !str(p, "name").empty()) {
        return str(p, "name");
      }
    }
    for (ElemId p : path) {
      if (is(p, "java_SwitchCase") && !str(p, "constantName").empty()) return str(p, "constantName");
    }
    for (ElemId p : path) {
      if (is(p, "java_CatchBlock") && !str(p, "exceptionType").empty()) {
        return str(p, "exceptionType");
      }
    }
    return std::string(kFallback);
  }

  // First `send(E.K)` among the statements next to `stmt`.
  std::string action(ElemId stmt) const {
    auto parent = container(stmt);
    if (!parent) return std::string(kFallback);
    std::string_view list;
    if (is(*parent, "java_Block")) {
      list = "java_Block_statements";
    } else if (is(*parent, "java_SwitchCase")) {
      list = "java_SwitchCase_statements";
    } else {
      return std::string(kFallback);
    }
    for (ElemId sibling : targets(*parent, list)) {
      if (sibling == stmt || !is(sibling, "java_ExpressionStatement")) continue;
      for (ElemId call : targets(sibling, "java_ExpressionStatement_expression")) {
        if (!is(call, "java_MethodCall") || str(call, "methodName") != "send") continue;
        for (ElemId arg : targets(call, "java_MethodCall_arguments")) {
          if (!is(arg, "java_EnumReference")) continue;
          for (ElemId k : targets(arg, "java_EnumReference_constant")) {
            if (!str(k, "name").empty()) return str(k, "name");
          }
        }
      }
    }
    return std::string(kFallback);
  }

  const Graph& g_;
  const Schema& s_;
  std::unordered_map<ElemId, std::string> state_of_;
};

}  // namespace

Machine brute_force_extract(const Graph& graph) { return Oracle(graph).run(); }

}  // namespace grrw::reeng
