#include <algorithm>

#include "grrw/rules/engine.hpp"
#include "eval.hpp"

namespace grrw::rules {

namespace {

void check_live(const Graph& graph, const Match& m, const std::string& rule) {
  for (ElemId id : m.binding) {
    if (id != kNoElement && !graph.is_live(id)) {
      throw StaleMatchError("rule " + rule + ": matched element " + std::to_string(id) +
                            " has been deleted");
    }
  }
  for (const Match& u : m.uses) check_live(graph, u, rule);
  for (const auto& instances : m.nested) {
    for (const Match& inst : instances) check_live(graph, inst, rule);
  }
}

// Executes the rewrite of one scope instance, then of its nested instances.
// Order: create nodes, create edges, statements (eval/emit/subpattern calls)
// in text order, nested block rewrites, deletions.
class Rewriter {
 public:
  Rewriter(Graph& graph, const RuleSet& rules, const std::vector<Value>* vars,
           const std::string& rule, RewriteEnv& env, std::string& emitted)
      : g_(graph), rules_(rules), vars_(vars), rule_(rule), env_(env), emitted_(emitted) {}

  void run(const Pattern& p, std::vector<ElemId>& b, const Match& m,
           const std::vector<ElemId>* parent) {
    if (parent) {
      for (std::size_t i = 0; i < p.elems.size(); ++i) {
        if (p.elems[i].origin == Origin::Import && b[i] == kNoElement) {
          b[i] = (*parent)[static_cast<std::size_t>(p.elems[i].parent)];
        }
      }
    }
    if (p.rewrite) {
      const Rewrite& rw = *p.rewrite;
      for (int i : rw.create_nodes) {
        const ScopeElem& e = p.elems[static_cast<std::size_t>(i)];
        b[static_cast<std::size_t>(i)] = wrap([&] { return g_.add_node(e.cls).id; }, e.pos);
      }
      for (int i : rw.create_edges) {
        const ScopeElem& e = p.elems[static_cast<std::size_t>(i)];
        const NodeRef src{{endpoint(p, b, e.source, e)}};
        const NodeRef tgt{{endpoint(p, b, e.target, e)}};
        b[static_cast<std::size_t>(i)] = wrap([&] { return g_.add_edge(e.cls, src, tgt).id; }, e.pos);
      }
      for (const RewriteStmt& st : rw.stmts) statement(p, b, m, st);
    }
    for (std::size_t n = 0; n < p.nested.size(); ++n) {
      if (p.nested[n].kind == NestedKind::Negative) continue;
      for (const Match& inst : m.nested[n]) {
        std::vector<ElemId> inner = inst.binding;
        run(*p.nested[n].pattern, inner, inst, &b);
      }
    }
    if (p.rewrite) remove(p, b, *p.rewrite);
  }

 private:
  template <class F>
  ElemId wrap(F&& f, const SourcePos& pos) {
    try {
      return f();
    } catch (const GraphError& e) {
      throw RewriteError(where(pos) + e.what());
    }
  }

  std::string where(const SourcePos& pos) const {
    return "rule " + rule_ + ": " + std::to_string(pos.line) + ":" + std::to_string(pos.column) +
           ": ";
  }

  ElemId endpoint(const Pattern& p, const std::vector<ElemId>& b, int index, const ScopeElem& edge) {
    const ElemId id = b[static_cast<std::size_t>(index)];
    if (id == kNoElement || !g_.is_live(id)) {
      throw RewriteError(where(edge.pos) + "endpoint '" + p.elems[static_cast<std::size_t>(index)].name +
                         "' of created edge is not bound");
    }
    return id;
  }

  void statement(const Pattern& p, std::vector<ElemId>& b, const Match& m, const RewriteStmt& st) {
    const EvalContext ctx{g_, b, vars_};
    try {
      switch (st.kind) {
        case RewriteStmt::Kind::Assign:
          assign(g_, *st.target, evaluate(*st.value, ctx), ctx);
          break;
        case RewriteStmt::Kind::Emit: {
          std::string text;
          for (const auto& part : st.parts) text += display(g_.schema(), evaluate(*part, ctx));
          emitted_ += text;
          if (env_.emit) *env_.emit << text;
          break;
        }
        case RewriteStmt::Kind::Call:
          call(p, b, m, st);
          break;
      }
    } catch (const EvalError& e) {
      throw RewriteError("rule " + rule_ + ": " + e.what());
    }
  }

  void call(const Pattern& p, const std::vector<ElemId>& b, const Match& m, const RewriteStmt& st) {
    const SubpatternUse& use = p.uses[static_cast<std::size_t>(st.use)];
    const SubpatternDecl& decl = rules_.subpattern(use.decl);
    const Match& sub = m.uses[static_cast<std::size_t>(st.use)];
    std::vector<ElemId> inner = sub.binding;
    for (std::size_t j = 0; j < st.call_args.size(); ++j) {
      const ElemId arg = b[static_cast<std::size_t>(st.call_args[j])];
      const ScopeElem& param = decl.pattern.elems[static_cast<std::size_t>(decl.rewrite_params[j])];
      if (arg == kNoElement || !g_.is_live(arg) ||
          !g_.schema().is_subtype_of(g_.class_of(arg), param.cls)) {
        throw RewriteError(where(st.pos) + "argument " + std::to_string(j + 1) + " of '" +
                           use.name + "' is not an element of type " +
                           g_.schema().info(param.cls).name);
      }
      inner[static_cast<std::size_t>(decl.rewrite_params[j])] = arg;
    }
    run(decl.pattern, inner, sub, nullptr);
  }

  void remove(const Pattern& p, const std::vector<ElemId>& b, const Rewrite& rw) {
    std::vector<ElemId> doomed;
    if (rw.replace) {
      for (std::size_t i = 0; i < p.elems.size(); ++i) {
        const Origin o = p.elems[i].origin;
        const bool kept = i < rw.kept.size() && rw.kept[i];
        if ((o == Origin::Local || o == Origin::Param) && !kept) doomed.push_back(b[i]);
      }
    } else {
      for (int i : rw.deletes) doomed.push_back(b[static_cast<std::size_t>(i)]);
    }
    for (ElementKind pass : {ElementKind::Edge, ElementKind::Node}) {
      for (ElemId id : doomed) {
        if (id == kNoElement || !g_.is_live(id) || g_.kind(id) != pass) continue;
        if (pass == ElementKind::Edge) {
          g_.remove_edge(EdgeRef{{id}});
        } else {
          g_.remove_node(NodeRef{{id}});
        }
      }
    }
  }

  Graph& g_;
  const RuleSet& rules_;
  const std::vector<Value>* vars_;
  const std::string& rule_;
  RewriteEnv& env_;
  std::string& emitted_;
};

}  // namespace

RewriteOutcome apply_rewrite(Graph& graph, const RuleSet& rules, const Rule& rule,
                             const Match& match, RewriteEnv& env) {
  if (match.pattern != &rule.pattern) {
    throw RewriteError("rule " + rule.name + ": match belongs to another rule");
  }
  check_live(graph, match, rule.name);
  RewriteOutcome outcome;
  std::vector<ElemId> b = match.binding;
  Rewriter(graph, rules, &match.values, rule.name, env, outcome.emitted)
      .run(rule.pattern, b, match, nullptr);
  const Pattern& p = rule.pattern;
  if (p.rewrite) {
    for (const auto* list : {&p.rewrite->create_nodes, &p.rewrite->create_edges}) {
      for (int i : *list) {
        const auto& name = p.elems[static_cast<std::size_t>(i)].name;
        if (!name.starts_with("$")) outcome.created[name] = b[static_cast<std::size_t>(i)];
      }
    }
  }
  for (std::size_t i = 0; i < p.elems.size(); ++i) {
    if (p.elems[i].origin == Origin::Def) outcome.yielded[p.elems[i].name] = b[i];
  }
  return outcome;
}

ApplyAllResult apply_all(Graph& graph, const RuleSet& rules, const Rule& rule, const RuleArgs& args,
                         RewriteEnv& env, const MatchOptions& options) {
  ApplyAllResult result;
  for (const Match& m : find_matches(graph, rules, rule, args, options)) {
    try {
      apply_rewrite(graph, rules, rule, m, env);
      ++result.applied;
    } catch (const StaleMatchError&) {
      ++result.stale;
    }
  }
  return result;
}

}  // namespace grrw::rules
