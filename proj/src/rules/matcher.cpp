#include <algorithm>
#include <memory>
#include <type_traits>
#include <unordered_set>

#include "grrw/rules/engine.hpp"
#include "eval.hpp"

namespace grrw::rules {

namespace {

// Non-owning callable reference; the continuations below never outlive the
// call that receives them.
template <class Sig>
class FnRef;

template <class R, class... A>
class FnRef<R(A...)> {
 public:
  template <class F>
    requires(!std::is_same_v<std::decay_t<F>, FnRef>)
  FnRef(F&& f)  // NOLINT(google-explicit-constructor)
      : obj_(const_cast<void*>(static_cast<const void*>(std::addressof(f)))),
        call_([](void* obj, A... args) -> R {
          return (*static_cast<std::remove_reference_t<F>*>(obj))(std::forward<A>(args)...);
        }) {}

  R operator()(A... args) const { return call_(obj_, std::forward<A>(args)...); }

 private:
  void* obj_;
  R (*call_)(void*, A...);
};

// Search state of one pattern scope. `parent` links nested blocks to their
// enclosing scope (for imports and injectivity); rule and subpattern roots
// have none.
struct Frame {
  const Pattern* pattern = nullptr;
  const Frame* parent = nullptr;
  Match m;
};

using Cont = FnRef<bool(Frame&)>;  // returns false to stop the enumeration

void init_frame(Frame& f, const Pattern& p, const Frame* parent) {
  f.pattern = &p;
  f.parent = parent;
  f.m.pattern = &p;
  f.m.binding.assign(p.elems.size(), kNoElement);
  f.m.uses.assign(p.uses.size(), Match{});
  f.m.nested.assign(p.nested.size(), {});
  if (!parent) return;
  for (std::size_t i = 0; i < p.elems.size(); ++i) {
    if (p.elems[i].origin == Origin::Import) {
      f.m.binding[i] = parent->m.binding[static_cast<std::size_t>(p.elems[i].parent)];
    }
  }
}

class Matcher {
 public:
  Matcher(const Graph& graph, const RuleSet& rules, const MatchOptions& options,
          const std::vector<Value>* vars, const std::string& rule)
      : g_(graph), schema_(graph.schema()), rules_(rules), opt_(options), vars_(vars), rule_(rule) {}

  // Enumerates the matches of f's pattern; false when stopped by `k`.
  bool search(Frame& f, Cont k) {
    if (!conditions_hold(f, f.pattern->entry_conds)) return true;
    return step(f, 0, k);
  }

 private:
  bool used(const Frame* f, ElemId id) const {
    for (; f; f = f->parent) {
      for (int i : f->pattern->injective) {
        if (f->m.binding[static_cast<std::size_t>(i)] == id) return true;
      }
    }
    return false;
  }

  bool conditions_hold(const Frame& f, const std::vector<int>& conds) const {
    for (int c : conds) {
      try {
        if (!evaluate_condition(*f.pattern->conditions[static_cast<std::size_t>(c)], context(f))) {
          return false;
        }
      } catch (const EvalError& e) {
        throw MatchError("rule " + rule_ + ": " + e.what());
      }
    }
    return true;
  }

  EvalContext context(const Frame& f) const { return EvalContext{g_, f.m.binding, vars_}; }

  bool step(Frame& f, std::size_t index, Cont k) {
    const Pattern& p = *f.pattern;
    if (index == p.plan.size()) return complete(f, k);
    const Step& st = p.plan[index];
    const ScopeElem& el = p.elems[static_cast<std::size_t>(st.elem)];
    auto& b = f.m.binding;
    const auto slot = static_cast<std::size_t>(st.elem);

    if (st.op == Step::Op::LookupNode) {
      std::vector<ElemId> candidates = g_.nodes_of_type(el.cls);
      if (opt_.reverse_seed_order) std::reverse(candidates.begin(), candidates.end());
      for (ElemId c : candidates) {
        if (used(&f, c)) continue;
        b[slot] = c;
        const bool go = !conditions_hold(f, st.conds) || step(f, index + 1, k);
        b[slot] = kNoElement;
        if (!go) return false;
      }
      return true;
    }

    const bool out = st.op == Step::Op::ExtendOut;
    const NodeRef from{{b[static_cast<std::size_t>(st.from)]}};
    const auto other = static_cast<std::size_t>(out ? el.target : el.source);
    const ClassId other_cls = p.elems[other].cls;
    for (ElemId e : out ? g_.outgoing(from) : g_.incoming(from)) {
      if (!schema_.is_subtype_of(g_.class_of(e), el.cls) || used(&f, e)) continue;
      const EdgeRef edge{{e}};
      const ElemId o = (out ? g_.target(edge) : g_.source(edge)).id;
      const bool bind_other = b[other] == kNoElement;
      if (bind_other) {
        if (!schema_.is_subtype_of(g_.class_of(o), other_cls) || used(&f, o)) continue;
        b[other] = o;
      } else if (b[other] != o) {
        continue;
      }
      b[slot] = e;
      const bool go = !conditions_hold(f, st.conds) || step(f, index + 1, k);
      b[slot] = kNoElement;
      if (bind_other) b[other] = kNoElement;
      if (!go) return false;
    }
    return true;
  }

  // All locals bound: nested blocks, subpattern uses, yields, late conditions.
  bool complete(Frame& f, Cont k) {
    const Pattern& p = *f.pattern;
    const std::vector<ElemId> saved = f.m.binding;
    bool go = true;
    bool ok = true;
    for (std::size_t n = 0; n < p.nested.size() && ok; ++n) {
      if (p.nested[n].kind == NestedKind::Negative) ok = !exists(f, *p.nested[n].pattern);
    }
    if (ok) {
      for (std::size_t n = 0; n < p.nested.size(); ++n) {
        const Nested& nested = p.nested[n];
        if (nested.kind == NestedKind::Negative) continue;
        f.m.nested[n] = nested.kind == NestedKind::Optional ? first(f, *nested.pattern)
                                                            : iterate(f, *nested.pattern);
        for (const Match& inst : f.m.nested[n]) propagate_defs(f, inst);
      }
      go = uses(f, 0, k);
    }
    f.m.binding = saved;
    for (auto& inst : f.m.nested) inst.clear();
    return go;
  }

  bool exists(const Frame& f, const Pattern& inner) {
    Frame child;
    init_frame(child, inner, &f);
    return !search(child, [](Frame&) { return false; });
  }

  std::vector<Match> first(const Frame& f, const Pattern& inner) {
    Frame child;
    init_frame(child, inner, &f);
    std::vector<Match> out;
    search(child, [&](Frame& c) {
      out.push_back(c.m);
      return false;
    });
    return out;
  }

  // All inner matches, then greedy acceptance of instances whose locally
  // declared elements are disjoint from those already accepted.
  std::vector<Match> iterate(const Frame& f, const Pattern& inner) {
    Frame child;
    init_frame(child, inner, &f);
    std::vector<Match> all;
    search(child, [&](Frame& c) {
      all.push_back(c.m);
      return !inner.locals.empty();
    });
    std::vector<Match> accepted;
    std::unordered_set<ElemId> taken;
    for (Match& m : all) {
      const bool clash = std::any_of(inner.locals.begin(), inner.locals.end(), [&](int l) {
        return taken.count(m.binding[static_cast<std::size_t>(l)]) > 0;
      });
      if (clash) continue;
      for (int l : inner.locals) taken.insert(m.binding[static_cast<std::size_t>(l)]);
      accepted.push_back(std::move(m));
    }
    return accepted;
  }

  // Def elements of the enclosing scope yielded inside a nested instance.
  static void propagate_defs(Frame& f, const Match& inst) {
    const Pattern& inner = *inst.pattern;
    for (std::size_t i = 0; i < inner.elems.size(); ++i) {
      const ScopeElem& e = inner.elems[i];
      if (e.origin == Origin::Import && !e.matched && inst.binding[i] != kNoElement) {
        f.m.binding[static_cast<std::size_t>(e.parent)] = inst.binding[i];
      }
    }
  }

  bool uses(Frame& f, std::size_t index, Cont k) {
    const Pattern& p = *f.pattern;
    if (index == p.uses.size()) return finish(f, k);
    const SubpatternUse& use = p.uses[index];
    const SubpatternDecl& decl = rules_.subpattern(use.decl);
    if (depth_ >= opt_.max_depth) {
      throw MatchError("rule " + rule_ + ": subpattern recursion depth limit (" +
                       std::to_string(opt_.max_depth) + ") exceeded in '" + decl.name + "'");
    }
    Frame sub;
    init_frame(sub, decl.pattern, nullptr);
    for (std::size_t j = 0; j < decl.params.size(); ++j) {
      const auto param = static_cast<std::size_t>(decl.params[j]);
      if (decl.pattern.elems[param].origin == Origin::Def) continue;
      const ElemId arg = f.m.binding[static_cast<std::size_t>(use.args[j])];
      if (arg == kNoElement ||
          !schema_.is_subtype_of(g_.class_of(arg), decl.pattern.elems[param].cls)) {
        return true;  // argument outside the parameter type: no match
      }
      sub.m.binding[param] = arg;
    }
    ++depth_;
    const bool go = search(sub, [&](Frame& s) {
      std::vector<std::pair<std::size_t, ElemId>> restore;
      for (std::size_t j = 0; j < decl.params.size(); ++j) {
        const auto param = static_cast<std::size_t>(decl.params[j]);
        if (decl.pattern.elems[param].origin != Origin::Def || use.args[j] < 0) continue;
        const auto recv = static_cast<std::size_t>(use.args[j]);
        restore.emplace_back(recv, f.m.binding[recv]);
        if (s.m.binding[param] != kNoElement) f.m.binding[recv] = s.m.binding[param];
      }
      f.m.uses[index] = s.m;
      const bool more = uses(f, index + 1, k);
      for (auto it = restore.rbegin(); it != restore.rend(); ++it) f.m.binding[it->first] = it->second;
      return more;
    });
    --depth_;
    f.m.uses[index] = Match{};
    return go;
  }

  bool finish(Frame& f, Cont k) {
    const Pattern& p = *f.pattern;
    std::vector<ElemId> saved;
    if (!p.yields.empty()) saved = f.m.binding;
    for (const Yield& y : p.yields) {
      RValue v;
      try {
        v = evaluate(*y.value, context(f));
      } catch (const EvalError& e) {
        throw MatchError("rule " + rule_ + ": " + e.what());
      }
      const ScopeElem& def = p.elems[static_cast<std::size_t>(y.def)];
      ElemId id = kNoElement;
      if (const auto* ev = std::get_if<ElemVal>(&v)) {
        id = ev->id;
        if (!schema_.is_subtype_of(g_.class_of(id), def.cls)) {
          throw MatchError("rule " + rule_ + ": " + std::to_string(y.pos.line) + ":" +
                           std::to_string(y.pos.column) + ": cannot yield " + g_.class_name(id) +
                           " to def element '" + def.name + "' of type " +
                           schema_.info(def.cls).name);
        }
      } else if (!std::holds_alternative<std::monostate>(v)) {
        throw MatchError("rule " + rule_ + ": " + std::to_string(y.pos.line) + ":" +
                         std::to_string(y.pos.column) + ": cannot yield " + type_name(v) +
                         " to def element '" + def.name + "'");
      }
      f.m.binding[static_cast<std::size_t>(y.def)] = id;
    }
    bool go = true;
    if (conditions_hold(f, p.late_conds)) go = k(f);
    if (!p.yields.empty()) f.m.binding = std::move(saved);
    return go;
  }

  const Graph& g_;
  const Schema& schema_;
  const RuleSet& rules_;
  const MatchOptions& opt_;
  const std::vector<Value>* vars_;
  const std::string& rule_;
  std::size_t depth_ = 0;
};

}  // namespace

ElemId Match::operator[](std::string_view name) const {
  const int i = pattern ? pattern->find(name) : -1;
  if (i < 0) throw MatchError("match has no element '" + std::string(name) + "'");
  return binding[static_cast<std::size_t>(i)];
}

std::vector<Match> find_matches(const Graph& graph, const RuleSet& rules, const Rule& rule,
                                const RuleArgs& args, const MatchOptions& options) {
  const Pattern& p = rule.pattern;
  const Schema& schema = graph.schema();
  if (args.elements.size() != rule.params.size() || args.values.size() != rule.vars.size()) {
    throw MatchError("rule " + rule.name + " expects " + std::to_string(rule.params.size()) +
                     " element and " + std::to_string(rule.vars.size()) +
                     " value arguments, got " + std::to_string(args.elements.size()) + " and " +
                     std::to_string(args.values.size()));
  }
  Frame root;
  init_frame(root, p, nullptr);
  for (std::size_t i = 0; i < rule.params.size(); ++i) {
    const ScopeElem& param = p.elems[static_cast<std::size_t>(rule.params[i])];
    const ElemId id = args.elements[i];
    if (!graph.is_live(id) || !schema.is_subtype_of(graph.class_of(id), param.cls)) {
      throw MatchError("rule " + rule.name + ": argument " + std::to_string(i + 1) +
                       " is not a live element of type " + schema.info(param.cls).name);
    }
    root.m.binding[static_cast<std::size_t>(rule.params[i])] = id;
  }
  for (std::size_t i = 0; i < rule.vars.size(); ++i) {
    if (!conforms(schema, rule.vars[i].type, args.values[i])) {
      throw MatchError("rule " + rule.name + ": value argument '" + rule.vars[i].name +
                       "' must be of type " + rule.vars[i].type.to_string());
    }
  }
  std::vector<Match> out;
  Matcher matcher(graph, rules, options, &args.values, rule.name);
  matcher.search(root, [&](Frame& f) {
    out.push_back(f.m);
    out.back().values = args.values;
    return options.limit == 0 || out.size() < options.limit;
  });
  return out;
}

}  // namespace grrw::rules
