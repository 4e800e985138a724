#include <algorithm>
#include <set>
#include <unordered_map>

#include "grrw/rules/ruleset.hpp"
#include "eval.hpp"
#include "lexer.hpp"

namespace grrw::rules {

namespace {

struct BuiltinInfo {
  std::string_view name;
  std::size_t arity;
};
constexpr BuiltinInfo kBuiltins[] = {{"uniqueof", 1}, {"xmlEscape", 1}, {"size", 1}};

const char* origin_word(Origin o) {
  switch (o) {
    case Origin::Def:
      return "def element";
    case Origin::RewriteParam:
      return "rewrite parameter";
    case Origin::Created:
      return "created element";
    default:
      return "element";
  }
}

}  // namespace

// Recursive-descent parser. Runs in two passes over one source: the first
// registers subpattern headers (so rules may use subpatterns declared later),
// the second parses bodies. Rewrite parts are parsed after the enclosing
// pattern body so that nested rewrites can refer to elements created by the
// enclosing rewrite, which executes first.
class Parser {
 public:
  Parser(RuleSet& rules, std::string_view text, const std::string& file)
      : rs_(rules), schema_(*rules.schema_), file_(file), toks_(lex(text, file)) {}

  void run() {
    struct Item {
      bool is_rule;
      std::size_t start;
      SubpatternDecl* decl;
    };
    std::vector<Item> items;
    std::set<std::string> names;
    for (const auto& r : rs_.rules_) names.insert(r->name);
    for (const auto& d : rs_.subpatterns_) names.insert(d->name);

    // Pass 1: headers.
    while (peek().kind != Tok::End) {
      const Token& kw = peek();
      if (kw.is_word("rule")) {
        const std::size_t start = pos_;
        next();
        const Token& name = expect_ident("rule name");
        if (!names.insert(name.text).second) fail(name.pos, "duplicate name '" + name.text + "'");
        skip_to_body();
        skip_balanced();
        items.push_back({true, start, nullptr});
      } else if (kw.is_word("pattern")) {
        next();
        const Token& name = expect_ident("pattern name");
        if (!names.insert(name.text).second) fail(name.pos, "duplicate name '" + name.text + "'");
        auto decl = std::make_unique<SubpatternDecl>();
        decl->name = name.text;
        decl->pos = name.pos;
        parse_subpattern_header(*decl);
        items.push_back({false, pos_, decl.get()});
        skip_balanced();
        rs_.subpatterns_.push_back(std::move(decl));
      } else {
        fail(kw.pos, "expected 'rule' or 'pattern', found " + describe(kw));
      }
    }

    // Pass 2: bodies.
    for (const Item& item : items) {
      pos_ = item.start;
      if (item.is_rule) {
        rs_.rules_.push_back(parse_rule());
      } else {
        parse_subpattern_body(*item.decl);
      }
    }
  }

 private:
  enum class Ctx { Match, Rewrite };

  struct Scope {
    Pattern* pattern = nullptr;
    Scope* parent = nullptr;
    bool negative = false;
    bool iterated = false;
    const std::vector<VarParam>* vars = nullptr;
  };

  // ---- tokens -------------------------------------------------------------

  const Token& peek(std::size_t k = 0) const {
    return toks_[std::min(pos_ + k, toks_.size() - 1)];
  }
  const Token& next() {
    const Token& t = toks_[pos_];
    if (pos_ + 1 < toks_.size()) ++pos_;
    return t;
  }
  bool accept(std::string_view punct) {
    if (peek().is(punct)) {
      next();
      return true;
    }
    return false;
  }
  bool accept_word(std::string_view word) {
    if (peek().is_word(word)) {
      next();
      return true;
    }
    return false;
  }
  const Token& expect(std::string_view punct) {
    if (!peek().is(punct)) {
      fail(peek().pos, "expected '" + std::string(punct) + "', found " + describe(peek()));
    }
    return next();
  }
  const Token& expect_ident(const std::string& what) {
    if (peek().kind != Tok::Ident) fail(peek().pos, "expected " + what + ", found " + describe(peek()));
    return next();
  }
  static std::string describe(const Token& t) {
    switch (t.kind) {
      case Tok::End:
        return "end of input";
      case Tok::String:
        return "string literal";
      case Tok::Ident:
        return "'" + t.text + "'";
      default:
        return "'" + t.text + "'";
    }
  }
  [[noreturn]] void fail(const SourcePos& pos, const std::string& message) const {
    throw ParseError(file_, pos.line, pos.column, message);
  }

  // Skips to the '{' that opens a rule body.
  void skip_to_body() {
    while (!peek().is("{")) {
      if (peek().kind == Tok::End) fail(peek().pos, "expected '{'");
      next();
    }
  }
  // At '{': skips past the matching '}'.
  void skip_balanced() {
    const SourcePos open = expect("{").pos;
    int depth = 1;
    while (depth > 0) {
      const Token& t = next();
      if (t.kind == Tok::End) fail(open, "unterminated block");
      if (t.is("{")) ++depth;
      if (t.is("}")) --depth;
    }
  }

  // ---- types --------------------------------------------------------------

  std::pair<ElementKind, ClassId> resolve_class(const Token& name) const {
    if (auto c = schema_.find_class(ElementKind::Node, name.text)) return {ElementKind::Node, *c};
    if (auto c = schema_.find_class(ElementKind::Edge, name.text)) return {ElementKind::Edge, *c};
    fail(name.pos, "unknown type '" + name.text + "'");
  }

  ClassId node_class(const Token& name) const {
    if (auto c = schema_.find_class(ElementKind::Node, name.text)) return *c;
    if (schema_.find_class(ElementKind::Edge, name.text)) {
      fail(name.pos, "'" + name.text + "' is an edge class, expected a node class");
    }
    fail(name.pos, "unknown node class '" + name.text + "'");
  }

  ClassId edge_class(const Token& name) const {
    if (auto c = schema_.find_class(ElementKind::Edge, name.text)) return *c;
    if (schema_.find_class(ElementKind::Node, name.text)) {
      fail(name.pos, "'" + name.text + "' is a node class, expected an edge class");
    }
    fail(name.pos, "unknown edge class '" + name.text + "'");
  }

  ValueType parse_var_type() {
    const SourcePos at = peek().pos;
    std::string text;
    int depth = 0;
    while (true) {
      const Token& t = peek();
      if (t.kind == Tok::End) fail(t.pos, "unterminated parameter list");
      if (depth == 0 && (t.is(",") || t.is(")"))) break;
      if (t.is("<")) ++depth;
      if (t.is(">")) --depth;
      text += t.text;
      next();
    }
    try {
      ValueType type = parse_value_type(text);
      for (const ScalarType* s : {&type.element, &type.key}) {
        if (s->kind == ScalarKind::Enum && !schema_.find_enum(s->enum_name)) {
          fail(at, "unknown enum '" + s->enum_name + "'");
        }
      }
      return type;
    } catch (const SchemaError& e) {
      fail(at, std::string("invalid type: ") + e.what());
    }
  }

  // ---- headers ------------------------------------------------------------

  int add_elem(Pattern& p, ScopeElem elem) {
    p.elems.push_back(std::move(elem));
    return static_cast<int>(p.elems.size()) - 1;
  }

  void parse_subpattern_header(SubpatternDecl& decl) {
    Pattern& p = decl.pattern;
    if (accept("(")) {
      if (!peek().is(")")) {
        do {
          const bool is_def = accept_word("def");
          const Token& name = expect_ident("parameter name");
          if (p.find(name.text) >= 0) fail(name.pos, "duplicate parameter '" + name.text + "'");
          expect(":");
          auto [kind, cls] = resolve_class(expect_ident("parameter type"));
          ScopeElem e;
          e.name = name.text;
          e.kind = kind;
          e.cls = cls;
          e.origin = is_def ? Origin::Def : Origin::Param;
          e.matched = !is_def;
          e.pos = name.pos;
          decl.params.push_back(add_elem(p, std::move(e)));
        } while (accept(","));
      }
      expect(")");
    }
    if (peek().is_word("modify") || peek().is_word("replace")) {
      decl.rewrite_replace = next().text == "replace";
      has_rewrite_header_.insert(&decl);
      expect("(");
      if (!peek().is(")")) {
        do {
          const Token& name = expect_ident("rewrite parameter name");
          if (p.find(name.text) >= 0) fail(name.pos, "duplicate parameter '" + name.text + "'");
          expect(":");
          auto [kind, cls] = resolve_class(expect_ident("parameter type"));
          ScopeElem e;
          e.name = name.text;
          e.kind = kind;
          e.cls = cls;
          e.origin = Origin::RewriteParam;
          e.pos = name.pos;
          decl.rewrite_params.push_back(add_elem(p, std::move(e)));
        } while (accept(","));
      }
      expect(")");
    }
    if (!peek().is("{")) fail(peek().pos, "expected '{', found " + describe(peek()));
  }

  std::unique_ptr<Rule> parse_rule() {
    next();  // rule
    auto rule = std::make_unique<Rule>();
    const Token& name = expect_ident("rule name");
    rule->name = name.text;
    rule->pos = name.pos;
    Pattern& p = rule->pattern;
    if (accept("(")) {
      if (!peek().is(")")) {
        do {
          if (accept_word("var")) {
            const Token& vname = expect_ident("parameter name");
            check_fresh_var(*rule, vname);
            expect(":");
            rule->vars.push_back({vname.text, parse_var_type()});
          } else {
            const Token& pname = expect_ident("parameter name");
            check_fresh_var(*rule, pname);
            expect(":");
            auto [kind, cls] = resolve_class(expect_ident("parameter type"));
            ScopeElem e;
            e.name = pname.text;
            e.kind = kind;
            e.cls = cls;
            e.origin = Origin::Param;
            e.matched = true;
            e.pos = pname.pos;
            rule->params.push_back(add_elem(p, std::move(e)));
          }
        } while (accept(","));
      }
      expect(")");
    }
    Scope scope{&p, nullptr, false, false, &rule->vars};
    expect("{");
    parse_body(p, scope);
    finish(p, scope);
    compile(p);
    return rule;
  }

  void check_fresh_var(const Rule& rule, const Token& name) const {
    const bool taken = rule.pattern.find(name.text) >= 0 ||
                       std::any_of(rule.vars.begin(), rule.vars.end(),
                                   [&](const VarParam& v) { return v.name == name.text; });
    if (taken) fail(name.pos, "duplicate parameter '" + name.text + "'");
  }

  void parse_subpattern_body(SubpatternDecl& decl) {
    Scope scope{&decl.pattern, nullptr, false, false, &kNoVars};
    expect("{");
    parse_body(decl.pattern, scope);
    auto it = deferred_.find(&decl.pattern);
    if (it != deferred_.end() && has_rewrite_header_.count(&decl)) {
      const Token& kw = toks_[it->second];
      if ((kw.text == "replace") != decl.rewrite_replace) {
        fail(kw.pos, "rewrite part '" + kw.text + "' does not match the header of pattern '" +
                         decl.name + "'");
      }
    } else if (it != deferred_.end()) {
      decl.rewrite_replace = toks_[it->second].text == "replace";
    }
    finish(decl.pattern, scope);
    compile(decl.pattern);
  }

  // ---- pattern bodies -----------------------------------------------------

  // Parses statements up to and including the closing '}'.
  void parse_body(Pattern& p, Scope& s) {
    while (!accept("}")) {
      const Token& t = peek();
      if (t.kind == Tok::End) fail(t.pos, "unexpected end of input, expected '}'");
      if (t.is_word("if")) {
        parse_condition_block(p, s);
      } else if (t.is_word("iterated") || t.is_word("optional") || t.is_word("negative")) {
        parse_nested(p, s);
      } else if (t.is_word("def")) {
        parse_def(p, s);
      } else if (t.is_word("yield")) {
        parse_yield_block(p, s);
      } else if (t.is_word("modify") || t.is_word("replace")) {
        if (s.negative) fail(t.pos, "negative blocks cannot contain a rewrite part");
        if (s.iterated && t.is_word("replace")) {
          fail(t.pos, "replace is not supported inside iterated blocks; use modify");
        }
        deferred_[&p] = pos_;
        next();
        skip_balanced();
        if (!peek().is("}")) fail(peek().pos, "the rewrite part must end the pattern");
      } else if (t.kind == Tok::Ident && peek(1).is(":") && peek(2).kind == Tok::Ident &&
                 peek(3).is("(")) {
        parse_use(p, s);
      } else {
        parse_graphlet(p, s, Ctx::Match, nullptr);
        expect(";");
      }
    }
  }

  void parse_condition_block(Pattern& p, Scope& s) {
    next();  // if
    expect("{");
    while (!accept("}")) {
      ExprPtr e = parse_expr(p, s, Ctx::Match);
      split_conjuncts(std::move(e), p.conditions);
      if (!peek().is("}")) expect(";");
    }
  }

  static void split_conjuncts(ExprPtr e, std::vector<ExprPtr>& out) {
    if (e->op == ExprOp::And) {
      split_conjuncts(std::move(e->args[0]), out);
      split_conjuncts(std::move(e->args[1]), out);
    } else {
      out.push_back(std::move(e));
    }
  }

  void parse_nested(Pattern& p, Scope& s) {
    const Token& kw = next();
    Nested n;
    n.kind = kw.text == "iterated"   ? NestedKind::Iterated
             : kw.text == "optional" ? NestedKind::Optional
                                     : NestedKind::Negative;
    n.pos = kw.pos;
    n.pattern = std::make_unique<Pattern>();
    Scope child{n.pattern.get(), &s, s.negative || n.kind == NestedKind::Negative,
                n.kind == NestedKind::Iterated, s.vars};
    expect("{");
    parse_body(*n.pattern, child);
    p.nested.push_back(std::move(n));
  }

  void parse_def(Pattern& p, Scope& s) {
    const SourcePos at = next().pos;  // def
    if (s.negative) fail(at, "negative blocks cannot declare def elements");
    const Token& name = expect_ident("def element name");
    expect(":");
    auto [kind, cls] = resolve_class(expect_ident("type"));
    expect(";");
    declare(p, s, name, kind, cls, Origin::Def);
  }

  void parse_yield_block(Pattern& p, Scope& s) {
    const SourcePos at = next().pos;  // yield
    if (s.negative) fail(at, "negative blocks cannot yield");
    expect("{");
    while (!accept("}")) {
      const Token& kw = peek();
      if (!kw.is_word("yield")) fail(kw.pos, "expected 'yield', found " + describe(kw));
      next();
      const Token& name = expect_ident("def element name");
      const int d = resolve_def_target(p, s, name);
      expect("=");
      Yield y;
      y.def = d;
      y.pos = name.pos;
      y.value = parse_expr(p, s, Ctx::Match);
      p.yields.push_back(std::move(y));
      expect(";");
    }
  }

  bool is_def_like(const Scope& s, int index) const {
    const ScopeElem& e = s.pattern->elems[static_cast<std::size_t>(index)];
    if (e.origin == Origin::Def) return true;
    if (e.origin == Origin::Import) return is_def_like(*s.parent, e.parent);
    return false;
  }

  int resolve_def_target(Pattern& p, Scope& s, const Token& name) {
    const int d = resolve(s, name.text);
    if (d < 0) fail(name.pos, "undeclared identifier '" + name.text + "'");
    if (!is_def_like(s, d)) fail(name.pos, "'" + name.text + "' is not a def element");
    (void)p;
    return d;
  }

  void parse_use(Pattern& p, Scope& s) {
    const Token& name = next();
    next();  // :
    const Token& type = next();
    const SubpatternDecl* decl = rs_.find_subpattern(type.text);
    if (!decl) fail(type.pos, "unknown pattern '" + type.text + "'");
    if (visible(s, name.text) || find_use(p, name.text) >= 0) {
      fail(name.pos, "'" + name.text + "' is already declared");
    }
    SubpatternUse use;
    use.name = name.text;
    use.decl = subpattern_index(decl);
    use.pos = name.pos;
    expect("(");
    std::size_t i = 0;
    if (!peek().is(")")) {
      do {
        if (i >= decl->params.size()) {
          fail(peek().pos, "too many arguments for pattern '" + decl->name + "' (expected " +
                               std::to_string(decl->params.size()) + ")");
        }
        const ScopeElem param = decl->pattern.elems[static_cast<std::size_t>(decl->params[i])];
        if (param.origin == Origin::Def) {
          if (!accept_word("yield")) {
            fail(peek().pos, "argument " + std::to_string(i + 1) + " of '" + decl->name +
                                 "' is a def parameter; pass it as 'yield <def>'");
          }
          const Token& arg = expect_ident("def element name");
          use.args.push_back(resolve_def_target(p, s, arg));
        } else {
          const Token& arg = expect_ident("argument");
          const int a = resolve_matched(p, s, arg);
          if (p.elems[static_cast<std::size_t>(a)].kind != param.kind) {
            fail(arg.pos, "argument '" + arg.text + "' is " +
                              std::string(to_string(p.elems[static_cast<std::size_t>(a)].kind)) +
                              ", parameter '" + param.name + "' of '" + decl->name + "' is " +
                              std::string(to_string(param.kind)));
          }
          use.args.push_back(a);
        }
        ++i;
      } while (accept(","));
    }
    const Token& close = expect(")");
    if (i != decl->params.size()) {
      fail(close.pos, "pattern '" + decl->name + "' expects " +
                          std::to_string(decl->params.size()) + " arguments, got " +
                          std::to_string(i));
    }
    expect(";");
    p.uses.push_back(std::move(use));
  }

  int subpattern_index(const SubpatternDecl* decl) const {
    for (std::size_t i = 0; i < rs_.subpatterns_.size(); ++i) {
      if (rs_.subpatterns_[i].get() == decl) return static_cast<int>(i);
    }
    return -1;
  }

  static int find_use(const Pattern& p, const std::string& name) {
    for (std::size_t i = 0; i < p.uses.size(); ++i) {
      if (p.uses[i].name == name) return static_cast<int>(i);
    }
    return -1;
  }

  // ---- names --------------------------------------------------------------

  bool visible(const Scope& s, const std::string& name) const {
    for (const Scope* sc = &s; sc; sc = sc->parent) {
      if (sc->pattern->find(name) >= 0) return true;
    }
    return is_var(s, name) >= 0;
  }

  static int is_var(const Scope& s, const std::string& name) {
    if (!s.vars) return -1;
    for (std::size_t i = 0; i < s.vars->size(); ++i) {
      if ((*s.vars)[i].name == name) return static_cast<int>(i);
    }
    return -1;
  }

  // Index of `name` in the scope's element list; imports enclosing elements.
  int resolve(Scope& s, const std::string& name) {
    const int own = s.pattern->find(name);
    if (own >= 0) return own;
    if (!s.parent) return -1;
    const int outer = resolve(*s.parent, name);
    if (outer < 0) return -1;
    ScopeElem im = s.parent->pattern->elems[static_cast<std::size_t>(outer)];
    im.origin = Origin::Import;
    im.parent = outer;
    im.source = im.target = -1;
    return add_elem(*s.pattern, std::move(im));
  }

  // Resolves a reference in the match part: must be a matched element.
  int resolve_matched(Pattern& p, Scope& s, const Token& name) {
    const int i = resolve(s, name.text);
    if (i < 0) fail(name.pos, "undeclared identifier '" + name.text + "'");
    const ScopeElem& e = p.elems[static_cast<std::size_t>(i)];
    if (!e.matched) {
      const Origin o = e.origin == Origin::Import ? root_origin(s, i) : e.origin;
      fail(name.pos, std::string(origin_word(o)) + " '" + name.text +
                         "' cannot be used in the pattern part");
    }
    return i;
  }

  Origin root_origin(const Scope& s, int index) const {
    const ScopeElem& e = s.pattern->elems[static_cast<std::size_t>(index)];
    if (e.origin == Origin::Import) return root_origin(*s.parent, e.parent);
    return e.origin;
  }

  int declare(Pattern& p, Scope& s, const Token& name, ElementKind kind, ClassId cls, Origin origin) {
    if (visible(s, name.text) || find_use(p, name.text) >= 0) {
      fail(name.pos, "'" + name.text + "' is already declared");
    }
    return declare_anonymous(p, name.text, kind, cls, origin, name.pos);
  }

  int declare_anonymous(Pattern& p, std::string name, ElementKind kind, ClassId cls, Origin origin,
                        const SourcePos& pos) {
    if (name.empty()) name = "$" + std::to_string(anon_++);
    ScopeElem e;
    e.name = std::move(name);
    e.kind = kind;
    e.cls = cls;
    e.origin = origin;
    e.matched = origin == Origin::Local || origin == Origin::Param;
    e.pos = pos;
    return add_elem(p, std::move(e));
  }

  // ---- graphlets ----------------------------------------------------------

  // `kept` collects referenced elements in rewrite parts.
  int parse_node_term(Pattern& p, Scope& s, Ctx ctx, std::set<int>* kept) {
    const Origin fresh = ctx == Ctx::Match ? Origin::Local : Origin::Created;
    if (peek().is(":")) {
      const SourcePos at = next().pos;
      const ClassId cls = node_class(expect_ident("node class"));
      return declare_anonymous(p, {}, ElementKind::Node, cls, fresh, at);
    }
    const Token& name = expect_ident("node");
    if (accept(":")) {
      const ClassId cls = node_class(expect_ident("node class"));
      return declare(p, s, name, ElementKind::Node, cls, fresh);
    }
    const int i = ctx == Ctx::Match ? resolve_matched(p, s, name) : resolve_any(p, s, name, kept);
    if (p.elems[static_cast<std::size_t>(i)].kind != ElementKind::Node) {
      fail(name.pos, "'" + name.text + "' is an edge, expected a node");
    }
    return i;
  }

  int resolve_any(Pattern& p, Scope& s, const Token& name, std::set<int>* kept) {
    const int i = resolve(s, name.text);
    if (i < 0) fail(name.pos, "undeclared identifier '" + name.text + "'");
    if (kept) kept->insert(i);
    (void)p;
    return i;
  }

  void parse_graphlet(Pattern& p, Scope& s, Ctx ctx, std::set<int>* kept) {
    int left = parse_node_term(p, s, ctx, kept);
    while (peek().is("-") || peek().is("<-") || peek().is("-->") || peek().is("<--")) {
      const Token& open = next();
      const bool forward = open.is("-") || open.is("-->");
      const Token* name = nullptr;
      const Token* type = nullptr;
      if (open.is("-") || open.is("<-")) {
        if (peek().kind == Tok::Ident) name = &next();
        if (accept(":")) type = &expect_ident("edge class");
        expect(forward ? "->" : "-");
      }
      const int right = parse_node_term(p, s, ctx, kept);
      const int src = forward ? left : right;
      const int tgt = forward ? right : left;
      const SourcePos at = name ? name->pos : open.pos;
      if (name && !type && (visible(s, name->text))) {
        // Reference to a declared edge.
        const int e = ctx == Ctx::Match ? resolve_matched(p, s, *name) : resolve_any(p, s, *name, kept);
        const ScopeElem& edge = p.elems[static_cast<std::size_t>(e)];
        if (edge.kind != ElementKind::Edge) fail(at, "'" + name->text + "' is a node, expected an edge");
        if (ctx == Ctx::Match && (edge.source != src || edge.target != tgt)) {
          fail(at, "edge '" + name->text + "' is already declared with other endpoints");
        }
      } else {
        if (name && !type) fail(name->pos, "undeclared identifier '" + name->text + "'");
        const ClassId cls = type ? edge_class(*type) : Schema::edge_root();
        const Origin fresh = ctx == Ctx::Match ? Origin::Local : Origin::Created;
        const int e = name ? declare(p, s, *name, ElementKind::Edge, cls, fresh)
                           : declare_anonymous(p, {}, ElementKind::Edge, cls, fresh, at);
        p.elems[static_cast<std::size_t>(e)].source = src;
        p.elems[static_cast<std::size_t>(e)].target = tgt;
      }
      left = right;
    }
  }

  // ---- rewrite parts ------------------------------------------------------

  void finish(Pattern& p, Scope& s) {
    if (auto it = deferred_.find(&p); it != deferred_.end()) parse_rewrite(p, s, it->second);
    for (Nested& n : p.nested) {
      Scope child{n.pattern.get(), &s, s.negative || n.kind == NestedKind::Negative,
                  n.kind == NestedKind::Iterated, s.vars};
      finish(*n.pattern, child);
    }
  }

  void parse_rewrite(Pattern& p, Scope& s, std::size_t at) {
    const std::size_t resume = pos_;
    pos_ = at;
    Rewrite rw;
    const Token& kw = next();
    rw.replace = kw.text == "replace";
    rw.pos = kw.pos;
    std::set<int> kept;
    const std::size_t first_new = p.elems.size();
    expect("{");
    while (!accept("}")) {
      const Token& t = peek();
      if (t.is_word("eval")) {
        next();
        expect("{");
        while (!accept("}")) {
          RewriteStmt st;
          st.kind = RewriteStmt::Kind::Assign;
          st.pos = peek().pos;
          st.target = parse_postfix(p, s, Ctx::Rewrite, &kept);
          const bool attr = st.target->op == ExprOp::Attr;
          const bool entry = st.target->op == ExprOp::Index && st.target->args[0]->op == ExprOp::Attr;
          if (!attr && !entry) fail(st.pos, "assignment target must be an attribute or container entry");
          expect("=");
          st.value = parse_expr(p, s, Ctx::Rewrite, &kept);
          expect(";");
          rw.stmts.push_back(std::move(st));
        }
      } else if (t.is_word("emit")) {
        next();
        RewriteStmt st;
        st.kind = RewriteStmt::Kind::Emit;
        st.pos = t.pos;
        expect("(");
        do {
          st.parts.push_back(parse_expr(p, s, Ctx::Rewrite, &kept));
        } while (accept(","));
        expect(")");
        expect(";");
        rw.stmts.push_back(std::move(st));
      } else if (t.is_word("delete")) {
        next();
        if (rw.replace) fail(t.pos, "delete() is only allowed in modify parts");
        expect("(");
        do {
          const Token& name = expect_ident("element to delete");
          const int i = resolve(s, name.text);
          if (i < 0) fail(name.pos, "undeclared identifier '" + name.text + "'");
          rw.deletes.push_back(i);
        } while (accept(","));
        expect(")");
        expect(";");
      } else if (t.kind == Tok::Ident && peek(1).is("(") && find_use(p, t.text) >= 0) {
        next();
        RewriteStmt st;
        st.kind = RewriteStmt::Kind::Call;
        st.pos = t.pos;
        st.use = find_use(p, t.text);
        const SubpatternDecl& decl =
            rs_.subpattern(p.uses[static_cast<std::size_t>(st.use)].decl);
        expect("(");
        if (!peek().is(")")) {
          do {
            st.call_args.push_back(resolve_any(p, s, expect_ident("argument"), &kept));
          } while (accept(","));
        }
        const Token& close = expect(")");
        if (st.call_args.size() != decl.rewrite_params.size()) {
          fail(close.pos, "rewrite of pattern '" + decl.name + "' expects " +
                              std::to_string(decl.rewrite_params.size()) + " arguments, got " +
                              std::to_string(st.call_args.size()));
        }
        for (std::size_t i = 0; i < st.call_args.size(); ++i) {
          const ScopeElem& param =
              decl.pattern.elems[static_cast<std::size_t>(decl.rewrite_params[i])];
          if (p.elems[static_cast<std::size_t>(st.call_args[i])].kind != param.kind) {
            fail(close.pos, "argument " + std::to_string(i + 1) + " of '" + decl.name +
                                "' rewrite has the wrong element kind");
          }
        }
        expect(";");
        rw.stmts.push_back(std::move(st));
      } else if (t.kind == Tok::End) {
        fail(t.pos, "unexpected end of input, expected '}'");
      } else {
        parse_graphlet(p, s, Ctx::Rewrite, &kept);
        expect(";");
      }
    }
    for (std::size_t i = first_new; i < p.elems.size(); ++i) {
      if (p.elems[i].origin != Origin::Created) continue;
      (p.elems[i].kind == ElementKind::Node ? rw.create_nodes : rw.create_edges)
          .push_back(static_cast<int>(i));
    }
    rw.kept.assign(p.elems.size(), false);
    for (int i : kept) rw.kept[static_cast<std::size_t>(i)] = true;
    p.rewrite = std::move(rw);
    pos_ = resume;
  }

  // ---- expressions --------------------------------------------------------

  ExprPtr make(ExprOp op, const SourcePos& pos) {
    auto e = std::make_unique<Expr>();
    e->op = op;
    e->pos = pos;
    return e;
  }

  ExprPtr binary(ExprOp op, const SourcePos& pos, ExprPtr a, ExprPtr b) {
    auto e = make(op, pos);
    e->args.push_back(std::move(a));
    e->args.push_back(std::move(b));
    return e;
  }

  ExprPtr parse_expr(Pattern& p, Scope& s, Ctx ctx, std::set<int>* kept = nullptr) {
    return parse_or(p, s, ctx, kept);
  }

  ExprPtr parse_or(Pattern& p, Scope& s, Ctx ctx, std::set<int>* kept) {
    ExprPtr e = parse_and(p, s, ctx, kept);
    while (peek().is("||")) {
      const SourcePos at = next().pos;
      e = binary(ExprOp::Or, at, std::move(e), parse_and(p, s, ctx, kept));
    }
    return e;
  }

  ExprPtr parse_and(Pattern& p, Scope& s, Ctx ctx, std::set<int>* kept) {
    ExprPtr e = parse_equality(p, s, ctx, kept);
    while (peek().is("&&")) {
      const SourcePos at = next().pos;
      e = binary(ExprOp::And, at, std::move(e), parse_equality(p, s, ctx, kept));
    }
    return e;
  }

  ExprPtr parse_equality(Pattern& p, Scope& s, Ctx ctx, std::set<int>* kept) {
    ExprPtr e = parse_relational(p, s, ctx, kept);
    while (peek().is("==") || peek().is("!=")) {
      const Token& op = next();
      e = binary(op.is("==") ? ExprOp::Eq : ExprOp::Ne, op.pos, std::move(e),
                 parse_relational(p, s, ctx, kept));
    }
    return e;
  }

  ExprPtr parse_relational(Pattern& p, Scope& s, Ctx ctx, std::set<int>* kept) {
    ExprPtr e = parse_additive(p, s, ctx, kept);
    while (peek().is("<") || peek().is("<=") || peek().is(">") || peek().is(">=")) {
      const Token& op = next();
      const ExprOp kind = op.is("<")    ? ExprOp::Lt
                          : op.is("<=") ? ExprOp::Le
                          : op.is(">")  ? ExprOp::Gt
                                        : ExprOp::Ge;
      e = binary(kind, op.pos, std::move(e), parse_additive(p, s, ctx, kept));
    }
    return e;
  }

  ExprPtr parse_additive(Pattern& p, Scope& s, Ctx ctx, std::set<int>* kept) {
    ExprPtr e = parse_multiplicative(p, s, ctx, kept);
    while (peek().is("+") || peek().is("-")) {
      const Token& op = next();
      e = binary(op.is("+") ? ExprOp::Add : ExprOp::Sub, op.pos, std::move(e),
                 parse_multiplicative(p, s, ctx, kept));
    }
    return e;
  }

  ExprPtr parse_multiplicative(Pattern& p, Scope& s, Ctx ctx, std::set<int>* kept) {
    ExprPtr e = parse_unary(p, s, ctx, kept);
    while (peek().is("*") || peek().is("/") || peek().is("%")) {
      const Token& op = next();
      const ExprOp kind = op.is("*") ? ExprOp::Mul : op.is("/") ? ExprOp::Div : ExprOp::Mod;
      e = binary(kind, op.pos, std::move(e), parse_unary(p, s, ctx, kept));
    }
    return e;
  }

  ExprPtr parse_unary(Pattern& p, Scope& s, Ctx ctx, std::set<int>* kept) {
    if (peek().is("!") || peek().is("-")) {
      const Token& op = next();
      auto e = make(op.is("!") ? ExprOp::Not : ExprOp::Neg, op.pos);
      e->args.push_back(parse_unary(p, s, ctx, kept));
      return e;
    }
    return parse_postfix(p, s, ctx, kept);
  }

  ExprPtr parse_postfix(Pattern& p, Scope& s, Ctx ctx, std::set<int>* kept) {
    ExprPtr e = parse_primary(p, s, ctx, kept);
    while (true) {
      if (peek().is(".")) {
        const SourcePos at = next().pos;
        const Token& attr = expect_ident("attribute name");
        if (e->op != ExprOp::Elem) fail(at, "attribute access needs an element");
        const ScopeElem& el = p.elems[static_cast<std::size_t>(e->index)];
        if (!schema_.slot_index(el.cls, attr.text)) {
          fail(attr.pos, "class " + schema_.info(el.cls).name + " has no attribute '" +
                             attr.text + "'");
        }
        auto a = make(ExprOp::Attr, attr.pos);
        a->name = attr.text;
        a->args.push_back(std::move(e));
        e = std::move(a);
      } else if (peek().is("[")) {
        const SourcePos at = next().pos;
        auto idx = make(ExprOp::Index, at);
        idx->args.push_back(std::move(e));
        idx->args.push_back(parse_expr(p, s, ctx, kept));
        expect("]");
        e = std::move(idx);
      } else {
        return e;
      }
    }
  }

  ExprPtr parse_primary(Pattern& p, Scope& s, Ctx ctx, std::set<int>* kept) {
    const Token& t = next();
    switch (t.kind) {
      case Tok::Int: {
        auto e = make(ExprOp::Literal, t.pos);
        e->literal = t.int_value;
        return e;
      }
      case Tok::Double: {
        auto e = make(ExprOp::Literal, t.pos);
        e->literal = t.double_value;
        return e;
      }
      case Tok::String: {
        auto e = make(ExprOp::Literal, t.pos);
        e->literal = t.text;
        return e;
      }
      case Tok::Punct:
        if (t.is("(")) {
          ExprPtr e = parse_expr(p, s, ctx, kept);
          expect(")");
          return e;
        }
        fail(t.pos, "expected expression, found " + describe(t));
      case Tok::End:
        fail(t.pos, "expected expression, found end of input");
      case Tok::Ident:
        break;
    }
    if (t.text == "true" || t.text == "false") {
      auto e = make(ExprOp::Literal, t.pos);
      e->literal = t.text == "true";
      return e;
    }
    if (t.text == "null") return make(ExprOp::Null, t.pos);
    if (peek().is("::")) {
      next();
      const Token& item = expect_ident("enum item");
      const EnumDef* def = schema_.find_enum(t.text);
      if (!def) fail(t.pos, "unknown enum '" + t.text + "'");
      auto v = def->value_of(item.text);
      if (!v) fail(item.pos, "enum " + t.text + " has no item '" + item.text + "'");
      auto e = make(ExprOp::Literal, t.pos);
      e->literal = EnumValue{def->name, *v};
      return e;
    }
    if (peek().is("(")) {
      const auto* builtin = std::find_if(std::begin(kBuiltins), std::end(kBuiltins),
                                         [&](const BuiltinInfo& b) { return b.name == t.text; });
      if (builtin == std::end(kBuiltins)) fail(t.pos, "unknown function '" + t.text + "'");
      next();
      auto e = make(ExprOp::Call, t.pos);
      e->name = t.text;
      if (!peek().is(")")) {
        do {
          e->args.push_back(parse_expr(p, s, ctx, kept));
        } while (accept(","));
      }
      expect(")");
      if (e->args.size() != builtin->arity) {
        fail(t.pos, t.text + "() takes " + std::to_string(builtin->arity) + " argument(s)");
      }
      return e;
    }
    // Element or rule variable.
    const int i = resolve(s, t.text);
    if (i >= 0) {
      if (ctx == Ctx::Match) check_match_read(p, s, i, t);
      if (kept) kept->insert(i);
      auto e = make(ExprOp::Elem, t.pos);
      e->index = i;
      return e;
    }
    const int v = is_var(s, t.text);
    if (v >= 0) {
      auto e = make(ExprOp::Var, t.pos);
      e->index = v;
      return e;
    }
    fail(t.pos, "undeclared identifier '" + t.text + "'");
  }

  // Conditions and yields may read matched elements and this scope's own defs.
  void check_match_read(const Pattern& p, const Scope& s, int index, const Token& name) const {
    const ScopeElem& e = p.elems[static_cast<std::size_t>(index)];
    if (e.matched || e.origin == Origin::Def) return;
    const Origin o = root_origin(s, index);
    if (o == Origin::Def) {
      fail(name.pos, "def element '" + name.text +
                         "' of an enclosing pattern cannot be read here; it is yielded later");
    }
    fail(name.pos, std::string(origin_word(o)) + " '" + name.text +
                       "' cannot be used in the pattern part");
  }

  // ---- search plan --------------------------------------------------------

  void compile(Pattern& p) {
    const std::size_t n = p.elems.size();
    std::vector<bool> bound(n, false);
    for (std::size_t i = 0; i < n; ++i) {
      const ScopeElem& e = p.elems[i];
      if (e.origin == Origin::Param || (e.origin == Origin::Import && e.matched)) bound[i] = true;
      if (e.origin == Origin::Local) p.locals.push_back(static_cast<int>(i));
      if (e.origin == Origin::Local || e.origin == Origin::Param) {
        p.injective.push_back(static_cast<int>(i));
      }
    }
    std::vector<std::pair<int, std::vector<int>>> pending;
    for (std::size_t c = 0; c < p.conditions.size(); ++c) {
      std::vector<int> refs;
      collect_elements(*p.conditions[c], refs);
      const bool late = std::any_of(refs.begin(), refs.end(), [&](int r) {
        return !p.elems[static_cast<std::size_t>(r)].matched;
      });
      if (late) {
        p.late_conds.push_back(static_cast<int>(c));
      } else if (std::all_of(refs.begin(), refs.end(), [&](int r) { return bound[r]; })) {
        p.entry_conds.push_back(static_cast<int>(c));
      } else {
        pending.emplace_back(static_cast<int>(c), std::move(refs));
      }
    }
    auto unbound_local = [&](ElementKind kind) {
      for (int i : p.locals) {
        if (!bound[i] && p.elems[static_cast<std::size_t>(i)].kind == kind) return i;
      }
      return -1;
    };
    while (true) {
      Step step;
      for (int i : p.locals) {
        const ScopeElem& e = p.elems[static_cast<std::size_t>(i)];
        if (bound[i] || e.kind != ElementKind::Edge) continue;
        if (bound[e.source]) {
          step = {Step::Op::ExtendOut, i, e.source, {}};
        } else if (bound[e.target]) {
          step = {Step::Op::ExtendIn, i, e.target, {}};
        } else {
          continue;
        }
        break;
      }
      if (step.elem < 0) {
        const int node = unbound_local(ElementKind::Node);
        if (node < 0) break;
        step = {Step::Op::LookupNode, node, -1, {}};
      }
      bound[step.elem] = true;
      if (step.op != Step::Op::LookupNode) {
        const ScopeElem& e = p.elems[static_cast<std::size_t>(step.elem)];
        bound[e.source] = bound[e.target] = true;
      }
      for (auto it = pending.begin(); it != pending.end();) {
        if (std::all_of(it->second.begin(), it->second.end(), [&](int r) { return bound[r]; })) {
          step.conds.push_back(it->first);
          it = pending.erase(it);
        } else {
          ++it;
        }
      }
      p.plan.push_back(std::move(step));
    }
    for (Nested& nested : p.nested) compile(*nested.pattern);
  }

  static inline const std::vector<VarParam> kNoVars{};

  RuleSet& rs_;
  const Schema& schema_;
  std::string file_;
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  int anon_ = 0;
  std::unordered_map<const Pattern*, std::size_t> deferred_;
  std::set<const SubpatternDecl*> has_rewrite_header_;
};

RuleSet::RuleSet(std::shared_ptr<const Schema> schema) : schema_(std::move(schema)) {}

void RuleSet::add_source(std::string_view text, const std::string& file) {
  const std::size_t rules_before = rules_.size();
  const std::size_t subpatterns_before = subpatterns_.size();
  try {
    Parser(*this, text, file).run();
  } catch (...) {
    rules_.resize(rules_before);
    subpatterns_.resize(subpatterns_before);
    throw;
  }
}

const Rule* RuleSet::find_rule(std::string_view name) const {
  for (const auto& r : rules_) {
    if (r->name == name) return r.get();
  }
  return nullptr;
}

const SubpatternDecl* RuleSet::find_subpattern(std::string_view name) const {
  for (const auto& d : subpatterns_) {
    if (d->name == name) return d.get();
  }
  return nullptr;
}

RuleSet parse_rules(std::string_view text, std::shared_ptr<const Schema> schema,
                    const std::string& file) {
  RuleSet rules(std::move(schema));
  rules.add_source(text, file);
  return rules;
}

}  // namespace grrw::rules
