#include "grrw/sequences.hpp"

#include <sstream>

#include "rules/lexer.hpp"

namespace grrw::seq {

namespace {

using rules::Tok;
using rules::Token;

class SequenceParser {
 public:
  SequenceParser(std::string_view text, const std::string& file)
      : file_(file.empty() ? "<sequence>" : file), toks_(rules::lex(text, file_)) {}

  std::unique_ptr<Sequence> run() {
    if (peek().kind == Tok::End) fail(peek(), "empty sequence");
    auto s = then();
    if (peek().kind != Tok::End) fail(peek(), "unexpected '" + peek().text + "'");
    return s;
  }

 private:
  const Token& peek(std::size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
  const Token& next() {
    const Token& t = toks_[pos_];
    if (pos_ + 1 < toks_.size()) ++pos_;
    return t;
  }
  [[noreturn]] void fail(const Token& at, const std::string& message) const {
    throw ParseError(file_, at.pos.line, at.pos.column, message);
  }
  void expect(std::string_view punct) {
    if (!peek().is(punct)) {
      fail(peek(), "expected '" + std::string(punct) + "'" +
                       (peek().kind == Tok::End ? ", found end of input" : ", found '" + peek().text + "'"));
    }
    next();
  }

  static std::unique_ptr<Sequence> node(Sequence::Kind kind, const Token& at) {
    auto s = std::make_unique<Sequence>();
    s->kind = kind;
    s->column = at.pos.column;
    return s;
  }
  static std::unique_ptr<Sequence> binary(Sequence::Kind kind, const Token& at,
                                          std::unique_ptr<Sequence> l, std::unique_ptr<Sequence> r) {
    auto s = node(kind, at);
    s->left = std::move(l);
    s->right = std::move(r);
    return s;
  }

  // `;>` and `<;` arrive from the shared lexer as two tokens.
  bool at_then_right() const { return peek().is(";") && peek(1).is(">"); }
  bool at_then_left() const { return peek().is("<") && peek(1).is(";"); }

  std::unique_ptr<Sequence> then() {
    auto s = lazy_or();
    while (at_then_right() || at_then_left()) {
      const bool right = at_then_right();
      const Token& at = next();
      next();
      s = binary(right ? Sequence::Kind::ThenRight : Sequence::Kind::ThenLeft, at, std::move(s),
                 lazy_or());
    }
    return s;
  }

  std::unique_ptr<Sequence> lazy_or() {
    auto s = lazy_and();
    while (peek().is("||")) {
      const Token& at = next();
      s = binary(Sequence::Kind::LazyOr, at, std::move(s), lazy_and());
    }
    return s;
  }

  std::unique_ptr<Sequence> lazy_and() {
    auto s = unary();
    while (peek().is("&&")) {
      const Token& at = next();
      s = binary(Sequence::Kind::LazyAnd, at, std::move(s), unary());
    }
    return s;
  }

  std::unique_ptr<Sequence> unary() {
    if (peek().is("!")) {
      const Token& at = next();
      auto s = node(Sequence::Kind::Not, at);
      s->left = unary();
      return s;
    }
    auto s = primary();
    if (peek().is("*")) {
      const Token& at = next();
      auto star = node(Sequence::Kind::Star, at);
      star->left = std::move(s);
      return star;
    }
    return s;
  }

  std::unique_ptr<Sequence> primary() {
    const Token& t = peek();
    if (t.is("(")) {
      next();
      auto s = then();
      expect(")");
      return s;
    }
    if (t.is("[")) {
      next();
      auto s = call(Sequence::Kind::AllBracket, t);
      expect("]");
      return s;
    }
    if (t.kind == Tok::Ident) return call(Sequence::Kind::RuleCall, t);
    if (t.kind == Tok::End) fail(t, "expected rule call, found end of input");
    fail(t, "expected rule call, found '" + t.text + "'");
  }

  std::unique_ptr<Sequence> call(Sequence::Kind kind, const Token& at) {
    if (peek().kind != Tok::Ident) fail(peek(), "expected rule name");
    auto s = node(kind, at);
    s->rule = next().text;
    if (peek().is("(")) {
      next();
      if (!peek().is(")")) {
        do {
          s->args.push_back(literal());
        } while (peek().is(",") && (next(), true));
      }
      expect(")");
    }
    return s;
  }

  Value literal() {
    bool negate = false;
    if (peek().is("-")) {
      next();
      negate = true;
    }
    const Token& t = next();
    switch (t.kind) {
      case Tok::Int:
        return negate ? -t.int_value : t.int_value;
      case Tok::Double:
        return negate ? -t.double_value : t.double_value;
      case Tok::String:
        if (!negate) return t.text;
        break;
      case Tok::Ident:
        if (!negate && (t.text == "true" || t.text == "false")) return t.text == "true";
        break;
      default:
        break;
    }
    fail(t, "rule arguments must be literals");
  }

  std::string file_;
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

const char* kind_name(Sequence::Kind kind) {
  switch (kind) {
    case Sequence::Kind::RuleCall:
      return "RuleCall";
    case Sequence::Kind::AllBracket:
      return "AllBracket";
    case Sequence::Kind::ThenRight:
      return "ThenRight";
    case Sequence::Kind::ThenLeft:
      return "ThenLeft";
    case Sequence::Kind::LazyAnd:
      return "LazyAnd";
    case Sequence::Kind::LazyOr:
      return "LazyOr";
    case Sequence::Kind::Not:
      return "Not";
    case Sequence::Kind::Star:
      return "Star";
  }
  return "?";
}

// Records the changes of one rule application; forwards to any observer
// that was already installed.
class DeltaRecorder : public GraphObserver {
 public:
  explicit DeltaRecorder(Graph& graph) : graph_(graph), previous_(graph.observer()) {
    graph_.set_observer(this);
  }
  ~DeltaRecorder() override { graph_.set_observer(previous_); }
  DeltaRecorder(const DeltaRecorder&) = delete;
  DeltaRecorder& operator=(const DeltaRecorder&) = delete;

  void node_added(ElemId id) override {
    delta.created.push_back({id, ElementKind::Node, graph_.class_of(id), kNoElement, kNoElement});
    if (previous_) previous_->node_added(id);
  }
  void edge_added(ElemId id) override {
    const EdgeRef e{{id}};
    delta.created.push_back(
        {id, ElementKind::Edge, graph_.class_of(id), graph_.source(e).id, graph_.target(e).id});
    if (previous_) previous_->edge_added(id);
  }
  void removing(ElemId id) override {
    delta.deleted.push_back(id);
    if (previous_) previous_->removing(id);
  }
  void attribute_changed(ElemId id, std::size_t slot) override {
    const auto& s = graph_.schema().slots(graph_.class_of(id))[slot];
    delta.changes.push_back({id, s.name, graph_.get_attr(ElementRef{id}, slot)});
    if (previous_) previous_->attribute_changed(id, slot);
  }

  Delta delta;

 private:
  Graph& graph_;
  GraphObserver* previous_;
};

class Interpreter {
 public:
  explicit Interpreter(ExecutionEnv& env) : env_(env) {}

  bool run(const Sequence& s) {
    switch (s.kind) {
      case Sequence::Kind::RuleCall:
        return single(s);
      case Sequence::Kind::AllBracket:
        return all(s);
      case Sequence::Kind::ThenRight:
        run(*s.left);
        return run(*s.right);
      case Sequence::Kind::ThenLeft: {
        const bool r = run(*s.left);
        run(*s.right);
        return r;
      }
      case Sequence::Kind::LazyAnd:
        return run(*s.left) && run(*s.right);
      case Sequence::Kind::LazyOr:
        return run(*s.left) || run(*s.right);
      case Sequence::Kind::Not:
        return !run(*s.left);
      case Sequence::Kind::Star: {
        bool any = false;
        while (run(*s.left)) any = true;
        return any;
      }
    }
    return false;
  }

 private:
  const rules::Rule& begin_call(const Sequence& s) {
    if (env_.step_budget != 0 && env_.steps >= env_.step_budget) {
      throw SequenceError("step budget of " + std::to_string(env_.step_budget) +
                          " rule invocations exhausted at '" + s.rule + "'");
    }
    ++env_.steps;
    return *env_.rules.find_rule(s.rule);
  }

  rules::RuleArgs args(const Sequence& s, const rules::Rule& rule) const {
    rules::RuleArgs a;
    for (std::size_t i = 0; i < s.args.size(); ++i) {
      const Value& v = s.args[i];
      const ValueType& type = rule.vars[i].type;
      if (type.is_scalar() && type.element.kind == ScalarKind::Double &&
          std::holds_alternative<std::int64_t>(v)) {
        a.values.push_back(static_cast<double>(std::get<std::int64_t>(v)));
      } else {
        a.values.push_back(v);
      }
    }
    return a;
  }

  void apply(const rules::Rule& rule, const rules::Match& m) {
    DeltaRecorder recorder(env_.graph);
    rules::RewriteEnv renv{env_.emit};
    auto outcome = rules::apply_rewrite(env_.graph, env_.rules, rule, m, renv);
    ++env_.applied;
    if (env_.trace) env_.trace->rule_applied(rule, m, recorder.delta, outcome.emitted);
  }

  bool single(const Sequence& s) {
    const rules::Rule& rule = begin_call(s);
    rules::MatchOptions opt = env_.match_options;
    opt.limit = 1;
    auto matches = rules::find_matches(env_.graph, env_.rules, rule, args(s, rule), opt);
    if (matches.empty()) {
      if (env_.trace) env_.trace->rule_failed(rule);
      return false;
    }
    apply(rule, matches.front());
    return true;
  }

  bool all(const Sequence& s) {
    const rules::Rule& rule = begin_call(s);
    auto matches = rules::find_matches(env_.graph, env_.rules, rule, args(s, rule), env_.match_options);
    std::size_t applied = 0;
    for (const auto& m : matches) {
      try {
        apply(rule, m);
        ++applied;
      } catch (const StaleMatchError&) {
        // invalidated by an earlier rewrite of this batch
      }
    }
    if (applied == 0 && env_.trace) env_.trace->rule_failed(rule);
    return applied > 0;
  }

  ExecutionEnv& env_;
};

void describe_into(const Sequence& s, std::string& out) {
  out += kind_name(s.kind);
  out += "(";
  if (s.kind == Sequence::Kind::RuleCall || s.kind == Sequence::Kind::AllBracket) {
    out += s.rule;
    for (const Value& v : s.args) {
      out += ", ";
      if (const auto* str = std::get_if<std::string>(&v)) {
        out += "\"" + *str + "\"";
      } else if (const auto* b = std::get_if<bool>(&v)) {
        out += *b ? "true" : "false";
      } else if (const auto* i = std::get_if<std::int64_t>(&v)) {
        out += std::to_string(*i);
      } else if (const auto* d = std::get_if<double>(&v)) {
        std::ostringstream os;
        os << *d;
        out += os.str();
      }
    }
  } else {
    describe_into(*s.left, out);
    if (s.right) {
      out += ", ";
      describe_into(*s.right, out);
    }
  }
  out += ")";
}

void collect_rules(const Sequence& s, std::vector<std::string>& out) {
  if (s.kind == Sequence::Kind::RuleCall || s.kind == Sequence::Kind::AllBracket) {
    out.push_back(s.rule);
    return;
  }
  if (s.left) collect_rules(*s.left, out);
  if (s.right) collect_rules(*s.right, out);
}

void bind_node(const Sequence& s, const rules::RuleSet& rules) {
  if (s.kind != Sequence::Kind::RuleCall && s.kind != Sequence::Kind::AllBracket) {
    if (s.left) bind_node(*s.left, rules);
    if (s.right) bind_node(*s.right, rules);
    return;
  }
  const rules::Rule* rule = rules.find_rule(s.rule);
  const std::string where = "column " + std::to_string(s.column) + ": ";
  if (!rule) throw SequenceError(where + "unknown rule '" + s.rule + "'");
  if (!rule->params.empty()) {
    throw SequenceError(where + "rule '" + s.rule +
                        "' has element parameters and cannot be called from a sequence");
  }
  if (s.args.size() != rule->vars.size()) {
    throw SequenceError(where + "rule '" + s.rule + "' expects " +
                        std::to_string(rule->vars.size()) + " arguments, got " +
                        std::to_string(s.args.size()));
  }
  for (std::size_t i = 0; i < s.args.size(); ++i) {
    const ValueType& type = rule->vars[i].type;
    const Value& v = s.args[i];
    const bool widen = type.is_scalar() && type.element.kind == ScalarKind::Double &&
                       std::holds_alternative<std::int64_t>(v);
    if (!widen && !conforms(rules.schema(), type, v)) {
      throw SequenceError(where + "argument " + std::to_string(i + 1) + " of '" + s.rule +
                          "' must be of type " + type.to_string());
    }
  }
}

}  // namespace

std::unique_ptr<Sequence> parse_sequence(std::string_view text, const std::string& file) {
  return SequenceParser(text, file).run();
}

std::string describe(const Sequence& seq) {
  std::string out;
  describe_into(seq, out);
  return out;
}

std::vector<std::string> referenced_rules(const Sequence& seq) {
  std::vector<std::string> out;
  collect_rules(seq, out);
  return out;
}

void bind(const Sequence& seq, const rules::RuleSet& rules) { bind_node(seq, rules); }

bool execute(ExecutionEnv& env, const Sequence& seq) {
  bind(seq, env.rules);
  if (env.trace) env.trace->sequence_enter(seq);
  const bool result = Interpreter(env).run(seq);
  if (env.trace) env.trace->sequence_exit(seq, result);
  return result;
}

void replay(Graph& graph, const Delta& delta, std::unordered_map<ElemId, ElemId>& ids) {
  auto mapped = [&](ElemId id) {
    auto it = ids.find(id);
    if (it == ids.end()) throw GraphError("replay: unknown element " + std::to_string(id));
    return it->second;
  };
  for (const auto& c : delta.created) {
    if (c.kind == ElementKind::Node) {
      ids[c.id] = graph.add_node(c.cls).id;
    } else {
      ids[c.id] = graph.add_edge(c.cls, NodeRef{{mapped(c.source)}}, NodeRef{{mapped(c.target)}}).id;
    }
  }
  for (const auto& ch : delta.changes) graph.set_attr(ElementRef{mapped(ch.id)}, ch.name, ch.value);
  for (ElemId id : delta.deleted) {
    const ElemId local = mapped(id);
    if (!graph.is_live(local)) continue;
    if (graph.is_node(local)) {
      graph.remove_node(NodeRef{{local}});
    } else {
      graph.remove_edge(EdgeRef{{local}});
    }
  }
}

}  // namespace grrw::seq
