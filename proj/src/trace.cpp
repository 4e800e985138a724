#include "grrw/trace.hpp"

#include <json.hpp>

#include <cmath>

#include "grrw/error.hpp"
#include "grrw/rules/ast.hpp"

namespace grrw::trace {

using json = nlohmann::json;

namespace {

const char* kind_name(Event::Kind kind) {
  switch (kind) {
    case Event::Kind::SequenceEnter: return "sequence-enter";
    case Event::Kind::RuleApplied: return "rule-applied";
    case Event::Kind::RuleFailed: return "rule-failed";
    case Event::Kind::SequenceExit: return "sequence-exit";
  }
  return "";
}

// --- values --------------------------------------------------------------

json scalar_json(const Schema& schema, const Scalar& v) {
  return std::visit(
      [&](const auto& x) -> json {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, EnumValue>) {
          const EnumDef* def = schema.find_enum(x.enum_name);
          const std::string* item = def ? def->item_named(x.value) : nullptr;
          if (!item) throw Error("enum value " + std::to_string(x.value) + " of '" + x.enum_name +
                                 "' has no item");
          return *item;
        } else if constexpr (std::is_same_v<T, double>) {
          if (!std::isfinite(x)) throw Error("non-finite double cannot be traced");
          return x;
        } else {
          return x;
        }
      },
      v);
}

json value_json(const Schema& schema, const Value& v) {
  return std::visit(
      [&](const auto& x) -> json {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, SetValue> || std::is_same_v<T, ArrayValue>) {
          json out = json::array();
          for (const Scalar& s : x) out.push_back(scalar_json(schema, s));
          return out;
        } else if constexpr (std::is_same_v<T, MapValue>) {
          json out = json::array();
          for (const auto& [k, m] : x) {
            out.push_back(json::array({scalar_json(schema, k), scalar_json(schema, m)}));
          }
          return out;
        } else {
          return scalar_json(schema, Scalar{x});
        }
      },
      v);
}

// Thrown while decoding one record; the reader adds file and line.
struct Bad {
  std::string message;
};

Scalar scalar_from(const Schema& schema, const ScalarType& type, const json& j) {
  switch (type.kind) {
    case ScalarKind::Boolean:
      if (j.is_boolean()) return j.get<bool>();
      break;
    case ScalarKind::Integer:
      if (j.is_number_integer()) return j.get<std::int64_t>();
      break;
    case ScalarKind::Double:
      if (j.is_number()) return j.get<double>();
      break;
    case ScalarKind::String:
      if (j.is_string()) return j.get<std::string>();
      break;
    case ScalarKind::Enum:
      if (j.is_string()) {
        const EnumDef* def = schema.find_enum(type.enum_name);
        if (def) {
          if (auto v = def->value_of(j.get<std::string>())) return EnumValue{type.enum_name, *v};
        }
        throw Bad{"'" + j.get<std::string>() + "' is not an item of enum '" + type.enum_name + "'"};
      }
      break;
  }
  throw Bad{"value " + j.dump() + " does not fit the attribute type"};
}

Value value_from(const Schema& schema, const ValueType& type, const json& j) {
  if (type.container == ContainerKind::None) {
    return std::visit([](auto&& s) -> Value { return s; }, scalar_from(schema, type.element, j));
  }
  if (!j.is_array()) throw Bad{"container value must be an array"};
  switch (type.container) {
    case ContainerKind::Set: {
      SetValue out;
      for (const json& e : j) out.insert(scalar_from(schema, type.element, e));
      return out;
    }
    case ContainerKind::Array: {
      ArrayValue out;
      for (const json& e : j) out.push_back(scalar_from(schema, type.element, e));
      return out;
    }
    case ContainerKind::Map: {
      MapValue out;
      for (const json& e : j) {
        if (!e.is_array() || e.size() != 2) throw Bad{"map entry must be a [key, value] pair"};
        out.emplace(scalar_from(schema, type.key, e[0]), scalar_from(schema, type.element, e[1]));
      }
      return out;
    }
    case ContainerKind::None: break;
  }
  return {};
}

// --- records -------------------------------------------------------------

json attrs_json(const Graph& g, ElemId id) {
  json out = json::object();
  const auto slots = g.schema().slots(g.class_of(id));
  const auto values = g.attributes(ElementRef{id});
  for (std::size_t i = 0; i < slots.size(); ++i) {
    out[slots[i].name] = value_json(g.schema(), values[i]);
  }
  return out;
}

json snapshot_json(const Graph& g) {
  const Schema& schema = g.schema();
  json classes = json::array();
  for (const ClassInfo& c : schema.classes()) {
    json supers = json::array();
    for (ClassId s : c.supers) supers.push_back(schema.info(s).name);
    json entry{{"name", c.name},
               {"kind", std::string(to_string(c.kind))},
               {"abstract", c.is_abstract},
               {"supers", supers}};
    if (c.kind == ElementKind::Edge) entry["containment"] = c.containment;
    classes.push_back(std::move(entry));
  }
  json nodes = json::array();
  for (ElemId id : g.nodes()) {
    nodes.push_back({{"id", id}, {"class", g.class_name(id)}, {"attrs", attrs_json(g, id)}});
  }
  json edges = json::array();
  for (ElemId id : g.edges()) {
    edges.push_back({{"id", id},
                     {"class", g.class_name(id)},
                     {"source", g.source(EdgeRef{{id}}).id},
                     {"target", g.target(EdgeRef{{id}}).id},
                     {"attrs", attrs_json(g, id)}});
  }
  return {{"kind", "snapshot"},
          {"ordinal", 0},
          {"next_id", g.next_id()},
          {"schema", {{"classes", classes}}},
          {"nodes", nodes},
          {"edges", edges}};
}

json delta_json(const Graph& g, const seq::Delta& delta) {
  const Schema& schema = g.schema();
  json created = json::array();
  for (const auto& c : delta.created) {
    json entry{{"id", c.id}, {"class", schema.info(c.cls).name}};
    if (c.kind == ElementKind::Edge) {
      entry["source"] = c.source;
      entry["target"] = c.target;
    }
    created.push_back(std::move(entry));
  }
  json changes = json::array();
  for (const auto& c : delta.changes) {
    changes.push_back({{"id", c.id}, {"attr", c.name}, {"value", value_json(schema, c.value)}});
  }
  return {{"created", created}, {"changes", changes}, {"deleted", delta.deleted}};
}

// Field access with record-level error messages.
const json& field(const json& j, const char* name) {
  auto it = j.find(name);
  if (it == j.end()) throw Bad{std::string("missing field '") + name + "'"};
  return *it;
}
template <class T>
T get(const json& j, const char* name) {
  const json& f = field(j, name);
  try {
    return f.get<T>();
  } catch (const json::exception&) {
    throw Bad{std::string("field '") + name + "' has the wrong type"};
  }
}

ClassId class_named(const Schema& schema, ElementKind kind, const std::string& name) {
  auto cls = schema.find_class(kind, name);
  if (!cls) throw Bad{"unknown " + std::string(to_string(kind)) + " class '" + name + "'"};
  return *cls;
}

// Attribute types are looked up on the element's class; elements are known
// from the snapshot or an earlier `created` entry.
using ClassTable = std::unordered_map<ElemId, ClassId>;

ClassId class_of(const ClassTable& classes, ElemId id) {
  auto it = classes.find(id);
  if (it == classes.end()) throw Bad{"unknown element id " + std::to_string(id)};
  return it->second;
}

void read_attrs(Graph& g, ElemId id, const json& attrs) {
  if (!attrs.is_object()) throw Bad{"field 'attrs' must be an object"};
  const Schema& schema = g.schema();
  const ClassId cls = g.class_of(id);
  for (const auto& [name, value] : attrs.items()) {
    auto slot = schema.slot_index(cls, name);
    if (!slot) throw Bad{"class '" + schema.info(cls).name + "' has no attribute '" + name + "'"};
    g.set_attr(ElementRef{id}, *slot, value_from(schema, schema.slots(cls)[*slot].type, value));
  }
}

// Fresh elements get consecutive ids; gaps left by deleted elements are
// reproduced by creating and dropping a placeholder node.
void advance_to(Graph& g, ElemId id) {
  if (g.next_id() > id) throw Bad{"element ids must be increasing, got " + std::to_string(id)};
  while (g.next_id() < id) g.remove_node(g.add_node(Schema::node_root()));
}

std::unique_ptr<Graph> read_snapshot(const json& j, std::shared_ptr<const Schema> schema,
                                     ClassTable& classes) {
  auto g = std::make_unique<Graph>(std::move(schema));
  const Schema& s = g->schema();
  struct Pending {
    ElemId id;
    const json* record;
  };
  std::vector<Pending> elements;
  for (const json& n : field(j, "nodes")) elements.push_back({get<ElemId>(n, "id"), &n});
  for (const json& e : field(j, "edges")) elements.push_back({get<ElemId>(e, "id"), &e});
  std::sort(elements.begin(), elements.end(),
            [](const Pending& a, const Pending& b) { return a.id < b.id; });
  for (const Pending& p : elements) {
    const json& r = *p.record;
    advance_to(*g, p.id);
    const bool edge = r.contains("source");
    const ClassId cls = class_named(s, edge ? ElementKind::Edge : ElementKind::Node,
                                    get<std::string>(r, "class"));
    try {
      if (edge) {
        g->add_edge(cls, NodeRef{{get<ElemId>(r, "source")}}, NodeRef{{get<ElemId>(r, "target")}});
      } else {
        g->add_node(cls);
      }
    } catch (const GraphError& e) {
      throw Bad{e.what()};
    }
    classes[p.id] = cls;
    read_attrs(*g, p.id, field(r, "attrs"));
  }
  advance_to(*g, get<ElemId>(j, "next_id"));
  return g;
}

seq::Delta read_delta(const Schema& schema, const json& j, ClassTable& classes) {
  seq::Delta d;
  for (const json& c : field(j, "created")) {
    seq::Delta::Created entry;
    entry.id = get<ElemId>(c, "id");
    const bool edge = c.contains("source");
    entry.kind = edge ? ElementKind::Edge : ElementKind::Node;
    entry.cls = class_named(schema, entry.kind, get<std::string>(c, "class"));
    if (edge) {
      entry.source = get<ElemId>(c, "source");
      entry.target = get<ElemId>(c, "target");
    }
    classes[entry.id] = entry.cls;
    d.created.push_back(entry);
  }
  for (const json& c : field(j, "changes")) {
    seq::Delta::AttributeChange entry;
    entry.id = get<ElemId>(c, "id");
    entry.name = get<std::string>(c, "attr");
    const ClassId cls = class_of(classes, entry.id);
    auto slot = schema.slot_index(cls, entry.name);
    if (!slot) {
      throw Bad{"class '" + schema.info(cls).name + "' has no attribute '" + entry.name + "'"};
    }
    entry.value = value_from(schema, schema.slots(cls)[*slot].type, field(c, "value"));
    d.changes.push_back(std::move(entry));
  }
  d.deleted = get<std::vector<ElemId>>(j, "deleted");
  return d;
}

}  // namespace

// --- writer --------------------------------------------------------------

TraceWriter::TraceWriter(std::ostream& out, const Graph& graph) : out_(out), graph_(graph) {
  write(snapshot_json(graph_).dump());
}

void TraceWriter::write(const std::string& line) {
  out_ << line << '\n';
  ++ordinal_;
}

void TraceWriter::sequence_enter(const seq::Sequence& seq) {
  write(json{{"kind", kind_name(Event::Kind::SequenceEnter)},
             {"ordinal", ordinal_},
             {"sequence", seq::describe(seq)}}
            .dump());
}

void TraceWriter::rule_applied(const rules::Rule& rule, const rules::Match& match,
                               const seq::Delta& delta, const std::string& emitted) {
  json bindings = json::array();
  const auto& elems = rule.pattern.elems;
  for (std::size_t i = 0; i < elems.size() && i < match.binding.size(); ++i) {
    const ElemId id = match.binding[i];
    if (id == kNoElement || elems[i].name.starts_with('$') || !graph_.is_live(id)) continue;
    bindings.push_back({{"name", elems[i].name}, {"id", id}, {"class", graph_.class_name(id)}});
  }
  write(json{{"kind", kind_name(Event::Kind::RuleApplied)},
             {"ordinal", ordinal_},
             {"rule", rule.name},
             {"bindings", bindings},
             {"delta", delta_json(graph_, delta)},
             {"emitted", emitted}}
            .dump());
}

void TraceWriter::rule_failed(const rules::Rule& rule) {
  write(json{{"kind", kind_name(Event::Kind::RuleFailed)}, {"ordinal", ordinal_}, {"rule", rule.name}}
            .dump());
}

void TraceWriter::sequence_exit(const seq::Sequence& seq, bool result) {
  write(json{{"kind", kind_name(Event::Kind::SequenceExit)},
             {"ordinal", ordinal_},
             {"sequence", seq::describe(seq)},
             {"result", result}}
            .dump());
}

// --- reader --------------------------------------------------------------

Trace read_trace(std::istream& in, std::shared_ptr<const Schema> schema, const std::string& file) {
  const std::string name = file.empty() ? "<trace>" : file;
  Trace trace;
  ClassTable classes;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      json j;
      try {
        j = json::parse(line);
      } catch (const json::parse_error& e) {
        throw Bad{std::string("invalid JSON: ") + e.what()};
      }
      if (!j.is_object()) throw Bad{"record must be an object"};
      const auto kind = get<std::string>(j, "kind");
      const auto ordinal = get<std::size_t>(j, "ordinal");
      const std::size_t expected = trace.snapshot ? trace.events.size() + 1 : 0;
      if (ordinal != expected) {
        throw Bad{"ordinal " + std::to_string(ordinal) + ", expected " + std::to_string(expected)};
      }
      if (!trace.snapshot) {
        if (kind != "snapshot") throw Bad{"trace must start with a snapshot record"};
        trace.snapshot = read_snapshot(j, schema, classes);
        continue;
      }
      Event ev;
      ev.ordinal = ordinal;
      if (kind == kind_name(Event::Kind::SequenceEnter)) {
        ev.kind = Event::Kind::SequenceEnter;
        ev.sequence = get<std::string>(j, "sequence");
      } else if (kind == kind_name(Event::Kind::RuleApplied)) {
        ev.kind = Event::Kind::RuleApplied;
        ev.rule = get<std::string>(j, "rule");
        for (const json& b : field(j, "bindings")) {
          ev.bindings.push_back(
              {get<std::string>(b, "name"), get<ElemId>(b, "id"), get<std::string>(b, "class")});
        }
        ev.delta = read_delta(*schema, field(j, "delta"), classes);
        ev.emitted = get<std::string>(j, "emitted");
      } else if (kind == kind_name(Event::Kind::RuleFailed)) {
        ev.kind = Event::Kind::RuleFailed;
        ev.rule = get<std::string>(j, "rule");
      } else if (kind == kind_name(Event::Kind::SequenceExit)) {
        ev.kind = Event::Kind::SequenceExit;
        ev.sequence = get<std::string>(j, "sequence");
        ev.result = get<bool>(j, "result");
      } else {
        throw Bad{"unknown record kind '" + kind + "'"};
      }
      trace.events.push_back(std::move(ev));
    } catch (const Bad& b) {
      throw ParseError(name, line_no, 1, b.message);
    } catch (const Error& e) {
      throw ParseError(name, line_no, 1, e.what());
    }
  }
  if (!trace.snapshot) throw ParseError(name, line_no, 1, "trace has no snapshot record");
  return trace;
}

Graph replay(const Trace& trace, std::optional<std::size_t> upto) {
  if (!trace.snapshot) throw Error("trace has no snapshot");
  const Graph& snap = *trace.snapshot;
  Graph g(snap.schema_ptr());
  // Rebuild the snapshot with its ids.
  std::vector<ElemId> ids = snap.nodes();
  const auto edges = snap.edges();
  ids.insert(ids.end(), edges.begin(), edges.end());
  std::sort(ids.begin(), ids.end());
  for (ElemId id : ids) {
    while (g.next_id() < id) g.remove_node(g.add_node(Schema::node_root()));
    if (snap.is_node(id)) {
      g.add_node(snap.class_of(id));
    } else {
      g.add_edge(snap.class_of(id), snap.source(EdgeRef{{id}}), snap.target(EdgeRef{{id}}));
    }
    const auto values = snap.attributes(ElementRef{id});
    for (std::size_t i = 0; i < values.size(); ++i) g.set_attr(ElementRef{id}, i, values[i]);
  }
  while (g.next_id() < snap.next_id()) g.remove_node(g.add_node(Schema::node_root()));

  std::unordered_map<ElemId, ElemId> map;
  for (ElemId id : ids) map.emplace(id, id);
  const std::size_t n = std::min(upto.value_or(trace.events.size()), trace.events.size());
  for (std::size_t i = 0; i < n; ++i) {
    const Event& ev = trace.events[i];
    if (ev.kind != Event::Kind::RuleApplied) continue;
    // Created elements get their recorded ids; the rest of the delta is
    // applied by seq::replay.
    for (const auto& c : ev.delta.created) {
      if (c.id < g.next_id()) {
        throw Error("event " + std::to_string(ev.ordinal) + " creates already used id " +
                    std::to_string(c.id));
      }
      while (g.next_id() < c.id) g.remove_node(g.add_node(Schema::node_root()));
      if (c.kind == ElementKind::Node) {
        g.add_node(c.cls);
      } else {
        g.add_edge(c.cls, NodeRef{{c.source}}, NodeRef{{c.target}});
      }
      map.emplace(c.id, c.id);
    }
    seq::Delta step = ev.delta;
    step.created.clear();
    seq::replay(g, step, map);
  }
  return g;
}

}  // namespace grrw::trace
