#include "grrw/xmi.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <sstream>
#include <unordered_map>

namespace grrw {

namespace {

using Namespaces = std::vector<std::map<std::string, std::string, std::less<>>>;

struct PendingRef {
  NodeRef owner;
  ClassId edge_class;
  std::vector<std::string> tokens;
  std::size_t line;
};

std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream in{std::string(s)};
  for (std::string tok; in >> tok;) out.push_back(tok);
  return out;
}

// "/0/@a.1/@b" and "//@a.1/@b" both become "/0/@a.1/@b.0".
std::string canonical_path(std::string_view p) {
  std::string s(p);
  if (s == "/" || s == "//") return "/0";
  if (s.starts_with("//")) s = "/0" + s.substr(1);
  std::string out;
  std::size_t pos = 0;
  while (pos < s.size()) {
    auto next = s.find('/', pos + 1);
    std::string seg = s.substr(pos, next == std::string::npos ? std::string::npos : next - pos);
    if (seg.starts_with("/@") && seg.find('.') == std::string::npos) seg += ".0";
    out += seg;
    if (next == std::string::npos) break;
    pos = next;
  }
  return out;
}

class XmiImporter {
 public:
  XmiImporter(Graph& graph, const xml::Document& doc, ImportReport* report)
      : g_(graph), s_(graph.schema()), doc_(doc), report_(report) {}

  void run() {
    const auto& root = doc_.root;
    Namespaces ns;
    push_scope(ns, root);
    if (root.local_name() == "XMI" && lookup_ns(ns, root.prefix()) == kXmiNamespace) {
      std::size_t i = 0;
      for (const auto& child : root.children) {
        push_scope(ns, child);
        const ClassId cls = resolve_type(ns, child);
        import_element(child, g_.add_node(cls), cls, "/" + std::to_string(i++), ns);
        ns.pop_back();
      }
    } else {
      const ClassId cls = resolve_type(ns, root);
      import_element(root, g_.add_node(cls), cls, "/0", ns);
    }
    for (const auto& ref : pending_) resolve(ref);
  }

 private:
  std::string where(std::size_t line) const {
    return (doc_.source.empty() ? std::string("<input>") : doc_.source) + ":" +
           std::to_string(line) + ": ";
  }

  void warn(std::size_t line, const std::string& msg) {
    if (report_) report_->warnings.push_back(where(line) + msg);
  }

  static void push_scope(Namespaces& ns, const xml::Element& el) {
    std::map<std::string, std::string, std::less<>> frame;
    for (const auto& [k, v] : el.attributes) {
      if (k == "xmlns") {
        frame[""] = v;
      } else if (k.starts_with("xmlns:")) {
        frame[k.substr(6)] = v;
      }
    }
    ns.push_back(std::move(frame));
  }

  static std::string_view lookup_ns(const Namespaces& ns, std::string_view prefix) {
    for (auto it = ns.rbegin(); it != ns.rend(); ++it) {
      if (auto f = it->find(prefix); f != it->end()) return f->second;
    }
    return {};
  }

  // `xsi:type` or the tag, "prefix:Local" -> class of the package bound to
  // the prefix's namespace URI.
  ClassId resolve_type(const Namespaces& ns, const xml::Element& el) {
    std::string_view qname = el.name;
    if (const auto* t = el.attribute("xsi:type")) qname = *t;
    auto colon = qname.find(':');
    const std::string_view prefix = colon == std::string_view::npos ? "" : qname.substr(0, colon);
    const std::string_view local = colon == std::string_view::npos ? qname : qname.substr(colon + 1);
    const auto uri = lookup_ns(ns, prefix);
    const auto* pkg = s_.package_by_uri(uri);
    if (!pkg) {
      throw ImportError(where(el.line) + "namespace '" + std::string(uri) + "' of '" +
                        std::string(qname) + "' matches no imported package");
    }
    const std::string name = pkg->prefix + "_" + std::string(local);
    auto cls = s_.find_class(ElementKind::Node, name);
    if (!cls) throw ImportError(where(el.line) + "unknown type '" + name + "'");
    if (s_.info(*cls).is_abstract) {
      throw ImportError(where(el.line) + "element of abstract type '" + name + "'");
    }
    return *cls;
  }

  // Edge class `<Ancestor>_<feature>` visible on `cls`, most derived first.
  std::optional<ClassId> feature_edge(ClassId cls, std::string_view feature) const {
    for (ClassId a : s_.ancestors(cls)) {
      if (auto e = s_.find_class(ElementKind::Edge, s_.info(a).name + "_" + std::string(feature))) {
        return e;
      }
    }
    return std::nullopt;
  }

  Value parse_value(const ValueType& type, std::string_view text, std::size_t line,
                    std::string_view feature) const {
    try {
      return parse_attribute_text(s_, type, text);
    } catch (const GraphError& e) {
      throw ImportError(where(line) + "attribute '" + std::string(feature) + "': " + e.what());
    }
  }

  void check_target(ClassId edge, ClassId target, std::size_t line) const {
    const auto& info = s_.info(edge);
    if (info.target && !s_.is_subtype_of(target, *info.target)) {
      throw ImportError(where(line) + "'" + info.name + "' cannot point at '" +
                        s_.info(target).name + "'");
    }
  }

  // Fills an already created node from its element; recurses into
  // containment children in document order.
  void import_element(const xml::Element& el, NodeRef node, ClassId cls, const std::string& path,
                      Namespaces& ns) {
    by_path_.emplace(path, node);
    if (const auto* id = el.attribute("xmi:id")) {
      if (!by_id_.emplace(*id, node).second) {
        throw ImportError(where(el.line) + "duplicate xmi:id '" + *id + "'");
      }
      g_.set_name(node, *id);
    } else {
      g_.set_name(node, path);
    }

    for (const auto& [key, value] : el.attributes) {
      if (key.starts_with("xmlns") || key.starts_with("xmi:") || key.starts_with("xsi:")) continue;
      if (auto slot = s_.slot_index(cls, key)) {
        g_.set_attr(node, *slot, parse_value(s_.slots(cls)[*slot].type, value, el.line, key));
      } else if (auto edge = feature_edge(cls, key); edge && !s_.info(*edge).containment) {
        pending_.push_back({node, *edge, split_ws(value), el.line});
      } else {
        warn(el.line, "unknown attribute '" + key + "' on '" + s_.info(cls).name + "' ignored");
      }
    }

    std::map<std::string, std::size_t, std::less<>> counters;
    for (const auto& child : el.children) {
      const std::string feature(child.local_name());
      if (auto slot = s_.slot_index(cls, feature)) {
        append_attribute(node, *slot, child);
        continue;
      }
      auto edge = feature_edge(cls, feature);
      if (!edge) {
        throw ImportError(where(child.line) + "'" + s_.info(cls).name + "' has no feature '" +
                          feature + "'");
      }
      const auto& info = s_.info(*edge);
      if (!info.containment) {
        const auto* href = child.attribute("href");
        if (!href) {
          throw ImportError(where(child.line) + "reference '" + feature + "' without href");
        }
        pending_.push_back({node, *edge, {*href}, child.line});
        continue;
      }
      push_scope(ns, child);
      ClassId child_cls;
      if (child.attribute("xsi:type")) {
        child_cls = resolve_type(ns, child);
      } else if (info.target && !s_.info(*info.target).is_abstract) {
        child_cls = *info.target;
      } else {
        throw ImportError(where(child.line) + "'" + feature + "' needs an xsi:type");
      }
      check_target(*edge, child_cls, child.line);
      const std::string child_path =
          path + "/@" + feature + "." + std::to_string(counters[feature]++);
      // The containment edge directly follows the child node, so creation
      // order is document order.
      const NodeRef child_node = g_.add_node(child_cls);
      g_.add_edge(*edge, node, child_node);
      import_element(child, child_node, child_cls, child_path, ns);
      ns.pop_back();
    }
  }

  // Many-valued attributes may be serialized as repeated child elements.
  void append_attribute(NodeRef node, std::size_t slot, const xml::Element& child) {
    const auto& type = s_.slots(g_.class_of(node.id))[slot].type;
    if (type.is_scalar()) {
      g_.set_attr(node, slot, parse_value(type, child.text, child.line, child.local_name()));
      return;
    }
    if (type.container == ContainerKind::Map) {
      throw ImportError(where(child.line) + "map attribute '" + std::string(child.local_name()) +
                        "' cannot be given as child elements");
    }
    const Value item = parse_value(ValueType{ContainerKind::None, type.element, {}}, child.text,
                                   child.line, child.local_name());
    const Scalar scalar = std::visit(
        [](const auto& v) -> Scalar {
          if constexpr (std::is_constructible_v<Scalar, decltype(v)>) {
            return Scalar(v);
          } else {
            return Scalar(false);  // unreachable: scalar types parse to scalars
          }
        },
        item);
    Value current = g_.get_attr(node, slot);
    if (auto* arr = std::get_if<ArrayValue>(&current)) {
      arr->push_back(scalar);
    } else {
      std::get<SetValue>(current).insert(scalar);
    }
    g_.set_attr(node, slot, std::move(current));
  }

  void resolve(const PendingRef& ref) {
    for (const auto& raw : ref.tokens) {
      std::string_view tok = raw;
      if (auto hash = tok.find('#'); hash != std::string_view::npos) tok = tok.substr(hash + 1);
      NodeRef target;
      if (auto it = by_id_.find(std::string(tok)); it != by_id_.end()) {
        target = it->second;
      } else if (!tok.empty() && tok[0] == '/') {
        if (auto p = by_path_.find(canonical_path(tok)); p != by_path_.end()) target = p->second;
      }
      if (!target) throw ImportError(where(ref.line) + "unresolvable reference '" + raw + "'");
      check_target(ref.edge_class, g_.class_of(target.id), ref.line);
      g_.add_edge(ref.edge_class, ref.owner, target);
    }
  }

  Graph& g_;
  const Schema& s_;
  const xml::Document& doc_;
  ImportReport* report_;
  std::unordered_map<std::string, NodeRef> by_id_;
  std::unordered_map<std::string, NodeRef> by_path_;
  std::vector<PendingRef> pending_;
};

// Ids of states/transitions of the machine, in creation order.
std::vector<ElemId> contained(const Graph& g, ElemId machine, ClassId edge, ClassId cls) {
  std::vector<ElemId> out;
  for (ElemId e : g.outgoing(NodeRef{{machine}}, edge)) {
    const ElemId n = g.target(EdgeRef{{e}}).id;
    if (g.schema().is_subtype_of(g.class_of(n), cls) &&
        std::find(out.begin(), out.end(), n) == out.end()) {
      out.push_back(n);
    }
  }
  return out;
}

std::string string_attr(const Graph& g, ElemId id, std::string_view name) {
  const auto& v = g.get_attr(ElementRef{id}, name);
  if (const auto* s = std::get_if<std::string>(&v)) return *s;
  return to_display(g.schema(), v);
}

ElemId single_endpoint(const Graph& g, ElemId transition, ClassId edge, const char* what) {
  auto edges = g.outgoing(NodeRef{{transition}}, edge);
  if (edges.size() != 1) {
    throw ExportError("transition #" + std::to_string(transition) + " has " +
                      std::to_string(edges.size()) + " " + what + " states");
  }
  return g.target(EdgeRef{{edges.front()}}).id;
}

}  // namespace

void import_xmi(Graph& graph, const xml::Document& doc, ImportReport* report) {
  XmiImporter(graph, doc, report).run();
}

Graph import_xmi(const xml::Document& doc, std::shared_ptr<const Schema> schema,
                 ImportReport* report) {
  Graph graph(std::move(schema));
  import_xmi(graph, doc, report);
  return graph;
}

void export_state_machine_xmi(const Graph& graph, std::ostream& out) {
  const Schema& s = graph.schema();
  auto need = [&](ElementKind kind, const char* name) {
    auto c = s.find_class(kind, name);
    if (!c) throw ExportError(std::string("schema lacks class '") + name + "'");
    return *c;
  };
  const ClassId machine_cls = need(ElementKind::Node, "sm_StateMachine");
  const ClassId state_cls = need(ElementKind::Node, "sm_State");
  const ClassId transition_cls = need(ElementKind::Node, "sm_Transition");
  const ClassId states_edge = need(ElementKind::Edge, "sm_StateMachine_states");
  const ClassId transitions_edge = need(ElementKind::Edge, "sm_StateMachine_transitions");
  const ClassId source_edge = need(ElementKind::Edge, "sm_Transition_source");
  const ClassId target_edge = need(ElementKind::Edge, "sm_Transition_target");

  const auto machines = graph.nodes_of_type(machine_cls);
  if (machines.size() != 1) {
    throw ExportError("expected exactly one sm_StateMachine, found " +
                      std::to_string(machines.size()));
  }
  const ElemId machine = machines.front();
  std::string ns_uri = "http://www.example.org/statemachine";
  std::string ns_prefix = "sm";
  for (const auto& p : s.packages()) {
    if (p.prefix == "sm") {
      ns_uri = p.ns_uri;
      if (!p.ns_prefix.empty()) ns_prefix = p.ns_prefix;
    }
  }

  // Pass 1: ids.
  const auto states = contained(graph, machine, states_edge, state_cls);
  const auto transitions = contained(graph, machine, transitions_edge, transition_cls);
  std::unordered_map<ElemId, std::string> ids;
  for (std::size_t i = 0; i < states.size(); ++i) ids[states[i]] = "/0/@states." + std::to_string(i);
  auto id_of = [&](ElemId state, ElemId transition) {
    auto it = ids.find(state);
    if (it == ids.end()) {
      throw ExportError("transition #" + std::to_string(transition) +
                        " refers to a state outside the machine");
    }
    return it->second;
  };

  // Pass 2: prefix.
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<" << ns_prefix << ":StateMachine xmi:version=\"2.0\" xmlns:xmi=\"" << kXmiNamespace
      << "\" xmlns:xsi=\"" << kXsiNamespace << "\" xmlns:" << ns_prefix << "=\""
      << xml::escape(ns_uri) << "\">\n";
  // Pass 3: states.
  for (ElemId st : states) {
    out << "  <states name=\"" << xml::escape(string_attr(graph, st, "name")) << "\"/>\n";
  }
  // Pass 4: transitions.
  for (ElemId t : transitions) {
    const ElemId src = single_endpoint(graph, t, source_edge, "source");
    const ElemId tgt = single_endpoint(graph, t, target_edge, "target");
    out << "  <transitions trigger=\"" << xml::escape(string_attr(graph, t, "trigger"))
        << "\" action=\"" << xml::escape(string_attr(graph, t, "action")) << "\" source=\""
        << id_of(src, t) << "\" target=\"" << id_of(tgt, t) << "\"/>\n";
  }
  // Pass 5: suffix.
  out << "</" << ns_prefix << ":StateMachine>\n";
}

std::string export_state_machine_xmi(const Graph& graph) {
  std::ostringstream out;
  export_state_machine_xmi(graph, out);
  return out.str();
}


namespace {

class XmiWriter {
 public:
  XmiWriter(const Graph& graph, std::ostream& out) : g_(graph), s_(graph.schema()), out_(out) {}

  void run(NodeRef root) {
    assign_paths(root.id, "/");
    out_ << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<" << qualified(g_.class_of(root.id))
         << " xmi:version=\"2.0\" xmlns:xmi=\"" << kXmiNamespace << "\" xmlns:xsi=\""
         << kXsiNamespace << "\"";
    for (const auto& p : s_.packages()) {
      if (p.ns_uri.empty()) continue;
      out_ << " xmlns:" << ns_prefix(p) << "=\"" << xml::escape(p.ns_uri) << "\"";
    }
    element_body(root.id, 0);
    out_ << "</" << qualified(g_.class_of(root.id)) << ">\n";
  }

 private:
  static const std::string& ns_prefix(const PackageInfo& p) {
    return p.ns_prefix.empty() ? p.prefix : p.ns_prefix;
  }

  // "java_Class" -> "java:Class" (longest matching package prefix).
  std::string qualified(ClassId cls) const {
    const std::string& name = s_.info(cls).name;
    const PackageInfo* best = nullptr;
    for (const auto& p : s_.packages()) {
      if (name.starts_with(p.prefix + "_") && (!best || p.prefix.size() > best->prefix.size())) {
        best = &p;
      }
    }
    if (!best) throw ExportError("class '" + name + "' belongs to no package");
    return ns_prefix(*best) + ":" + name.substr(best->prefix.size() + 1);
  }

  // Ecore feature behind an edge class `<Owner>_<feature>`; nullopt for
  // edge classes that do not come from a reference.
  std::optional<std::string> feature(ClassId edge_cls) const {
    const ClassInfo& info = s_.info(edge_cls);
    if (!info.source) return std::nullopt;
    const std::string owner = s_.info(*info.source).name + "_";
    if (!info.name.starts_with(owner)) return std::nullopt;
    return info.name.substr(owner.size());
  }

  std::vector<std::pair<std::string, ElemId>> children(ElemId node) const {
    std::vector<std::pair<std::string, ElemId>> out;
    for (ElemId e : g_.outgoing(NodeRef{{node}})) {
      const ClassId cls = g_.class_of(e);
      if (!s_.info(cls).containment) continue;
      if (auto f = feature(cls)) out.emplace_back(*f, g_.target(EdgeRef{{e}}).id);
    }
    return out;
  }

  void assign_paths(ElemId node, const std::string& path) {
    if (!paths_.emplace(node, path).second) {
      throw ExportError("element #" + std::to_string(node) + " is contained twice");
    }
    std::map<std::string, std::size_t> counters;
    for (const auto& [f, child] : children(node)) {
      assign_paths(child, (path == "/" ? "/" : path) + "/@" + f + "." +
                              std::to_string(counters[f]++));
    }
  }

  // Attributes, cross-references and children of an element whose start tag
  // has been written up to the attributes.
  void element_body(ElemId node, std::size_t depth) {
    const ClassId cls = g_.class_of(node);
    std::vector<std::pair<std::string, std::string>> items;  // many-valued attributes
    for (std::size_t i = 0; i < s_.slots(cls).size(); ++i) {
      const AttributeSlot& slot = s_.slots(cls)[i];
      const Value& v = g_.get_attr(ElementRef{node}, i);
      if (v == default_value(s_, slot.type)) continue;
      if (slot.type.is_scalar()) {
        out_ << " " << slot.name << "=\"" << xml::escape(attribute_text(s_, v)) << "\"";
      } else if (const auto* arr = std::get_if<ArrayValue>(&v)) {
        for (const auto& x : *arr) items.emplace_back(slot.name, scalar_text(x));
      } else if (const auto* set = std::get_if<SetValue>(&v)) {
        for (const auto& x : *set) items.emplace_back(slot.name, scalar_text(x));
      } else {
        throw ExportError("map attribute '" + slot.name + "' has no XMI form");
      }
    }
    std::vector<std::string> ref_order;
    std::map<std::string, std::string> refs;
    for (ElemId e : g_.outgoing(NodeRef{{node}})) {
      const ClassId ecls = g_.class_of(e);
      if (s_.info(ecls).containment) continue;
      auto f = feature(ecls);
      if (!f) continue;
      const ElemId target = g_.target(EdgeRef{{e}}).id;
      auto it = paths_.find(target);
      if (it == paths_.end()) {
        throw ExportError("reference '" + *f + "' of element #" + std::to_string(node) +
                          " leaves the exported tree");
      }
      auto [slot, fresh] = refs.try_emplace(*f, it->second);
      if (fresh) {
        ref_order.push_back(*f);
      } else {
        slot->second += " " + it->second;
      }
    }
    for (const auto& f : ref_order) out_ << " " << f << "=\"" << xml::escape(refs[f]) << "\"";

    const auto kids = children(node);
    if (kids.empty() && items.empty()) {
      out_ << (depth == 0 ? ">\n" : "/>\n");
      return;
    }
    out_ << ">\n";
    const std::string indent(2 * (depth + 1), ' ');
    for (const auto& [name, text] : items) {
      out_ << indent << "<" << name << ">" << xml::escape(text) << "</" << name << ">\n";
    }
    for (const auto& [f, child] : kids) {
      out_ << indent << "<" << f << " xsi:type=\"" << qualified(g_.class_of(child)) << "\"";
      element_body(child, depth + 1);
      if (!children(child).empty() || has_items(child)) out_ << indent << "</" << f << ">\n";
    }
  }

  std::string scalar_text(const Scalar& x) const {
    return attribute_text(s_, std::visit([](const auto& v) -> Value { return v; }, x));
  }

  bool has_items(ElemId node) const {
    const ClassId cls = g_.class_of(node);
    for (std::size_t i = 0; i < s_.slots(cls).size(); ++i) {
      const AttributeSlot& slot = s_.slots(cls)[i];
      if (!slot.type.is_scalar() &&
          g_.get_attr(ElementRef{node}, i) != default_value(s_, slot.type)) {
        return true;
      }
    }
    return false;
  }

  const Graph& g_;
  const Schema& s_;
  std::ostream& out_;
  std::unordered_map<ElemId, std::string> paths_;
};

}  // namespace

void export_xmi(const Graph& graph, NodeRef root, std::ostream& out) {
  XmiWriter(graph, out).run(root);
}

}  // namespace grrw
