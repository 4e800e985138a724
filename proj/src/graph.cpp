#include "grrw/graph.hpp"

#include <algorithm>

namespace grrw {

Graph::Graph(std::shared_ptr<const Schema> schema)
    : schema_(std::move(schema)),
      by_class_(schema_->class_count()),
      dead_in_class_(schema_->class_count(), 0) {}

ElementKind Graph::kind(ElemId id) const { return live(id).kind; }

const Graph::Record& Graph::live(ElemId id) const {
  if (id < 1 || id > records_.size()) throw DanglingRefError("unknown element #" + std::to_string(id));
  const auto& r = records_[id - 1];
  if (!r.live) throw DanglingRefError("element #" + std::to_string(id) + " was deleted");
  return r;
}

Graph::Record& Graph::live(ElemId id) {
  return const_cast<Record&>(static_cast<const Graph*>(this)->live(id));
}

const Graph::Record& Graph::node_record(ElemId id) const {
  const auto& r = live(id);
  if (r.kind != ElementKind::Node) throw GraphError("element #" + std::to_string(id) + " is not a node");
  return r;
}

const Graph::Record& Graph::edge_record(ElemId id) const {
  const auto& r = live(id);
  if (r.kind != ElementKind::Edge) throw GraphError("element #" + std::to_string(id) + " is not an edge");
  return r;
}

ElemId Graph::create(ClassId cls, ElementKind kind) {
  if (cls >= schema_->class_count()) throw GraphError("unknown class id " + std::to_string(cls));
  const auto& info = schema_->info(cls);
  if (info.kind != kind) {
    throw GraphError("'" + info.name + "' is not a " + std::string(to_string(kind)) + " class");
  }
  if (info.is_abstract) throw GraphError("cannot instantiate abstract class '" + info.name + "'");
  Record r;
  r.cls = cls;
  r.kind = kind;
  for (const auto& slot : schema_->slots(cls)) r.attrs.push_back(default_value(*schema_, slot.type));
  records_.push_back(std::move(r));
  const ElemId id = records_.size();
  by_class_[cls].push_back(id);
  return id;
}

NodeRef Graph::add_node(ClassId cls) {
  const ElemId id = create(cls, ElementKind::Node);
  ++node_count_;
  if (observer_) observer_->node_added(id);
  return NodeRef{{id}};
}

EdgeRef Graph::add_edge(ClassId cls, NodeRef source, NodeRef target) {
  node_record(source.id);
  node_record(target.id);
  const ElemId id = create(cls, ElementKind::Edge);
  auto& r = records_[id - 1];
  r.source = source.id;
  r.target = target.id;
  records_[source.id - 1].out.push_back(id);
  records_[target.id - 1].in.push_back(id);
  ++edge_count_;
  if (observer_) observer_->edge_added(id);
  return EdgeRef{{id}};
}

void Graph::unindex(ElemId id, ClassId cls) {
  if (auto it = names_.find(id); it != names_.end()) {
    by_name_.erase(it->second);
    names_.erase(it);
  }
  auto& list = by_class_[cls];
  if (++dead_in_class_[cls] * 2 > list.size()) {
    std::erase_if(list, [&](ElemId e) { return !records_[e - 1].live; });
    dead_in_class_[cls] = 0;
  }
}

void Graph::remove_edge(EdgeRef edge) {
  const auto& r = edge_record(edge.id);
  if (observer_) observer_->removing(edge.id);
  auto& out = records_[r.source - 1].out;
  out.erase(std::find(out.begin(), out.end(), edge.id));
  auto& in = records_[r.target - 1].in;
  in.erase(std::find(in.begin(), in.end(), edge.id));
  auto& rec = records_[edge.id - 1];
  rec.live = false;
  rec.attrs.clear();
  --edge_count_;
  unindex(edge.id, rec.cls);
}

void Graph::remove_node(NodeRef node) {
  node_record(node.id);
  // Copies: removal edits the incidence lists. A self-loop shows up twice.
  const std::vector<ElemId> out = records_[node.id - 1].out;
  const std::vector<ElemId> in = records_[node.id - 1].in;
  for (ElemId e : out) {
    if (records_[e - 1].live) remove_edge(EdgeRef{{e}});
  }
  for (ElemId e : in) {
    if (records_[e - 1].live) remove_edge(EdgeRef{{e}});
  }
  if (observer_) observer_->removing(node.id);
  auto& rec = records_[node.id - 1];
  rec.live = false;
  rec.attrs.clear();
  rec.out.clear();
  rec.in.clear();
  --node_count_;
  unindex(node.id, rec.cls);
}

const Value& Graph::get_attr(ElementRef el, std::string_view name) const {
  const auto& r = live(el.id);
  auto slot = schema_->slot_index(r.cls, name);
  if (!slot) {
    throw GraphError("class '" + schema_->info(r.cls).name + "' has no attribute '" + std::string(name) + "'");
  }
  return r.attrs[*slot];
}

const Value& Graph::get_attr(ElementRef el, std::size_t slot) const {
  const auto& r = live(el.id);
  if (slot >= r.attrs.size()) throw GraphError("attribute slot out of range");
  return r.attrs[slot];
}

void Graph::set_attr(ElementRef el, std::string_view name, Value value) {
  const auto& r = live(el.id);
  auto slot = schema_->slot_index(r.cls, name);
  if (!slot) {
    throw GraphError("class '" + schema_->info(r.cls).name + "' has no attribute '" + std::string(name) + "'");
  }
  set_attr(el, *slot, std::move(value));
}

void Graph::set_attr(ElementRef el, std::size_t slot, Value value) {
  auto& r = live(el.id);
  const auto slots = schema_->slots(r.cls);
  if (slot >= slots.size()) throw GraphError("attribute slot out of range");
  if (!conforms(*schema_, slots[slot].type, value)) {
    throw TypeMismatchError("value " + to_display(*schema_, value) + " does not fit attribute '" +
                            slots[slot].name + " : " + slots[slot].type.to_string() + "'");
  }
  r.attrs[slot] = std::move(value);
  if (observer_) observer_->attribute_changed(el.id, slot);
}

std::vector<ElemId> Graph::nodes() const {
  std::vector<ElemId> out;
  out.reserve(node_count_);
  for (std::size_t i = 0; i < records_.size(); ++i) {
    if (records_[i].live && records_[i].kind == ElementKind::Node) out.push_back(i + 1);
  }
  return out;
}

std::vector<ElemId> Graph::edges() const {
  std::vector<ElemId> out;
  out.reserve(edge_count_);
  for (std::size_t i = 0; i < records_.size(); ++i) {
    if (records_[i].live && records_[i].kind == ElementKind::Edge) out.push_back(i + 1);
  }
  return out;
}

std::vector<ElemId> Graph::of_type(ClassId cls, bool include_subtypes, ElementKind kind) const {
  const auto& info = schema_->info(cls);
  if (info.kind != kind) {
    throw GraphError("'" + info.name + "' is not a " + std::string(to_string(kind)) + " class");
  }
  std::vector<ElemId> out;
  auto take = [&](ClassId c) {
    for (ElemId id : by_class_[c]) {
      if (records_[id - 1].live) out.push_back(id);
    }
  };
  if (!include_subtypes) {
    take(cls);
    return out;
  }
  std::size_t lists = 0;
  for (ClassId sub : schema_->subtypes(cls)) {
    if (by_class_[sub].empty()) continue;
    ++lists;
    take(sub);
  }
  if (lists > 1) std::sort(out.begin(), out.end());
  return out;
}

std::vector<ElemId> Graph::nodes_of_type(ClassId cls, bool include_subtypes) const {
  return of_type(cls, include_subtypes, ElementKind::Node);
}

std::vector<ElemId> Graph::edges_of_type(ClassId cls, bool include_subtypes) const {
  return of_type(cls, include_subtypes, ElementKind::Edge);
}

std::vector<ElemId> Graph::outgoing(NodeRef node, ClassId cls) const {
  std::vector<ElemId> out;
  for (ElemId e : node_record(node.id).out) {
    if (schema_->is_subtype_of(records_[e - 1].cls, cls)) out.push_back(e);
  }
  return out;
}

std::vector<ElemId> Graph::incoming(NodeRef node, ClassId cls) const {
  std::vector<ElemId> out;
  for (ElemId e : node_record(node.id).in) {
    if (schema_->is_subtype_of(records_[e - 1].cls, cls)) out.push_back(e);
  }
  return out;
}

void Graph::set_name(ElementRef el, std::string name) {
  live(el.id);
  if (auto it = by_name_.find(name); it != by_name_.end()) {
    if (it->second == el.id) return;
    throw GraphError("name '" + name + "' already used by element #" + std::to_string(it->second));
  }
  if (auto it = names_.find(el.id); it != names_.end()) {
    by_name_.erase(it->second);
    names_.erase(it);
  }
  by_name_.emplace(name, el.id);
  names_.emplace(el.id, std::move(name));
}

std::optional<ElemId> Graph::find_by_name(std::string_view name) const {
  auto it = by_name_.find(std::string(name));
  if (it == by_name_.end()) return std::nullopt;
  return it->second;
}

const std::string* Graph::name_of(ElemId id) const {
  auto it = names_.find(id);
  return it == names_.end() ? nullptr : &it->second;
}

}  // namespace grrw
