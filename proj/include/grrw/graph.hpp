#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "grrw/metamodel.hpp"
#include "grrw/value.hpp"

namespace grrw {

// Element identity. Ids start at 1, are shared by nodes and edges, increase
// with creation order and are never reused within one graph.
using ElemId = std::uint64_t;
inline constexpr ElemId kNoElement = 0;

struct ElementRef {
  ElemId id = kNoElement;

  explicit operator bool() const { return id != kNoElement; }
  friend auto operator<=>(const ElementRef&, const ElementRef&) = default;
};

struct NodeRef : ElementRef {};
struct EdgeRef : ElementRef {};

// Receives every structural and attribute change; used by the debug tracer.
// Observers must not mutate the graph.
class GraphObserver {
 public:
  virtual ~GraphObserver() = default;
  virtual void node_added(ElemId /*id*/) {}
  virtual void edge_added(ElemId /*id*/) {}
  // Called while the element is still live. Incident edges of a removed node
  // are reported (and removed) before the node itself.
  virtual void removing(ElemId /*id*/) {}
  virtual void attribute_changed(ElemId /*id*/, std::size_t /*slot*/) {}
};

class Graph {
 public:
  explicit Graph(std::shared_ptr<const Schema> schema);

  const Schema& schema() const { return *schema_; }
  const std::shared_ptr<const Schema>& schema_ptr() const { return schema_; }

  NodeRef add_node(ClassId cls);
  NodeRef add_node(std::string_view cls) { return add_node(schema_->node_class(cls)); }
  EdgeRef add_edge(ClassId cls, NodeRef source, NodeRef target);
  EdgeRef add_edge(std::string_view cls, NodeRef source, NodeRef target) {
    return add_edge(schema_->edge_class(cls), source, target);
  }

  // Removes the node and all incident edges.
  void remove_node(NodeRef node);
  void remove_edge(EdgeRef edge);

  bool is_live(ElemId id) const { return id >= 1 && id <= records_.size() && records_[id - 1].live; }
  bool contains(ElementRef ref) const { return is_live(ref.id); }
  ElementKind kind(ElemId id) const;
  bool is_node(ElemId id) const { return kind(id) == ElementKind::Node; }
  ClassId class_of(ElemId id) const { return live(id).cls; }
  const std::string& class_name(ElemId id) const { return schema_->info(class_of(id)).name; }

  NodeRef source(EdgeRef edge) const { return NodeRef{{edge_record(edge.id).source}}; }
  NodeRef target(EdgeRef edge) const { return NodeRef{{edge_record(edge.id).target}}; }

  const Value& get_attr(ElementRef el, std::string_view name) const;
  void set_attr(ElementRef el, std::string_view name, Value value);
  const Value& get_attr(ElementRef el, std::size_t slot) const;
  void set_attr(ElementRef el, std::size_t slot, Value value);
  std::span<const Value> attributes(ElementRef el) const { return live(el.id).attrs; }

  std::size_t node_count() const { return node_count_; }
  std::size_t edge_count() const { return edge_count_; }
  // Id the next created element will receive.
  ElemId next_id() const { return records_.size() + 1; }

  // All live elements in creation order.
  std::vector<ElemId> nodes() const;
  std::vector<ElemId> edges() const;
  std::vector<ElemId> nodes_of_type(ClassId cls, bool include_subtypes = true) const;
  std::vector<ElemId> edges_of_type(ClassId cls, bool include_subtypes = true) const;

  // Incident edges of a node in creation order.
  std::span<const ElemId> outgoing(NodeRef node) const { return node_record(node.id).out; }
  std::span<const ElemId> incoming(NodeRef node) const { return node_record(node.id).in; }
  std::vector<ElemId> outgoing(NodeRef node, ClassId cls) const;
  std::vector<ElemId> incoming(NodeRef node, ClassId cls) const;

  // Optional element names (assigned by importers); a bijection.
  void set_name(ElementRef el, std::string name);
  std::optional<ElemId> find_by_name(std::string_view name) const;
  const std::string* name_of(ElemId id) const;

  void set_observer(GraphObserver* observer) { observer_ = observer; }
  GraphObserver* observer() const { return observer_; }

 private:
  struct Record {
    ClassId cls = 0;
    ElementKind kind = ElementKind::Node;
    bool live = true;
    std::vector<Value> attrs;
    ElemId source = kNoElement;  // edges
    ElemId target = kNoElement;
    std::vector<ElemId> out;  // nodes
    std::vector<ElemId> in;
  };

  const Record& live(ElemId id) const;
  Record& live(ElemId id);
  const Record& node_record(ElemId id) const;
  const Record& edge_record(ElemId id) const;
  ElemId create(ClassId cls, ElementKind kind);
  void unindex(ElemId id, ClassId cls);
  std::vector<ElemId> of_type(ClassId cls, bool include_subtypes, ElementKind kind) const;

  std::shared_ptr<const Schema> schema_;
  std::vector<Record> records_;
  std::vector<std::vector<ElemId>> by_class_;  // may hold dead ids; see unindex
  std::vector<std::size_t> dead_in_class_;
  std::size_t node_count_ = 0;
  std::size_t edge_count_ = 0;
  std::unordered_map<std::string, ElemId> by_name_;
  std::unordered_map<ElemId, std::string> names_;
  GraphObserver* observer_ = nullptr;
};

}  // namespace grrw
