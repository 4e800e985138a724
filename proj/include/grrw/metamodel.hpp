#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "grrw/error.hpp"

namespace grrw {

enum class ElementKind : std::uint8_t { Node, Edge };

std::string_view to_string(ElementKind kind);

enum class ScalarKind : std::uint8_t { Boolean, Integer, Double, String, Enum };

struct ScalarType {
  ScalarKind kind = ScalarKind::String;
  std::string enum_name;  // only for ScalarKind::Enum

  friend bool operator==(const ScalarType&, const ScalarType&) = default;
};

enum class ContainerKind : std::uint8_t { None, Set, Map, Array };

// Attribute value type. Containers hold scalars only; for a map, `key` is the
// key type and `element` the mapped type.
struct ValueType {
  ContainerKind container = ContainerKind::None;
  ScalarType element;
  ScalarType key;

  static ValueType boolean() { return scalar(ScalarKind::Boolean); }
  static ValueType integer() { return scalar(ScalarKind::Integer); }
  static ValueType floating() { return scalar(ScalarKind::Double); }
  static ValueType string() { return scalar(ScalarKind::String); }
  static ValueType enumeration(std::string name) {
    return ValueType{ContainerKind::None, ScalarType{ScalarKind::Enum, std::move(name)}, {}};
  }
  static ValueType scalar(ScalarKind kind) { return ValueType{ContainerKind::None, {kind, {}}, {}}; }
  static ValueType set_of(ScalarType element) { return {ContainerKind::Set, std::move(element), {}}; }
  static ValueType array_of(ScalarType element) {
    return {ContainerKind::Array, std::move(element), {}};
  }
  static ValueType map_of(ScalarType key, ScalarType value) {
    return {ContainerKind::Map, std::move(value), std::move(key)};
  }

  bool is_scalar() const { return container == ContainerKind::None; }

  // Schema-text spelling: boolean, int, double, string, <Enum>, set<T>, map<K,V>, array<T>.
  std::string to_string() const;

  friend bool operator==(const ValueType&, const ValueType&) = default;
};

struct AttributeDecl {
  std::string name;
  ValueType type;

  friend bool operator==(const AttributeDecl&, const AttributeDecl&) = default;
};

struct EnumDef {
  std::string name;
  std::vector<std::pair<std::string, std::int64_t>> items;

  std::optional<std::int64_t> value_of(std::string_view item) const;
  const std::string* item_named(std::int64_t value) const;

  friend bool operator==(const EnumDef&, const EnumDef&) = default;
};

using ClassId = std::uint32_t;

// A node or edge class. Ids are dense; supertypes always have smaller ids
// than their subtypes.
struct ClassInfo {
  std::string name;
  ElementKind kind = ElementKind::Node;
  std::vector<ClassId> supers;
  std::vector<AttributeDecl> attributes;  // declared locally
  bool is_abstract = false;
  // Edge classes only. The connect pair documents the Ecore reference owner and
  // target type; containment marks Ecore containment references.
  bool containment = false;
  std::optional<ClassId> source;
  std::optional<ClassId> target;

  friend bool operator==(const ClassInfo&, const ClassInfo&) = default;
};

// An attribute as stored on instances of a class: own and inherited.
struct AttributeSlot {
  std::string name;
  ValueType type;
  ClassId declared_in = 0;
};

// Ecore package bookkeeping for XMI I/O: mangled prefix and namespace data.
struct PackageInfo {
  std::string prefix;  // mangled name prefix, e.g. "java"
  std::string ns_uri;
  std::string ns_prefix;

  friend bool operator==(const PackageInfo&, const PackageInfo&) = default;
};

struct ClassDecl {
  std::string name;
  std::vector<std::string> supers;
  std::vector<AttributeDecl> attributes;
  bool is_abstract = false;
  bool containment = false;
  std::string source;  // edge connect constraint, may be empty
  std::string target;
};

// The type universe of graphs. The root classes `Node` (id 0) and `Edge`
// (id 1) always exist; classes declared without supertypes extend them.
class Schema {
 public:
  Schema();

  ClassId declare_node_class(const ClassDecl& decl);
  ClassId declare_edge_class(const ClassDecl& decl);
  ClassId declare_node_class(std::string name, std::vector<std::string> supers = {},
                             std::vector<AttributeDecl> attributes = {}, bool is_abstract = false);
  ClassId declare_edge_class(std::string name, std::vector<std::string> supers = {},
                             std::vector<AttributeDecl> attributes = {}, bool is_abstract = false);
  void declare_enum(EnumDef def);
  void declare_package(PackageInfo package);

  static constexpr ClassId node_root() { return 0; }
  static constexpr ClassId edge_root() { return 1; }

  // Reflexive, transitive; false for classes of different kinds.
  bool is_subtype_of(ClassId sub, ClassId super) const {
    const auto& anc = ancestor_mask_[sub];
    return super < anc.size() && anc[super];
  }
  bool is_subtype_of(std::string_view sub, std::string_view super) const;

  // Unique declaration visible on the class; throws SchemaError when missing or ambiguous.
  const AttributeDecl& resolve_attribute(ClassId cls, std::string_view name) const;

  std::optional<ClassId> find_class(ElementKind kind, std::string_view name) const;
  ClassId node_class(std::string_view name) const;
  ClassId edge_class(std::string_view name) const;
  const ClassInfo& info(ClassId cls) const { return classes_.at(cls); }
  std::size_t class_count() const { return classes_.size(); }
  std::span<const ClassInfo> classes() const { return classes_; }

  std::span<const AttributeSlot> slots(ClassId cls) const { return slots_.at(cls); }
  std::optional<std::size_t> slot_index(ClassId cls, std::string_view name) const;

  // All classes `c` with is_subtype_of(c, cls), ascending.
  std::span<const ClassId> subtypes(ClassId cls) const { return subtypes_.at(cls); }
  // Ancestors including the class itself, most derived (highest id) first.
  const std::vector<ClassId>& ancestors(ClassId cls) const { return ancestors_.at(cls); }

  const EnumDef* find_enum(std::string_view name) const;
  std::span<const EnumDef> enums() const { return enums_; }
  std::span<const PackageInfo> packages() const { return packages_; }
  const PackageInfo* package_by_uri(std::string_view uri) const;

  friend bool operator==(const Schema& a, const Schema& b) {
    return a.classes_ == b.classes_ && a.enums_ == b.enums_ && a.packages_ == b.packages_;
  }

 private:
  ClassId declare(ElementKind kind, const ClassDecl& decl);
  void check_value_type(const ValueType& type, const std::string& where) const;

  std::vector<ClassInfo> classes_;
  std::vector<std::vector<bool>> ancestor_mask_;
  std::vector<std::vector<ClassId>> ancestors_;
  std::vector<std::vector<ClassId>> subtypes_;
  std::vector<std::vector<AttributeSlot>> slots_;
  std::vector<std::unordered_map<std::string, std::size_t>> slot_lookup_;
  std::unordered_map<std::string, ClassId> node_names_;
  std::unordered_map<std::string, ClassId> edge_names_;
  std::vector<EnumDef> enums_;
  std::unordered_map<std::string, std::size_t> enum_names_;
  std::vector<PackageInfo> packages_;
};

// Collects declarations in any order, then declares them supertypes-first.
// Used by the schema text parser and the Ecore importer, where forward
// references are normal. build() rejects unknown supertypes and cycles.
class SchemaBuilder {
 public:
  SchemaBuilder() = default;
  explicit SchemaBuilder(Schema base) : schema_(std::move(base)) {}

  void add_node_class(ClassDecl decl) { pending_.push_back({ElementKind::Node, std::move(decl)}); }
  void add_edge_class(ClassDecl decl) { pending_.push_back({ElementKind::Edge, std::move(decl)}); }
  void add_enum(EnumDef def) { enums_.push_back(std::move(def)); }
  void add_package(PackageInfo package) { packages_.push_back(std::move(package)); }

  Schema build() &&;

 private:
  struct Pending {
    ElementKind kind;
    ClassDecl decl;
  };
  Schema schema_;
  std::vector<Pending> pending_;
  std::vector<EnumDef> enums_;
  std::vector<PackageInfo> packages_;
};

// Schema text (".gm-like"):
//   package java uri "http://..." prefix java;
//   enum E { A = 0, B }
//   abstract node class N extends A, B { attr : type; }
//   edge class E connect Src -> Tgt containment { attr : type; }
// One declaration per statement, `//` comments.
std::string emit_schema_text(const Schema& schema);
Schema parse_schema_text(std::string_view text, const std::string& file = {}, Schema base = {});

ValueType parse_value_type(std::string_view text);

}  // namespace grrw
