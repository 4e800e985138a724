#include "grrw/metamodel.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <functional>
#include <set>
#include <sstream>

namespace grrw {

std::string_view to_string(ElementKind kind) {
  return kind == ElementKind::Node ? "node" : "edge";
}

namespace {

std::string scalar_to_string(const ScalarType& s) {
  switch (s.kind) {
    case ScalarKind::Boolean:
      return "boolean";
    case ScalarKind::Integer:
      return "int";
    case ScalarKind::Double:
      return "double";
    case ScalarKind::String:
      return "string";
    case ScalarKind::Enum:
      return s.enum_name;
  }
  return "?";
}

}  // namespace

std::string ValueType::to_string() const {
  switch (container) {
    case ContainerKind::None:
      return scalar_to_string(element);
    case ContainerKind::Set:
      return "set<" + scalar_to_string(element) + ">";
    case ContainerKind::Array:
      return "array<" + scalar_to_string(element) + ">";
    case ContainerKind::Map:
      return "map<" + scalar_to_string(key) + "," + scalar_to_string(element) + ">";
  }
  return "?";
}

std::optional<std::int64_t> EnumDef::value_of(std::string_view item) const {
  for (const auto& [n, v] : items) {
    if (n == item) return v;
  }
  return std::nullopt;
}

const std::string* EnumDef::item_named(std::int64_t value) const {
  for (const auto& [n, v] : items) {
    if (v == value) return &n;
  }
  return nullptr;
}

Schema::Schema() {
  ClassDecl node{"Node", {}, {}, false, false, {}, {}};
  ClassDecl edge{"Edge", {}, {}, false, false, {}, {}};
  declare(ElementKind::Node, node);
  declare(ElementKind::Edge, edge);
}

ClassId Schema::declare_node_class(const ClassDecl& decl) { return declare(ElementKind::Node, decl); }
ClassId Schema::declare_edge_class(const ClassDecl& decl) { return declare(ElementKind::Edge, decl); }

ClassId Schema::declare_node_class(std::string name, std::vector<std::string> supers,
                                   std::vector<AttributeDecl> attributes, bool is_abstract) {
  return declare(ElementKind::Node,
                 ClassDecl{std::move(name), std::move(supers), std::move(attributes), is_abstract,
                           false, {}, {}});
}

ClassId Schema::declare_edge_class(std::string name, std::vector<std::string> supers,
                                   std::vector<AttributeDecl> attributes, bool is_abstract) {
  return declare(ElementKind::Edge,
                 ClassDecl{std::move(name), std::move(supers), std::move(attributes), is_abstract,
                           false, {}, {}});
}

void Schema::check_value_type(const ValueType& type, const std::string& where) const {
  auto check = [&](const ScalarType& s) {
    if (s.kind == ScalarKind::Enum && !find_enum(s.enum_name)) {
      throw SchemaError(where + ": unknown enum '" + s.enum_name + "'");
    }
  };
  check(type.element);
  if (type.container == ContainerKind::Map) check(type.key);
}

ClassId Schema::declare(ElementKind kind, const ClassDecl& decl) {
  auto& names = kind == ElementKind::Node ? node_names_ : edge_names_;
  const std::string what = std::string(to_string(kind)) + " class '" + decl.name + "'";
  if (decl.name.empty()) throw SchemaError("empty class name");
  if (names.contains(decl.name)) throw SchemaError("duplicate " + what);

  const auto id = static_cast<ClassId>(classes_.size());
  ClassInfo info;
  info.name = decl.name;
  info.kind = kind;
  info.is_abstract = decl.is_abstract;
  info.attributes = decl.attributes;
  info.containment = decl.containment;

  for (const auto& super_name : decl.supers) {
    if (super_name == decl.name) throw SchemaError("inheritance cycle: " + what + " extends itself");
    auto super = find_class(kind, super_name);
    if (!super) throw SchemaError(what + ": unknown supertype '" + super_name + "'");
    if (std::find(info.supers.begin(), info.supers.end(), *super) != info.supers.end()) {
      throw SchemaError(what + ": supertype '" + super_name + "' listed twice");
    }
    info.supers.push_back(*super);
  }
  const bool is_root = classes_.size() < 2;
  if (info.supers.empty() && !is_root) {
    info.supers.push_back(kind == ElementKind::Node ? node_root() : edge_root());
  }
  if (kind == ElementKind::Edge) {
    if (!decl.source.empty()) info.source = node_class(decl.source);
    if (!decl.target.empty()) info.target = node_class(decl.target);
  } else if (decl.containment || !decl.source.empty() || !decl.target.empty()) {
    throw SchemaError(what + ": containment/connect apply to edge classes only");
  }

  // Inherited slots, deduplicated by declaring class: a diamond over one
  // declaration yields one slot.
  std::vector<AttributeSlot> slots;
  std::unordered_map<std::string, std::size_t> lookup;
  for (ClassId s : info.supers) {
    for (const auto& slot : slots_[s]) {
      auto it = lookup.find(slot.name);
      if (it != lookup.end()) {
        if (slots[it->second].declared_in != slot.declared_in) {
          throw SchemaError(what + ": attribute '" + slot.name + "' inherited from unrelated classes '" +
                            classes_[slots[it->second].declared_in].name + "' and '" +
                            classes_[slot.declared_in].name + "'");
        }
        continue;
      }
      lookup.emplace(slot.name, slots.size());
      slots.push_back(slot);
    }
  }
  std::set<std::string> own;
  for (const auto& attr : decl.attributes) {
    if (!own.insert(attr.name).second) {
      throw SchemaError(what + ": attribute '" + attr.name + "' declared twice");
    }
    if (auto it = lookup.find(attr.name); it != lookup.end()) {
      const auto& inherited = slots[it->second];
      throw SchemaError(what + ": attribute '" + attr.name + "' collides with '" + attr.name + " : " +
                        inherited.type.to_string() + "' inherited from '" +
                        classes_[inherited.declared_in].name + "'");
    }
    check_value_type(attr.type, what);
    lookup.emplace(attr.name, slots.size());
    slots.push_back(AttributeSlot{attr.name, attr.type, id});
  }

  std::vector<bool> mask(id + 1, false);
  mask[id] = true;
  for (ClassId s : info.supers) {
    const auto& sm = ancestor_mask_[s];
    for (std::size_t i = 0; i < sm.size(); ++i) {
      if (sm[i]) mask[i] = true;
    }
  }
  std::vector<ClassId> ancestors;
  for (std::size_t i = mask.size(); i-- > 0;) {
    if (mask[i]) ancestors.push_back(static_cast<ClassId>(i));
  }

  classes_.push_back(std::move(info));
  ancestor_mask_.push_back(std::move(mask));
  subtypes_.emplace_back();
  for (ClassId a : ancestors) subtypes_[a].push_back(id);
  ancestors_.push_back(std::move(ancestors));
  slots_.push_back(std::move(slots));
  slot_lookup_.push_back(std::move(lookup));
  names.emplace(decl.name, id);
  return id;
}

void Schema::declare_enum(EnumDef def) {
  if (def.name.empty()) throw SchemaError("empty enum name");
  if (enum_names_.contains(def.name)) throw SchemaError("duplicate enum '" + def.name + "'");
  std::set<std::string> names;
  std::set<std::int64_t> values;
  for (const auto& [n, v] : def.items) {
    if (!names.insert(n).second) {
      throw SchemaError("enum '" + def.name + "': duplicate item '" + n + "'");
    }
    if (!values.insert(v).second) {
      throw SchemaError("enum '" + def.name + "': duplicate value " + std::to_string(v));
    }
  }
  enum_names_.emplace(def.name, enums_.size());
  enums_.push_back(std::move(def));
}

void Schema::declare_package(PackageInfo package) {
  for (const auto& p : packages_) {
    if (p.prefix == package.prefix) throw SchemaError("duplicate package '" + package.prefix + "'");
  }
  packages_.push_back(std::move(package));
}

bool Schema::is_subtype_of(std::string_view sub, std::string_view super) const {
  for (auto kind : {ElementKind::Node, ElementKind::Edge}) {
    auto a = find_class(kind, sub);
    if (!a) continue;
    auto b = find_class(kind, super);
    if (!b) throw SchemaError("unknown " + std::string(to_string(kind)) + " class '" + std::string(super) + "'");
    return is_subtype_of(*a, *b);
  }
  throw SchemaError("unknown class '" + std::string(sub) + "'");
}

const AttributeDecl& Schema::resolve_attribute(ClassId cls, std::string_view name) const {
  const AttributeDecl* found = nullptr;
  ClassId found_in = 0;
  for (ClassId a : ancestors(cls)) {
    for (const auto& attr : classes_[a].attributes) {
      if (attr.name != name) continue;
      if (found) {
        throw SchemaError("attribute '" + std::string(name) + "' on '" + classes_[cls].name +
                          "' is ambiguous between '" + classes_[found_in].name + "' and '" +
                          classes_[a].name + "'");
      }
      found = &attr;
      found_in = a;
    }
  }
  if (!found) {
    throw SchemaError("class '" + classes_[cls].name + "' has no attribute '" + std::string(name) + "'");
  }
  return *found;
}

std::optional<ClassId> Schema::find_class(ElementKind kind, std::string_view name) const {
  const auto& names = kind == ElementKind::Node ? node_names_ : edge_names_;
  auto it = names.find(std::string(name));
  if (it == names.end()) return std::nullopt;
  return it->second;
}

ClassId Schema::node_class(std::string_view name) const {
  if (auto c = find_class(ElementKind::Node, name)) return *c;
  throw SchemaError("unknown node class '" + std::string(name) + "'");
}

ClassId Schema::edge_class(std::string_view name) const {
  if (auto c = find_class(ElementKind::Edge, name)) return *c;
  throw SchemaError("unknown edge class '" + std::string(name) + "'");
}

std::optional<std::size_t> Schema::slot_index(ClassId cls, std::string_view name) const {
  const auto& lookup = slot_lookup_.at(cls);
  auto it = lookup.find(std::string(name));
  if (it == lookup.end()) return std::nullopt;
  return it->second;
}

const EnumDef* Schema::find_enum(std::string_view name) const {
  auto it = enum_names_.find(std::string(name));
  return it == enum_names_.end() ? nullptr : &enums_[it->second];
}

const PackageInfo* Schema::package_by_uri(std::string_view uri) const {
  for (const auto& p : packages_) {
    if (p.ns_uri == uri) return &p;
  }
  return nullptr;
}

Schema SchemaBuilder::build() && {
  for (auto& p : packages_) schema_.declare_package(std::move(p));
  for (auto& e : enums_) schema_.declare_enum(std::move(e));

  std::unordered_map<std::string, std::size_t> index[2];
  for (std::size_t i = 0; i < pending_.size(); ++i) {
    auto& names = index[pending_[i].kind == ElementKind::Node ? 0 : 1];
    if (!names.emplace(pending_[i].decl.name, i).second ||
        schema_.find_class(pending_[i].kind, pending_[i].decl.name)) {
      throw SchemaError("duplicate " + std::string(to_string(pending_[i].kind)) + " class '" +
                        pending_[i].decl.name + "'");
    }
  }

  // Depth-first in declaration order; supertypes and connect targets first.
  enum class Mark { None, Active, Done };
  std::vector<Mark> mark(pending_.size(), Mark::None);
  std::vector<std::string> path;
  std::function<void(std::size_t)> visit = [&](std::size_t i) {
    if (mark[i] == Mark::Done) return;
    const auto& p = pending_[i];
    if (mark[i] == Mark::Active) {
      std::string cycle;
      for (const auto& n : path) cycle += n + " -> ";
      throw SchemaError("inheritance cycle: " + cycle + p.decl.name);
    }
    mark[i] = Mark::Active;
    path.push_back(p.decl.name);
    const auto& names = index[p.kind == ElementKind::Node ? 0 : 1];
    for (const auto& s : p.decl.supers) {
      if (auto it = names.find(s); it != names.end()) {
        visit(it->second);
      } else if (!schema_.find_class(p.kind, s)) {
        throw SchemaError(std::string(to_string(p.kind)) + " class '" + p.decl.name +
                          "': unknown supertype '" + s + "'");
      }
    }
    path.pop_back();
    for (const auto* end : {&p.decl.source, &p.decl.target}) {
      if (end->empty()) continue;
      if (auto it = index[0].find(*end); it != index[0].end()) visit(it->second);
    }
    mark[i] = Mark::Done;
    if (p.kind == ElementKind::Node) {
      schema_.declare_node_class(p.decl);
    } else {
      schema_.declare_edge_class(p.decl);
    }
  };
  for (std::size_t i = 0; i < pending_.size(); ++i) visit(i);
  return std::move(schema_);
}

// ---------------------------------------------------------------------------
// Schema text

std::string emit_schema_text(const Schema& schema) {
  std::ostringstream out;
  for (const auto& p : schema.packages()) {
    out << "package " << p.prefix << " uri \"" << p.ns_uri << "\" prefix " << p.ns_prefix << ";\n";
  }
  for (const auto& e : schema.enums()) {
    out << "enum " << e.name << " {";
    for (std::size_t i = 0; i < e.items.size(); ++i) {
      out << (i ? ", " : " ") << e.items[i].first << " = " << e.items[i].second;
    }
    out << (e.items.empty() ? "}\n" : " }\n");
  }
  for (ClassId id = 2; id < schema.class_count(); ++id) {
    const auto& c = schema.info(id);
    if (c.is_abstract) out << "abstract ";
    out << to_string(c.kind) << " class " << c.name;
    const ClassId root = c.kind == ElementKind::Node ? Schema::node_root() : Schema::edge_root();
    if (!(c.supers.size() == 1 && c.supers[0] == root)) {
      out << " extends ";
      for (std::size_t i = 0; i < c.supers.size(); ++i) {
        out << (i ? ", " : "") << schema.info(c.supers[i]).name;
      }
    }
    if (c.source || c.target) {
      out << " connect " << (c.source ? schema.info(*c.source).name : "Node") << " -> "
          << (c.target ? schema.info(*c.target).name : "Node");
    }
    if (c.containment) out << " containment";
    if (c.attributes.empty()) {
      out << ";\n";
    } else {
      out << " {\n";
      for (const auto& a : c.attributes) out << "  " << a.name << " : " << a.type.to_string() << ";\n";
      out << "}\n";
    }
  }
  return out.str();
}

namespace {

class SchemaTextParser {
 public:
  SchemaTextParser(std::string_view text, const std::string& file) : text_(text), file_(file) {}

  void parse(SchemaBuilder& builder) {
    for (;;) {
      skip();
      if (pos_ >= text_.size()) return;
      bool is_abstract = false;
      auto word = ident("declaration");
      if (word == "package") {
        parse_package(builder);
        continue;
      }
      if (word == "enum") {
        parse_enum(builder);
        continue;
      }
      if (word == "abstract") {
        is_abstract = true;
        word = ident("'node' or 'edge'");
      }
      if (word != "node" && word != "edge") fail("expected declaration, got '" + word + "'");
      if (ident("'class'") != "class") fail("expected 'class'");
      ClassDecl decl;
      decl.is_abstract = is_abstract;
      decl.name = ident("class name");
      if (peek_word("extends")) {
        ident("extends");
        do {
          decl.supers.push_back(ident("supertype name"));
        } while (accept(','));
      }
      if (word == "edge") {
        if (peek_word("connect")) {
          ident("connect");
          decl.source = ident("source class");
          expect("->");
          decl.target = ident("target class");
          if (decl.source == "Node") decl.source.clear();
          if (decl.target == "Node") decl.target.clear();
        }
        if (peek_word("containment")) {
          ident("containment");
          decl.containment = true;
        }
      }
      if (accept('{')) {
        while (!accept('}')) {
          AttributeDecl attr;
          attr.name = ident("attribute name");
          expect(":");
          attr.type = type();
          expect(";");
          decl.attributes.push_back(std::move(attr));
        }
        accept(';');
      } else {
        expect(";");
      }
      if (word == "node") {
        builder.add_node_class(std::move(decl));
      } else {
        builder.add_edge_class(std::move(decl));
      }
    }
  }

  ValueType type() {
    auto word = ident("type");
    if (word == "set" || word == "array") {
      expect("<");
      auto element = scalar(ident("element type"));
      expect(">");
      return word == "set" ? ValueType::set_of(element) : ValueType::array_of(element);
    }
    if (word == "map") {
      expect("<");
      auto key = scalar(ident("key type"));
      expect(",");
      auto value = scalar(ident("value type"));
      expect(">");
      return ValueType::map_of(key, value);
    }
    return ValueType{ContainerKind::None, scalar(word), {}};
  }

  bool at_end() {
    skip();
    return pos_ >= text_.size();
  }

 private:
  void parse_package(SchemaBuilder& builder) {
    PackageInfo p;
    p.prefix = ident("package name");
    if (ident("'uri'") != "uri") fail("expected 'uri'");
    p.ns_uri = string_literal();
    if (ident("'prefix'") != "prefix") fail("expected 'prefix'");
    p.ns_prefix = ident("namespace prefix");
    expect(";");
    builder.add_package(std::move(p));
  }

  void parse_enum(SchemaBuilder& builder) {
    EnumDef def;
    def.name = ident("enum name");
    expect("{");
    std::int64_t next = 0;
    if (!accept('}')) {
      do {
        auto item = ident("enum item");
        if (accept('=')) next = integer();
        def.items.emplace_back(item, next);
        ++next;
      } while (accept(','));
      expect("}");
    }
    accept(';');
    builder.add_enum(std::move(def));
  }

  static ScalarType scalar(const std::string& word) {
    if (word == "boolean") return {ScalarKind::Boolean, {}};
    if (word == "int" || word == "integer" || word == "long") return {ScalarKind::Integer, {}};
    if (word == "double" || word == "float") return {ScalarKind::Double, {}};
    if (word == "string") return {ScalarKind::String, {}};
    return {ScalarKind::Enum, word};
  }

  void skip() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == '\n') {
        ++line_;
        line_start_ = pos_ + 1;
        ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else if (text_.substr(pos_, 2) == "//") {
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
      } else {
        return;
      }
    }
  }

  [[noreturn]] void fail(const std::string& message) {
    throw ParseError(file_, line_, pos_ - line_start_ + 1, message);
  }

  std::string ident(const char* what) {
    skip();
    std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      ++pos_;
    }
    if (start == pos_ || std::isdigit(static_cast<unsigned char>(text_[start]))) {
      pos_ = start;
      fail(std::string("expected ") + what);
    }
    return std::string(text_.substr(start, pos_ - start));
  }

  bool peek_word(std::string_view word) {
    skip();
    if (text_.substr(pos_, word.size()) != word) return false;
    std::size_t end = pos_ + word.size();
    return end >= text_.size() ||
           !(std::isalnum(static_cast<unsigned char>(text_[end])) || text_[end] == '_');
  }

  bool accept(char c) {
    skip();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(std::string_view token) {
    skip();
    if (text_.substr(pos_, token.size()) != token) fail("expected '" + std::string(token) + "'");
    pos_ += token.size();
  }

  std::int64_t integer() {
    skip();
    std::int64_t value = 0;
    auto first = text_.data() + pos_;
    auto [ptr, ec] = std::from_chars(first, text_.data() + text_.size(), value);
    if (ec != std::errc()) fail("expected integer");
    pos_ += static_cast<std::size_t>(ptr - first);
    return value;
  }

  std::string string_literal() {
    skip();
    if (pos_ >= text_.size() || text_[pos_] != '"') fail("expected string literal");
    std::size_t end = text_.find('"', pos_ + 1);
    if (end == std::string_view::npos) fail("unterminated string literal");
    std::string value(text_.substr(pos_ + 1, end - pos_ - 1));
    pos_ = end + 1;
    return value;
  }

  std::string_view text_;
  std::string file_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t line_start_ = 0;
};

}  // namespace

Schema parse_schema_text(std::string_view text, const std::string& file, Schema base) {
  SchemaBuilder builder(std::move(base));
  SchemaTextParser(text, file).parse(builder);
  return std::move(builder).build();
}

ValueType parse_value_type(std::string_view text) {
  SchemaTextParser parser(text, "<type>");
  auto type = parser.type();
  if (!parser.at_end()) throw SchemaError("trailing text in type '" + std::string(text) + "'");
  return type;
}

}  // namespace grrw
