#include "grrw/value.hpp"

#include <charconv>
#include <cstdio>
#include <sstream>

namespace grrw {

namespace {

Scalar default_scalar(const Schema& schema, const ScalarType& type) {
  switch (type.kind) {
    case ScalarKind::Boolean:
      return false;
    case ScalarKind::Integer:
      return std::int64_t{0};
    case ScalarKind::Double:
      return 0.0;
    case ScalarKind::String:
      return std::string{};
    case ScalarKind::Enum: {
      const EnumDef* def = schema.find_enum(type.enum_name);
      std::int64_t first = (def && !def->items.empty()) ? def->items.front().second : 0;
      return EnumValue{type.enum_name, first};
    }
  }
  return std::string{};
}

Value widen(Scalar s) {
  return std::visit([](auto&& v) -> Value { return std::move(v); }, std::move(s));
}

std::string format_double(double d) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, d);
  (void)ec;
  return std::string(buf, ptr);
}

}  // namespace

Value default_value(const Schema& schema, const ValueType& type) {
  switch (type.container) {
    case ContainerKind::None:
      return widen(default_scalar(schema, type.element));
    case ContainerKind::Set:
      return SetValue{};
    case ContainerKind::Map:
      return MapValue{};
    case ContainerKind::Array:
      return ArrayValue{};
  }
  return std::string{};
}

bool scalar_conforms(const Schema& schema, const ScalarType& type, const Scalar& value) {
  switch (type.kind) {
    case ScalarKind::Boolean:
      return std::holds_alternative<bool>(value);
    case ScalarKind::Integer:
      return std::holds_alternative<std::int64_t>(value);
    case ScalarKind::Double:
      return std::holds_alternative<double>(value);
    case ScalarKind::String:
      return std::holds_alternative<std::string>(value);
    case ScalarKind::Enum: {
      const auto* e = std::get_if<EnumValue>(&value);
      if (!e || e->enum_name != type.enum_name) return false;
      const EnumDef* def = schema.find_enum(type.enum_name);
      return def && def->item_named(e->value) != nullptr;
    }
  }
  return false;
}

bool conforms(const Schema& schema, const ValueType& type, const Value& value) {
  switch (type.container) {
    case ContainerKind::None:
      return std::visit(
          [&](const auto& v) -> bool {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, SetValue> || std::is_same_v<T, MapValue> ||
                          std::is_same_v<T, ArrayValue>) {
              return false;
            } else {
              return scalar_conforms(schema, type.element, Scalar{v});
            }
          },
          value);
    case ContainerKind::Set: {
      const auto* s = std::get_if<SetValue>(&value);
      if (!s) return false;
      for (const auto& e : *s) {
        if (!scalar_conforms(schema, type.element, e)) return false;
      }
      return true;
    }
    case ContainerKind::Array: {
      const auto* a = std::get_if<ArrayValue>(&value);
      if (!a) return false;
      for (const auto& e : *a) {
        if (!scalar_conforms(schema, type.element, e)) return false;
      }
      return true;
    }
    case ContainerKind::Map: {
      const auto* m = std::get_if<MapValue>(&value);
      if (!m) return false;
      for (const auto& [k, v] : *m) {
        if (!scalar_conforms(schema, type.key, k) || !scalar_conforms(schema, type.element, v)) {
          return false;
        }
      }
      return true;
    }
  }
  return false;
}

std::string scalar_to_display(const Schema& schema, const Scalar& value) {
  return std::visit(
      [&](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, bool>) {
          return v ? "true" : "false";
        } else if constexpr (std::is_same_v<T, std::int64_t>) {
          return std::to_string(v);
        } else if constexpr (std::is_same_v<T, double>) {
          return format_double(v);
        } else if constexpr (std::is_same_v<T, std::string>) {
          return v;
        } else {
          const EnumDef* def = schema.find_enum(v.enum_name);
          const std::string* item = def ? def->item_named(v.value) : nullptr;
          return v.enum_name + "::" + (item ? *item : std::to_string(v.value));
        }
      },
      value);
}

std::string to_display(const Schema& schema, const Value& value) {
  return std::visit(
      [&](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, SetValue>) {
          std::string out = "{";
          bool first = true;
          for (const auto& e : v) {
            out += (first ? "" : ", ") + scalar_to_display(schema, e);
            first = false;
          }
          return out + "}";
        } else if constexpr (std::is_same_v<T, ArrayValue>) {
          std::string out = "[";
          for (std::size_t i = 0; i < v.size(); ++i) {
            out += (i ? ", " : "") + scalar_to_display(schema, v[i]);
          }
          return out + "]";
        } else if constexpr (std::is_same_v<T, MapValue>) {
          std::string out = "{";
          bool first = true;
          for (const auto& [k, x] : v) {
            out += (first ? "" : ", ") + scalar_to_display(schema, k) + "->" +
                   scalar_to_display(schema, x);
            first = false;
          }
          return out + "}";
        } else {
          return scalar_to_display(schema, Scalar{v});
        }
      },
      value);
}

namespace {

Scalar parse_scalar_text(const Schema& schema, const ScalarType& type, std::string_view text) {
  auto mismatch = [&]() -> TypeMismatchError {
    return TypeMismatchError("cannot read '" + std::string(text) + "' as " +
                             ValueType{ContainerKind::None, type, {}}.to_string());
  };
  switch (type.kind) {
    case ScalarKind::Boolean:
      if (text == "true") return true;
      if (text == "false") return false;
      throw mismatch();
    case ScalarKind::Integer: {
      std::int64_t v = 0;
      auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
      if (ec != std::errc() || ptr != text.data() + text.size()) throw mismatch();
      return v;
    }
    case ScalarKind::Double: {
      double v = 0;
      auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
      if (ec != std::errc() || ptr != text.data() + text.size()) throw mismatch();
      return v;
    }
    case ScalarKind::String:
      return std::string(text);
    case ScalarKind::Enum: {
      const EnumDef* def = schema.find_enum(type.enum_name);
      if (!def) throw mismatch();
      if (auto v = def->value_of(text)) return EnumValue{def->name, *v};
      throw mismatch();
    }
  }
  throw mismatch();
}

}  // namespace

Value parse_attribute_text(const Schema& schema, const ValueType& type, std::string_view text) {
  if (type.is_scalar()) return widen(parse_scalar_text(schema, type.element, text));
  // Containers: space-separated scalars (XMI multi-valued attribute style).
  std::vector<std::string> parts;
  std::istringstream in{std::string(text)};
  for (std::string word; in >> word;) parts.push_back(word);
  if (type.container == ContainerKind::Array) {
    ArrayValue a;
    for (const auto& p : parts) a.push_back(parse_scalar_text(schema, type.element, p));
    return a;
  }
  if (type.container == ContainerKind::Set) {
    SetValue s;
    for (const auto& p : parts) s.insert(parse_scalar_text(schema, type.element, p));
    return s;
  }
  MapValue m;
  for (const auto& p : parts) {
    auto eq = p.find('=');
    if (eq == std::string::npos) throw TypeMismatchError("map entry '" + p + "' lacks '='");
    m.emplace(parse_scalar_text(schema, type.key, std::string_view(p).substr(0, eq)),
              parse_scalar_text(schema, type.element, std::string_view(p).substr(eq + 1)));
  }
  return m;
}

std::string attribute_text(const Schema& schema, const Value& value) {
  if (const auto* e = std::get_if<EnumValue>(&value)) {
    const EnumDef* def = schema.find_enum(e->enum_name);
    const std::string* item = def ? def->item_named(e->value) : nullptr;
    return item ? *item : std::to_string(e->value);
  }
  return to_display(schema, value);
}

}  // namespace grrw
