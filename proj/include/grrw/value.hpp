#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "grrw/metamodel.hpp"

namespace grrw {

struct EnumValue {
  std::string enum_name;
  std::int64_t value = 0;

  friend auto operator<=>(const EnumValue&, const EnumValue&) = default;
};

using Scalar = std::variant<bool, std::int64_t, double, std::string, EnumValue>;
using SetValue = std::set<Scalar>;
using MapValue = std::map<Scalar, Scalar>;
using ArrayValue = std::vector<Scalar>;

// Attribute value: tagged union over the schema's value types.
using Value = std::variant<bool, std::int64_t, double, std::string, EnumValue, SetValue, MapValue,
                           ArrayValue>;

// Zero, empty string, first enum item, empty container.
Value default_value(const Schema& schema, const ValueType& type);

bool scalar_conforms(const Schema& schema, const ScalarType& type, const Scalar& value);
bool conforms(const Schema& schema, const ValueType& type, const Value& value);

std::string scalar_to_display(const Schema& schema, const Scalar& value);
// Human/label text: strings unquoted, enums as Enum::Item, containers as {..}/[..].
std::string to_display(const Schema& schema, const Value& value);

// Parses an attribute literal as written in XMI (`true`, `42`, `1.5`, enum item
// names, plain strings). Throws TypeMismatchError when the text does not fit.
Value parse_attribute_text(const Schema& schema, const ValueType& type, std::string_view text);
// Inverse of parse_attribute_text for scalar types.
std::string attribute_text(const Schema& schema, const Value& value);

}  // namespace grrw
