#pragma once

#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>

#include "grrw/graph.hpp"

namespace grrw {

struct ClassStyle {
  std::optional<std::string> color;
  std::optional<std::string> shape;
  std::optional<std::string> label;  // template: {attr}, {$class}, {$id}
  std::optional<bool> hidden;

  friend bool operator==(const ClassStyle&, const ClassStyle&) = default;
};

// Rendering configuration shared by the DOT exporter and the trace viewer.
// Text format, one directive per line, `#` comments:
//   node <Class> [color=<c>] [shape=<s>] [label="<template>"] [hidden]
//   edge <Class> [color=<c>] [label="<template>"] [hidden]
//   contain <EdgeClass>
// Styles inherit: for each property the most derived configured class wins.
// `contain` also covers subclasses of the edge class.
struct LayoutConfig {
  std::map<std::string, ClassStyle> node_styles;
  std::map<std::string, ClassStyle> edge_styles;
  std::set<std::string> containment;

  static LayoutConfig parse(std::string_view text, const std::string& file = {});
  // Throws SchemaError naming the first class the schema does not declare.
  void validate(const Schema& schema) const;

  friend bool operator==(const LayoutConfig&, const LayoutConfig&) = default;
};

// GraphViz digraph in creation order. Nodes reached through containment edges
// are nested in `cluster_n<id>` subgraphs of their container; a containment
// cycle is broken at its back edge, which is drawn as an ordinary edge after
// a `// warning` comment. Hidden elements and their edges are omitted.
void export_dot(const Graph& graph, const LayoutConfig& config, std::ostream& out);
std::string export_dot(const Graph& graph, const LayoutConfig& config);

}  // namespace grrw
