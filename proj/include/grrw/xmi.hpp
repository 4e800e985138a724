#pragma once

#include <memory>
#include <ostream>
#include <string>

#include "grrw/ecore.hpp"
#include "grrw/graph.hpp"
#include "grrw/xml.hpp"

namespace grrw {

inline constexpr const char* kXmiNamespace = "http://www.omg.org/XMI";
inline constexpr const char* kXsiNamespace = "http://www.w3.org/2001/XMLSchema-instance";

// Imports an XMI instance document into `graph`. Element types come from the
// tag's namespace (matched against the schema's package URIs) or `xsi:type`;
// containment children become edges of the `<Owner>_<feature>` containment
// class; cross-references (space-separated lists of `xmi:id`s or positional
// paths such as `/0/@states.1` or `//@states.1`) are resolved in a second
// pass. Each node is named by its `xmi:id`, else by its canonical path.
// Unknown XML attributes are reported as warnings.
void import_xmi(Graph& graph, const xml::Document& doc, ImportReport* report = nullptr);
Graph import_xmi(const xml::Document& doc, std::shared_ptr<const Schema> schema,
                 ImportReport* report = nullptr);

// Writes the graph's single sm_StateMachine as XMI: states then transitions in
// the creation order of their containment edges, references as `/0/@states.N` paths. Byte-deterministic; the
// template is documented in docs/xmi-format.md.
void export_state_machine_xmi(const Graph& graph, std::ostream& out);
std::string export_state_machine_xmi(const Graph& graph);

// Writes the containment tree below `root` as an XMI document: one element
// per node (tag = containment feature, `xsi:type` = package-qualified class),
// scalar attributes that differ from their default as XML attributes,
// array/set attributes as repeated child elements, and cross-references
// (edges of Ecore reference classes) as `//@feature.i` paths. Edges of other
// classes (e.g. helper `link` edges) are not part of the document. Throws
// ExportError for references leaving the tree or map-valued attributes.
void export_xmi(const Graph& graph, NodeRef root, std::ostream& out);

}  // namespace grrw
