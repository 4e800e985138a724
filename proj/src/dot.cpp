#include "grrw/dot.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace grrw {

namespace {

// Splits a directive into words; double-quoted words may contain spaces and
// `\"` escapes; `key="..."` stays one word with the quotes removed. A word
// starting with `#` begins a comment.
std::vector<std::string> words(std::string_view line, const std::string& file, std::size_t lineno) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < line.size()) {
    if (line[i] == ' ' || line[i] == '\t' || line[i] == '\r') {
      ++i;
      continue;
    }
    if (line[i] == '#') break;  // comment
    std::string w;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') {
      if (line[i] == '"') {
        const std::size_t open = i++;
        while (i < line.size() && line[i] != '"') {
          if (line[i] == '\\' && i + 1 < line.size()) ++i;
          w += line[i++];
        }
        if (i >= line.size()) throw ParseError(file, lineno, open + 1, "unterminated string");
        ++i;
      } else {
        w += line[i++];
      }
    }
    out.push_back(std::move(w));
  }
  return out;
}

std::string dot_quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') {
      out += '\\';
      out += c;
    } else if (c == '\n') {
      out += "\\n";
    } else {
      out += c;
    }
  }
  return out + "\"";
}

class DotWriter {
 public:
  DotWriter(const Graph& g, const LayoutConfig& config, std::ostream& out)
      : g_(g), s_(g.schema()), config_(config), out_(out) {}

  void run() {
    for (ClassId c = 0; c < s_.class_count(); ++c) {
      const auto& info = s_.info(c);
      const auto& styles = info.kind == ElementKind::Node ? config_.node_styles : config_.edge_styles;
      if (auto it = styles.find(info.name); it != styles.end()) configured_[c] = &it->second;
      if (info.kind == ElementKind::Edge && config_.containment.contains(info.name)) {
        for (ClassId sub : s_.subtypes(c)) contain_cls_.insert(sub);
      }
    }

    const auto nodes = g_.nodes();
    for (ElemId n : nodes) {
      if (visible(n)) shown_.push_back(n);
    }
    // Each visible node nests under the source of its first containment edge.
    for (ElemId n : shown_) {
      for (ElemId e : g_.incoming(NodeRef{{n}})) {
        if (!contain_cls_.contains(g_.class_of(e)) || !visible(e)) continue;
        const ElemId parent = g_.source(EdgeRef{{e}}).id;
        if (parent == n || !visible(parent)) continue;
        parent_[n] = {parent, e};
        break;
      }
    }
    for (ElemId n : shown_) {
      if (auto it = parent_.find(n); it != parent_.end()) children_[it->second.first].push_back(n);
    }

    out_ << "digraph G {\n";
    for (ElemId n : shown_) {
      if (!parent_.contains(n)) emit_tree(n, 1);
    }
    // Nodes left over sit on containment cycles (or hang below one). Break
    // each cycle at the edge entering its oldest node.
    for (ElemId n : shown_) {
      if (placed_.contains(n)) continue;
      std::unordered_set<ElemId> seen;
      ElemId cur = n;
      while (seen.insert(cur).second) cur = parent_.at(cur).first;
      ElemId oldest = cur;
      for (ElemId c = parent_.at(cur).first; c != cur; c = parent_.at(c).first) {
        oldest = std::min(oldest, c);
      }
      const ElemId back = parent_.at(oldest).second;
      broken_.insert(back);
      emit_tree(oldest, 1);
    }
    for (ElemId e : g_.edges()) {
      if (!visible(e)) continue;
      const ElemId src = g_.source(EdgeRef{{e}}).id;
      const ElemId tgt = g_.target(EdgeRef{{e}}).id;
      if (!visible(src) || !visible(tgt)) continue;
      if (auto it = parent_.find(tgt); it != parent_.end() && it->second.second == e &&
                                       !broken_.contains(e)) {
        continue;  // drawn as nesting
      }
      if (broken_.contains(e)) {
        out_ << "  // warning: containment cycle broken at edge e" << e << " (n" << src << " -> n"
             << tgt << ")\n";
      }
      out_ << "  n" << src << " -> n" << tgt << " [";
      const auto style = resolve(e);
      out_ << "label=" << dot_quote(label(e, style.label.value_or("{$class}")));
      if (style.color) out_ << ", color=" << dot_quote(*style.color);
      out_ << "];\n";
    }
    out_ << "}\n";
  }

 private:
  ClassStyle resolve(ElemId id) const {
    ClassStyle merged;
    for (ClassId a : s_.ancestors(g_.class_of(id))) {
      auto it = configured_.find(a);
      if (it == configured_.end()) continue;
      const ClassStyle& st = *it->second;
      if (!merged.color) merged.color = st.color;
      if (!merged.shape) merged.shape = st.shape;
      if (!merged.label) merged.label = st.label;
      if (!merged.hidden) merged.hidden = st.hidden;
    }
    return merged;
  }

  bool visible(ElemId id) const { return !resolve(id).hidden.value_or(false); }

  std::string label(ElemId id, std::string_view tpl) const {
    std::string out;
    std::size_t i = 0;
    while (i < tpl.size()) {
      auto close = tpl.find('}', i);
      if (tpl[i] != '{' || close == std::string_view::npos) {
        out += tpl[i++];
        continue;
      }
      const std::string_view key = tpl.substr(i + 1, close - i - 1);
      if (key == "$class") {
        out += g_.class_name(id);
      } else if (key == "$id") {
        out += std::to_string(id);
      } else if (auto slot = s_.slot_index(g_.class_of(id), key)) {
        out += to_display(s_, g_.get_attr(ElementRef{id}, *slot));
      } else {
        out += tpl.substr(i, close - i + 1);
      }
      i = close + 1;
    }
    return out;
  }

  void node_line(ElemId n, int depth) {
    const auto style = resolve(n);
    out_ << std::string(depth * 2, ' ') << "n" << n << " [label="
         << dot_quote(label(n, style.label.value_or("{$id}:{$class}")));
    if (style.shape) out_ << ", shape=" << dot_quote(*style.shape);
    if (style.color) out_ << ", color=" << dot_quote(*style.color);
    out_ << "];\n";
  }

  void emit_tree(ElemId n, int depth) {
    placed_.insert(n);
    auto it = children_.find(n);
    std::vector<ElemId> kids;
    if (it != children_.end()) {
      for (ElemId c : it->second) {
        if (!placed_.contains(c)) kids.push_back(c);
      }
    }
    if (kids.empty()) {
      node_line(n, depth);
      return;
    }
    const std::string pad(depth * 2, ' ');
    const auto style = resolve(n);
    out_ << pad << "subgraph cluster_n" << n << " {\n";
    out_ << pad << "  label=" << dot_quote(label(n, style.label.value_or("{$id}:{$class}")))
         << ";\n";
    if (style.color) out_ << pad << "  color=" << dot_quote(*style.color) << ";\n";
    node_line(n, depth + 1);
    for (ElemId c : kids) {
      if (!placed_.contains(c)) emit_tree(c, depth + 1);
    }
    out_ << pad << "}\n";
  }

  const Graph& g_;
  const Schema& s_;
  const LayoutConfig& config_;
  std::ostream& out_;
  std::unordered_map<ClassId, const ClassStyle*> configured_;
  std::unordered_set<ClassId> contain_cls_;
  std::vector<ElemId> shown_;
  std::unordered_map<ElemId, std::pair<ElemId, ElemId>> parent_;  // node -> (container, edge)
  std::unordered_map<ElemId, std::vector<ElemId>> children_;
  std::unordered_set<ElemId> placed_;
  std::unordered_set<ElemId> broken_;
};

}  // namespace

LayoutConfig LayoutConfig::parse(std::string_view text, const std::string& file) {
  LayoutConfig config;
  std::size_t lineno = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    std::string_view line =
        text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++lineno;
    auto w = words(line, file, lineno);
    if (w.empty()) continue;
    if (w.size() < 2) throw ParseError(file, lineno, 1, "directive '" + w[0] + "' needs a class");
    if (w[0] == "contain") {
      if (w.size() != 2) throw ParseError(file, lineno, 1, "contain takes one edge class");
      config.containment.insert(w[1]);
      continue;
    }
    if (w[0] != "node" && w[0] != "edge") {
      throw ParseError(file, lineno, 1, "unknown directive '" + w[0] + "'");
    }
    ClassStyle& st = (w[0] == "node" ? config.node_styles : config.edge_styles)[w[1]];
    for (std::size_t i = 2; i < w.size(); ++i) {
      const auto& item = w[i];
      if (item == "hidden") {
        st.hidden = true;
        continue;
      }
      auto eq = item.find('=');
      if (eq == std::string::npos) throw ParseError(file, lineno, 1, "expected key=value, got '" + item + "'");
      const std::string key = item.substr(0, eq), value = item.substr(eq + 1);
      if (key == "color") {
        st.color = value;
      } else if (key == "shape" && w[0] == "node") {
        st.shape = value;
      } else if (key == "label") {
        st.label = value;
      } else {
        throw ParseError(file, lineno, 1, "unknown " + w[0] + " property '" + key + "'");
      }
    }
  }
  return config;
}

void LayoutConfig::validate(const Schema& schema) const {
  for (const auto& [name, style] : node_styles) {
    if (!schema.find_class(ElementKind::Node, name)) {
      throw SchemaError("layout: unknown node class '" + name + "'");
    }
  }
  for (const auto& [name, style] : edge_styles) {
    if (!schema.find_class(ElementKind::Edge, name)) {
      throw SchemaError("layout: unknown edge class '" + name + "'");
    }
  }
  for (const auto& name : containment) {
    if (!schema.find_class(ElementKind::Edge, name)) {
      throw SchemaError("layout: unknown containment edge class '" + name + "'");
    }
  }
}

void export_dot(const Graph& graph, const LayoutConfig& config, std::ostream& out) {
  DotWriter(graph, config, out).run();
}

std::string export_dot(const Graph& graph, const LayoutConfig& config) {
  std::ostringstream out;
  export_dot(graph, config, out);
  return out.str();
}

}  // namespace grrw
