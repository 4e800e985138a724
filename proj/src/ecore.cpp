#include "grrw/ecore.hpp"

#include <filesystem>
#include <map>
#include <sstream>

namespace grrw {

namespace {

constexpr std::string_view kEcoreNs = "http://www.eclipse.org/emf/2002/Ecore";

enum class ClassifierKind { Class, Enum, DataType };

struct Classifier {
  ClassifierKind kind;
  std::string mangled;
};

std::string_view after_colon(std::string_view s) {
  auto colon = s.find(':');
  return colon == std::string_view::npos ? s : s.substr(colon + 1);
}

std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream in{std::string(s)};
  for (std::string tok; in >> tok;) out.push_back(tok);
  return out;
}

std::string attr_or(const xml::Element& el, std::string_view key, std::string fallback = {}) {
  const auto* v = el.attribute(key);
  return v ? *v : fallback;
}

// xsi:type of an Ecore element ("ecore:EAttribute" -> "EAttribute"); falls
// back to the tag name for elements like <ecore:EPackage>.
std::string_view ecore_kind(const xml::Element& el) {
  if (const auto* t = el.attribute("xsi:type")) return after_colon(*t);
  return el.local_name();
}

class Importer {
 public:
  Importer(std::span<const xml::Document> docs, Schema base, ImportReport* report)
      : docs_(docs), report_(report), builder_(std::move(base)) {}

  Schema run() && {
    for (std::size_t d = 0; d < docs_.size(); ++d) {
      for (const auto& [root, key] : roots(d)) register_package(d, *root, "", key);
    }
    for (std::size_t d = 0; d < docs_.size(); ++d) {
      for (const auto& [root, key] : roots(d)) import_package(d, *root, "", key);
    }
    return std::move(builder_).build();
  }

 private:
  std::vector<std::pair<const xml::Element*, std::vector<std::string>>> roots(std::size_t d) const {
    const auto& root = docs_[d].root;
    std::vector<std::pair<const xml::Element*, std::vector<std::string>>> out;
    if (root.local_name() == "EPackage") {
      out.push_back({&root, {"/", "/0"}});
      return out;
    }
    if (root.local_name() != "XMI") {
      throw ImportError(where(d, root) + "expected an EPackage root, found <" + root.name + ">");
    }
    std::size_t i = 0;
    for (const auto& child : root.children) {
      if (child.local_name() != "EPackage") {
        throw ImportError(where(d, child) + "unsupported Ecore root <" + child.name + ">");
      }
      std::vector<std::string> keys{"/" + std::to_string(i)};
      if (i == 0) keys.push_back("/");
      out.push_back({&child, std::move(keys)});
      ++i;
    }
    return out;
  }

  std::string where(std::size_t d, const xml::Element& el) const {
    return (docs_[d].source.empty() ? std::string("<input>") : docs_[d].source) + ":" +
           std::to_string(el.line) + ": ";
  }

  void warn(std::size_t d, const xml::Element& el, const std::string& msg) {
    if (report_) report_->warnings.push_back(where(d, el) + msg);
  }

  static std::string join(const std::string& prefix, const std::string& name) {
    return prefix.empty() ? name : prefix + "_" + name;
  }

  static std::string frag(const std::string& key, const std::string& path) {
    // key "/" + path "/X" gives "//X"; key "/1" gives "/1/X".
    return key + path;
  }

  // Pass 1: name every classifier so references may point forward.
  void register_package(std::size_t d, const xml::Element& pkg, const std::string& prefix,
                        const std::vector<std::string>& keys, const std::string& path = "") {
    const std::string name = attr_or(pkg, "name");
    if (name.empty()) throw ImportError(where(d, pkg) + "EPackage without a name");
    const std::string mangled = join(prefix, name);
    for (const auto& child : pkg.children) {
      const auto tag = child.local_name();
      if (tag == "eClassifiers") {
        const std::string cname = attr_or(child, "name");
        if (cname.empty()) throw ImportError(where(d, child) + "classifier without a name");
        const auto kind = ecore_kind(child);
        ClassifierKind ck;
        if (kind == "EClass") {
          ck = ClassifierKind::Class;
        } else if (kind == "EEnum") {
          ck = ClassifierKind::Enum;
        } else if (kind == "EDataType") {
          ck = ClassifierKind::DataType;
        } else {
          throw ImportError(where(d, child) + "unsupported classifier kind '" + std::string(kind) +
                            "'");
        }
        for (const auto& key : keys) {
          classifiers_[{d, frag(key, path + "/" + cname)}] = {ck, join(mangled, cname)};
        }
      } else if (tag == "eSubpackages") {
        register_package(d, child, mangled, keys, path + "/" + attr_or(child, "name"));
      }
    }
  }

  // Resolves an eType / eSuperTypes token. Returns nullptr for Ecore's own
  // datatypes, which are reported via `builtin`.
  const Classifier* resolve(std::size_t d, const xml::Element& at, std::string_view token,
                            std::string* builtin) {
    // Tokens look like "#//X", "other.ecore#//X" or, after an optional type
    // prefix, "http://www.eclipse.org/emf/2002/Ecore#//EString".
    auto hash = token.find('#');
    if (hash == std::string_view::npos) {
      throw ImportError(where(d, at) + "cannot resolve type reference '" + std::string(token) + "'");
    }
    const std::string_view file = token.substr(0, hash);
    const std::string fragment(token.substr(hash + 1));
    if (file == kEcoreNs) {
      if (!builtin) {
        throw ImportError(where(d, at) + "'" + std::string(token) + "' is not a class");
      }
      *builtin = fragment.starts_with("//") ? fragment.substr(2) : fragment;
      return nullptr;
    }
    std::size_t target = d;
    if (!file.empty()) {
      const auto want = std::filesystem::path(std::string(file)).filename();
      bool found = false;
      for (std::size_t i = 0; i < docs_.size(); ++i) {
        if (std::filesystem::path(docs_[i].source).filename() == want) {
          target = i;
          found = true;
          break;
        }
      }
      if (!found) {
        throw ImportError(where(d, at) + "reference into unknown document '" + std::string(file) +
                          "'");
      }
    }
    auto it = classifiers_.find({target, fragment});
    if (it == classifiers_.end()) {
      throw ImportError(where(d, at) + "unresolved type reference '" + std::string(token) + "'");
    }
    return &it->second;
  }

  // The referenced type is the last whitespace-separated token; the optional
  // first one ("ecore:EClass") only names the metaclass.
  static std::string type_token(std::string_view value) {
    auto toks = split_ws(value);
    return toks.empty() ? std::string() : toks.back();
  }

  ValueType attribute_type(std::size_t d, const xml::Element& feature) {
    const std::string* etype = feature.attribute("eType");
    ScalarType scalar{ScalarKind::String, {}};
    if (!etype) {
      warn(d, feature, "attribute '" + attr_or(feature, "name") + "' has no eType; using string");
    } else {
      std::string builtin;
      const auto* c = resolve(d, feature, type_token(*etype), &builtin);
      if (c == nullptr) {
        if (builtin == "EString") {
          scalar.kind = ScalarKind::String;
        } else if (builtin == "EInt" || builtin == "ELong") {
          scalar.kind = ScalarKind::Integer;
        } else if (builtin == "EBoolean") {
          scalar.kind = ScalarKind::Boolean;
        } else if (builtin == "EDouble" || builtin == "EFloat") {
          scalar.kind = ScalarKind::Double;
        } else {
          warn(d, feature, "datatype '" + builtin + "' mapped to string");
        }
      } else if (c->kind == ClassifierKind::Enum) {
        scalar = ScalarType{ScalarKind::Enum, c->mangled};
      } else if (c->kind == ClassifierKind::DataType) {
        warn(d, feature, "datatype '" + c->mangled + "' mapped to string");
      } else {
        throw ImportError(where(d, feature) + "attribute '" + attr_or(feature, "name") +
                          "' is typed by class '" + c->mangled + "'");
      }
    }
    const std::string upper = attr_or(feature, "upperBound", "1");
    if (upper == "-1" || upper == "-2" || (upper != "0" && upper != "1")) {
      return ValueType::array_of(scalar);
    }
    return ValueType{ContainerKind::None, scalar, {}};
  }

  // Pass 2: declarations.
  void import_package(std::size_t d, const xml::Element& pkg, const std::string& prefix,
                      const std::vector<std::string>& keys, const std::string& path = "") {
    const std::string mangled = join(prefix, attr_or(pkg, "name"));
    builder_.add_package(PackageInfo{mangled, attr_or(pkg, "nsURI"), attr_or(pkg, "nsPrefix")});
    for (const auto& [key, value] : pkg.attributes) {
      if (key != "name" && key != "nsURI" && key != "nsPrefix" && !key.starts_with("xmlns") &&
          !key.starts_with("xmi:") && !key.starts_with("xsi:")) {
        warn(d, pkg, "EPackage attribute '" + key + "' ignored");
      }
    }
    for (const auto& child : pkg.children) {
      const auto tag = child.local_name();
      if (tag == "eClassifiers") {
        const auto kind = ecore_kind(child);
        if (kind == "EClass") {
          import_class(d, child, mangled);
        } else if (kind == "EEnum") {
          import_enum(d, child, mangled);
        }
        // EDataType declarations only matter where attributes use them.
      } else if (tag == "eSubpackages") {
        import_package(d, child, mangled, keys, path + "/" + attr_or(child, "name"));
      } else if (tag != "eAnnotations") {
        throw ImportError(where(d, child) + "unsupported EPackage content <" + child.name + ">");
      }
    }
  }

  void import_enum(std::size_t d, const xml::Element& el, const std::string& prefix) {
    EnumDef def;
    def.name = join(prefix, attr_or(el, "name"));
    std::int64_t next = 0;
    for (const auto& lit : el.children) {
      if (lit.local_name() == "eAnnotations") continue;
      if (lit.local_name() != "eLiterals") {
        throw ImportError(where(d, lit) + "unsupported EEnum content <" + lit.name + ">");
      }
      std::int64_t value = next;
      if (const auto* v = lit.attribute("value")) {
        try {
          value = std::stoll(*v);
        } catch (const std::exception&) {
          throw ImportError(where(d, lit) + "bad literal value '" + *v + "'");
        }
      }
      def.items.emplace_back(attr_or(lit, "name"), value);
      next = value + 1;
    }
    builder_.add_enum(std::move(def));
  }

  void import_class(std::size_t d, const xml::Element& el, const std::string& prefix) {
    ClassDecl decl;
    decl.name = join(prefix, attr_or(el, "name"));
    decl.is_abstract = attr_or(el, "abstract") == "true" || attr_or(el, "interface") == "true";
    if (const auto* supers = el.attribute("eSuperTypes")) {
      for (const auto& tok : split_ws(*supers)) {
        if (tok.find('#') == std::string::npos) continue;  // metaclass prefix such as "ecore:EClass"
        const auto* c = resolve(d, el, tok, nullptr);
        if (c->kind != ClassifierKind::Class) {
          throw ImportError(where(d, el) + "supertype '" + tok + "' is not a class");
        }
        decl.supers.push_back(c->mangled);
      }
    }
    std::vector<ClassDecl> references;
    for (const auto& feature : el.children) {
      const auto tag = feature.local_name();
      if (tag == "eAnnotations") continue;
      if (tag == "eOperations") {
        warn(d, feature, "operation '" + attr_or(feature, "name") + "' of '" + decl.name +
                             "' ignored");
        continue;
      }
      if (tag != "eStructuralFeatures") {
        throw ImportError(where(d, feature) + "unsupported EClass content <" + feature.name + ">");
      }
      const std::string fname = attr_or(feature, "name");
      if (fname.empty()) throw ImportError(where(d, feature) + "feature without a name");
      for (const auto* ignored : {"defaultValueLiteral", "eOpposite"}) {
        if (feature.attribute(ignored)) {
          warn(d, feature, std::string(ignored) + " of '" + decl.name + "." + fname + "' ignored");
        }
      }
      for (const auto& sub : feature.children) {
        if (sub.local_name() != "eAnnotations") {
          throw ImportError(where(d, sub) + "unsupported feature content <" + sub.name + ">");
        }
      }
      const auto kind = ecore_kind(feature);
      if (kind == "EAttribute") {
        decl.attributes.push_back({fname, attribute_type(d, feature)});
      } else if (kind == "EReference") {
        const std::string* etype = feature.attribute("eType");
        if (!etype) throw ImportError(where(d, feature) + "reference '" + fname + "' has no eType");
        const auto* c = resolve(d, feature, type_token(*etype), nullptr);
        if (c->kind != ClassifierKind::Class) {
          throw ImportError(where(d, feature) + "reference '" + fname + "' targets non-class '" +
                            c->mangled + "'");
        }
        ClassDecl edge;
        edge.name = decl.name + "_" + fname;
        edge.source = decl.name;
        edge.target = c->mangled;
        edge.containment = attr_or(feature, "containment") == "true";
        references.push_back(std::move(edge));
      } else {
        throw ImportError(where(d, feature) + "unsupported feature kind '" + std::string(kind) + "'");
      }
    }
    builder_.add_node_class(std::move(decl));
    for (auto& r : references) builder_.add_edge_class(std::move(r));
  }

  std::span<const xml::Document> docs_;
  ImportReport* report_;
  SchemaBuilder builder_;
  std::map<std::pair<std::size_t, std::string>, Classifier> classifiers_;
};

}  // namespace

Schema import_ecore(std::span<const xml::Document> docs, Schema base, ImportReport* report) {
  try {
    return Importer(docs, std::move(base), report).run();
  } catch (const SchemaError& e) {
    throw ImportError(std::string("invalid metamodel: ") + e.what());
  }
}

Schema import_ecore(const xml::Document& doc, Schema base, ImportReport* report) {
  return import_ecore(std::span<const xml::Document>(&doc, 1), std::move(base), report);
}

}  // namespace grrw
