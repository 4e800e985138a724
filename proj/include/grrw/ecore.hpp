#pragma once

#include <span>
#include <string>
#include <vector>

#include "grrw/metamodel.hpp"
#include "grrw/xml.hpp"

namespace grrw {

// Non-fatal findings of an import (ignored constructs, unknown attributes,
// datatypes mapped to string).
struct ImportReport {
  std::vector<std::string> warnings;
};

// Maps Ecore packages onto a schema extending `base`:
//   EClass      -> node class <pkg>_<Class> (nested packages: <pkg>_<sub>_<Class>)
//   EAttribute  -> attribute with its plain name (many-valued -> array<T>)
//   EReference  -> edge class <OwnerClass>_<ref>, connect Owner -> Type,
//                  containment flag copied
//   EEnum       -> enum <pkg>_<Enum>
// Several documents may reference each other ("other.ecore#//X"); they are
// imported together. Throws ImportError for unresolved or unsupported input.
Schema import_ecore(std::span<const xml::Document> docs, Schema base = {},
                    ImportReport* report = nullptr);
Schema import_ecore(const xml::Document& doc, Schema base = {}, ImportReport* report = nullptr);

}  // namespace grrw
